//! Qutrit surfer clocks: a surfer `2` riding the domain wall of a line or a
//! cycle, and several cycles ("cogs") chained like the digits of a counter.
//!
//! Sites are 0-based in code; a cog of length `L` occupies `L` consecutive
//! qutrits and its wrap-around bond is `(L-1, 0)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::count::binomial;
use crate::error::{domain, Error, Result};
use crate::linalg::{dense_eigenvalues, dense_eigh, lanczos_lowest};
use crate::spin::{
    build_full, build_on_states, restrict, sector_decompose, LabeledSparseOperator, Term, TermKind,
};

/// Most qutrits built on the full space.
pub const MAX_FULL_QUTRITS: usize = 13;

fn check_qutrits(q: usize) -> Result<()> {
    if q > MAX_FULL_QUTRITS {
        return Err(Error::Size {
            dim: 3usize.saturating_pow(q as u32),
            cap: 3usize.pow(MAX_FULL_QUTRITS as u32),
        });
    }
    Ok(())
}

fn check_length(l: usize) -> Result<()> {
    if l < 3 {
        return domain(format!("surfer length {l} < 3"));
    }
    Ok(())
}

/// Check and move terms of a surfer on an open line.
pub fn surfer_line_terms(l: usize) -> Result<Vec<Term>> {
    check_length(l)?;
    let mut t = vec![
        Term::projector(1.0, vec![0], &[0]),
        Term::projector(1.0, vec![l - 1], &[1]),
    ];
    for i in 0..l - 1 {
        for p in [[0, 1], [1, 0], [2, 1], [0, 2], [2, 2]] {
            t.push(Term::projector(1.0, vec![i, i + 1], &p));
        }
    }
    for i in 0..l - 1 {
        t.push(Term::transition(1.0, vec![i, i + 1], &[2, 0], &[1, 2]));
    }
    Ok(t)
}

pub fn build_surfer_line(l: usize) -> Result<LabeledSparseOperator> {
    check_qutrits(l)?;
    build_full(3, l, &surfer_line_terms(l)?)
}

/// `1^k 2 0^(L-k-1)` for `k = 0..L`.
pub fn surfer_line_states(l: usize) -> Vec<Vec<u8>> {
    (0..l).map(|k| cycle_state(l, k)).collect()
}

/// Check terms of one cog starting at site `base`.
fn cycle_check_terms(l: usize, base: usize) -> Vec<Term> {
    let mut t = Vec::new();
    for p in [[0, 0], [1, 1], [2, 2]] {
        t.push(Term::projector(1.0, vec![base + l - 1, base], &p));
    }
    for i in 0..l - 1 {
        for p in [[0, 1], [1, 0], [2, 2]] {
            t.push(Term::projector(1.0, vec![base + i, base + i + 1], &p));
        }
    }
    t
}

/// One forward move of a cog: sites and the `(from, to)` digit pair.
#[derive(Debug, Clone, PartialEq)]
struct Move {
    sites: [usize; 2],
    from: [u8; 2],
    to: [u8; 2],
}

/// Forward moves of one cog other than the wrap `2|0 -> 0|2`.
fn cog_moves(l: usize, base: usize) -> Vec<Move> {
    let mut m = Vec::new();
    for i in 0..l - 1 {
        m.push(Move {
            sites: [base + i, base + i + 1],
            from: [2, 0],
            to: [1, 2],
        });
    }
    m.push(Move {
        sites: [base + l - 1, base],
        from: [2, 1],
        to: [1, 2],
    });
    for i in 0..l - 1 {
        m.push(Move {
            sites: [base + i, base + i + 1],
            from: [2, 1],
            to: [0, 2],
        });
    }
    m
}

fn wrap(l: usize, base: usize) -> Move {
    Move {
        sites: [base + l - 1, base],
        from: [2, 0],
        to: [0, 2],
    }
}

fn move_term(moves: &[Move]) -> Term {
    let sites: Vec<usize> = moves.iter().flat_map(|m| m.sites).collect();
    let from: Vec<u8> = moves.iter().flat_map(|m| m.from).collect();
    let to: Vec<u8> = moves.iter().flat_map(|m| m.to).collect();
    Term::transition(1.0, sites, &from, &to)
}

/// Check and move terms of a single surfer cycle.
pub fn surfer_cycle_terms(l: usize) -> Result<Vec<Term>> {
    check_length(l)?;
    let mut t = cycle_check_terms(l, 0);
    t.extend(
        cog_moves(l, 0)
            .iter()
            .map(|m| move_term(std::slice::from_ref(m))),
    );
    t.push(move_term(&[wrap(l, 0)]));
    Ok(t)
}

pub fn build_surfer_cycle(l: usize) -> Result<LabeledSparseOperator> {
    check_qutrits(l)?;
    build_full(3, l, &surfer_cycle_terms(l)?)
}

/// Single-surfer cycle state at position `p` in `0..2L`: `1^p 2 0..0` in the
/// first revolution, `0^(p-L) 2 1..1` in the second.
pub fn cycle_state(l: usize, p: usize) -> Vec<u8> {
    let (k, fill, rest) = if p < l { (p, 1, 0) } else { (p - l, 0, 1) };
    (0..l)
        .map(|i| {
            if i < k {
                fill
            } else if i == k {
                2
            } else {
                rest
            }
        })
        .collect()
}

/// Multicog behaviour after the last cog finishes its second revolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CogMode {
    /// The last cog stops; the legal states form a path.
    Stopped,
    /// All cogs wrap together; the legal states form a cycle.
    FreeRunning,
}

/// Terms for `c` synchronized cogs of length `l`.
///
/// Cog 1 moves freely except for its wrap. Every move of cog `m + 1`
/// happens together with the wraps of cogs `1..=m`.
pub fn multicog_terms(c: usize, l: usize, mode: CogMode) -> Result<Vec<Term>> {
    check_length(l)?;
    if c < 1 {
        return domain("multicog needs at least one cog");
    }
    let mut t = Vec::new();
    for m in 0..c {
        t.extend(cycle_check_terms(l, m * l));
    }
    for m in 0..c {
        let wraps: Vec<Move> = (0..m).map(|j| wrap(l, j * l)).collect();
        for mv in cog_moves(l, m * l) {
            let mut all = wraps.clone();
            all.push(mv);
            t.push(move_term(&all));
        }
    }
    if mode == CogMode::FreeRunning {
        let all: Vec<Move> = (0..c).map(|j| wrap(l, j * l)).collect();
        t.push(move_term(&all));
    }
    Ok(t)
}

/// Legal multicog states in clock order; cog 1 is the fastest digit.
pub fn multicog_states(c: usize, l: usize) -> Vec<Vec<u8>> {
    let radix = 2 * l;
    let total = radix.pow(c as u32);
    (0..total)
        .map(|t| {
            let mut s = Vec::with_capacity(c * l);
            let mut rem = t;
            for _ in 0..c {
                s.extend(cycle_state(l, rem % radix));
                rem /= radix;
            }
            s
        })
        .collect()
}

/// `N = (2L)^C` clock steps.
pub fn timestep_count(c: usize, l: usize) -> u64 {
    (2 * l as u64).pow(c as u32)
}

/// Multicog operator and its number of legal states.
///
/// Built on the full `3^(CL)` space when `full` is set, otherwise on the legal
/// states (which fails if any term leaves them).
pub fn build_multicog(
    c: usize,
    l: usize,
    mode: CogMode,
    full: bool,
) -> Result<(LabeledSparseOperator, u64)> {
    let terms = multicog_terms(c, l, mode)?;
    let n = timestep_count(c, l);
    let op = if full {
        check_qutrits(c * l)?;
        build_full(3, c * l, &terms)?
    } else {
        if n > crate::error::max_dim() as u64 {
            return Err(Error::Size {
                dim: n as usize,
                cap: crate::error::max_dim(),
            });
        }
        build_on_states(3, c * l, &multicog_states(c, l), &terms)?
    };
    Ok((op, n))
}

/// Indices of `states` in a full-space operator on `3^sites`.
pub fn full_indices(states: &[Vec<u8>]) -> Vec<usize> {
    states
        .iter()
        .map(|s| crate::spin::digits_index(s, 3))
        .collect()
}

/// Number of terms acting on the wrap-around qutrit `L` of cog 1.
pub fn boundary_degree(c: usize, l: usize, mode: CogMode) -> Result<usize> {
    Ok(multicog_terms(c, l, mode)?
        .iter()
        .filter(|t| t.sites.contains(&(l - 1)))
        .count())
}

/// Path Laplacian on `m` vertices.
pub fn path_laplacian(m: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m.saturating_sub(1) {
        h[(i, i)] += 1.0;
        h[(i + 1, i + 1)] += 1.0;
        h[(i, i + 1)] = -1.0;
        h[(i + 1, i)] = -1.0;
    }
    h
}

/// Cycle Laplacian on `m >= 3` vertices.
pub fn cycle_laplacian(m: usize) -> DMatrix<f64> {
    let mut h = path_laplacian(m);
    h[(0, 0)] += 1.0;
    h[(m - 1, m - 1)] += 1.0;
    h[(0, m - 1)] = -1.0;
    h[(m - 1, 0)] = -1.0;
    h
}

/// Second eigenvalue of the path or cycle Laplacian on `m` vertices.
pub fn walk_gap(m: usize, cycle: bool) -> f64 {
    let angle = if cycle {
        2.0 * PI / m as f64
    } else {
        PI / m as f64
    };
    2.0 - 2.0 * angle.cos()
}

fn surfers(label: &str) -> i64 {
    label.bytes().filter(|&b| b == b'2').count() as i64
}

fn lowest_two(h: &DMatrix<f64>) -> Result<(f64, f64)> {
    let m = h.nrows();
    if m == 1 {
        return Ok((h[(0, 0)], f64::INFINITY));
    }
    if m <= 1500 {
        let e = dense_eigenvalues(h)?;
        return Ok((e[0], e[1]));
    }
    let r = lanczos_lowest(
        |x, y| y.copy_from_slice((h * nalgebra::DVector::from_column_slice(x)).as_slice()),
        m,
        2,
        1e-10,
        3,
    )?;
    Ok((r.values[0], r.values[1]))
}

/// Lowest eigenvalue in each surfer-number sector of the surfer cycle.
pub fn sector_minima(l: usize) -> Result<Vec<(usize, f64)>> {
    let op = build_surfer_cycle(l)?;
    sector_decompose(&op, surfers)?
        .into_iter()
        .map(|s| Ok((s.key as usize, lowest_two(&restrict(&op, &s.indices)?)?.0)))
        .collect()
}

/// `k`-subsets of a cycle of `l` sites with no two members adjacent, by
/// enumeration.
pub fn count_non_adjacent_cycle(l: usize, k: usize) -> u64 {
    if k > l {
        return 0;
    }
    let mask = (1u64 << l) - 1;
    (0u64..1 << l)
        .filter(|&m| m.count_ones() as usize == k && m & (((m << 1) | (m >> (l - 1))) & mask) == 0)
        .count() as u64
}

/// `(L / (L - k)) C(L - k, k)` for `k < L`, and 0 at `k = L`.
pub fn non_adjacent_closed_form(l: usize, k: usize) -> u64 {
    if k >= l {
        return 0;
    }
    binomial(l - k, k) * l as u64 / (l - k) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBound {
    pub l: usize,
    pub k: usize,
    pub all: u64,
    pub no22: u64,
    /// `sqrt(no22 / all)`.
    pub cos_theta: f64,
    pub sin2_half: f64,
    /// Cosine of the angle between the two null spaces, computed directly.
    pub cos_theta_exact: f64,
    /// Smallest nonzero eigenvalue of the sector without the `22` terms.
    pub lambda1_rest: f64,
    /// `min(1, lambda1_rest) * sin^2(theta / 2)` with the exact angle.
    pub bound: f64,
    /// Lowest eigenvalue of the whole sector.
    pub lowest: f64,
}

/// Angle bound on the `k`-surfer sector of the surfer cycle, `k` odd.
pub fn sector_angle_bound(l: usize, k: usize) -> Result<SectorBound> {
    if k % 2 == 0 || k == 0 || k > l {
        return domain(format!("k={k} must be odd and at most L={l}"));
    }
    let terms = surfer_cycle_terms(l)?;
    check_qutrits(l)?;
    let is22 =
        |t: &Term| matches!(&t.kind, TermKind::Projector { pattern } if pattern == &vec![2, 2]);
    let rest: Vec<Term> = terms.iter().filter(|t| !is22(t)).cloned().collect();
    let h22: Vec<Term> = terms.iter().filter(|t| is22(t)).cloned().collect();
    let full_rest = build_full(3, l, &rest)?;
    let full_22 = build_full(3, l, &h22)?;
    let sector = sector_decompose(&full_rest, surfers)?
        .into_iter()
        .find(|s| s.key == k as i64)
        .ok_or_else(|| Error::Inconsistent(format!("no {k}-surfer sector")))?;
    let hr = restrict(&full_rest, &sector.indices)?;
    let h2 = restrict(&full_22, &sector.indices)?;
    let er = dense_eigh(&hr)?;
    let null_tol = 1e-9;
    let null: Vec<usize> = (0..er.values.len())
        .filter(|&i| er.values[i] < null_tol)
        .collect();
    let lambda1_rest = er
        .values
        .iter()
        .copied()
        .find(|&v| v >= null_tol)
        .unwrap_or(f64::INFINITY);
    // Null space of the 22 terms is spanned by basis states without 22.
    let free: Vec<usize> = (0..sector.indices.len())
        .filter(|&i| h2[(i, i)] == 0.0)
        .collect();
    let cos_theta_exact = if null.is_empty() || free.is_empty() {
        0.0
    } else {
        let block = DMatrix::from_fn(free.len(), null.len(), |a, b| {
            er.vectors[(free[a], null[b])]
        });
        block.singular_values().max()
    };
    let all = binomial(l, k);
    let no22 = count_non_adjacent_cycle(l, k);
    let cos_theta = (no22 as f64 / all as f64).sqrt();
    let lowest = dense_eigenvalues(&(&hr + &h2))?[0];
    let bound = if null.is_empty() {
        er.values[0]
    } else {
        lambda1_rest.min(1.0) * (1.0 - cos_theta_exact) / 2.0
    };
    Ok(SectorBound {
        l,
        k,
        all,
        no22,
        cos_theta,
        sin2_half: (1.0 - cos_theta) / 2.0,
        cos_theta_exact,
        lambda1_rest,
        bound,
        lowest,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegalCheck {
    pub states: usize,
    /// Largest entry of `H|legal - walk Laplacian`.
    pub deviation: f64,
    pub gap: f64,
    pub expected_gap: f64,
}

/// Compares a legal restriction with the walk Laplacian it should equal.
pub fn compare_with_walk(restricted: &DMatrix<f64>, cycle: bool) -> Result<LegalCheck> {
    let m = restricted.nrows();
    let walk = if cycle {
        cycle_laplacian(m)
    } else {
        path_laplacian(m)
    };
    let (e0, e1) = lowest_two(restricted)?;
    Ok(LegalCheck {
        states: m,
        deviation: (restricted - walk).amax(),
        gap: e1 - e0,
        expected_gap: walk_gap(m, cycle),
    })
}

/// Legal restriction of the surfer line, in surfer-position order.
pub fn surfer_line_legal(l: usize) -> Result<DMatrix<f64>> {
    let op = build_surfer_line(l)?;
    restrict(&op, &full_indices(&surfer_line_states(l)))
}

/// Legal restriction of the surfer cycle, in position order `0..2L`.
pub fn surfer_cycle_legal(l: usize) -> Result<DMatrix<f64>> {
    let op = build_surfer_cycle(l)?;
    let states: Vec<Vec<u8>> = (0..2 * l).map(|p| cycle_state(l, p)).collect();
    restrict(&op, &full_indices(&states))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_states_for_three() {
        let s: Vec<String> = (0..6)
            .map(|p| {
                cycle_state(3, p)
                    .iter()
                    .map(|d| char::from(b'0' + d))
                    .collect()
            })
            .collect();
        assert_eq!(s, ["200", "120", "112", "211", "021", "002"]);
    }

    #[test]
    fn non_adjacent_counts_agree() {
        for l in 3..12 {
            for k in 0..=l {
                assert_eq!(
                    count_non_adjacent_cycle(l, k),
                    non_adjacent_closed_form(l, k),
                    "l={l} k={k}"
                );
            }
        }
    }

    #[test]
    fn rejects_short_cogs() {
        assert!(surfer_line_terms(2).is_err());
        assert!(sector_angle_bound(5, 2).is_err());
    }
}
