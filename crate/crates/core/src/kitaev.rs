//! Invariant-subspace analysis of the clock-plus-penalty Hamiltonian
//! `H_prop + |0><0| ⊗ P + |N><N| ⊗ Π⁰_out` for a verifier circuit.
//!
//! `P` penalizes ancillas that are not initialized to 0, `Q = U† Π⁰_out U`
//! penalizes rejection. The pair splits the data space into 1D and 2D common
//! invariant subspaces, and each one yields a small walk Hamiltonian.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::feynman::{build_propagation, Circuit};
use crate::linalg::{dense_eigenvalues, hermitian_eigh};
use crate::walk::{shifted_walk, WalkSpec};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

/// Eigenvalues of P or Q closer than this to 0 or 1 are treated as exact.
pub const DEMOTE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Verifier {
    pub circuit: Circuit,
    pub ancillas: Vec<usize>,
    pub output: usize,
}

impl Verifier {
    pub fn new(circuit: Circuit, ancillas: Vec<usize>, output: usize) -> Result<Self> {
        let d = circuit.qubits;
        if output >= d || ancillas.iter().any(|&a| a >= d) {
            return Err(Error::Index(format!(
                "ancillas {ancillas:?} / output {output} with {d} qubits"
            )));
        }
        Ok(Self {
            circuit,
            ancillas,
            output,
        })
    }

    fn bit(&self, state: usize, qubit: usize) -> usize {
        (state >> (self.circuit.qubits - 1 - qubit)) & 1
    }

    /// Data states with every ancilla at 0.
    pub fn proper_states(&self) -> Vec<usize> {
        (0..self.circuit.data_dim())
            .filter(|&s| self.ancillas.iter().all(|&a| self.bit(s, a) == 0))
            .collect()
    }

    /// `I - |0...0><0...0|` on the ancillas.
    pub fn p_matrix(&self) -> CMat {
        let k = self.circuit.data_dim();
        let proper = self.proper_states();
        CMat::from_fn(k, k, |i, j| {
            if i == j && !proper.contains(&i) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Projector on output qubit `out = 0`.
    pub fn reject_projector(&self) -> CMat {
        let k = self.circuit.data_dim();
        CMat::from_fn(k, k, |i, j| {
            Complex64::new(
                if i == j && self.bit(i, self.output) == 0 {
                    1.0
                } else {
                    0.0
                },
                0.0,
            )
        })
    }

    /// `U† Π⁰_out U`.
    pub fn q_matrix(&self) -> CMat {
        let u = self.circuit.total_unitary();
        u.adjoint() * self.reject_projector() * u
    }

    /// Probability that the output reads 1 for the given input.
    pub fn acceptance(&self, input: &CVec) -> f64 {
        let phi = self.circuit.total_unitary() * input / Complex64::new(input.norm(), 0.0);
        phi.iter()
            .enumerate()
            .filter(|(i, _)| self.bit(*i, self.output) == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Largest acceptance over inputs with initialized ancillas.
    pub fn max_acceptance(&self) -> Result<f64> {
        let proper = self.proper_states();
        let q = self.q_matrix();
        let m = CMat::from_fn(proper.len(), proper.len(), |i, j| q[(proper[i], proper[j])]);
        let e = hermitian_eigh(&m)?;
        Ok((1.0 - e.values[0]).clamp(0.0, 1.0))
    }

    /// The full Hamiltonian in the plain clock ⊗ data basis.
    pub fn full_hamiltonian(&self) -> Result<CMat> {
        let mut h = build_propagation(&self.circuit)?;
        let k = self.circuit.data_dim();
        let n = self.circuit.steps();
        let p = self.p_matrix();
        let r = self.reject_projector();
        for i in 0..k {
            for j in 0..k {
                h[(i, j)] += p[(i, j)];
                h[(n * k + i, n * k + j)] += r[(i, j)];
            }
        }
        Ok(h)
    }
}

/// Invariant-subspace type by the eigenvalues of `(P, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockCase {
    /// P = 0, Q = 0: a properly initialized, always accepted input.
    Accepting,
    /// P = 0, Q = 1.
    Rejecting,
    /// P = 1, Q = 0.
    BadAncillaAccepting,
    /// P = 1, Q = 1.
    BadAncillaRejecting,
    /// Two-dimensional, spanned by `v` (P v = 0) and `v_perp` (P v_perp = v_perp).
    Coupled,
}

#[derive(Debug, Clone)]
pub struct JordanBlock {
    pub case: BlockCase,
    /// Acceptance probability `1 - <v|Q|v>` of the kernel vector (coupled blocks only).
    pub p_v: f64,
    pub v: CVec,
    pub v_perp: Option<CVec>,
}

/// Splits the data space into common invariant subspaces of P and Q.
pub fn jordan_decompose(verifier: &Verifier) -> Result<Vec<JordanBlock>> {
    jordan_decompose_projectors(&verifier.p_matrix(), &verifier.q_matrix())
}

/// Joint invariant subspaces of two Hermitian projectors.
///
/// Kernel vectors of P are the eigenvectors of Q compressed to that kernel.
/// A kernel vector with `<v|Q|v> = mu` strictly between 0 and 1 has the
/// partner `(Q - mu) v / sqrt(mu (1 - mu))` in the range of P, which makes
/// `<v|Q|v_perp> = sqrt(mu (1 - mu))` real and positive.
pub fn jordan_decompose_projectors(p: &CMat, q: &CMat) -> Result<Vec<JordanBlock>> {
    let k = p.nrows();
    if p.ncols() != k || q.shape() != (k, k) {
        return domain("projectors must be square and of equal size");
    }
    for (name, m) in [("P", p), ("Q", q)] {
        let dev = (m * m - m).norm().max((m - m.adjoint()).norm());
        if dev > 1e-8 {
            return domain(format!(
                "{name} is not a Hermitian projector (deviation {dev:.1e})"
            ));
        }
    }
    let pe = hermitian_eigh(p)?;
    let kernel: Vec<usize> = (0..k).filter(|&c| pe.values[c] < 0.5).collect();
    let range: Vec<usize> = (0..k).filter(|&c| pe.values[c] >= 0.5).collect();
    let columns = |cols: &[usize]| CMat::from_fn(k, cols.len(), |i, j| pe.vectors[(i, cols[j])]);

    let mut blocks = Vec::new();
    let mut partners: Vec<CVec> = Vec::new();
    let kb = columns(&kernel);
    let ke = hermitian_eigh(&(kb.adjoint() * q * &kb))?;
    for (c, &mu) in ke.values.iter().enumerate() {
        let v: CVec = &kb * ke.vectors.column(c);
        let p_v = (1.0 - mu).clamp(0.0, 1.0);
        if p_v < DEMOTE_TOL {
            blocks.push(JordanBlock {
                case: BlockCase::Rejecting,
                p_v,
                v,
                v_perp: None,
            });
        } else if p_v > 1.0 - DEMOTE_TOL {
            blocks.push(JordanBlock {
                case: BlockCase::Accepting,
                p_v,
                v,
                v_perp: None,
            });
        } else {
            let w = q * &v - &v * Complex64::new(mu, 0.0);
            let v_perp = w / Complex64::new((mu * (1.0 - mu)).sqrt(), 0.0);
            partners.push(v_perp.clone());
            blocks.push(JordanBlock {
                case: BlockCase::Coupled,
                p_v,
                v,
                v_perp: Some(v_perp),
            });
        }
    }

    if range.len() > partners.len() {
        // Range of P minus the partners, then diagonalize Q there.
        let rb = columns(&range);
        let mut proj = &rb * rb.adjoint();
        for w in &partners {
            proj -= w * w.adjoint();
        }
        let re = hermitian_eigh(&proj)?;
        let cols: Vec<usize> = (0..k).filter(|&c| re.values[c] > 0.5).collect();
        let basis = CMat::from_fn(k, cols.len(), |i, j| re.vectors[(i, cols[j])]);
        let qe = hermitian_eigh(&(basis.adjoint() * q * &basis))?;
        for (c, &lam) in qe.values.iter().enumerate() {
            let v = &basis * qe.vectors.column(c);
            let case = if lam < DEMOTE_TOL {
                BlockCase::BadAncillaAccepting
            } else if lam > 1.0 - DEMOTE_TOL {
                BlockCase::BadAncillaRejecting
            } else {
                return Err(Error::Inconsistent(format!(
                    "Q eigenvalue {lam} left over in the range of P"
                )));
            };
            blocks.push(JordanBlock {
                case,
                p_v: f64::NAN,
                v,
                v_perp: None,
            });
        }
    }
    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    if total != k {
        return Err(Error::Inconsistent(format!(
            "blocks cover {total} of {k} dimensions"
        )));
    }
    Ok(blocks)
}

impl JordanBlock {
    pub fn dim(&self) -> usize {
        if self.case == BlockCase::Coupled {
            2
        } else {
            1
        }
    }

    /// `(P, Q)` restricted to the block, in the basis `v` or `(v, v_perp)`.
    pub fn local_projectors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let one = |x: f64| DMatrix::from_element(1, 1, x);
        match self.case {
            BlockCase::Accepting => (one(0.0), one(0.0)),
            BlockCase::Rejecting => (one(0.0), one(1.0)),
            BlockCase::BadAncillaAccepting => (one(1.0), one(0.0)),
            BlockCase::BadAncillaRejecting => (one(1.0), one(1.0)),
            BlockCase::Coupled => {
                let p = self.p_v;
                let s = (p * (1.0 - p)).sqrt();
                (
                    DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
                    DMatrix::from_row_slice(2, 2, &[1.0 - p, s, s, p]),
                )
            }
        }
    }

    fn basis(&self) -> Vec<&CVec> {
        let mut b = vec![&self.v];
        b.extend(self.v_perp.as_ref());
        b
    }
}

impl BlockCase {
    /// `1..=4` for the one-dimensional cases, ordered by `(P, Q)` eigenvalues
    /// `(0,0), (0,1), (1,0), (1,1)`.
    pub fn number(self) -> Option<u8> {
        match self {
            BlockCase::Accepting => Some(1),
            BlockCase::Rejecting => Some(2),
            BlockCase::BadAncillaAccepting => Some(3),
            BlockCase::BadAncillaRejecting => Some(4),
            BlockCase::Coupled => None,
        }
    }
}

/// Rebuilds `(P, Q)` from the block bases and their local projectors.
pub fn reassemble(blocks: &[JordanBlock], dim: usize) -> (CMat, CMat) {
    let mut p = CMat::zeros(dim, dim);
    let mut q = CMat::zeros(dim, dim);
    for b in blocks {
        let basis = b.basis();
        let (lp, lq) = b.local_projectors();
        for (i, x) in basis.iter().enumerate() {
            for (j, y) in basis.iter().enumerate() {
                let outer = *x * y.adjoint();
                p += &outer * Complex64::new(lp[(i, j)], 0.0);
                q += &outer * Complex64::new(lq[(i, j)], 0.0);
            }
        }
    }
    (p, q)
}

/// Walk Hamiltonian of one invariant subspace for a circuit of `n` steps.
///
/// Coupled blocks are ordered `v_0 .. v_N, v⊥_N .. v⊥_0`.
pub fn block_hamiltonian(block: &JordanBlock, n: usize) -> Result<DMatrix<f64>> {
    let walk = |l: f64, r: f64| -> Result<DMatrix<f64>> {
        Ok(shifted_walk(&WalkSpec::new(n, l, r)?, 2.0)?.to_dense())
    };
    match block.case {
        BlockCase::Accepting => walk(1.0, 1.0),
        BlockCase::Rejecting => walk(1.0, 0.0),
        BlockCase::BadAncillaAccepting => walk(0.0, 1.0),
        BlockCase::BadAncillaRejecting => walk(0.0, 0.0),
        BlockCase::Coupled => {
            let half = walk(1.0, 0.0)?;
            let m = n + 1;
            let mut h = DMatrix::zeros(2 * m, 2 * m);
            h.view_mut((0, 0), (m, m)).copy_from(&half);
            h.view_mut((m, m), (m, m)).copy_from(&half);
            // Q on (v_N, v⊥_N) is |v><v| - sqrt(p)(sqrt(p) Z - sqrt(1-p) X).
            let p = block.p_v;
            let s = (p * (1.0 - p)).sqrt();
            h[(n, n)] -= p;
            h[(m, m)] += p;
            h[(n, m)] += s;
            h[(m, n)] += s;
            Ok(h)
        }
    }
}

/// Sorted union of all block spectra.
pub fn block_spectrum(verifier: &Verifier) -> Result<Vec<f64>> {
    let n = verifier.circuit.steps();
    let mut all = Vec::new();
    for b in jordan_decompose(verifier)? {
        all.extend(dense_eigenvalues(&block_hamiltonian(&b, n)?)?);
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Largest deviation between the block spectra and a direct diagonalization.
pub fn full_cross_check(verifier: &Verifier) -> Result<f64> {
    let full = hermitian_eigh(&verifier.full_hamiltonian()?)?.values;
    let blocks = block_spectrum(verifier)?;
    if full.len() != blocks.len() {
        return Err(Error::Inconsistent(format!(
            "{} vs {} eigenvalues",
            full.len(),
            blocks.len()
        )));
    }
    Ok(full
        .iter()
        .zip(&blocks)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Ground energy of `2I + H^(1,0)_N`, the rejecting 1D block.
pub fn rejecting_block_floor(n: usize) -> f64 {
    2.0 - 2.0 * (PI / (2.0 * n as f64 + 3.0)).cos()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockBound {
    pub case: BlockCase,
    pub p_v: Option<f64>,
    pub lowest: f64,
    /// Analytic lower bound for this block.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoCaseReport {
    pub n: usize,
    pub soundness: f64,
    pub max_acceptance: f64,
    pub ground_energy: f64,
    pub blocks: Vec<BlockBound>,
}

/// Lowest energy over all blocks of a no-instance with soundness `epsilon`.
///
/// 1D blocks are bounded by the exact walk ground energies; a coupled block
/// by the rejecting floor minus the norm `sqrt(p_v)` of its coupling.
pub fn block_lower_bound(verifier: &Verifier, epsilon: f64) -> Result<NoCaseReport> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Range(format!("soundness {epsilon} outside [0, 1)")));
    }
    let n = verifier.circuit.steps();
    let blocks = jordan_decompose(verifier)?;
    if blocks.iter().any(|b| b.case == BlockCase::Accepting) {
        return Err(Error::Case1);
    }
    let max_acceptance = verifier.max_acceptance()?;
    if max_acceptance > epsilon + 1e-12 {
        return Err(Error::NotNoInstance(format!(
            "an input is accepted with probability {max_acceptance}"
        )));
    }
    let floor = rejecting_block_floor(n);
    let mut out = Vec::new();
    for b in &blocks {
        let lowest = dense_eigenvalues(&block_hamiltonian(b, n)?)?[0];
        let bound = match b.case {
            BlockCase::Rejecting | BlockCase::BadAncillaAccepting => floor,
            BlockCase::BadAncillaRejecting => 2.0 - 2.0 * (PI / (n as f64 + 2.0)).cos(),
            BlockCase::Coupled => floor - b.p_v.sqrt(),
            BlockCase::Accepting => 0.0,
        };
        out.push(BlockBound {
            case: b.case,
            p_v: (b.case == BlockCase::Coupled).then_some(b.p_v),
            lowest,
            bound,
        });
    }
    let ground_energy = out.iter().map(|b| b.lowest).fold(f64::INFINITY, f64::min);
    Ok(NoCaseReport {
        n,
        soundness: epsilon,
        max_acceptance,
        ground_energy,
        blocks: out,
    })
}

/// `<hist|H|hist>` for the history state of `witness`.
pub fn history_energy(verifier: &Verifier, witness: &CVec) -> Result<f64> {
    let hist = crate::feynman::history_state(&verifier.circuit, witness)?;
    let h = verifier.full_hamiltonian()?;
    Ok((hist.adjoint() * h * &hist)[(0, 0)].re)
}

/// Verifier on one qubit that is both ancilla and output and is rotated so
/// that it accepts with probability `p`, followed by `n - 1` idle steps.
pub fn rotation_verifier(n: usize, p: f64) -> Result<Verifier> {
    toy_verifier(1, n, p)
}

/// Toy verifier on `d <= 3` qubits accepting every initialized input with
/// probability exactly `p`.
///
/// Qubit 0 is ancilla and output and gets `Ry` with `sin^2(theta/2) = p`.
/// The last qubit is a free input that gets scrambled; for `d = 3` qubit 1 is
/// a second ancilla that the scrambling entangles and then releases. The
/// accepting probability never depends on the input. Remaining steps idle.
pub fn toy_verifier(d: usize, n: usize, p: f64) -> Result<Verifier> {
    use crate::feynman::{ry, Gate};
    if !(0.0..=1.0).contains(&p) || !(1..=3).contains(&d) {
        return domain(format!("toy verifier with d={d}, p={p}"));
    }
    let mut gates = vec![Gate::custom(ry(2.0 * p.sqrt().asin()), vec![0])];
    if d >= 2 {
        let last = d - 1;
        gates.push(Gate::named("H", vec![last])?);
        if d == 3 {
            gates.push(Gate::named("CNOT", vec![last, 1])?);
        }
        gates.push(Gate::named("X", vec![last])?);
        if d == 3 {
            gates.push(Gate::named("CNOT", vec![last, 1])?);
        }
    }
    if gates.len() > n {
        return domain(format!("{} gates do not fit in {n} steps", gates.len()));
    }
    while gates.len() < n {
        gates.push(Gate::named("I", vec![0])?);
    }
    let ancillas = if d == 3 { vec![0, 1] } else { vec![0] };
    Verifier::new(Circuit::new(d, gates)?, ancillas, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_reject_all_has_only_1d_blocks() {
        let v = Verifier::new(Circuit::identity(1, 3).unwrap(), vec![0], 0).unwrap();
        let blocks = jordan_decompose(&v).unwrap();
        let cases: Vec<BlockCase> = blocks.iter().map(|b| b.case).collect();
        assert_eq!(
            cases,
            vec![BlockCase::Rejecting, BlockCase::BadAncillaAccepting]
        );
        let rep = block_lower_bound(&v, 0.0).unwrap();
        assert!((rep.ground_energy - rejecting_block_floor(3)).abs() < 1e-12);
    }

    #[test]
    fn coupled_block_at_zero_coupling_splits() {
        let b = JordanBlock {
            case: BlockCase::Coupled,
            p_v: 0.0,
            v: CVec::zeros(1),
            v_perp: None,
        };
        let h = block_hamiltonian(&b, 4).unwrap();
        let e = dense_eigenvalues(&h).unwrap();
        let half = dense_eigenvalues(
            &shifted_walk(&WalkSpec::new(4, 1.0, 0.0).unwrap(), 2.0)
                .unwrap()
                .to_dense(),
        )
        .unwrap();
        for (k, x) in e.iter().enumerate() {
            assert!((x - half[k / 2]).abs() < 1e-12);
        }
    }

    #[test]
    fn accepting_instance_is_case_one() {
        let v = Verifier::new(Circuit::identity(1, 2).unwrap(), vec![], 0).unwrap();
        assert!(matches!(block_lower_bound(&v, 0.1), Err(Error::Case1)));
    }
}
