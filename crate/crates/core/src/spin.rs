//! Sparse operators on qubit and qutrit chains, built from local pattern terms.
//!
//! Basis states are digit strings read left to right with site 0 as the most
//! significant digit, so `"0110"` is index 6 for qubits.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Error, Result};
use crate::linalg::Csr;

/// A local term on `sites`. Patterns list one digit per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TermKind {
    /// `coeff |p><p|`.
    Projector { pattern: Vec<u8> },
    /// `coeff (|from> - |to>)(<from| - <to|)`.
    Transition { from: Vec<u8>, to: Vec<u8> },
    /// `coeff (|to><from| + |from><to|)`.
    Hop { from: Vec<u8>, to: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub sites: Vec<usize>,
    pub kind: TermKind,
}

impl Term {
    pub fn projector(coeff: f64, sites: Vec<usize>, pattern: &[u8]) -> Self {
        Self {
            coeff,
            sites,
            kind: TermKind::Projector {
                pattern: pattern.to_vec(),
            },
        }
    }

    pub fn transition(coeff: f64, sites: Vec<usize>, from: &[u8], to: &[u8]) -> Self {
        Self {
            coeff,
            sites,
            kind: TermKind::Transition {
                from: from.to_vec(),
                to: to.to_vec(),
            },
        }
    }

    pub fn hop(coeff: f64, sites: Vec<usize>, from: &[u8], to: &[u8]) -> Self {
        Self {
            coeff,
            sites,
            kind: TermKind::Hop {
                from: from.to_vec(),
                to: to.to_vec(),
            },
        }
    }

    fn patterns(&self) -> (&[u8], &[u8]) {
        match &self.kind {
            TermKind::Projector { pattern } => (pattern, pattern),
            TermKind::Transition { from, to } | TermKind::Hop { from, to } => (from, to),
        }
    }
}

fn digits_str(d: &[u8]) -> String {
    d.iter().map(|x| char::from(b'0' + x)).collect()
}

/// `coeff : bra-pattern -> ket-pattern @ sites`, sites 1-based.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.patterns();
        let kind = match self.kind {
            TermKind::Projector { .. } => "proj",
            TermKind::Transition { .. } => "move",
            TermKind::Hop { .. } => "hop",
        };
        let sites: Vec<String> = self.sites.iter().map(|s| (s + 1).to_string()).collect();
        write!(
            f,
            "{:+} : {} -> {} @ {} [{}]",
            self.coeff,
            digits_str(a),
            digits_str(b),
            sites.join(","),
            kind
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Labels {
    /// All `radix^sites` digit strings in index order.
    Digits {
        radix: u8,
        sites: usize,
    },
    Explicit(Vec<String>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Digits { radix, sites } => (*radix as usize).pow(*sites as u32),
            Labels::Explicit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            Labels::Digits { radix, sites } => digits_str(&index_digits(i, *radix, *sites)),
            Labels::Explicit(v) => v[i].clone(),
        }
    }
}

pub fn index_digits(mut i: usize, radix: u8, sites: usize) -> Vec<u8> {
    let mut d = vec![0u8; sites];
    for k in (0..sites).rev() {
        d[k] = (i % radix as usize) as u8;
        i /= radix as usize;
    }
    d
}

pub fn digits_index(d: &[u8], radix: u8) -> usize {
    d.iter()
        .fold(0, |acc, &x| acc * radix as usize + x as usize)
}

pub fn parse_label(s: &str) -> Vec<u8> {
    s.bytes()
        .filter(u8::is_ascii_digit)
        .map(|b| b - b'0')
        .collect()
}

/// Real symmetric operator with a label per basis state.
#[derive(Debug, Clone)]
pub struct LabeledSparseOperator {
    pub dim: usize,
    pub labels: Labels,
    pub csr: Csr,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dimension: usize,
    labels: Vec<String>,
    /// Upper triangle `(row, col, value)`.
    entries: Vec<(usize, usize, f64)>,
}

impl LabeledSparseOperator {
    pub fn label(&self, i: usize) -> String {
        self.labels.label(i)
    }

    pub fn entries_upper(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for r in 0..self.dim {
            for k in self.csr.row_ptr[r]..self.csr.row_ptr[r + 1] {
                let c = self.csr.cols[k];
                if c >= r && self.csr.vals[k] != 0.0 {
                    out.push((r, c, self.csr.vals[k]));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.csr.to_dense()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.csr.matvec(x, &mut y);
        y
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        (self.csr.row_ptr[r]..self.csr.row_ptr[r + 1])
            .find(|&k| self.csr.cols[k] == c)
            .map_or(0.0, |k| self.csr.vals[k])
    }

    pub fn to_json(&self) -> String {
        let doc = OperatorJson {
            dimension: self.dim,
            labels: (0..self.dim).map(|i| self.label(i)).collect(),
            entries: self.entries_upper(),
        };
        serde_json::to_string_pretty(&doc).expect("operator serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: OperatorJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.labels.len() != doc.dimension {
            return Err(Error::Parse(format!(
                "{} labels for dimension {}",
                doc.labels.len(),
                doc.dimension
            )));
        }
        let mut trip = Vec::with_capacity(2 * doc.entries.len());
        for &(r, c, v) in &doc.entries {
            if r >= doc.dimension || c >= doc.dimension {
                return Err(Error::Index(format!(
                    "entry ({r}, {c}) in dimension {}",
                    doc.dimension
                )));
            }
            trip.push((r, c, v));
            if r != c {
                trip.push((c, r, v));
            }
        }
        Ok(Self {
            dim: doc.dimension,
            labels: Labels::Explicit(doc.labels),
            csr: Csr::from_triplets(doc.dimension, trip),
        })
    }

    /// Operator sum with matching bases.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return domain("operator dimensions differ");
        }
        let mut trip = triplets(&self.csr);
        trip.extend(triplets(&other.csr));
        Ok(Self {
            dim: self.dim,
            labels: self.labels.clone(),
            csr: Csr::from_triplets(self.dim, trip),
        })
    }
}

fn triplets(c: &Csr) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(c.vals.len());
    for r in 0..c.dim {
        for k in c.row_ptr[r]..c.row_ptr[r + 1] {
            out.push((r, c.cols[k], c.vals[k]));
        }
    }
    out
}

fn matches(d: &[u8], sites: &[usize], pattern: &[u8]) -> bool {
    sites.iter().zip(pattern).all(|(&s, &p)| d[s] == p)
}

fn validate(term: &Term, radix: u8, sites: usize) -> Result<()> {
    let (a, b) = term.patterns();
    if a.len() != term.sites.len() || b.len() != term.sites.len() {
        return domain(format!("pattern length mismatch in term {term}"));
    }
    if let Some(&s) = term.sites.iter().find(|&&s| s >= sites) {
        return Err(Error::Index(format!("site {s} on a chain of {sites}")));
    }
    if a.iter().chain(b).any(|&x| x >= radix) {
        return domain(format!("digit out of range in term {term}"));
    }
    Ok(())
}

/// Assembles `sum of terms` on the full `radix^sites` space.
pub fn build_full(radix: u8, sites: usize, terms: &[Term]) -> Result<LabeledSparseOperator> {
    let dim = (radix as usize)
        .checked_pow(sites as u32)
        .ok_or(Error::Size {
            dim: usize::MAX,
            cap: crate::error::max_dim(),
        })?;
    check_dim(dim)?;
    for t in terms {
        validate(t, radix, sites)?;
    }
    let mut trip = Vec::new();
    let mut d = vec![0u8; sites];
    for s in 0..dim {
        if s > 0 {
            // Increment the digit string in place.
            let mut k = sites;
            while k > 0 {
                k -= 1;
                d[k] += 1;
                if d[k] < radix {
                    break;
                }
                d[k] = 0;
            }
        }
        for t in terms {
            apply_term(t, &d, s, &mut trip, |digits| {
                Some(digits_index(digits, radix))
            });
        }
    }
    Ok(LabeledSparseOperator {
        dim,
        labels: Labels::Digits { radix, sites },
        csr: Csr::from_triplets(dim, trip),
    })
}

/// Assembles the terms on an explicit list of basis states. Moves that leave the
/// list are reported as an error, since the list must be invariant.
pub fn build_on_states(
    radix: u8,
    sites: usize,
    states: &[Vec<u8>],
    terms: &[Term],
) -> Result<LabeledSparseOperator> {
    for t in terms {
        validate(t, radix, sites)?;
    }
    let index: BTreeMap<&[u8], usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();
    let mut trip = Vec::new();
    let mut escaped = None;
    for (i, d) in states.iter().enumerate() {
        for t in terms {
            apply_term(t, d, i, &mut trip, |digits| {
                let j = index.get(digits).copied();
                if j.is_none() {
                    escaped = Some(digits_str(digits));
                }
                j
            });
        }
    }
    if let Some(s) = escaped {
        return Err(Error::NotConserved(format!(
            "a term maps onto {s}, outside the state list"
        )));
    }
    Ok(LabeledSparseOperator {
        dim: states.len(),
        labels: Labels::Explicit(states.iter().map(|s| digits_str(s)).collect()),
        csr: Csr::from_triplets(states.len(), trip),
    })
}

fn apply_term<F: FnMut(&[u8]) -> Option<usize>>(
    t: &Term,
    d: &[u8],
    s: usize,
    trip: &mut Vec<(usize, usize, f64)>,
    mut locate: F,
) {
    let image = |to: &[u8]| {
        let mut e = d.to_vec();
        for (&site, &v) in t.sites.iter().zip(to) {
            e[site] = v;
        }
        e
    };
    match &t.kind {
        TermKind::Projector { pattern } => {
            if matches(d, &t.sites, pattern) {
                trip.push((s, s, t.coeff));
            }
        }
        TermKind::Transition { from, to } => {
            if matches(d, &t.sites, from) {
                trip.push((s, s, t.coeff));
                if let Some(j) = locate(&image(to)) {
                    trip.push((s, j, -t.coeff));
                    trip.push((j, s, -t.coeff));
                }
            }
            if matches(d, &t.sites, to) {
                trip.push((s, s, t.coeff));
            }
        }
        TermKind::Hop { from, to } => {
            if matches(d, &t.sites, from) {
                if let Some(j) = locate(&image(to)) {
                    trip.push((s, j, t.coeff));
                    trip.push((j, s, t.coeff));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Hopping,
    Laplacian,
}

/// Terms of the pulse clock on a chain of `n + 1` qubits.
pub fn pulse_terms(n: usize, variant: Variant) -> Vec<Term> {
    (0..n)
        .map(|x| match variant {
            Variant::Hopping => Term::hop(-1.0, vec![x, x + 1], &[1, 0], &[0, 1]),
            Variant::Laplacian => Term::transition(1.0, vec![x, x + 1], &[0, 1], &[1, 0]),
        })
        .collect()
}

/// Single excitation moving on `n + 1` qubits.
pub fn pulse_clock(n: usize, variant: Variant) -> Result<LabeledSparseOperator> {
    if n < 1 {
        return domain("clock length N must be at least 1");
    }
    build_full(2, n + 1, &pulse_terms(n, variant))
}

/// Domain-wall moves on `n + 2` qubits: `|100> <-> |110>` on consecutive triples.
pub fn domain_wall_terms(n: usize, variant: Variant) -> Vec<Term> {
    (0..n)
        .map(|x| match variant {
            Variant::Hopping => Term::hop(-1.0, vec![x, x + 1, x + 2], &[1, 0, 0], &[1, 1, 0]),
            Variant::Laplacian => {
                Term::transition(1.0, vec![x, x + 1, x + 2], &[1, 0, 0], &[1, 1, 0])
            }
        })
        .collect()
}

/// Penalties for any `01` pair, a leading 0 and a trailing 1 on `n + 2` qubits.
pub fn domain_wall_check_terms(n: usize) -> Vec<Term> {
    let len = n + 2;
    let mut t: Vec<Term> = (0..len - 1)
        .map(|x| Term::projector(1.0, vec![x, x + 1], &[0, 1]))
        .collect();
    t.push(Term::projector(1.0, vec![0], &[0]));
    t.push(Term::projector(1.0, vec![len - 1], &[1]));
    t
}

pub fn domain_wall_clock(
    n: usize,
    variant: Variant,
    with_check: bool,
) -> Result<LabeledSparseOperator> {
    if n < 1 {
        return domain("clock length N must be at least 1");
    }
    let mut terms = domain_wall_terms(n, variant);
    if with_check {
        terms.extend(domain_wall_check_terms(n));
    }
    build_full(2, n + 2, &terms)
}

pub fn domain_wall_check(n: usize) -> Result<LabeledSparseOperator> {
    if n < 1 {
        return domain("clock length N must be at least 1");
    }
    build_full(2, n + 2, &domain_wall_check_terms(n))
}

/// Indices of `1^k 0^{n+2-k}`, k = 1..=n+1, in order of k.
pub fn domain_wall_good_states(n: usize) -> Vec<usize> {
    (1..=n + 1)
        .map(|k| {
            let d: Vec<u8> = (0..n + 2).map(|i| (i < k) as u8).collect();
            digits_index(&d, 2)
        })
        .collect()
}

/// Indices of the single-excitation states, in order of the excited site.
pub fn single_excitation_states(sites: usize) -> Vec<usize> {
    (0..sites).map(|x| 1usize << (sites - 1 - x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub key: i64,
    pub indices: Vec<usize>,
}

/// Groups basis states by `key(label)`; fails if the operator couples two groups.
pub fn sector_decompose<K: Fn(&str) -> i64>(
    op: &LabeledSparseOperator,
    key: K,
) -> Result<Vec<Sector>> {
    let keys: Vec<i64> = (0..op.dim).map(|i| key(&op.label(i))).collect();
    for r in 0..op.dim {
        for k in op.csr.row_ptr[r]..op.csr.row_ptr[r + 1] {
            let c = op.csr.cols[k];
            if op.csr.vals[k] != 0.0 && keys[r] != keys[c] {
                return Err(Error::NotConserved(format!(
                    "{} and {} have keys {} and {}",
                    op.label(r),
                    op.label(c),
                    keys[r],
                    keys[c]
                )));
            }
        }
    }
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.into_iter().enumerate() {
        groups.entry(k).or_default().push(i);
    }
    Ok(groups
        .into_iter()
        .map(|(key, indices)| Sector { key, indices })
        .collect())
}

/// Dense restriction `P H P` onto the listed basis states, in the given order.
pub fn restrict(op: &LabeledSparseOperator, indices: &[usize]) -> Result<DMatrix<f64>> {
    let mut pos = vec![usize::MAX; op.dim];
    for (k, &i) in indices.iter().enumerate() {
        if i >= op.dim {
            return Err(Error::Index(format!(
                "basis index {i} in dimension {}",
                op.dim
            )));
        }
        pos[i] = k;
    }
    let m = indices.len();
    let mut out = DMatrix::zeros(m, m);
    for (a, &r) in indices.iter().enumerate() {
        for k in op.csr.row_ptr[r]..op.csr.row_ptr[r + 1] {
            let b = pos[op.csr.cols[k]];
            if b != usize::MAX {
                out[(a, b)] += op.csr.vals[k];
            }
        }
    }
    Ok(out)
}

/// Sum of Pauli strings such as `"XXII"`, site 0 leftmost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub sites: usize,
    pub terms: Vec<(f64, String)>,
}

impl PauliSum {
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = 1usize << self.sites;
        check_dim(dim)?;
        let mut out = DMatrix::zeros(dim, dim);
        for (c, word) in &self.terms {
            if word.len() != self.sites {
                return domain(format!("Pauli word {word} on {} sites", self.sites));
            }
            let mut m = DMatrix::from_element(1, 1, Complex64::new(*c, 0.0));
            for ch in word.chars() {
                m = m.kronecker(&pauli(ch)?);
            }
            out += m;
        }
        Ok(out)
    }
}

pub fn pauli(ch: char) -> Result<DMatrix<Complex64>> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let entries = match ch {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => return domain(format!("unknown Pauli letter {ch}")),
    };
    Ok(DMatrix::from_row_slice(2, 2, &entries))
}

fn bond_word(sites: usize, x: usize, p: char) -> String {
    (0..sites)
        .map(|k| if k == x || k == x + 1 { p } else { 'I' })
        .collect()
}

/// Pauli expansion of the pulse clock on `n + 1` qubits:
/// hopping is `-1/2 sum (XX + YY)`, the Laplacian is `1/2 sum (I - XX - YY - ZZ)`.
pub fn pauli_form(n: usize, variant: Variant) -> PauliSum {
    let sites = n + 1;
    let mut terms = Vec::new();
    for x in 0..n {
        match variant {
            Variant::Hopping => {
                terms.push((-0.5, bond_word(sites, x, 'X')));
                terms.push((-0.5, bond_word(sites, x, 'Y')));
            }
            Variant::Laplacian => {
                terms.push((0.5, "I".repeat(sites)));
                for p in ['X', 'Y', 'Z'] {
                    terms.push((-0.5, bond_word(sites, x, p)));
                }
            }
        }
    }
    PauliSum { sites, terms }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_msb_first() {
        assert_eq!(digits_index(&[0, 1, 1, 0], 2), 6);
        assert_eq!(index_digits(6, 2, 4), vec![0, 1, 1, 0]);
        assert_eq!(Labels::Digits { radix: 3, sites: 3 }.label(5), "012");
    }

    #[test]
    fn two_bond_laplacian_single_excitation() {
        let op = pulse_clock(2, Variant::Laplacian).unwrap();
        let m = restrict(&op, &single_excitation_states(3)).unwrap();
        let want =
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(m, want);
    }

    #[test]
    fn term_display() {
        let t = Term::transition(1.0, vec![0, 1], &[2, 0], &[1, 2]);
        assert_eq!(t.to_string(), "+1 : 20 -> 12 @ 1,2 [move]");
    }

    #[test]
    fn leaving_state_list_is_an_error() {
        let states = vec![vec![1, 0], vec![0, 1]];
        let bad = [Term::hop(-1.0, vec![0], &[1], &[0])];
        assert!(matches!(
            build_on_states(2, 2, &states, &bad),
            Err(Error::NotConserved(_))
        ));
    }
}
