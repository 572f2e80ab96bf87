//! Circuit-to-Hamiltonian construction with an explicit clock register.
//!
//! The space is `clock (N + 1 ticks) ⊗ data (d qubits)` with index
//! `t * 2^d + data`, data qubit 0 being the most significant bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Error, Result};
use crate::linalg::hermitian_eigh;

pub const MAX_DATA_QUBITS: usize = 6;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: Option<String>,
    pub matrix: CMat,
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub qubits: usize,
    pub gates: Vec<Gate>,
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    /// Rows of `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    targets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    qubits: usize,
    gates: Vec<GateJson>,
}

pub fn named_gate(name: &str) -> Result<CMat> {
    let z = c(0.0);
    let o = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    let h = c(std::f64::consts::FRAC_1_SQRT_2);
    Ok(match name {
        "I" => CMat::identity(2, 2),
        "X" => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        "Y" => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        "Z" => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        "H" => CMat::from_row_slice(2, 2, &[h, h, h, -h]),
        "CNOT" => CMat::from_row_slice(4, 4, &[o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z]),
        _ => return Err(Error::Parse(format!("unknown gate {name}"))),
    })
}

/// Real rotation `exp(-i theta Y / 2)`.
pub fn ry(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)])
}

impl Gate {
    pub fn named(name: &str, targets: Vec<usize>) -> Result<Self> {
        Ok(Self {
            name: Some(name.to_string()),
            matrix: named_gate(name)?,
            targets,
        })
    }

    pub fn custom(matrix: CMat, targets: Vec<usize>) -> Self {
        Self {
            name: None,
            matrix,
            targets,
        }
    }
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if qubits == 0 || qubits > MAX_DATA_QUBITS {
            return domain(format!(
                "{qubits} data qubits, supported range is 1..={MAX_DATA_QUBITS}"
            ));
        }
        if gates.is_empty() {
            return domain("a circuit needs at least one gate");
        }
        for g in &gates {
            let k = g.targets.len();
            if k == 0 || g.matrix.nrows() != 1 << k || g.matrix.ncols() != 1 << k {
                return domain(format!(
                    "gate on {k} targets has a {}x{} matrix",
                    g.matrix.nrows(),
                    g.matrix.ncols()
                ));
            }
            if g.targets.iter().any(|&q| q >= qubits) {
                return Err(Error::Index(format!(
                    "gate targets {:?} with {qubits} qubits",
                    g.targets
                )));
            }
            let mut t = g.targets.clone();
            t.sort_unstable();
            t.dedup();
            if t.len() != k {
                return domain("repeated gate target");
            }
            let defect = (&g.matrix.adjoint() * &g.matrix - CMat::identity(1 << k, 1 << k)).norm();
            if defect > 1e-9 {
                return domain(format!("gate is not unitary (defect {defect:e})"));
            }
        }
        Ok(Self { qubits, gates })
    }

    /// Identity circuit with `n` steps.
    pub fn identity(qubits: usize, n: usize) -> Result<Self> {
        Self::new(
            qubits,
            (0..n)
                .map(|_| Gate::named("I", vec![0]))
                .collect::<Result<_>>()?,
        )
    }

    pub fn steps(&self) -> usize {
        self.gates.len()
    }

    pub fn data_dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CircuitJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let gates = doc
            .gates
            .into_iter()
            .map(|g| match (g.name, g.matrix) {
                (Some(name), None) => Gate::named(&name, g.targets),
                (None, Some(rows)) => {
                    let n = rows.len();
                    if rows.iter().any(|r| r.len() != n) {
                        return Err(Error::Parse("gate matrix is not square".into()));
                    }
                    let flat: Vec<Complex64> = rows
                        .iter()
                        .flatten()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect();
                    Ok(Gate::custom(CMat::from_row_slice(n, n, &flat), g.targets))
                }
                _ => Err(Error::Parse(
                    "each gate needs exactly one of name or matrix".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.qubits, gates)
    }

    pub fn to_json(&self) -> String {
        let gates = self
            .gates
            .iter()
            .map(|g| GateJson {
                name: g.name.clone(),
                matrix: if g.name.is_some() {
                    None
                } else {
                    Some(
                        g.matrix
                            .row_iter()
                            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
                            .collect(),
                    )
                },
                targets: g.targets.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&CircuitJson {
            qubits: self.qubits,
            gates,
        })
        .expect("circuit serializes")
    }

    /// Gate `t` (1-based) embedded in the full data space.
    pub fn step_unitary(&self, t: usize) -> CMat {
        embed(&self.gates[t - 1], self.qubits)
    }

    /// `U_N ... U_1`.
    pub fn total_unitary(&self) -> CMat {
        let mut u = CMat::identity(self.data_dim(), self.data_dim());
        for t in 1..=self.steps() {
            u = self.step_unitary(t) * u;
        }
        u
    }

    /// Appends `a` identity steps.
    pub fn padded(&self, a: usize) -> Result<Self> {
        let mut gates = self.gates.clone();
        for _ in 0..a {
            gates.push(Gate::named("I", vec![0])?);
        }
        Self::new(self.qubits, gates)
    }
}

fn embed(g: &Gate, qubits: usize) -> CMat {
    let dim = 1usize << qubits;
    let mask: usize = g.targets.iter().map(|&q| 1 << (qubits - 1 - q)).sum();
    let sub = |i: usize| {
        g.targets
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((i >> (qubits - 1 - q)) & 1))
    };
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i & !mask == j & !mask {
                out[(i, j)] = g.matrix[(sub(i), sub(j))];
            }
        }
    }
    out
}

fn clocked_dim(circuit: &Circuit) -> Result<usize> {
    let dim = (circuit.steps() + 1) * circuit.data_dim();
    check_dim(dim)?;
    Ok(dim)
}

fn put_block(m: &mut CMat, t_row: usize, t_col: usize, block: &CMat, scale: Complex64) {
    let k = block.nrows();
    for i in 0..k {
        for j in 0..k {
            m[(t_row * k + i, t_col * k + j)] += scale * block[(i, j)];
        }
    }
}

/// `sum_t (|t><t-1| ⊗ U_t + h.c.)`.
pub fn build_feynman(circuit: &Circuit) -> Result<CMat> {
    let dim = clocked_dim(circuit)?;
    let mut h = CMat::zeros(dim, dim);
    for t in 1..=circuit.steps() {
        let u = circuit.step_unitary(t);
        put_block(&mut h, t, t - 1, &u, c(1.0));
        put_block(&mut h, t - 1, t, &u.adjoint(), c(1.0));
    }
    Ok(h)
}

/// `sum_t ((|t-1><t-1| + |t><t|) ⊗ I - |t><t-1| ⊗ U_t - h.c.)`.
pub fn build_propagation(circuit: &Circuit) -> Result<CMat> {
    let dim = clocked_dim(circuit)?;
    let k = circuit.data_dim();
    let id = CMat::identity(k, k);
    let mut h = CMat::zeros(dim, dim);
    for t in 1..=circuit.steps() {
        let u = circuit.step_unitary(t);
        put_block(&mut h, t - 1, t - 1, &id, c(1.0));
        put_block(&mut h, t, t, &id, c(1.0));
        put_block(&mut h, t, t - 1, &u, c(-1.0));
        put_block(&mut h, t - 1, t, &u.adjoint(), c(-1.0));
    }
    Ok(h)
}

/// `(N + 1)^{-1/2} sum_t |t> ⊗ U_t ... U_1 |input>`.
pub fn history_state(circuit: &Circuit, input: &CVec) -> Result<CVec> {
    let k = circuit.data_dim();
    if input.len() != k {
        return domain(format!(
            "input of length {} for {k} data states",
            input.len()
        ));
    }
    let nrm = input.norm();
    if !(nrm > 0.0) {
        return domain("input state is zero");
    }
    let dim = clocked_dim(circuit)?;
    let mut out = CVec::zeros(dim);
    let mut phi = input / c(nrm);
    let w = c(1.0 / ((circuit.steps() + 1) as f64).sqrt());
    for t in 0..=circuit.steps() {
        if t > 0 {
            phi = circuit.step_unitary(t) * phi;
        }
        for i in 0..k {
            out[t * k + i] = w * phi[i];
        }
    }
    Ok(out)
}

/// `|t = 0> ⊗ input`.
pub fn initial_state(circuit: &Circuit, input: &CVec) -> Result<CVec> {
    let k = circuit.data_dim();
    if input.len() != k {
        return domain(format!(
            "input of length {} for {k} data states",
            input.len()
        ));
    }
    let mut out = CVec::zeros(clocked_dim(circuit)?);
    let nrm = input.norm();
    for i in 0..k {
        out[i] = input[i] / c(nrm);
    }
    Ok(out)
}

pub fn basis_input(circuit: &Circuit, index: usize) -> Result<CVec> {
    if index >= circuit.data_dim() {
        return Err(Error::Index(format!(
            "input {index} for {} data states",
            circuit.data_dim()
        )));
    }
    let mut v = CVec::zeros(circuit.data_dim());
    v[index] = c(1.0);
    Ok(v)
}

/// Which clock readings count as a finished computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Success {
    /// Clock at the last tick.
    FinalTick,
    /// Clock at tick `t` or later.
    AtLeast(usize),
}

fn success_mask(circuit: &Circuit, rule: Success) -> Vec<bool> {
    let k = circuit.data_dim();
    let from = match rule {
        Success::FinalTick => circuit.steps(),
        Success::AtLeast(t) => t,
    };
    (0..(circuit.steps() + 1) * k)
        .map(|i| i / k >= from)
        .collect()
}

/// Spectral data for repeated time evolution.
#[derive(Debug, Clone)]
pub struct Propagator {
    values: Vec<f64>,
    vectors: CMat,
}

impl Propagator {
    pub fn new(h: &CMat) -> Result<Self> {
        let e = hermitian_eigh(h)?;
        Ok(Self {
            values: e.values,
            vectors: e.vectors,
        })
    }

    /// `exp(-i H t) psi`.
    pub fn evolve(&self, psi: &CVec, t: f64) -> CVec {
        let coeffs = self.vectors.adjoint() * psi;
        let phased = CVec::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.values)
                .map(|(a, &e)| a * Complex64::from_polar(1.0, -e * t)),
        );
        &self.vectors * phased
    }

    /// `lim (1/T) ∫ |P psi(t)|^2 dt`, grouping degenerate eigenvalues.
    pub fn cesaro_limit(&self, psi: &CVec, mask: &[bool]) -> f64 {
        let coeffs = self.vectors.adjoint() * psi;
        let scale = self.values.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        let mut total = 0.0;
        let mut start = 0;
        while start < self.values.len() {
            let mut end = start + 1;
            while end < self.values.len() && self.values[end] - self.values[end - 1] < 1e-9 * scale
            {
                end += 1;
            }
            let mut proj = CVec::zeros(psi.len());
            for k in start..end {
                proj += self.vectors.column(k) * coeffs[k];
            }
            total += proj
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(a, _)| a.norm_sqr())
                .sum::<f64>();
            start = end;
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CesaroReport {
    /// Average of the success probability over the sampled times.
    pub sampled: f64,
    pub limit: f64,
}

/// Success probability under `exp(-i H_F t)` from `|0> ⊗ input`: its average over
/// `samples` evenly spaced times in `(0, t_max]`, and the infinite-time average.
pub fn cesaro_success(
    circuit: &Circuit,
    input: &CVec,
    rule: Success,
    t_max: f64,
    samples: usize,
) -> Result<CesaroReport> {
    if let Success::AtLeast(t) = rule {
        if t > circuit.steps() {
            return Err(Error::Range(format!(
                "success tick {t} beyond {}",
                circuit.steps()
            )));
        }
    }
    let prop = Propagator::new(&build_feynman(circuit)?)?;
    let psi0 = initial_state(circuit, input)?;
    let mask = success_mask(circuit, rule);
    let limit = prop.cesaro_limit(&psi0, &mask);
    let sampled = if samples == 0 {
        f64::NAN
    } else {
        let total: f64 = (1..=samples)
            .map(|j| {
                let psi = prop.evolve(&psi0, t_max * j as f64 / samples as f64);
                psi.iter()
                    .zip(&mask)
                    .filter(|(_, &m)| m)
                    .map(|(a, _)| a.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        total / samples as f64
    };
    Ok(CesaroReport { sampled, limit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_embedding() {
        let circ = Circuit::new(2, vec![Gate::named("CNOT", vec![0, 1]).unwrap()]).unwrap();
        let u = circ.total_unitary();
        // |10> -> |11>
        assert_eq!(u[(3, 2)], c(1.0));
        let rev = Circuit::new(2, vec![Gate::named("CNOT", vec![1, 0]).unwrap()]).unwrap();
        // control on qubit 1: |01> -> |11>
        assert_eq!(rev.total_unitary()[(3, 1)], c(1.0));
    }

    #[test]
    fn json_round_trip() {
        let circ = Circuit::new(
            1,
            vec![
                Gate::named("H", vec![0]).unwrap(),
                Gate::custom(ry(0.3), vec![0]),
            ],
        )
        .unwrap();
        let back = Circuit::from_json(&circ.to_json()).unwrap();
        assert!((back.total_unitary() - circ.total_unitary()).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_circuits() {
        assert!(Circuit::new(7, vec![Gate::named("X", vec![0]).unwrap()]).is_err());
        assert!(matches!(
            Circuit::new(1, vec![Gate::named("X", vec![1]).unwrap()]),
            Err(Error::Index(_))
        ));
        assert!(
            Circuit::from_json(r#"{"qubits":1,"gates":[{"name":"T","targets":[0]}]}"#).is_err()
        );
    }
}
