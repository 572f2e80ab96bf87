//! Pulse clock with a tuning term that leaves the single-excitation
//! superposition as the unique ground state.
//!
//! `H = sum_x (|01> - |10>)(<01| - <10|) + V I - V sum_x |1><1| + sum_x |11><11|`
//! on an open chain of `N` qubits with `N - 1` bonds. Every term conserves the
//! excitation number `z`, so all work is done sector by sector.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::count::{binomial, fixed_weight_masks};
use crate::error::{check_dim, domain, Error, Result};
use crate::fit::{fit_exponent, PowerFit};
use crate::linalg::{dense_eigenvalues, dense_eigh, lanczos_lowest, Csr};
use crate::spin::{build_full, pulse_terms, LabeledSparseOperator, Term, Variant};

/// Sectors up to this size are diagonalized densely.
const DENSE_SECTOR: usize = 400;
const LANCZOS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningSpec {
    pub n: usize,
    pub v: f64,
}

impl TuningSpec {
    pub fn new(n: usize, v: f64) -> Result<Self> {
        if n < 3 {
            return domain(format!("chain length {n} < 3"));
        }
        if !(v > 0.0) || !v.is_finite() {
            return domain(format!("tuning strength {v} must be positive"));
        }
        Ok(Self { n, v })
    }

    /// `V = N^-3`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, (n as f64).powi(-3))
    }
}

/// How `V` scales with the chain length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Cubic,
    ThreeHalves,
    Fixed(f64),
}

impl Strength {
    pub fn at(self, n: usize) -> f64 {
        match self {
            Strength::Cubic => (n as f64).powi(-3),
            Strength::ThreeHalves => (n as f64).powf(-1.5),
            Strength::Fixed(v) => v,
        }
    }
}

/// Pulse clock plus tuning terms. The constant `V I` is written as
/// `V (|0><0| + |1><1|)` on site 0.
pub fn tuned_terms(spec: &TuningSpec) -> Vec<Term> {
    let n = spec.n;
    let mut t = pulse_terms(n - 1, Variant::Laplacian);
    t.push(Term::projector(spec.v, vec![0], &[0]));
    t.push(Term::projector(spec.v, vec![0], &[1]));
    for x in 0..n {
        t.push(Term::projector(-spec.v, vec![x], &[1]));
    }
    for x in 0..n - 1 {
        t.push(Term::projector(1.0, vec![x, x + 1], &[1, 1]));
    }
    t
}

pub fn build_tuned(spec: &TuningSpec) -> Result<LabeledSparseOperator> {
    if spec.n > 20 {
        return Err(Error::Size {
            dim: 1 << spec.n.min(62),
            cap: 1 << 20,
        });
    }
    build_full(2, spec.n, &tuned_terms(spec))
}

/// Strings of length `n` with `z` ones and no two adjacent.
pub fn count_no11(n: usize, z: usize) -> u64 {
    if z > n {
        return 0;
    }
    binomial(n + 1 - z, z)
}

fn adjacent_pairs(mask: u64) -> u32 {
    (mask & (mask >> 1)).count_ones()
}

/// Which parts of the Hamiltonian a sector matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    /// Pulse clock only.
    Pulse,
    /// Everything.
    Full,
}

/// Sector matrix as sparse rows. Basis in numeric mask order.
fn sector_csr(n: usize, z: usize, v: f64, part: Part) -> Result<(Vec<u64>, Csr)> {
    check_dim(binomial(n, z) as usize)?;
    let masks = fixed_weight_masks(n, z);
    let diag_shift = if part == Part::Full {
        v - v * z as f64
    } else {
        0.0
    };
    let mut trip = Vec::with_capacity(masks.len() * n);
    for (i, &m) in masks.iter().enumerate() {
        let mut d = diag_shift;
        if part == Part::Full {
            d += adjacent_pairs(m) as f64;
        }
        for b in 0..n - 1 {
            let pair = (m >> b) & 0b11;
            if pair == 0b01 || pair == 0b10 {
                d += 1.0;
                let swapped = m ^ (0b11 << b);
                let j = masks.binary_search(&swapped).expect("swap stays in sector");
                trip.push((i, j, -1.0));
            }
        }
        trip.push((i, i, d));
    }
    let dim = masks.len();
    Ok((masks, Csr::from_triplets(dim, trip)))
}

/// Lowest `nev` eigenpairs of a sector operator; vectors only when asked.
fn lowest(csr: &Csr, nev: usize, vectors: bool) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = csr.dim;
    let nev = nev.min(dim);
    if dim <= DENSE_SECTOR && !vectors {
        return Ok((
            dense_eigenvalues(&csr.to_dense())?[..nev].to_vec(),
            Vec::new(),
        ));
    }
    if dim <= DENSE_SECTOR {
        let e = dense_eigh(&csr.to_dense())?;
        let vecs = if vectors {
            (0..nev)
                .map(|k| e.vectors.column(k).iter().copied().collect())
                .collect()
        } else {
            Vec::new()
        };
        return Ok((e.values[..nev].to_vec(), vecs));
    }
    let r = lanczos_lowest(|x, y| csr.matvec(x, y), dim, nev, LANCZOS_TOL, 11)?;
    Ok((r.values, if vectors { r.vectors } else { Vec::new() }))
}

/// Dense matrix of the tuned Hamiltonian in sector `z`.
pub fn sector_matrix(spec: &TuningSpec, z: usize) -> Result<DMatrix<f64>> {
    Ok(sector_csr(spec.n, z, spec.v, Part::Full)?.1.to_dense())
}

/// Second eigenvalue of the pulse clock in sector `z`; its ground state is
/// the uniform superposition at energy 0. Memoized, since it does not depend
/// on `V`.
pub fn pulse_sector_gap(n: usize, z: usize) -> Result<f64> {
    if z == 0 || z >= n {
        return domain(format!("sector z={z} of {n} sites has one state"));
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&g) = cache.lock().expect("cache lock").get(&(n, z)) {
        return Ok(g);
    }
    let (_, csr) = sector_csr(n, z, 0.0, Part::Pulse)?;
    let g = if csr.dim <= DENSE_SECTOR {
        lowest(&csr, 2, false)?.0[1]
    } else {
        // Lift the uniform ground state above the spectrum, which is at most 2(N-1).
        let dim = csr.dim;
        let lift = 4.0 * n as f64 / dim as f64;
        let apply = |x: &[f64], y: &mut [f64]| {
            csr.matvec(x, y);
            let s = lift * x.iter().sum::<f64>();
            y.iter_mut().for_each(|v| *v += s);
        };
        lanczos_lowest(apply, dim, 1, LANCZOS_TOL, 11)?.values[0]
    };
    cache.lock().expect("cache lock").insert((n, z), g);
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricBound {
    pub n: usize,
    pub z: usize,
    pub all: u64,
    pub no11: u64,
    pub cos_theta: f64,
    /// `(1 - cos theta) / 2`.
    pub sin2_half: f64,
    pub lambda1_pulse: f64,
    /// Smallest positive count of adjacent `11` pairs in the sector.
    pub lambda1_pairs: f64,
    /// `min(lambda1_pulse, lambda1_pairs) * sin2_half`, a lower bound on the
    /// shifted sector minimum.
    pub bound: f64,
    /// `z / (4N)`.
    pub sin2_floor: f64,
}

pub fn geometric_bound(n: usize, z: usize) -> Result<GeometricBound> {
    if z < 2 || z > n {
        return domain(format!(
            "geometric bound needs 2 <= z <= N, got z={z}, N={n}"
        ));
    }
    let all = binomial(n, z);
    let no11 = count_no11(n, z);
    let cos_theta = (no11 as f64 / all as f64).sqrt();
    let sin2_half = (1.0 - cos_theta) / 2.0;
    let sin2_floor = z as f64 / (4.0 * n as f64);
    if sin2_half < sin2_floor - 1e-15 {
        return Err(Error::Inconsistent(format!(
            "sin^2(theta/2) = {sin2_half} below z/(4N) = {sin2_floor}"
        )));
    }
    let lambda1_pulse = if z == n {
        f64::INFINITY
    } else {
        pulse_sector_gap(n, z)?
    };
    let lambda1_pairs = fixed_weight_masks(n, z)
        .into_iter()
        .map(adjacent_pairs)
        .filter(|&p| p > 0)
        .min()
        .map_or(f64::INFINITY, f64::from);
    let bound = lambda1_pulse.min(lambda1_pairs) * sin2_half;
    Ok(GeometricBound {
        n,
        z,
        all,
        no11,
        cos_theta,
        sin2_half,
        lambda1_pulse,
        lambda1_pairs,
        bound,
        sin2_floor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEnergy {
    pub z: usize,
    pub dim: usize,
    pub e0: f64,
    /// Geometric bound minus `(z - 1) V`, for `z >= 2`.
    pub lower_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorStudy {
    pub n: usize,
    pub v: f64,
    pub sectors: Vec<SectorEnergy>,
    /// Second eigenvalue in the single-excitation sector.
    pub single_gap: f64,
    /// Overlap of the lowest single-excitation state with the uniform one.
    pub ground_overlap: f64,
    pub ground_energy: f64,
    pub gap: f64,
    pub bound_satisfied: bool,
}

impl SectorStudy {
    /// `N,V,z,E_z` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,V,z,E_z\n");
        for e in &self.sectors {
            s.push_str(&format!(
                "{},{:.16e},{},{:.16e}\n",
                self.n, self.v, e.z, e.e0
            ));
        }
        s
    }
}

/// Ground energy of sector `z`, with its geometric lower bound for `z >= 2`.
pub fn sector_energy(spec: &TuningSpec, z: usize) -> Result<SectorEnergy> {
    if z > spec.n {
        return Err(Error::Range(format!("z={z} > N={}", spec.n)));
    }
    let (masks, csr) = sector_csr(spec.n, z, spec.v, Part::Full)?;
    let e0 = lowest(&csr, 1, false)?.0[0];
    let lower_bound = if z >= 2 {
        Some(geometric_bound(spec.n, z)?.bound - (z as f64 - 1.0) * spec.v)
    } else {
        None
    };
    Ok(SectorEnergy {
        z,
        dim: masks.len(),
        e0,
        lower_bound,
    })
}

/// All sectors of a chain with `N <= 20`.
pub fn sector_spectrum_study(spec: &TuningSpec) -> Result<SectorStudy> {
    if spec.n > 20 {
        return Err(Error::Size {
            dim: 1 << spec.n.min(62),
            cap: 1 << 20,
        });
    }
    let n = spec.n;
    let sectors: Vec<SectorEnergy> = (0..=n)
        .into_par_iter()
        .map(|z| sector_energy(spec, z))
        .collect::<Result<_>>()?;
    let (_, csr) = sector_csr(n, 1, spec.v, Part::Full)?;
    let (vals, vecs) = lowest(&csr, 2, true)?;
    let uniform = 1.0 / (n as f64).sqrt();
    let ground_overlap = vecs[0].iter().map(|x| x * uniform).sum::<f64>().powi(2);
    let ground_energy = sectors.iter().map(|s| s.e0).fold(f64::INFINITY, f64::min);
    let others = sectors
        .iter()
        .filter(|s| s.z != 1)
        .map(|s| s.e0)
        .fold(f64::INFINITY, f64::min);
    let gap = others.min(vals[1]) - ground_energy;
    let bound_satisfied = sectors
        .iter()
        .all(|s| s.lower_bound.map_or(true, |b| s.e0 >= b - 1e-10));
    Ok(SectorStudy {
        n,
        v: spec.v,
        sectors,
        single_gap: vals[1],
        ground_overlap,
        ground_energy,
        gap,
        bound_satisfied,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapScaling {
    pub strength: Strength,
    pub sizes: Vec<usize>,
    pub gaps: Vec<f64>,
    pub fit: PowerFit,
    pub bound_satisfied: bool,
}

/// Gap versus `N` with `V` set by `strength`, and its power-law fit.
pub fn gap_scaling(sizes: &[usize], strength: Strength) -> Result<GapScaling> {
    let studies: Vec<SectorStudy> = sizes
        .iter()
        .map(|&n| sector_spectrum_study(&TuningSpec::new(n, strength.at(n))?))
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = studies.iter().map(|s| s.gap).collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let fit = fit_exponent(&xs, &gaps)?;
    Ok(GapScaling {
        strength,
        sizes: sizes.to_vec(),
        gaps,
        fit,
        bound_satisfied: studies.iter().all(|s| s.bound_satisfied),
    })
}
