//! Eigensolvers and small matrix helpers shared by the modules.
//!
//! Dense real-symmetric and complex-Hermitian problems go through nalgebra.
//! Tridiagonal problems use implicit QL with Wilkinson shifts, and large
//! sparse problems use a thick-restart Lanczos iteration.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples sites `i` and `i + 1`.
    pub off: Vec<f64>,
}

/// Ascending eigenvalues with matching unit eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct ComplexEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = (0..n).map(|i| self.diag[i] * x[i]).collect();
        for (i, &e) in self.off.iter().enumerate() {
            y[i] += e * x[i + 1];
            y[i + 1] += e * x[i];
        }
        y
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let e2 = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = f64::EPSILON * (self.diag[i].abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.padded_off();
        tql2(&mut d, &mut e, None)?;
        d.sort_by(|a, b| a.total_cmp(b));
        Ok(d)
    }

    pub fn eigen(&self) -> Result<Eigen> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.padded_off();
        let mut z = DMatrix::<f64>::identity(n, n);
        tql2(&mut d, &mut e, Some(&mut z))?;
        Ok(sorted_eigen(d, z))
    }

    fn padded_off(&self) -> Vec<f64> {
        let mut e = self.off.clone();
        e.push(0.0);
        e
    }
}

/// Implicit QL iteration on a symmetric tridiagonal matrix.
/// `e[i]` couples `i` and `i + 1`; `e[n - 1]` must be zero.
fn tql2(d: &mut [f64], e: &mut [f64], mut z: Option<&mut DMatrix<f64>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Convergence(format!(
                        "implicit QL stalled at index {l}"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zk1 = z[(k, i + 1)];
                            let zk = z[(k, i)];
                            z[(k, i + 1)] = s * zk + c * zk1;
                            z[(k, i)] = c * zk - s * zk1;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sorted_eigen(values: Vec<f64>, vectors: DMatrix<f64>) -> Eigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let n = vectors.nrows();
    let mut out = DMatrix::zeros(n, order.len());
    for (j, &k) in order.iter().enumerate() {
        let mut col = vectors.column(k).into_owned();
        fix_sign(col.as_mut_slice());
        out.set_column(j, &col);
    }
    Eigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: out,
    }
}

/// Makes the first non-negligible coordinate positive.
pub fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Rotates a complex vector so that its first non-negligible coordinate is real positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    if let Some(first) = v.iter().find(|x| x.norm() > 1e-12 * scale) {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

pub fn dense_eigh(m: &DMatrix<f64>) -> Result<Eigen> {
    check_finite(m.iter().copied())?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Convergence("dense symmetric eigensolver".into()))?;
    // nalgebra occasionally pairs a vector with a neighbouring eigenvalue
    // (seen on a 71-state idling graph); re-derive each value from its vector.
    let av = &sym * &eig.eigenvectors;
    let values = (0..n)
        .map(|k| eig.eigenvectors.column(k).dot(&av.column(k)))
        .collect();
    Ok(sorted_eigen(values, eig.eigenvectors))
}

pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_finite(m.iter().copied())?;
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Convergence("dense symmetric eigensolver".into()))?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

pub fn hermitian_eigh(m: &DMatrix<Complex64>) -> Result<ComplexEigen> {
    check_finite(m.iter().flat_map(|z| [z.re, z.im]))?;
    let n = m.nrows();
    if n == 0 {
        return Ok(ComplexEigen {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Convergence("dense hermitian eigensolver".into()))?;
    let av = &herm * &eig.eigenvectors;
    let values: Vec<f64> = (0..n)
        .map(|k| eig.eigenvectors.column(k).dotc(&av.column(k)).re)
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut vectors = DMatrix::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(k).into_owned();
        fix_phase(col.as_mut_slice());
        vectors.set_column(j, &col);
    }
    Ok(ComplexEigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors,
    })
}

fn check_finite(mut it: impl Iterator<Item = f64>) -> Result<()> {
    if it.all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Domain("matrix has non-finite entries".into()))
    }
}

/// Compressed sparse rows, real symmetric by construction of the callers.
#[derive(Debug, Clone)]
pub struct Csr {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Builds from unsorted triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// Lowest `nev` eigenpairs of a symmetric operator by thick-restart Lanczos
/// with full reorthogonalization. Converged when every residual is below
/// `tol * max(1, |theta|)`.
pub fn lanczos_lowest<F>(
    apply: F,
    dim: usize,
    nev: usize,
    tol: f64,
    seed: u64,
) -> Result<LanczosResult>
where
    F: Fn(&[f64], &mut [f64]),
{
    if nev == 0 || nev > dim {
        return Err(Error::Range(format!("nev={nev} for dimension {dim}")));
    }
    let m = (2 * nev + 24).min(dim);
    if m == dim || dim <= 64 {
        let mut dense = DMatrix::zeros(dim, dim);
        let mut e = vec![0.0; dim];
        let mut col = vec![0.0; dim];
        for j in 0..dim {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            apply(&e, &mut col);
            for i in 0..dim {
                dense[(i, j)] = col[i];
            }
        }
        let eig = dense_eigh(&dense)?;
        return Ok(LanczosResult {
            values: eig.values[..nev].to_vec(),
            vectors: (0..nev)
                .map(|k| eig.vectors.column(k).iter().copied().collect())
                .collect(),
            iterations: dim,
        });
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut start = pseudo_random_unit(dim, seed);
    let keep = (nev + 8).min(m / 2);
    let mut iterations = 0;
    let max_iterations = 200 * dim.min(5000) + 1000;
    loop {
        while basis.len() < m {
            let mut v = start.clone();
            // Two passes of Gram-Schmidt keep the basis orthonormal to rounding.
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &v);
                    axpy(-c, b, &mut v);
                }
            }
            let nrm = dot(&v, &v).sqrt();
            if nrm < 1e-13 {
                // Invariant subspace found; continue with a fresh direction.
                start = pseudo_random_unit(dim, seed.wrapping_add(iterations as u64 + 7));
                if basis.len() + 1 >= dim {
                    break;
                }
                iterations += 1;
                continue;
            }
            v.iter_mut().for_each(|x| *x /= nrm);
            let mut w = vec![0.0; dim];
            apply(&v, &mut w);
            iterations += 1;
            start = w.clone();
            basis.push(v);
            images.push(w);
        }
        let k = basis.len();
        let mut h = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let x = dot(&basis[i], &images[j]);
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let eig = dense_eigh(&h)?;
        let ritz: Vec<(Vec<f64>, Vec<f64>)> = (0..keep.min(k))
            .map(|c| {
                let mut y = vec![0.0; dim];
                let mut ay = vec![0.0; dim];
                for i in 0..k {
                    let s = eig.vectors[(i, c)];
                    axpy(s, &basis[i], &mut y);
                    axpy(s, &images[i], &mut ay);
                }
                (y, ay)
            })
            .collect();
        let mut converged = true;
        let mut worst_residual = vec![0.0; dim];
        let mut worst = -1.0;
        for (c, (y, ay)) in ritz.iter().enumerate() {
            let theta = eig.values[c];
            let mut r = ay.clone();
            axpy(-theta, y, &mut r);
            let rn = dot(&r, &r).sqrt();
            if c < nev && rn > tol * theta.abs().max(1.0) {
                converged = false;
            }
            if rn > worst {
                worst = rn;
                worst_residual = r;
            }
        }
        if converged || iterations > max_iterations {
            if !converged {
                return Err(Error::Convergence(format!(
                    "Lanczos after {iterations} matvecs"
                )));
            }
            return Ok(LanczosResult {
                values: eig.values[..nev].to_vec(),
                vectors: ritz.into_iter().take(nev).map(|(y, _)| y).collect(),
                iterations,
            });
        }
        basis.clear();
        images.clear();
        for (y, ay) in ritz {
            basis.push(y);
            images.push(ay);
        }
        start = worst_residual;
    }
}

fn pseudo_random_unit(dim: usize, seed: u64) -> Vec<f64> {
    // SplitMix64; only needs to avoid orthogonality to the wanted eigenvectors.
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let n = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}
