//! Particle-on-a-line walk matrices `H^(L,R)_N` and their spectra.
//!
//! The matrix acts on sites `0..=N` with hopping `-1`, a loop `-L` at site 0
//! and a loop `-R` at site `N`. Eigenstates are plane waves `E = -2 cos p`
//! (goniometric), decaying exponentials `E = -(y + 1/y)` with `y > 1`
//! (hyperbolic), or their sign-alternating images above `+2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{fix_sign, SymTridiagonal};

/// Default absolute tolerance for root finding.
pub const ROOT_TOL: f64 = 1e-10;
/// Distance from `(±1, ±1)` below which the closed form is used.
const NEAR_DEGENERATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub n: usize,
    pub left: f64,
    pub right: f64,
}

impl WalkSpec {
    pub fn new(n: usize, left: f64, right: f64) -> Result<Self> {
        if n < 1 {
            return domain("walk length N must be at least 1");
        }
        if !left.is_finite() || !right.is_finite() {
            return domain("loop weights must be finite");
        }
        Ok(Self { n, left, right })
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }
}

/// `-L|0><0| - R|N><N| - sum_x (|x><x+1| + h.c.)`.
pub fn build_walk_matrix(spec: &WalkSpec) -> SymTridiagonal {
    let mut diag = vec![0.0; spec.dim()];
    diag[0] -= spec.left;
    diag[spec.n] -= spec.right;
    SymTridiagonal::new(diag, vec![-1.0; spec.n])
}

/// Walk without loops, `H^(0,0)_N`.
pub fn free_walk(n: usize) -> Result<SymTridiagonal> {
    Ok(build_walk_matrix(&WalkSpec::new(n, 0.0, 0.0)?))
}

/// Line Laplacian `2I + H^(1,1)_N`.
pub fn laplacian_walk(n: usize) -> Result<SymTridiagonal> {
    shifted_walk(&WalkSpec::new(n, 1.0, 1.0)?, 2.0)
}

/// `shift * I + H^(L,R)_N`.
pub fn shifted_walk(spec: &WalkSpec, shift: f64) -> Result<SymTridiagonal> {
    let mut m = build_walk_matrix(spec);
    m.diag.iter_mut().for_each(|d| *d += shift);
    Ok(m)
}

/// Plane-wave mode `psi_x = a e^{-ipx} + b e^{ipx}`.
///
/// At `p = 0` or `p = pi` the plane waves coincide and the mode is the
/// linear profile `psi_x = (±1)^x (a + b x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoniometricMode {
    pub momentum: f64,
    pub energy: f64,
    pub amplitude_a: Complex64,
    pub amplitude_b: Complex64,
}

/// Exponential mode `psi_x = c e^{-qx} + d e^{qx}`, `E = -2 cosh q`.
/// Staggered modes carry an extra `(-1)^x` and have `E = +2 cosh q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicMode {
    pub rate: f64,
    pub energy: f64,
    pub amplitude_c: f64,
    pub amplitude_d: f64,
    pub staggered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    Goniometric(GoniometricMode),
    Hyperbolic(HyperbolicMode),
}

impl Mode {
    pub fn energy(&self) -> f64 {
        match self {
            Mode::Goniometric(g) => g.energy,
            Mode::Hyperbolic(h) => h.energy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    RootFinding,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub spec: WalkSpec,
    /// All modes in ascending energy order.
    pub modes: Vec<Mode>,
    pub method: Method,
}

impl SpectralReport {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(Mode::energy).collect()
    }

    pub fn goniometric(&self) -> Vec<GoniometricMode> {
        self.modes
            .iter()
            .filter_map(|m| match m {
                Mode::Goniometric(g) => Some(*g),
                _ => None,
            })
            .collect()
    }

    /// Modes below the band edge `-2`.
    pub fn hyperbolic(&self) -> Vec<HyperbolicMode> {
        self.exponential(false)
    }

    /// Modes above the band edge `+2`.
    pub fn staggered(&self) -> Vec<HyperbolicMode> {
        self.exponential(true)
    }

    fn exponential(&self, staggered: bool) -> Vec<HyperbolicMode> {
        self.modes
            .iter()
            .filter_map(|m| match m {
                Mode::Hyperbolic(h) if h.staggered == staggered => Some(*h),
                _ => None,
            })
            .collect()
    }

    pub fn gap(&self) -> f64 {
        let e = self.eigenvalues();
        e[1] - e[0]
    }
}

/// Number of hyperbolic modes expected for long chains: one per loop weight above 1.
pub fn expected_hyperbolic_count(left: f64, right: f64) -> usize {
    (left > 1.0) as usize + (right > 1.0) as usize
}

/// Spectrum from the quantization conditions, or a closed form where one applies.
pub fn analytic_spectrum(spec: &WalkSpec, tol: f64) -> Result<SpectralReport> {
    let tol = if tol > 0.0 { tol } else { ROOT_TOL };
    if let Some(modes) = closed_form(spec) {
        let exact_special = is_exactly_special(spec);
        if exact_special {
            let solved = solve_modes(spec, tol)?;
            cross_check(&modes, &solved, 1e-8)?;
        }
        return Ok(report(spec, modes, Method::ClosedForm));
    }
    let modes = solve_modes(spec, tol)?;
    Ok(report(spec, modes, Method::RootFinding))
}

fn report(spec: &WalkSpec, mut modes: Vec<Mode>, method: Method) -> SpectralReport {
    modes.sort_by(|a, b| a.energy().total_cmp(&b.energy()));
    SpectralReport {
        spec: *spec,
        modes,
        method,
    }
}

fn cross_check(a: &[Mode], b: &[Mode], tol: f64) -> Result<()> {
    let mut ea: Vec<f64> = a.iter().map(Mode::energy).collect();
    let mut eb: Vec<f64> = b.iter().map(Mode::energy).collect();
    ea.sort_by(f64::total_cmp);
    eb.sort_by(f64::total_cmp);
    if ea.len() != eb.len() {
        return Err(Error::Inconsistent(format!(
            "{} closed-form vs {} solved modes",
            ea.len(),
            eb.len()
        )));
    }
    for (x, y) in ea.iter().zip(&eb) {
        if (x - y).abs() > tol {
            return Err(Error::Inconsistent(format!("closed form {x} vs root {y}")));
        }
    }
    Ok(())
}

/// Eigenvalues and eigenvectors from a tridiagonal eigensolver, with modes
/// classified by energy against the band `[-2, 2]`.
pub fn numeric_spectrum(matrix: &SymTridiagonal) -> Result<SpectralReport> {
    let n = matrix.dim() - 1;
    let spec = WalkSpec {
        n,
        left: -matrix.diag[0],
        right: -matrix.diag[n],
    };
    let values = matrix.eigenvalues()?;
    let modes = values.iter().map(|&e| classify_energy(&spec, e)).collect();
    Ok(SpectralReport {
        spec,
        modes,
        method: Method::Numeric,
    })
}

fn classify_energy(spec: &WalkSpec, e: f64) -> Mode {
    if e < -2.0 {
        let y = -e / 2.0 + ((e / 2.0).powi(2) - 1.0).sqrt();
        Mode::Hyperbolic(hyperbolic_mode(spec.left, y, false))
    } else if e > 2.0 {
        let y = e / 2.0 + ((e / 2.0).powi(2) - 1.0).sqrt();
        Mode::Hyperbolic(hyperbolic_mode(-spec.left, y, true))
    } else {
        Mode::Goniometric(goniometric_mode(spec.left, (-e / 2.0).acos()))
    }
}

fn goniometric_mode(left: f64, p: f64) -> GoniometricMode {
    let eip = Complex64::from_polar(1.0, p);
    let (a, b) = if p == 0.0 {
        (Complex64::new(1.0, 0.0), Complex64::new(1.0 - left, 0.0))
    } else if p == PI {
        (Complex64::new(1.0, 0.0), Complex64::new(1.0 + left, 0.0))
    } else {
        (eip.conj() - left, left - eip)
    };
    GoniometricMode {
        momentum: p,
        energy: -2.0 * p.cos(),
        amplitude_a: a,
        amplitude_b: b,
    }
}

fn hyperbolic_mode(left: f64, y: f64, staggered: bool) -> HyperbolicMode {
    let e = y + 1.0 / y;
    HyperbolicMode {
        rate: y.ln(),
        energy: if staggered { e } else { -e },
        amplitude_c: 1.0 / y - left,
        amplitude_d: left - y,
        staggered,
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < NEAR_DEGENERATE
}

fn is_exactly_special(spec: &WalkSpec) -> bool {
    let (l, r) = (spec.left, spec.right);
    let exact = |a: f64, b: f64| (a == 1.0 && b == 1.0) || (a == -1.0 && b == -1.0);
    exact(l, r) || l.abs() * r.abs() == 1.0 && l.signum() == r.signum() || l == 0.0 || r == 0.0
}

/// Closed-form spectra for the special loop weights.
fn closed_form(spec: &WalkSpec) -> Option<Vec<Mode>> {
    let n = spec.n as f64;
    let (l, r) = (spec.left, spec.right);
    let band = |ps: Vec<f64>, left: f64| -> Vec<Mode> {
        ps.into_iter()
            .map(|p| Mode::Goniometric(goniometric_mode(left, p)))
            .collect()
    };
    if near(l, 1.0) && near(r, 1.0) {
        return Some(band(
            (0..=spec.n).map(|k| k as f64 * PI / (n + 1.0)).collect(),
            l,
        ));
    }
    if near(l, -1.0) && near(r, -1.0) {
        return Some(band(
            (1..=spec.n + 1)
                .map(|k| k as f64 * PI / (n + 1.0))
                .collect(),
            l,
        ));
    }
    let one_zero = |a: f64, b: f64| a == 1.0 && b == 0.0;
    if one_zero(l, r) || one_zero(r, l) {
        return Some(band(
            (0..=spec.n)
                .map(|k| (2 * k + 1) as f64 * PI / (2.0 * n + 3.0))
                .collect(),
            l,
        ));
    }
    if one_zero(-l, -r) || one_zero(-r, -l) {
        return Some(band(
            (0..=spec.n)
                .map(|k| PI - (2 * k + 1) as f64 * PI / (2.0 * n + 3.0))
                .collect(),
            l,
        ));
    }
    if l == 0.0 && r == 0.0 {
        return Some(band(
            (1..=spec.n + 1)
                .map(|k| k as f64 * PI / (n + 2.0))
                .collect(),
            l,
        ));
    }
    // Reciprocal loops (B, 1/B): one exact exponential mode y = B plus the (1,1) band without p = 0.
    if l * r > 0.0 && ((l * r).abs() - 1.0).abs() < 1e-14 && (l.abs() - 1.0).abs() > NEAR_DEGENERATE
    {
        let staggered = l < 0.0;
        let (sl, sr) = if staggered { (-l, -r) } else { (l, r) };
        let b = sl.max(sr);
        let mut modes: Vec<Mode> = vec![Mode::Hyperbolic(hyperbolic_mode(sl, b, staggered))];
        for k in 1..=spec.n {
            let p = k as f64 * PI / (n + 1.0);
            let p = if staggered { PI - p } else { p };
            modes.push(Mode::Goniometric(goniometric_mode(l, p)));
        }
        return Some(modes);
    }
    None
}

/// Plane-wave modes from the quantization condition, by increasing momentum.
/// Includes the `p = 0` and `p = pi` modes when `E = ∓2` is an eigenvalue.
pub fn solve_goniometric_momenta(spec: &WalkSpec, tol: f64) -> Result<Vec<GoniometricMode>> {
    let mut g: Vec<GoniometricMode> = solve_modes(spec, check_tol(tol)?)?
        .into_iter()
        .filter_map(|m| match m {
            Mode::Goniometric(g) => Some(g),
            _ => None,
        })
        .collect();
    g.sort_by(|a, b| a.momentum.total_cmp(&b.momentum));
    Ok(g)
}

/// Exponential modes below `-2`, at most one per loop weight above 1.
pub fn solve_hyperbolic_rates(spec: &WalkSpec, tol: f64) -> Result<Vec<HyperbolicMode>> {
    let mut h: Vec<HyperbolicMode> =
        exponential_roots(spec.left, spec.right, spec.n, check_tol(tol)?)?
            .into_iter()
            .map(|y| hyperbolic_mode(spec.left, y, false))
            .collect();
    h.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(h)
}

fn check_tol(tol: f64) -> Result<f64> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Error::Range(format!("tolerance {tol} must be positive")))
    }
}

/// Value of the E = -2 linear solution's right-boundary residual.
/// Zero means `-2` is an eigenvalue with eigenvector `1 + (1 - L) x`.
fn threshold_residual(left: f64, right: f64, n: usize) -> f64 {
    (1.0 - right) * (1.0 + (1.0 - left) * n as f64) + (1.0 - left)
}

fn solve_modes(spec: &WalkSpec, tol: f64) -> Result<Vec<Mode>> {
    let mut modes = Vec::with_capacity(spec.dim());
    let scale = 1.0 + spec.left.abs() + spec.right.abs();
    let threshold_tol = 1e-12 * scale * scale * spec.n as f64;
    if threshold_residual(spec.left, spec.right, spec.n).abs() <= threshold_tol {
        modes.push(Mode::Goniometric(goniometric_mode(spec.left, 0.0)));
    }
    if threshold_residual(-spec.left, -spec.right, spec.n).abs() <= threshold_tol {
        modes.push(Mode::Goniometric(goniometric_mode(spec.left, PI)));
    }
    for y in exponential_roots(spec.left, spec.right, spec.n, tol)? {
        modes.push(Mode::Hyperbolic(hyperbolic_mode(spec.left, y, false)));
    }
    for y in exponential_roots(-spec.left, -spec.right, spec.n, tol)? {
        modes.push(Mode::Hyperbolic(hyperbolic_mode(-spec.left, y, true)));
    }
    let wanted = spec.dim().checked_sub(modes.len()).ok_or_else(|| {
        Error::Inconsistent(format!(
            "{} exponential/threshold modes exceed dimension",
            modes.len()
        ))
    })?;
    let mut density = 8 * spec.dim();
    let momenta = loop {
        let ps = band_roots(spec, tol, density);
        if ps.len() == wanted {
            break ps;
        }
        if ps.len() + 1 == wanted {
            // A mode closer to a band edge than the scans resolve sits within ~1e-10 of ±2.
            let lower = threshold_residual(spec.left, spec.right, spec.n).abs();
            let upper = threshold_residual(-spec.left, -spec.right, spec.n).abs();
            let near_edge = 1e-4 * scale * scale * spec.n as f64;
            if lower.min(upper) < near_edge {
                let p = if lower <= upper { 0.0 } else { PI };
                modes.push(Mode::Goniometric(goniometric_mode(spec.left, p)));
                break ps;
            }
        }
        if ps.len() > wanted || density > 64 * spec.dim() {
            return Err(Error::Bracketing(format!(
                "found {} plane-wave roots, expected {wanted} for {spec:?}",
                ps.len()
            )));
        }
        density *= 2;
    };
    modes.extend(
        momenta
            .into_iter()
            .map(|p| Mode::Goniometric(goniometric_mode(spec.left, p))),
    );
    Ok(modes)
}

fn boundary_phase(x: f64, p: f64) -> f64 {
    // Imaginary part sin p > 0 on (0, pi), so atan2 stays on one continuous branch.
    p.sin().atan2(x - p.cos())
}

/// Continuous phase; eigen-momenta are where it takes integer values.
fn band_phase(spec: &WalkSpec, p: f64) -> f64 {
    (spec.n as f64 * p - boundary_phase(spec.right, p) - boundary_phase(spec.left, p)) / PI
}

fn band_roots(spec: &WalkSpec, tol: f64, density: usize) -> Vec<f64> {
    let h = PI / density as f64;
    let mut grid: Vec<f64> = (1..density).map(|j| j as f64 * h).collect();
    // Boundary phases can turn sharply near the band edges when a loop weight is close to ±1.
    for k in 1..=45 {
        let t = h * 0.5f64.powi(k);
        if t < EDGE_FLOOR {
            break;
        }
        grid.push(t);
        grid.push(PI - t);
    }
    grid.push(EDGE_FLOOR);
    grid.push(PI - EDGE_FLOOR);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let vals: Vec<f64> = grid.iter().map(|&p| band_phase(spec, p)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (ga, gb) = (vals[i], vals[i + 1]);
        let lo = ga.min(gb).ceil() as i64;
        let hi = ga.max(gb).floor() as i64;
        for m in lo..=hi {
            let m = m as f64;
            if ga == m {
                // Exact hit on a grid point counts only if the neighbours straddle it.
                if i > 0 && (vals[i - 1] - m) * (gb - m) < 0.0 {
                    roots.push(grid[i]);
                }
                continue;
            }
            if gb == m {
                continue;
            }
            let f = |p: f64| band_phase(spec, p) - m;
            roots.push(bisect(f, grid[i], grid[i + 1], tol * 1e-2));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < tol);
    roots
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol.max(f64::EPSILON * mid.abs()) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Smallest rate or momentum resolved by the scans; closer modes are within
/// about 1e-10 of the band edge and are picked up by the threshold fallback.
const EDGE_FLOOR: f64 = 1e-5;

/// `sinh(k q) e^{-m q}` without overflow for large arguments.
fn scaled_sinh(k: f64, m: f64, q: f64) -> f64 {
    if m * q < 300.0 {
        (k * q).sinh() * (-m * q).exp()
    } else {
        0.5 * (((k - m) * q).exp() - (-(k + m) * q).exp())
    }
}

fn scaled_cosh(k: f64, m: f64, q: f64) -> f64 {
    if m * q < 300.0 {
        (k * q).cosh() * (-m * q).exp()
    } else {
        0.5 * (((k - m) * q).exp() + (-(k + m) * q).exp())
    }
}

/// Roots `y = e^q > 1` of `y^{2N}(R - y)(L - y) = (R - 1/y)(L - 1/y)`.
///
/// Multiplying through by `y^{-N}` turns the condition into
/// `RL sinh(Nq) - (R + L) sinh((N+1)q) + sinh((N+2)q) = 0`, which keeps full
/// relative accuracy as `q -> 0`.
fn exponential_roots(left: f64, right: f64, n: usize, tol: f64) -> Result<Vec<f64>> {
    if left <= 1.0 && right <= 1.0 {
        // H^(L,R) - H^(1,1) is positive semidefinite, so nothing lies below -2.
        return Ok(vec![]);
    }
    let nf = n as f64;
    let top = (left.max(right) + 2.0).ln();
    let mut marks = vec![];
    for x in [left, right] {
        if x > 1.0 {
            marks.push(x.ln());
        }
    }
    let mut qs = if left == right {
        // Symmetric loops factor into odd and even parts.
        let (a, b) = (nf / 2.0, nf / 2.0 + 1.0);
        let odd = |q: f64| left * scaled_sinh(a, b, q) - scaled_sinh(b, b, q);
        let even = |q: f64| left * scaled_cosh(a, b, q) - scaled_cosh(b, b, q);
        let mut r = scan_with(odd, EDGE_FLOOR, top, tol, &marks);
        r.extend(scan_with(even, EDGE_FLOOR, top, tol, &marks));
        r
    } else {
        let m = nf + 2.0;
        let f = |q: f64| {
            left * right * scaled_sinh(nf, m, q) - (left + right) * scaled_sinh(nf + 1.0, m, q)
                + scaled_sinh(nf + 2.0, m, q)
        };
        scan_with(f, EDGE_FLOOR, top, tol, &marks)
    };
    qs.sort_by(f64::total_cmp);
    if qs.len() > 2 {
        return Err(Error::Inconsistent(format!(
            "{} exponential roots for ({left}, {right})",
            qs.len()
        )));
    }
    Ok(qs.into_iter().map(f64::exp).collect())
}

/// Sign changes of `f` on `[lo, hi]`, with geometric refinement just above `lo`.
fn scan_with<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, extra: &[f64]) -> Vec<f64> {
    let cells = 4096;
    let h = (hi - lo) / cells as f64;
    let mut grid: Vec<f64> = (0..=cells).map(|j| lo + j as f64 * h).collect();
    for k in 1..=30 {
        grid.push(lo + h * 0.5f64.powi(k));
    }
    grid.extend(extra.iter().copied().filter(|&y| y > lo && y < hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let vals: Vec<f64> = grid.iter().map(|&y| f(y)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            if i > 0 && i + 1 < grid.len() && (vals[i - 1] < 0.0) != (vals[i + 1] < 0.0) {
                roots.push(grid[i]);
            }
            continue;
        }
        if i + 1 < grid.len() && vals[i + 1] != 0.0 && (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
            roots.push(bisect(&f, grid[i], grid[i + 1], tol * 1e-3));
        }
    }
    roots
}

/// Unit eigenvector of mode `index` (ascending energy) built from the mode formulas.
pub fn analytic_eigenvector(spec: &WalkSpec, index: usize) -> Result<Vec<f64>> {
    let rep = analytic_spectrum(spec, ROOT_TOL)?;
    let mode = *rep
        .modes
        .get(index)
        .ok_or_else(|| Error::Index(format!("mode {index} of {}", rep.modes.len())))?;
    mode_vector(spec, &mode)
}

pub fn mode_vector(spec: &WalkSpec, mode: &Mode) -> Result<Vec<f64>> {
    let n = spec.n;
    let mut v: Vec<f64> = match mode {
        Mode::Goniometric(g) => {
            let p = g.momentum;
            if p == 0.0 || p == PI {
                let s: f64 = if p == 0.0 { 1.0 } else { -1.0 };
                (0..=n)
                    .map(|x| s.powi(x as i32) * (g.amplitude_a.re + g.amplitude_b.re * x as f64))
                    .collect()
            } else {
                (0..=n)
                    .map(|x| (p * (x as f64 + 1.0)).sin() - spec.left * (p * x as f64).sin())
                    .collect()
            }
        }
        Mode::Hyperbolic(h) => {
            let (l, r) = if h.staggered {
                (-spec.left, -spec.right)
            } else {
                (spec.left, spec.right)
            };
            let y = h.rate.exp();
            let mut v = exponential_profile(l, r, n, y)
                .unwrap_or_else(|| inverse_iteration(&build_walk_matrix(spec), mode.energy()));
            if h.staggered {
                v.iter_mut().enumerate().for_each(|(x, a)| {
                    if x % 2 == 1 {
                        *a = -*a
                    }
                });
            }
            v
        }
    };
    let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::Inconsistent("degenerate mode vector".into()));
    }
    v.iter_mut().for_each(|a| *a /= nrm);
    fix_sign(&mut v);
    Ok(v)
}

/// `c y^{-x} + d y^x`, written so that no power of `y` above 1 is formed.
fn exponential_profile(l: f64, r: f64, n: usize, y: f64) -> Option<Vec<f64>> {
    let nf = n as f64;
    let pw = |k: f64| (k * y.ln()).exp();
    if l == r {
        // Symmetric loops: y - L = ∓ y^{-N}(L - 1/y) decides the parity.
        let s = if l - y > 0.0 { 1.0 } else { -1.0 };
        return Some(
            (0..=n)
                .map(|x| pw(-(x as f64)) - s * pw(x as f64 - nf))
                .collect(),
        );
    }
    if (l - y).abs() <= (r - y).abs() {
        // Localized at the left end; the right boundary fixes the small growing part.
        if (r - y).abs() < 1e-6 * r.abs().max(1.0) {
            return None;
        }
        let k = (1.0 / y - r) / (r - y);
        Some(
            (0..=n)
                .map(|x| pw(-(x as f64)) + k * pw(x as f64 - 2.0 * nf))
                .collect(),
        )
    } else {
        if (l - y).abs() < 1e-6 * l.abs().max(1.0) {
            return None;
        }
        let k = (1.0 / y - l) / (l - y);
        Some(
            (0..=n)
                .map(|x| pw(x as f64 - nf) + k * pw(-(x as f64) - nf))
                .collect(),
        )
    }
}

/// Two steps of inverse iteration at a known eigenvalue.
fn inverse_iteration(t: &SymTridiagonal, energy: f64) -> Vec<f64> {
    let n = t.dim();
    let mut v = vec![1.0; n];
    for _ in 0..3 {
        v = tridiagonal_solve(t, energy, &v);
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= nrm);
    }
    v
}

/// Solves `(T - shift) x = b` by Gaussian elimination with partial pivoting.
fn tridiagonal_solve(t: &SymTridiagonal, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = t.dim();
    let mut dense = t.to_dense();
    for i in 0..n {
        dense[(i, i)] -= shift;
    }
    let lu = dense.clone().lu();
    if let Some(x) = lu.solve(&nalgebra::DVector::from_column_slice(b)) {
        if x.iter().all(|a| a.is_finite()) {
            return x.iter().copied().collect();
        }
    }
    // Exactly singular: nudge the shift by a relative ulp.
    let bump = f64::EPSILON * (1.0 + shift.abs()) * 16.0;
    let mut m: DMatrix<f64> = dense;
    for i in 0..n {
        m[(i, i)] -= bump;
    }
    m.lu()
        .solve(&nalgebra::DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
        .unwrap_or_else(|| vec![1.0; n])
}

/// Normalized amplitudes at sites 0 and N of mode `index`.
pub fn endpoint_amplitudes(spec: &WalkSpec, index: usize) -> Result<(f64, f64)> {
    let v = analytic_eigenvector(spec, index)?;
    Ok((v[0], v[spec.n]))
}

/// `sum_x (B|x> - |x+1>)(B<x| - <x+1|)`, built term by term.
pub fn biased_walk(n: usize, bias: f64) -> Result<SymTridiagonal> {
    if n < 1 {
        return domain("walk length N must be at least 1");
    }
    if !(bias > 1.0) || !bias.is_finite() {
        return domain(format!("bias must exceed 1, got {bias}"));
    }
    let mut diag = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    for x in 0..n {
        diag[x] += bias * bias;
        diag[x + 1] += 1.0;
        off[x] -= bias;
    }
    Ok(SymTridiagonal::new(diag, off))
}

/// Zero-energy state of the biased walk, amplitudes proportional to `B^x`.
pub fn biased_ground_state(n: usize, bias: f64) -> Result<Vec<f64>> {
    biased_walk(n, bias)?;
    // Normalize relative to the largest amplitude B^N to avoid overflow.
    let mut v: Vec<f64> = (0..=n).map(|x| bias.powf(x as f64 - n as f64)).collect();
    let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= nrm);
    Ok(v)
}

/// Hamiltonian of the middle adiabatic section, `2I + H^(2-2s, 2s)_N`.
pub fn middle_section(n: usize, s: f64) -> Result<SymTridiagonal> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Range(format!("s = {s} outside [0, 1]")));
    }
    shifted_walk(&WalkSpec::new(n, 2.0 - 2.0 * s, 2.0 * s)?, 2.0)
}
