//! Three-section adiabatic schedule in the reduced `(N + 1)`-dimensional
//! history basis.
//!
//! `H_ends = -|0><0| + |N><N|` and `H_prop = 2I + H^(1,1)`. The schedule turns
//! on `H_prop` over `T1`, swings the endpoint term from `+H_ends` to `-H_ends`
//! over `T2`, then turns `H_prop` back off over another `T1`.

use nalgebra::DMatrix;
use ode_solvers::{DVector, Dopri5, OutputType, System};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{dense_eigenvalues, SymTridiagonal};
use crate::walk::{middle_section, shifted_walk, WalkSpec};

/// Relative tolerance of the integrator.
pub const RTOL: f64 = 1e-9;

/// Monotone map `u -> s` on `[0, 1]` for the middle section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Linear,
    /// Piecewise-linear table of `(u, s)` knots from `(0, 0)` to `(1, 1)`.
    Table(Vec<(f64, f64)>),
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let Profile::Table(knots) = self else {
            return Ok(());
        };
        if knots.len() < 2 {
            return domain("profile needs at least two knots");
        }
        let (first, last) = (knots[0], knots[knots.len() - 1]);
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return domain("profile must run from (0, 0) to (1, 1)");
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                return domain("profile knots must increase in u and not decrease in s");
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Profile::Linear => u,
            Profile::Table(knots) => {
                let k = knots
                    .partition_point(|&(x, _)| x <= u)
                    .clamp(1, knots.len() - 1);
                let (x0, s0) = knots[k - 1];
                let (x1, s1) = knots[k];
                s0 + (s1 - s0) * (u - x0) / (x1 - x0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub n: usize,
    pub t1: f64,
    pub t2: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    RampUp,
    Swing,
    RampDown,
}

impl ScheduleSpec {
    pub fn new(n: usize, t1: f64, t2: f64, profile: Profile) -> Result<Self> {
        if n < 1 {
            return domain("schedule needs N >= 1");
        }
        if !(t1 > 0.0) || !(t2 >= 0.0) || !t1.is_finite() || !t2.is_finite() {
            return domain(format!("durations T1={t1}, T2={t2}"));
        }
        profile.validate()?;
        Ok(Self { n, t1, t2, profile })
    }

    pub fn linear(n: usize, t1: f64, t2: f64) -> Result<Self> {
        Self::new(n, t1, t2, Profile::Linear)
    }

    pub fn total_time(&self) -> f64 {
        2.0 * self.t1 + self.t2
    }

    pub fn section(&self, t: f64) -> Result<Section> {
        if !(0.0..=self.total_time()).contains(&t) {
            return Err(Error::Range(format!(
                "t={t} outside [0, {}]",
                self.total_time()
            )));
        }
        Ok(if t <= self.t1 {
            Section::RampUp
        } else if t <= self.t1 + self.t2 {
            Section::Swing
        } else {
            Section::RampDown
        })
    }

    /// `(a, b)` with `H(t) = a H_ends + b H_prop`.
    ///
    /// The ramps are scaled by `1 / T1` so the schedule is continuous.
    pub fn coefficients(&self, t: f64) -> Result<(f64, f64)> {
        Ok(match self.section(t)? {
            Section::RampUp => (1.0, t / self.t1),
            Section::Swing => {
                let u = if self.t2 > 0.0 {
                    (t - self.t1) / self.t2
                } else {
                    1.0
                };
                (1.0 - 2.0 * self.profile.eval(u), 1.0)
            }
            Section::RampDown => (-1.0, (self.total_time() - t) / self.t1),
        })
    }
}

pub fn h_ends(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = -1.0;
    m[(n, n)] = 1.0;
    m
}

pub fn h_prop(n: usize) -> Result<DMatrix<f64>> {
    Ok(shifted_walk(&WalkSpec::new(n, 1.0, 1.0)?, 2.0)?.to_dense())
}

/// Tridiagonal form of `a H_ends + b H_prop`.
fn combination(n: usize, a: f64, b: f64) -> SymTridiagonal {
    let mut diag = vec![b * 2.0; n + 1];
    diag[0] += -b - a;
    diag[n] += -b + a;
    SymTridiagonal::new(diag, vec![-b; n])
}

pub fn reduced_hamiltonian(spec: &ScheduleSpec, t: f64) -> Result<DMatrix<f64>> {
    let (a, b) = spec.coefficients(t)?;
    Ok(combination(spec.n, a, b).to_dense())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub t: f64,
    pub section: Section,
    pub gap: f64,
    pub ground: f64,
}

fn gap_of(m: &SymTridiagonal) -> Result<(f64, f64)> {
    let e = m.eigenvalues()?;
    Ok((e[1] - e[0], e[0]))
}

/// Gap along the schedule, `grid_points` per section, endpoints included.
pub fn gap_profile(spec: &ScheduleSpec, grid_points: usize) -> Result<Vec<GapPoint>> {
    if grid_points < 3 {
        return domain("gap profile needs at least 3 grid points");
    }
    let starts = [0.0, spec.t1, spec.t1 + spec.t2];
    let lengths = [spec.t1, spec.t2, spec.t1];
    let sections = [Section::RampUp, Section::Swing, Section::RampDown];
    let mut out = Vec::with_capacity(3 * grid_points);
    for k in 0..3 {
        for i in 0..grid_points {
            let t = starts[k] + lengths[k] * i as f64 / (grid_points - 1) as f64;
            let t = t.min(spec.total_time());
            let (a, b) = match sections[k] {
                // Evaluate the middle section by its own parameter so both
                // of its endpoints are included even when T2 = 0.
                Section::Swing => (
                    1.0 - 2.0 * spec.profile.eval(i as f64 / (grid_points - 1) as f64),
                    1.0,
                ),
                _ => spec.coefficients(t)?,
            };
            let (gap, ground) = gap_of(&combination(spec.n, a, b))?;
            out.push(GapPoint {
                t,
                section: sections[k],
                gap,
                ground,
            });
        }
    }
    Ok(out)
}

/// Gap of the middle section `2I + H^(2-2s, 2s)`.
pub fn swing_gap(n: usize, s: f64) -> Result<f64> {
    Ok(gap_of(&middle_section(n, s)?)?.0)
}

/// Gap of the middle section at offset `x = (2s - 1) / 4`, i.e. of
/// `2I + H^(1 - 4x, 1 + 4x)`.
pub fn gap_at_offset(n: usize, x: f64) -> Result<f64> {
    swing_gap(n, 0.5 + 2.0 * x)
}

/// Location and value of the smallest middle-section gap, refined by a
/// golden-section search around the best of a coarse grid.
pub fn min_swing_gap(n: usize) -> Result<(f64, f64)> {
    let grid = 64;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=grid {
        let s = i as f64 / grid as f64;
        let g = swing_gap(n, s)?;
        if g < best.1 {
            best = (s, g);
        }
    }
    let h = 1.0 / grid as f64;
    let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(1.0));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (swing_gap(n, c)?, swing_gap(n, d)?);
    while hi - lo > 1e-10 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = swing_gap(n, c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = swing_gap(n, d)?;
        }
    }
    let s = 0.5 * (lo + hi);
    let g = swing_gap(n, s)?;
    Ok(if g < best.1 { (s, g) } else { best })
}

/// Middle-section profile that slows down where the gap is small:
/// `ds/du ∝ gap(s)^2`, tabulated on `points` knots.
pub fn local_profile(n: usize, points: usize) -> Result<Profile> {
    if points < 2 {
        return domain("local profile needs at least two knots");
    }
    let fine = 8 * points;
    let mut u = vec![0.0];
    for i in 0..fine {
        let s_mid = (i as f64 + 0.5) / fine as f64;
        let g = swing_gap(n, s_mid)?;
        u.push(u[i] + 1.0 / (g * g));
    }
    let total = u[fine];
    let mut knots: Vec<(f64, f64)> = (0..=fine)
        .step_by(8)
        .map(|i| (u[i] / total, i as f64 / fine as f64))
        .collect();
    knots[0] = (0.0, 0.0);
    *knots.last_mut().unwrap() = (1.0, 1.0);
    Ok(Profile::Table(knots))
}

struct Schrodinger {
    spec: ScheduleSpec,
    /// Each section is integrated in local time starting at 0.
    offset: f64,
}

impl System<f64, DVector<f64>> for Schrodinger {
    // psi = re + i im, d/dt psi = -i H psi.
    fn system(&self, t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let m = self.spec.n + 1;
        let t = (self.offset + t).clamp(0.0, self.spec.total_time());
        let (a, b) = self
            .spec
            .coefficients(t)
            .expect("time clamped to the schedule");
        let h = combination(self.spec.n, a, b);
        let y = y.as_slice();
        let d_re = h.matvec(&y[m..]);
        let d_im = h.matvec(&y[..m]);
        for i in 0..m {
            dy[i] = d_re[i];
            dy[m + i] = -d_im[i];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evolution {
    /// `|<N|psi(T)>|^2`.
    pub fidelity: f64,
    /// Largest `| ||psi|| - 1 |` seen at section boundaries.
    pub norm_error: f64,
    pub steps: u64,
}

/// Longest stretch integrated in one solver call; only the endpoint of each
/// stretch is kept.
const CHUNK: f64 = 64.0;

fn run(spec: &ScheduleSpec, rtol: f64) -> Result<(DVector<f64>, f64, u64)> {
    let m = spec.n + 1;
    let mut y = DVector::zeros(2 * m);
    y[0] = 1.0;
    let bounds = [0.0, spec.t1, spec.t1 + spec.t2, spec.total_time()];
    let mut norm_error: f64 = 0.0;
    let mut steps = 0u64;
    for w in bounds.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let pieces = ((w[1] - w[0]) / CHUNK).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let a = w[0] + (w[1] - w[0]) * k as f64 / pieces as f64;
            let b = if k + 1 == pieces {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * (k + 1) as f64 / pieces as f64
            };
            let len = b - a;
            let sys = Schrodinger {
                spec: spec.clone(),
                offset: a,
            };
            let mut solver = Dopri5::from_param(
                sys,
                0.0,
                len,
                len,
                y.clone(),
                rtol,
                rtol * 1e-3,
                0.9,
                0.04,
                0.2,
                10.0,
                len,
                0.0,
                u32::MAX,
                u32::MAX,
                OutputType::Sparse,
            );
            let stats = solver
                .integrate()
                .map_err(|e| Error::IntegratorTolerance(e.to_string()))?;
            steps += (stats.accepted_steps + stats.rejected_steps) as u64;
            let (ts, ys) = solver.results().get();
            match (ts.last(), ys.last()) {
                (Some(&t), Some(last)) if (t - len).abs() <= 1e-9 * len.max(1.0) => {
                    y = last.clone()
                }
                _ => {
                    return Err(Error::IntegratorTolerance(format!(
                        "integration stopped before t={b}"
                    )))
                }
            }
        }
        norm_error = norm_error.max((y.norm() - 1.0).abs());
    }
    Ok((y, norm_error, steps))
}

/// Evolves `|0>` through the schedule and returns the overlap with `|N>`.
///
/// The run is repeated at a 32x tighter tolerance (about one step halving for
/// a fifth order method) and the two fidelities must agree.
pub fn integrate_schedule(spec: &ScheduleSpec) -> Result<Evolution> {
    let (y, norm_error, steps) = run(spec, RTOL)?;
    let (y_fine, _, _) = run(spec, RTOL / 32.0)?;
    let n = spec.n;
    let fid = |y: &DVector<f64>| y[n] * y[n] + y[2 * n + 1] * y[2 * n + 1];
    let (f, f_fine) = (fid(&y), fid(&y_fine));
    if (f - f_fine).abs() > 1e-6 {
        return Err(Error::IntegratorTolerance(format!(
            "fidelity {f} vs {f_fine} at tighter tolerance"
        )));
    }
    if norm_error > 1e-8 {
        return Err(Error::IntegratorTolerance(format!(
            "norm drift {norm_error:.2e}"
        )));
    }
    Ok(Evolution {
        fidelity: f_fine,
        norm_error,
        steps,
    })
}

/// Fidelities for `T2 = c, 2c, 4c, ...` (`rungs` values).
pub fn fidelity_ladder(n: usize, t1: f64, c: f64, rungs: usize) -> Result<Vec<(f64, f64)>> {
    (0..rungs)
        .map(|k| {
            let t2 = c * (1u64 << k) as f64;
            Ok((
                t2,
                integrate_schedule(&ScheduleSpec::linear(n, t1, t2)?)?.fidelity,
            ))
        })
        .collect()
}

/// Spectrum of the reduced Hamiltonian at time `t`, ascending.
pub fn reduced_spectrum(spec: &ScheduleSpec, t: f64) -> Result<Vec<f64>> {
    dense_eigenvalues(&reduced_hamiltonian(spec, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_with_endpoint_term() {
        let spec = ScheduleSpec::linear(4, 2.0, 3.0).unwrap();
        let h = reduced_hamiltonian(&spec, 0.0).unwrap();
        assert_eq!(h, h_ends(4));
        assert!(matches!(
            reduced_hamiltonian(&spec, 7.5),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn table_profile_interpolates() {
        let p = Profile::Table(vec![(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]);
        p.validate().unwrap();
        assert!((p.eval(0.25) - 0.1).abs() < 1e-15);
        assert!((p.eval(0.75) - 0.6).abs() < 1e-15);
        assert!(Profile::Table(vec![(0.0, 0.0), (1.0, 0.5)])
            .validate()
            .is_err());
    }

    #[test]
    fn free_evolution_keeps_norm() {
        let spec = ScheduleSpec::linear(3, 1.0, 2.0).unwrap();
        let e = integrate_schedule(&spec).unwrap();
        assert!(e.norm_error < 1e-8);
        assert!(e.fidelity > 0.0 && e.fidelity <= 1.0);
    }
}
