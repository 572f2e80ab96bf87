use clockforge::adiabatic::*;
use clockforge::walk::middle_section;
use proptest::prelude::*;
use std::f64::consts::PI;

fn swing_closed_form(n: usize) -> f64 {
    2.0 - 2.0 * (PI / (n as f64 + 1.0)).cos()
}

#[test]
fn initial_hamiltonian_is_endpoint_term() {
    let spec = ScheduleSpec::linear(8, 5.0, 5.0).unwrap();
    let h = reduced_hamiltonian(&spec, 0.0).unwrap();
    assert_eq!(h, h_ends(8));
    let e = reduced_spectrum(&spec, 0.0).unwrap();
    assert_eq!(e[0], -1.0);
    assert!(e[1] - e[0] >= 0.5);
}

#[test]
fn middle_of_swing_is_symmetric_walk() {
    let spec = ScheduleSpec::linear(8, 3.0, 10.0).unwrap();
    let h = reduced_hamiltonian(&spec, 8.0).unwrap();
    assert!((h - h_prop(8).unwrap()).norm() < 1e-15);
    assert!((swing_gap(8, 0.5).unwrap() - 0.12061).abs() < 1e-5);
}

#[test]
fn swing_matches_middle_walk_entrywise() {
    let spec = ScheduleSpec::linear(6, 2.0, 7.0).unwrap();
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let h = reduced_hamiltonian(&spec, 2.0 + 7.0 * s).unwrap();
        let m = middle_section(6, s).unwrap().to_dense();
        assert!((h - m).amax() < 1e-14, "s={s}");
    }
}

#[test]
fn schedule_is_continuous() {
    let spec = ScheduleSpec::linear(5, 3.0, 4.0).unwrap();
    for t in [3.0, 7.0] {
        let a = reduced_hamiltonian(&spec, t - 1e-13).unwrap();
        let b = reduced_hamiltonian(&spec, t + 1e-13).unwrap();
        assert!((a - b).amax() <= 1e-12);
    }
}

#[test]
fn ramp_gaps_stay_above_one_half() {
    for n in [4, 8, 16, 32] {
        let spec = ScheduleSpec::linear(n, 1.0, 1.0).unwrap();
        let prof = gap_profile(&spec, 101).unwrap();
        for p in prof.iter().filter(|p| p.section != Section::Swing) {
            assert!(p.gap >= 0.5, "n={n} t={} gap={}", p.t, p.gap);
        }
        let swing_min = prof
            .iter()
            .filter(|p| p.section == Section::Swing)
            .map(|p| p.gap)
            .fold(f64::INFINITY, f64::min);
        assert!((swing_min - swing_closed_form(n)).abs() < 1e-8);
    }
}

#[test]
fn minimum_gap_sits_at_midpoint() {
    for n in [8, 16, 32, 64] {
        let (s, g) = min_swing_gap(n).unwrap();
        assert!((s - 0.5).abs() < 1e-4);
        assert!((g - swing_closed_form(n)).abs() < 1e-8);
    }
    // pi^2/(N+1)^2 is within 1% from N = 16 on; N = 8 is off by 1.01%.
    for n in [16, 32, 64] {
        let approx = PI * PI / ((n + 1) as f64).powi(2);
        assert!((min_swing_gap(n).unwrap().1 - approx).abs() / approx < 0.01);
    }
}

#[test]
fn gap_grows_quadratically_off_center() {
    let n = 64;
    for k in 0..=20 {
        let x = 0.1 * k as f64 / 20.0;
        let bound = x * x + PI * PI / ((n + 1) as f64).powi(2);
        assert!(gap_at_offset(n, x).unwrap() >= 0.8 * bound);
        assert!(gap_at_offset(n, -x).unwrap() >= 0.8 * bound);
    }
}

#[test]
fn slow_middle_reaches_target() {
    let e = integrate_schedule(&ScheduleSpec::linear(4, 40.0, 160.0).unwrap()).unwrap();
    assert!(e.fidelity >= 0.99, "{}", e.fidelity);
    assert!(e.norm_error <= 1e-8);
}

#[test]
fn sudden_middle_fails() {
    for n in [8, 12] {
        let e = integrate_schedule(&ScheduleSpec::linear(n, 20.0, 0.0).unwrap()).unwrap();
        assert!(e.fidelity < 0.5);
    }
}

#[test]
fn local_profile_is_monotone_and_comparable() {
    let prof = local_profile(8, 33).unwrap();
    prof.validate().unwrap();
    let lin = integrate_schedule(&ScheduleSpec::linear(8, 20.0, 100.0).unwrap()).unwrap();
    let loc = integrate_schedule(&ScheduleSpec::new(8, 20.0, 100.0, prof).unwrap()).unwrap();
    for f in [lin.fidelity, loc.fidelity] {
        assert!(f > 0.0 && f <= 1.0 + 1e-8);
    }
}

#[test]
fn rejects_bad_durations() {
    assert!(ScheduleSpec::linear(4, 0.0, 1.0).is_err());
    assert!(ScheduleSpec::linear(4, 1.0, -1.0).is_err());
    assert!(gap_profile(&ScheduleSpec::linear(4, 1.0, 1.0).unwrap(), 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn swing_equals_middle_walk(n in 2usize..30, s in 0.0f64..=1.0) {
        let spec = ScheduleSpec::linear(n, 1.0, 1.0).unwrap();
        let h = reduced_hamiltonian(&spec, 1.0 + s).unwrap();
        prop_assert!((h - middle_section(n, s).unwrap().to_dense()).amax() < 1e-14);
    }

    #[test]
    fn spectrum_symmetric_under_reflection(n in 2usize..30, s in 0.0f64..0.5) {
        prop_assert!((swing_gap(n, s).unwrap() - swing_gap(n, 1.0 - s).unwrap()).abs() < 1e-10);
    }
}
