use clockforge::count::binomial;
use clockforge::fit::fit_exponent;
use clockforge::linalg::{dense_eigenvalues, dense_eigh};
use clockforge::spin::{restrict, sector_decompose};
use clockforge::tuning::*;
use proptest::prelude::*;

fn brute_no11(n: usize, z: usize) -> u64 {
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == z && m & (m >> 1) == 0)
        .count() as u64
}

fn ones(label: &str) -> i64 {
    label.bytes().filter(|&b| b == b'1').count() as i64
}

#[test]
fn no11_counts_match_enumeration() {
    assert_eq!(count_no11(5, 2), 6);
    assert_eq!(count_no11(7, 4), 1);
    assert_eq!(count_no11(9, 0), 1);
    for n in 1..=16 {
        for z in 0..=n {
            assert_eq!(count_no11(n, z), brute_no11(n, z), "N={n} z={z}");
        }
    }
}

#[test]
fn three_site_sectors() {
    let spec = TuningSpec::new(3, 0.05).unwrap();
    let op = build_tuned(&spec).unwrap();
    let sectors = sector_decompose(&op, ones).unwrap();
    assert_eq!(sectors.len(), 4);
    let z0 = restrict(&op, &sectors[0].indices).unwrap();
    assert!((z0[(0, 0)] - 0.05).abs() < 1e-15);
    let z1 = dense_eigh(&restrict(&op, &sectors[1].indices).unwrap()).unwrap();
    assert!(z1.values[0].abs() < 1e-14);
    let overlap: f64 = z1.vectors.column(0).iter().sum::<f64>().powi(2) / 3.0;
    assert!((overlap - 1.0).abs() < 1e-12);
    let z3 = restrict(&op, &sectors[3].indices).unwrap();
    assert!((z3[(0, 0)] - (2.0 - 2.0 * 0.05)).abs() < 1e-14);
}

#[test]
fn single_excitation_diagonal_is_zero() {
    let spec = TuningSpec::standard(6).unwrap();
    let h = sector_matrix(&spec, 1).unwrap();
    // Pulse contribution on the diagonal is 1 at the ends and 2 inside.
    for i in 0..6 {
        let pulse = if i == 0 || i == 5 { 1.0 } else { 2.0 };
        assert!((h[(i, i)] - pulse).abs() < 1e-15);
    }
}

#[test]
fn sectors_match_full_space() {
    for n in [4, 6, 8] {
        let spec = TuningSpec::new(n, 0.03).unwrap();
        let op = build_tuned(&spec).unwrap();
        for s in sector_decompose(&op, ones).unwrap() {
            let full = restrict(&op, &s.indices).unwrap();
            assert!(
                (full - sector_matrix(&spec, s.key as usize).unwrap()).amax() < 1e-14,
                "N={n} z={}",
                s.key
            );
        }
    }
}

#[test]
fn geometric_example_five_two() {
    let b = geometric_bound(5, 2).unwrap();
    assert_eq!((b.all, b.no11), (10, 6));
    assert!((b.sin2_half - (1.0 - 0.6f64.sqrt()) / 2.0).abs() < 1e-15);
    assert!((b.sin2_half - 0.1127).abs() < 1e-4);
    assert!(b.sin2_half >= 0.1);
    assert_eq!(b.lambda1_pairs, 1.0);
}

#[test]
fn crowded_sectors_have_no_free_strings() {
    let b = geometric_bound(7, 5).unwrap();
    assert_eq!(b.no11, 0);
    assert_eq!(b.cos_theta, 0.0);
    assert_eq!(b.sin2_half, 0.5);
}

#[test]
fn geometric_lemma_holds() {
    for n in 4..=12 {
        let spec = TuningSpec::standard(n).unwrap();
        for z in 2..=n {
            let b = geometric_bound(n, z).unwrap();
            let shifted = sector_energy(&spec, z).unwrap().e0 + (z as f64 - 1.0) * spec.v;
            assert!(
                shifted >= b.bound - 1e-10,
                "N={n} z={z} shifted={shifted} bound={}",
                b.bound
            );
        }
    }
    let spec = TuningSpec::standard(8).unwrap();
    let e = sector_energy(&spec, 2).unwrap();
    assert!(e.e0 >= e.lower_bound.unwrap() - 1e-12);
}

#[test]
fn study_at_ten() {
    let s = sector_spectrum_study(&TuningSpec::new(10, 1e-3).unwrap()).unwrap();
    assert!(s.ground_energy.abs() < 1e-12);
    assert!(s.ground_overlap > 1.0 - 1e-10);
    assert!((s.sectors[0].e0 - 1e-3).abs() < 1e-15);
    let others = s
        .sectors
        .iter()
        .filter(|e| e.z >= 2)
        .map(|e| e.e0)
        .fold(f64::INFINITY, f64::min);
    assert!((s.gap - 1e-3f64.min(others).min(s.single_gap)).abs() < 1e-15);
    assert!(s.gap > 0.0 && s.bound_satisfied);
}

#[test]
fn study_matches_full_diagonalization() {
    let spec = TuningSpec::new(8, 0.02).unwrap();
    let s = sector_spectrum_study(&spec).unwrap();
    let e = dense_eigenvalues(&build_tuned(&spec).unwrap().to_dense()).unwrap();
    assert!((s.ground_energy - e[0]).abs() < 1e-12);
    assert!((s.gap - (e[1] - e[0])).abs() < 1e-12);
}

#[test]
fn lanczos_sectors_agree_with_dense() {
    // N=11, z=5 has 462 states and goes through Lanczos.
    let spec = TuningSpec::standard(11).unwrap();
    let e = sector_energy(&spec, 5).unwrap();
    let dense = dense_eigenvalues(&sector_matrix(&spec, 5).unwrap()).unwrap()[0];
    assert_eq!(e.dim, 462);
    assert!((e.e0 - dense).abs() < 1e-9);
}

#[test]
fn cubic_strength_gap_scaling() {
    // The full 8..=20 sweep runs in the acceptance target.
    let sizes: Vec<usize> = (8..=16).step_by(2).collect();
    let s = gap_scaling(&sizes, Strength::Cubic).unwrap();
    assert!((s.fit.exponent + 3.0).abs() < 0.3, "{:?}", s.fit);
    assert!(s.bound_satisfied);
}

#[test]
fn pulse_sector_gap_is_inverse_square() {
    let sizes: Vec<usize> = (8..=20).step_by(2).collect();
    let gaps: Vec<f64> = sizes
        .iter()
        .map(|&n| pulse_sector_gap(n, 2).unwrap())
        .collect();
    let f = fit_exponent(&sizes.iter().map(|&n| n as f64).collect::<Vec<_>>(), &gaps).unwrap();
    assert!((f.exponent + 2.0).abs() < 0.15, "{f:?}");
    // The lowest excitation is the one-magnon mode in every sector.
    for z in 2..8 {
        let g = pulse_sector_gap(16, z).unwrap();
        assert!(
            (g - (2.0 - 2.0 * (std::f64::consts::PI / 16.0).cos())).abs() < 1e-9,
            "z={z}"
        );
    }
}

#[test]
fn deep_sectors_beyond_the_full_space() {
    let spec = TuningSpec::standard(28).unwrap();
    for z in 0..=3 {
        let e = sector_energy(&spec, z).unwrap();
        assert_eq!(e.dim as u64, binomial(28, z));
        if let Some(b) = e.lower_bound {
            assert!(e.e0 >= b - 1e-10);
        }
    }
    assert!(sector_spectrum_study(&spec).is_err());
}

#[test]
fn csv_rows() {
    let s = sector_spectrum_study(&TuningSpec::new(4, 0.125).unwrap()).unwrap();
    let csv = s.to_csv();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("N,V,z,E_z\n4,1.25"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bound_below_sector_minimum(n in 4usize..11, zf in 0.0f64..1.0, v in 1e-4f64..0.2) {
        let z = 2 + ((n - 2) as f64 * zf) as usize;
        let z = z.min(n);
        let spec = TuningSpec::new(n, v).unwrap();
        let e = sector_energy(&spec, z).unwrap();
        prop_assert!(e.e0 >= e.lower_bound.unwrap() - 1e-10);
    }

    #[test]
    fn excitation_number_is_conserved(n in 3usize..9, v in 1e-3f64..1.0) {
        let op = build_tuned(&TuningSpec::new(n, v).unwrap()).unwrap();
        prop_assert!(sector_decompose(&op, ones).is_ok());
    }
}
