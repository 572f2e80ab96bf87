use clockforge::error::Error;
use clockforge::linalg::{dense_eigh, hermitian_eigh};
use clockforge::spin::*;
use clockforge::walk::{build_walk_matrix, laplacian_walk, WalkSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn popcount(label: &str) -> i64 {
    label.bytes().filter(|&b| b == b'1').count() as i64
}

fn golden(name: &str) -> LabeledSparseOperator {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    LabeledSparseOperator::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn same(a: &LabeledSparseOperator, b: &LabeledSparseOperator) {
    assert_eq!(a.dim, b.dim);
    assert_eq!(
        (0..a.dim).map(|i| a.label(i)).collect::<Vec<_>>(),
        (0..b.dim).map(|i| b.label(i)).collect::<Vec<_>>()
    );
    assert_eq!(a.entries_upper(), b.entries_upper());
}

#[test]
fn golden_operators() {
    same(
        &pulse_clock(1, Variant::Hopping).unwrap(),
        &golden("pulse_hopping_2.json"),
    );
    same(
        &pulse_clock(2, Variant::Laplacian).unwrap(),
        &golden("pulse_laplacian_3.json"),
    );
    same(
        &domain_wall_clock(1, Variant::Laplacian, false).unwrap(),
        &golden("domain_wall_laplacian_1.json"),
    );
}

#[test]
fn json_round_trip() {
    let op = domain_wall_clock(3, Variant::Hopping, true).unwrap();
    let back = LabeledSparseOperator::from_json(&op.to_json()).unwrap();
    same(&op, &back);
    assert!(op.to_json().contains("\"dimension\": 32"));
    assert!(matches!(
        LabeledSparseOperator::from_json("{\"dimension\": 2}"),
        Err(Error::Parse(_))
    ));
}

#[test]
fn pulse_hopping_matches_free_walk() {
    for n in 1..=15 {
        let op = pulse_clock(n, Variant::Hopping).unwrap();
        let h = restrict(&op, &single_excitation_states(n + 1)).unwrap();
        assert_eq!(
            h,
            build_walk_matrix(&WalkSpec::new(n, 0.0, 0.0).unwrap()).to_dense(),
            "N={n}"
        );
    }
}

#[test]
fn pulse_laplacian_matches_line_laplacian() {
    for n in 1..=15 {
        let op = pulse_clock(n, Variant::Laplacian).unwrap();
        let h = restrict(&op, &single_excitation_states(n + 1)).unwrap();
        assert_eq!(h, laplacian_walk(n).unwrap().to_dense(), "N={n}");
    }
}

#[test]
fn domain_wall_restrictions() {
    let one = restrict(
        &domain_wall_clock(1, Variant::Laplacian, false).unwrap(),
        &domain_wall_good_states(1),
    )
    .unwrap();
    assert_eq!(one, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    for n in 1..=14 {
        let good = domain_wall_good_states(n);
        let lap = restrict(
            &domain_wall_clock(n, Variant::Laplacian, true).unwrap(),
            &good,
        )
        .unwrap();
        assert_eq!(lap, laplacian_walk(n).unwrap().to_dense(), "N={n}");
        let hop = restrict(
            &domain_wall_clock(n, Variant::Hopping, false).unwrap(),
            &good,
        )
        .unwrap();
        assert_eq!(
            hop,
            build_walk_matrix(&WalkSpec::new(n, 0.0, 0.0).unwrap()).to_dense(),
            "N={n}"
        );
    }
}

#[test]
fn pulse_sectors_are_binomial() {
    let op = pulse_clock(3, Variant::Laplacian).unwrap();
    let sizes: Vec<usize> = sector_decompose(&op, popcount)
        .unwrap()
        .iter()
        .map(|s| s.indices.len())
        .collect();
    assert_eq!(sizes, [1, 4, 6, 4, 1]);
}

#[test]
fn domain_walls_are_conserved() {
    let walls = |l: &str| l.matches("01").count() as i64;
    let op = domain_wall_clock(5, Variant::Laplacian, true).unwrap();
    assert!(sector_decompose(&op, walls).is_ok());
}

#[test]
fn spin_flip_breaks_conservation() {
    let op = build_full(2, 3, &[Term::hop(1.0, vec![1], &[0], &[1])]).unwrap();
    assert!(matches!(
        sector_decompose(&op, popcount),
        Err(Error::NotConserved(_))
    ));
}

#[test]
fn singleton_restriction() {
    let op = pulse_clock(3, Variant::Laplacian).unwrap();
    let m = restrict(&op, &[2]).unwrap();
    assert_eq!(m.shape(), (1, 1));
    assert_eq!(m[(0, 0)], op.get(2, 2));
    assert!(matches!(restrict(&op, &[16]), Err(Error::Index(_))));
}

#[test]
fn pauli_forms_agree() {
    for n in 1..=9 {
        for variant in [Variant::Hopping, Variant::Laplacian] {
            let op = pulse_clock(n, variant).unwrap().to_dense();
            let pauli = pauli_form(n, variant).to_dense().unwrap();
            let diff = pauli
                .iter()
                .zip(op.iter())
                .map(|(z, r)| (z - r).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12, "N={n} {variant:?}: {diff}");
        }
    }
}

#[test]
fn checked_domain_wall_ground_state() {
    let n = 6;
    let op = domain_wall_clock(n, Variant::Laplacian, true).unwrap();
    let e = dense_eigh(&op.to_dense()).unwrap();
    assert!(e.values[0].abs() < 1e-12 && e.values[1] > 1e-3);
    let mut uniform = vec![0.0; op.dim];
    for &i in &domain_wall_good_states(n) {
        uniform[i] = 1.0 / ((n + 1) as f64).sqrt();
    }
    let hv = op.matvec(&uniform);
    assert!(hv.iter().map(|x| x.abs()).fold(0.0, f64::max) < 1e-12);
    let overlap: f64 = e
        .vectors
        .column(0)
        .iter()
        .zip(&uniform)
        .map(|(a, b)| a * b)
        .sum();
    assert!(1.0 - overlap * overlap < 1e-12);
}

#[test]
fn illegal_states_cost_at_least_one() {
    for n in 1..=8 {
        let check = domain_wall_check(n).unwrap();
        let good = domain_wall_good_states(n);
        for s in 0..check.dim {
            if !good.contains(&s) {
                assert!(check.get(s, s) >= 1.0, "N={n} state {}", check.label(s));
            } else {
                assert_eq!(check.get(s, s), 0.0);
            }
        }
    }
    // 011000 is caught by the leading-zero term.
    let check = domain_wall_check(4).unwrap();
    assert!(check.get(0b011000, 0b011000) >= 1.0);
}

#[test]
fn size_cap_applies() {
    assert!(matches!(
        pulse_clock(20, Variant::Hopping),
        Err(Error::Size { .. })
    ));
}

#[test]
fn hermitian_pauli_spectrum_matches() {
    let op = pulse_clock(4, Variant::Laplacian).unwrap().to_dense();
    let a = dense_eigh(&op).unwrap().values;
    let b = hermitian_eigh(&pauli_form(4, Variant::Laplacian).to_dense().unwrap())
        .unwrap()
        .values;
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn built_operators_are_symmetric(n in 1usize..7, lap in any::<bool>(), check in any::<bool>()) {
        let variant = if lap { Variant::Laplacian } else { Variant::Hopping };
        let op = domain_wall_clock(n, variant, check).unwrap().to_dense();
        prop_assert_eq!(op.transpose(), op);
    }

    #[test]
    fn labels_round_trip(i in 0usize..729) {
        let d = index_digits(i, 3, 6);
        prop_assert_eq!(digits_index(&d, 3), i);
    }
}
