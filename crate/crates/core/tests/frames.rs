mod common;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use sic_tower::frames::{
    build_projectors, certify_embedded, certify_etf, etf_families, extract_subset, orbit_multiplets,
    projector_closed_forms, simplex_probe, EtfParams,
};
use sic_tower::heisenberg::DisplacementIndex;
use sic_tower::linalg::op_norm;
use sic_tower::sic::{find_fiducial, overlap_table, SearchOptions};

use common::Vector;

#[test]
fn family_parameters() {
    let pairs = |d| etf_families(d).unwrap().iter().map(|p| (p.m, p.n)).collect::<Vec<_>>();
    assert_eq!(pairs(5), [(15, 225), (10, 25), (6, 9), (4, 5)]);
    assert_eq!(pairs(4), [(8, 64), (6, 16), (3, 4), (3, 4)]);
    for d in 4..30usize {
        for p in etf_families(d).unwrap() {
            assert!(p.m <= p.n && p.n <= p.m * p.m);
            assert!((p.coherence_sq() - 1.0 / ((d - 1) * (d - 1)) as f64).abs() < 1e-15);
        }
    }
}

#[test]
fn subsets_have_the_right_sizes() {
    let big = &common::aligned_5_15().big;
    let three = extract_subset(big, 5, 3).unwrap();
    let five = extract_subset(big, 5, 5).unwrap();
    assert_eq!((three.len(), five.len()), (25, 9));
    for subset in [&three, &five] {
        let (p, v) = subset.iter().find(|(p, _)| p.is_zero()).unwrap();
        assert!(p.is_zero());
        assert_eq!(v, &big.components);
    }
    assert!(extract_subset(big, 5, 4).is_err());
}

#[test]
fn embedded_frames_at_five() {
    let big = &common::aligned_5_15().big;
    let (a, b) = certify_embedded(big, 5).unwrap();
    assert!(a.pass && b.pass);
    assert_eq!((a.rank, b.rank), (10, 6));
    for cert in [&a, &b] {
        assert!(cert.indices.len() > cert.rank);
        let n = cert.indices.len() as f64;
        let g2: f64 = cert.gram.iter().map(|z| z.norm_sqr()).sum();
        let coherence = (g2 - n) / (n * (n - 1.0));
        assert!((coherence - cert.params.coherence_sq()).abs() < 1e-10);
        assert!((coherence - 1.0 / 16.0).abs() < 1e-10);
    }
}

#[test]
fn orthonormal_basis_is_not_equiangular() {
    let vecs: Vec<Vector> = (0..4).map(|k| Vector::from_fn(4, |r, _| C64::new((r == k) as u8 as f64, 0.0))).collect();
    let idx = (0..4).map(|k| DisplacementIndex::new(k, 0, 4)).collect();
    let cert = certify_etf(&vecs, idx, &EtfParams::new(3, 4).unwrap()).unwrap();
    assert_eq!(cert.rank, 4);
    assert!(!cert.pass);
}

#[test]
fn projectors_at_five() {
    let a = common::aligned_5_15();
    let pair = build_projectors(&a.big, 5).unwrap();
    assert!(pair.pass);
    assert_eq!((pair.rank1, pair.rank2), (10, 6));
    assert!(op_norm(&(&pair.pi1 * &pair.pi1 - &pair.pi1)) <= 1e-8);
    assert!(op_norm(&(&pair.pi2 * &pair.pi2 - &pair.pi2)) <= 1e-8);
    assert!(op_norm(&(&pair.pi1 * &pair.pi2 - &pair.pi2 * &pair.pi1)) <= 1e-8);
    let psi = &a.big.components;
    assert!((psi.dotc(&(&pair.pi1 * psi)) - 1.0).norm() <= 1e-8);
    assert!((psi.dotc(&(&pair.pi2 * psi)) - 1.0).norm() <= 1e-8);
    let closed = projector_closed_forms(&pair, &a.small_table().unwrap(), &a.report.m.unwrap()).unwrap();
    assert!(closed.pass);
}

#[test]
fn multiplets_at_five() {
    let a = common::aligned_5_15();
    let pair = build_projectors(&a.big, 5).unwrap();
    let (m1, m2) = orbit_multiplets(&a.big, &pair);
    assert_eq!((m1.distinct, m2.distinct), (9, 25));
    assert!(m1.partitions_sic && m2.partitions_sic);
}

#[test]
fn membership_by_oracle() {
    let a = common::aligned_5_15();
    let pair = build_projectors(&a.big, 5).unwrap();
    let psi = &a.big.components;
    let vecs: Vec<Vector> = DisplacementIndex::all(15).map(|p| a.big.vector(&p)).collect();
    let conj = |i: i64, j: i64| {
        let dp = common::displacement(15, i, j);
        &dp * &pair.pi1 * dp.adjoint()
    };
    let members: Vec<_> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| conj(i, j)).collect();
    for v in &vecs {
        let hits = members.iter().filter(|m| (v.dotc(&(*m * v)).re - 1.0).abs() < 1e-8).count();
        assert_eq!(hits, 1);
    }
    assert!((psi.dotc(&(&members[0] * psi)).re - 1.0).abs() < 1e-8);
}

#[test]
fn real_phase_counts() {
    let four = common::aligned_4_8();
    let probe = simplex_probe(&overlap_table(&four.small).unwrap(), &four.big).unwrap();
    assert_eq!(probe.max_real_phases, 3);
    let best = DisplacementIndex::all(8)
        .map(|q| overlap_table(&four.big.displaced(&q)).unwrap().real_phases(1e-8).len())
        .max()
        .unwrap();
    assert_eq!(best, 3);
}

#[test]
fn real_seven_dimensional_sic_has_six_real_phases() {
    let f = find_fiducial(7, &SearchOptions { seed: 0, restarts: 64, real: true, ..Default::default() }).unwrap();
    let f = f.converged().expect("real search converges");
    let t = overlap_table(f).unwrap();
    let real = DisplacementIndex::all(7).skip(1).filter(|p| {
        let (i, j) = p.pair();
        common::phase(&f.components, i, j).im.abs() <= 1e-8
    });
    assert_eq!(real.count(), 6);
    assert_eq!(t.real_phases(1e-8).len(), 6);
}

proptest! {
    #[test]
    fn coherence_formula(m in 1usize..40, extra in 0usize..200) {
        let n = (m + extra).min(m * m);
        let p = EtfParams::new(m, n).unwrap();
        let expected = (n - m) as f64 / (m * (n.max(2) - 1)) as f64;
        if n > 1 {
            prop_assert!((p.coherence_sq() - expected).abs() < 1e-15);
        }
    }
}
