mod common;

use num_complex::Complex64 as C64;
use sic_tower::heisenberg::DisplacementIndex;
use sic_tower::linalg::{identity, op_norm};
use sic_tower::mub::{
    affine_lines, mub_from_aligned_sic, mub_from_projectors, mub_verify, phase_point_operators, wootters_projectors,
    MubSet, Slope,
};
use sic_tower::Error;

use common::{Mat, Vector};

#[test]
fn phase_point_algebra_at_three() {
    let ops = phase_point_operators(3).unwrap();
    assert_eq!(ops.len(), 9);
    assert!(op_norm(&(&ops[0] - common::parity(3))) < 1e-15);
    let labels: Vec<(i64, i64)> = DisplacementIndex::all(3).map(|x| x.pair()).collect();
    for (a, x) in labels.iter().enumerate() {
        let dx = common::displacement(3, x.0, x.1);
        let oracle = &dx * common::parity(3) * dx.adjoint();
        assert!(op_norm(&(&ops[a] - &oracle)) < 1e-12);
        assert!((ops[a].trace() - 1.0).norm() < 1e-12);
        assert!(op_norm(&(&ops[a] - ops[a].adjoint())) < 1e-12);
        assert!(op_norm(&(&ops[a] * &ops[a] - identity(3))) < 1e-12);
        for (b, _) in labels.iter().enumerate() {
            let hs = (&ops[a] * &ops[b]).trace();
            let want = if a == b { 3.0 } else { 0.0 };
            assert!((hs - want).norm() < 1e-12, "{a} {b}");
        }
    }
    assert!(matches!(phase_point_operators(9), Err(Error::NotOddPrime(9))));
}

#[test]
fn wootters_projectors_at_three() {
    let w = wootters_projectors(3).unwrap();
    assert_eq!(w.len(), 12);
    for (line, proj) in &w {
        assert!(op_norm(&(proj * proj - proj)) < 1e-9);
        assert!((proj.trace() - 1.0).norm() < 1e-9);
        assert_eq!(line.points.len(), 3);
    }
    for group in w.chunks(3) {
        let sum: Mat = group.iter().fold(Mat::zeros(3, 3), |acc, (_, p)| acc + p);
        assert!(op_norm(&(sum - identity(3))) < 1e-12);
    }
    for (la, a) in &w {
        for (lb, b) in &w {
            if la.slope != lb.slope {
                assert!(((a * b).trace().norm() - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }
    let set = mub_from_projectors(3, &w);
    assert_eq!(set.bases.len(), 4);
    assert!(mub_verify(&set).pass);
}

#[test]
fn affine_plane_axioms() {
    for p in [3usize, 5] {
        let lines = affine_lines(p).unwrap();
        assert_eq!(lines.len(), p * (p + 1));
        for line in &lines {
            assert_eq!(line.points.len(), p);
            for x in &line.points {
                let (i, j) = x.pair();
                match line.slope {
                    Slope::Finite(z) => assert_eq!(j, (z as i64 * i + line.intercept as i64).rem_euclid(p as i64)),
                    Slope::Infinite => assert_eq!(i, line.intercept as i64),
                }
            }
        }
        let points: Vec<DisplacementIndex> = DisplacementIndex::all(p).collect();
        for (a, x) in points.iter().enumerate() {
            for y in &points[a + 1..] {
                assert_eq!(lines.iter().filter(|l| l.contains(x) && l.contains(y)).count(), 1);
            }
        }
    }
}

fn dft(p: usize) -> Vec<Vector> {
    (0..p)
        .map(|k| {
            Vector::from_fn(p, |r, _| {
                C64::from_polar(1.0 / (p as f64).sqrt(), 2.0 * std::f64::consts::PI * (k * r) as f64 / p as f64)
            })
        })
        .collect()
}

fn standard(p: usize) -> Vec<Vector> {
    (0..p).map(|k| Vector::from_fn(p, |r, _| C64::new((r == k) as u8 as f64, 0.0))).collect()
}

#[test]
fn standard_and_fourier_are_unbiased() {
    let set = MubSet { p: 3, bases: vec![standard(3), dft(3)], rank_one_defect: 0.0 };
    let r = mub_verify(&set);
    assert!(r.pass && r.unbiasedness_residual < 1e-15);
}

#[test]
fn rotated_basis_is_biased() {
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let rotated = vec![
        Vector::from_vec(vec![C64::new(c, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)]),
        Vector::from_vec(vec![C64::new(-s, 0.0), C64::new(c, 0.0), C64::new(0.0, 0.0)]),
        Vector::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
    ];
    let r = mub_verify(&MubSet { p: 3, bases: vec![standard(3), rotated], rank_one_defect: 0.0 });
    assert!(!r.pass && r.unbiasedness_residual > 0.1);
}

#[test]
fn mubs_from_aligned_sic() {
    let a = common::aligned_5_15();
    let m = mub_from_aligned_sic(&a.big, 5).unwrap();
    assert_eq!(m.p, 3);
    assert!((m.coefficients.0 - 4.0 / 3.0).abs() < 1e-15 && (m.coefficients.1 - 0.2).abs() < 1e-15);
    assert!(m.report.pass && m.report.unbiasedness_residual <= 1e-7);
    assert_eq!(m.report.bases, 4);
    assert!(m.projector_residual <= 1e-8);
    assert!(m.intertwiner.bijective && m.intertwiner.residual <= 1e-8);
    assert!(mub_from_aligned_sic(&common::aligned_4_8().big, 4).is_err());
}

#[test]
fn partial_trace_identity() {
    let psi = &common::aligned_5_15().big.components;
    let a = Mat::from_fn(5, 3, |r1, r2| psi[common::crt_index(r1, r2, 5, 3)]);
    for (i, j) in DisplacementIndex::all(3).map(|x| x.pair()) {
        let dij = common::displacement(3, i, j);
        let moved = &a * dij.transpose();
        let rho = (moved.adjoint() * &moved).transpose();
        let target = (identity(3) + &dij * common::parity(3) * dij.adjoint()) / C64::new(4.0, 0.0);
        assert!(op_norm(&(rho - target)) <= 1e-8, "({i},{j})");
    }
}

#[test]
fn mubs_at_five_from_seven() {
    let real = sic_tower::sic::SearchOptions { seed: 0, restarts: 64, real: true, ..Default::default() };
    let small = sic_tower::sic::find_fiducial(7, &real).unwrap().converged().expect("real search converges").clone();
    // the largest joint subspace only yields local minima near 3e-2
    let space = sic_tower::pipeline::search_space(35, Some(sic_tower::sic::SubspaceChoice::Smallest), true).unwrap();
    let opts = sic_tower::sic::SearchOptions { seed: 5, restarts: 8, tolerance: 1e-10, space, ..Default::default() };
    let big = sic_tower::sic::find_fiducial(35, &opts).unwrap();
    let a = sic_tower::alignment::align(&small, big.converged().expect("35-dim search converges")).unwrap();
    assert_eq!(a.report.verdict, sic_tower::alignment::Verdict::Aligned);
    let m = mub_from_aligned_sic(&a.big, 7).unwrap();
    assert!(m.report.pass && m.report.bases == 6);
    assert!(m.intertwiner.bijective);
    assert!(sic_tower::entangle::check_theorem1(&a.big, 7).unwrap().pass);
    let sym = sic_tower::symmetry::stabilizer_order(&a.big).unwrap();
    assert!(sym.lower_bound && sym.closed && sym.has_zauner_type_element);
    assert!(sym.unitary_order >= 3);
}
