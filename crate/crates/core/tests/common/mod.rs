//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use sic_tower::alignment::{align, Alignment};
use sic_tower::pipeline::search_space;
use sic_tower::sic::{find_fiducial, Fiducial, SearchOptions, SubspaceChoice};

pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// `tau^k` with `tau = -exp(i pi / d)`.
pub fn tau_pow(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(2 * d as i64) as f64;
    C64::from_polar(1.0, PI * k * (d as f64 + 1.0) / d as f64)
}

/// `(D_{i,j})_{r,s} = tau^{ij + 2js} delta_{r, s+i}` built entry by entry.
pub fn displacement(d: usize, i: i64, j: i64) -> Mat {
    let n = d as i64;
    let (i, j) = (i.rem_euclid(2 * n), j.rem_euclid(2 * n));
    Mat::from_fn(d, d, |r, s| {
        if (s as i64 + i).rem_euclid(n) == r as i64 {
            tau_pow(d, i * j + 2 * j * s as i64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `<p, q> = p_2 q_1 - p_1 q_2`.
pub fn symplectic(p: (i64, i64), q: (i64, i64)) -> i64 {
    p.1 * q.0 - p.0 * q.1
}

pub fn op_norm(m: &Mat) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

pub fn inner(a: &Vector, b: &Vector) -> C64 {
    a.dotc(b)
}

/// `sqrt(d+1) <psi|D_{i,j}|psi>`, and 1 at the origin.
pub fn phase(psi: &Vector, i: i64, j: i64) -> C64 {
    let d = psi.len();
    if i.rem_euclid(d as i64) == 0 && j.rem_euclid(d as i64) == 0 {
        return C64::new(1.0, 0.0);
    }
    inner(psi, &(displacement(d, i, j) * psi)) * ((d + 1) as f64).sqrt()
}

/// Parity `|r> -> |-r>`.
pub fn parity(d: usize) -> Mat {
    Mat::from_fn(d, d, |r, s| if (r + s) % d == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// `r` with `r = r1 mod n1` and `r = r2 mod n2`, by search.
pub fn crt_index(r1: usize, r2: usize, n1: usize, n2: usize) -> usize {
    (0..n1 * n2).find(|r| r % n1 == r1 && r % n2 == r2).expect("coprime moduli")
}

/// Partial traces of `|psi><psi|` for `C^{n1 n2} = C^{n1} (x) C^{n2}` in the CRT ordering.
pub fn reduced(psi: &Vector, n1: usize, n2: usize) -> (Mat, Mat) {
    let a = Mat::from_fn(n1, n2, |r1, r2| psi[crt_index(r1, r2, n1, n2)]);
    let rho1 = &a * a.adjoint();
    let rho2 = (a.adjoint() * &a).transpose();
    (rho1, rho2)
}

pub fn eigenvalues_desc(h: &Mat) -> Vec<f64> {
    let mut v: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn small_fiducial(d: usize) -> Fiducial {
    let out = find_fiducial(d, &SearchOptions { seed: 1, restarts: 50, ..Default::default() }).unwrap();
    out.converged().expect("small fiducial search converges").clone()
}

/// Aligned pair (5, 15) found by searching the largest Zauner eigenspace with `U_b = +1`.
pub fn aligned_5_15() -> &'static Alignment {
    static CELL: OnceLock<Alignment> = OnceLock::new();
    CELL.get_or_init(|| {
        let small = small_fiducial(5);
        let space = search_space(15, Some(SubspaceChoice::Largest), true).unwrap();
        let opts = SearchOptions { seed: 3, restarts: 16, tolerance: 1e-10, space, ..Default::default() };
        let big = find_fiducial(15, &opts).unwrap();
        align(&small, big.converged().expect("15-dim search converges")).unwrap()
    })
}

/// Aligned pair (4, 8) found in the smallest Zauner eigenspace of dimension 8.
pub fn aligned_4_8() -> &'static Alignment {
    static CELL: OnceLock<Alignment> = OnceLock::new();
    CELL.get_or_init(|| {
        let small = small_fiducial(4);
        let space = search_space(8, Some(SubspaceChoice::Smallest), false).unwrap();
        let opts = SearchOptions { seed: 0, restarts: 8, space, ..Default::default() };
        let big = find_fiducial(8, &opts).unwrap();
        align(&small, big.converged().expect("8-dim search converges")).unwrap()
    })
}
