//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cis(angle: f64) -> C64 {
    C64::from_polar(1.0, angle)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

/// Operator norm of a Hermitian matrix via its spectrum.
pub fn hermitian_norm(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Eigenvalues of the Hermitian part of `a`, sorted in decreasing order.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenpairs in decreasing order.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Orthonormal basis (as columns) of the eigenspace of a Hermitian matrix
/// with eigenvalues above `threshold`.
pub fn range_basis(h: &CMat, threshold: f64) -> CMat {
    let (values, vectors) = hermitian_eigen(h);
    let k = values.iter().filter(|&&v| v > threshold).count();
    vectors.columns(0, k).into_owned()
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Number of singular values above `rel` times the largest.
pub fn numerical_rank(singular: &[f64], rel: f64) -> usize {
    let top = singular.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > rel * top).count()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

/// `1 - |<a|b>|` for unit vectors; zero iff they agree up to a phase.
pub fn projective_distance(a: &CVec, b: &CVec) -> f64 {
    (1.0 - inner(a, b).norm()).abs()
}

/// Distance between two matrices after removing the best global phase.
pub fn phase_insensitive_distance(a: &CMat, b: &CMat) -> f64 {
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    op_norm(&(a * phase - b))
}

/// Multiply by a global phase so the first entry of non-negligible modulus is real positive.
pub fn fix_phase_vec(v: &CVec) -> CVec {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
    match v.iter().find(|x| x.norm() > 1e-8 * max.max(f64::MIN_POSITIVE)) {
        Some(x) => v * (x.conj() / x.norm()),
        None => v.clone(),
    }
}

pub fn normalize(v: &CVec) -> Option<CVec> {
    let n = v.norm();
    (n > 0.0).then(|| v / c(n, 0.0))
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    op_norm(&(u * u.adjoint() - identity(u.nrows())))
}
