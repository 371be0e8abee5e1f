//! Zauner eigenspaces and the F_b symmetry of the upper rung.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::{clifford_unitary, clifford_unitary_any, zauner_matrix, SymplecticMatrix, ZaunerFlavor};
use crate::linalg::{self, c, CMat};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SubspaceChoice {
    Largest,
    Smallest,
}

/// One eigenspace of the Zauner unitary normalized so that `U^3 = 1`.
#[derive(Clone, Debug)]
pub struct ZaunerSubspace {
    /// Cube root of unity labelling the eigenspace.
    pub eigenvalue: C64,
    pub basis: CMat,
}

impl ZaunerSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Scales `u` so that `u^k = 1`, given that `u^k` is proportional to the identity.
fn normalize_power(u: &CMat, k: u32) -> Result<CMat> {
    let n = u.nrows();
    let mut pow = linalg::identity(n);
    for _ in 0..k {
        pow = &pow * u;
    }
    let lambda = pow.trace() / c(n as f64, 0.0);
    if linalg::op_norm(&(&pow - linalg::identity(n) * lambda)) > 1e-9 {
        return Err(Error::Invalid(format!("Clifford unitary has no power {k} proportional to the identity")));
    }
    let root = C64::from_polar(1.0, -lambda.arg() / k as f64);
    Ok(u * root)
}

/// Eigenspaces of `U_F` for F = F_z or F_a, largest first.
pub fn zauner_project(d: usize, flavor: ZaunerFlavor) -> Result<Vec<ZaunerSubspace>> {
    if d < 2 {
        return Err(Error::Dimension { dim: d, reason: "Zauner subspaces need d >= 2" });
    }
    let f = zauner_matrix(d, flavor)?;
    let u = normalize_power(&clifford_unitary_any(d, &f)?, 3)?;
    let u2 = &u * &u;
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let w = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / 3.0);
        let proj = (linalg::identity(d) + &u * w + &u2 * (w * w)) / c(3.0, 0.0);
        let basis = linalg::range_basis(&proj, 0.5);
        if basis.ncols() > 0 {
            out.push(ZaunerSubspace { eigenvalue: w.conj(), basis });
        }
    }
    out.sort_by_key(|s| std::cmp::Reverse(s.dim()));
    Ok(out)
}

impl SubspaceChoice {
    pub fn pick(self, spaces: &[ZaunerSubspace]) -> Option<&ZaunerSubspace> {
        match self {
            SubspaceChoice::Largest => spaces.first(),
            SubspaceChoice::Smallest => spaces.last(),
        }
    }
}

/// `F_b = (1 - d) 1` mod N = d(d-2).
pub fn fb_matrix(d: usize) -> Result<SymplecticMatrix> {
    if d < 4 {
        return Err(Error::Dimension { dim: d, reason: "F_b needs d >= 4" });
    }
    let n = (d * (d - 2)) as u64;
    Ok(SymplecticMatrix::scalar(1 - d as i64, n))
}

/// `U_b` in dimension d(d-2) for odd d, scaled to an involution with positive trace.
pub fn fb_unitary(d: usize) -> Result<CMat> {
    if d.is_multiple_of(2) {
        return Err(Error::Dimension { dim: d, reason: "U_b is built for odd d" });
    }
    let n = d * (d - 2);
    let u = normalize_power(&clifford_unitary(n, &fb_matrix(d)?)?, 2)?;
    Ok(if u.trace().re < 0.0 { -u } else { u })
}

/// Orthonormal basis of the intersection of span(`basis`) with the range of
/// the projector `proj`.
pub fn joint_subspace(basis: &CMat, proj: &CMat) -> CMat {
    let restricted = basis.adjoint() * proj * basis;
    let (values, vectors) = linalg::hermitian_eigen(&restricted);
    let k = values.iter().filter(|&&v| v > 1.0 - 1e-8).count();
    basis * vectors.columns(0, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_sum_to_d() {
        for d in 4..=30 {
            let spaces = zauner_project(d, ZaunerFlavor::Z).unwrap();
            assert_eq!(spaces.iter().map(|s| s.dim()).sum::<usize>(), d, "d={d}");
            for s in &spaces {
                let g = s.basis.adjoint() * &s.basis;
                assert!(linalg::op_norm(&(g - linalg::identity(s.dim()))) < 1e-12);
            }
        }
    }

    #[test]
    fn d5_dimensions() {
        let dims: Vec<usize> = zauner_project(5, ZaunerFlavor::Z).unwrap().iter().map(|s| s.dim()).collect();
        assert_eq!(dims, vec![2, 2, 1]);
    }

    #[test]
    fn subspaces_are_mutually_orthogonal() {
        let spaces = zauner_project(12, ZaunerFlavor::A).unwrap();
        for a in 0..spaces.len() {
            for b in a + 1..spaces.len() {
                assert!(linalg::op_norm(&(spaces[a].basis.adjoint() * &spaces[b].basis)) < 1e-10);
            }
        }
        assert!(zauner_project(13, ZaunerFlavor::A).is_err());
    }

    #[test]
    fn fb_is_one_tensor_parity() {
        let u = fb_unitary(5).unwrap();
        assert!(linalg::op_norm(&(&u * &u - linalg::identity(15))) < 1e-10);
        // 1 (x) P on C^5 (x) C^3 has trace 5
        assert!((u.trace() - c(5.0, 0.0)).norm() < 1e-9);
        let proj = (linalg::identity(15) + &u) / c(2.0, 0.0);
        let big = zauner_project(15, ZaunerFlavor::Z).unwrap();
        let joint = joint_subspace(&big[0].basis, &proj);
        assert!(joint.ncols() > 0);
        assert!(linalg::op_norm(&(&u * &joint - &joint)) < 1e-9);
    }
}
