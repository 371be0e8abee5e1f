//! Moving a fiducial onto the eigenspaces of the standard Zauner unitary.

use std::collections::HashSet;

use serde::Serialize;

use super::{overlap_table, Centring, Fiducial};
use crate::error::{Error, Result};
use crate::heisenberg::{
    apply_displacement, clifford_unitary, zauner_matrices, zauner_matrix, DisplacementIndex, SymplecticMatrix,
    ZaunerFlavor,
};
use crate::linalg::{self, CMat};

/// Eigenvector tolerance for centring, in `1 - |<psi|U|psi>|`.
pub const CENTRE_TOL: f64 = 1e-8;
/// Largest dimension for which conjugates of the Zauner matrices are searched.
const CONJUGATE_SEARCH_MAX_DIM: usize = 15;

#[derive(Clone, Debug)]
pub struct Centred {
    /// Eigenvector of `U_{F_z}`.
    pub fiducial: Fiducial,
    /// The input is an eigenvector of `D_q U_F D_{-q}` for this q.
    pub shift: DisplacementIndex,
    /// The order-3 matrix F found to stabilize the input.
    pub symmetry: SymplecticMatrix,
    pub residual: f64,
}

fn eigen_defect(u: &CMat, v: &crate::linalg::CVec) -> f64 {
    (1.0 - linalg::inner(v, &(u * v)).norm()).max(0.0)
}

/// Order-3, trace -1 candidates: F_z, F_a and, for small d, their SL(2) conjugates
/// paired with a conjugating matrix G (F = G F_0 G^-1).
fn candidates(d: usize, with_conjugates: bool) -> Vec<(SymplecticMatrix, SymplecticMatrix)> {
    let m = d as u64;
    let base = zauner_matrices(d);
    let mut out: Vec<_> = base.iter().map(|f| (*f, SymplecticMatrix::identity(m))).collect();
    if with_conjugates {
        let mut seen: HashSet<SymplecticMatrix> = base.iter().copied().collect();
        for g in SymplecticMatrix::special_linear(m) {
            let g_inv = g.inverse().expect("SL element invertible");
            for f0 in &base {
                let f = g.mul(f0).mul(&g_inv);
                if seen.insert(f) {
                    out.push((f, g));
                }
            }
        }
    }
    out
}

fn try_centre(f: &Fiducial, with_conjugates: bool) -> Result<Option<Centred>> {
    let d = f.dim;
    let fz = zauner_matrix(d, ZaunerFlavor::Z)?;
    let uz = clifford_unitary(d, &fz)?;
    let shifted: Vec<(DisplacementIndex, crate::linalg::CVec)> = DisplacementIndex::all(d)
        .map(|q| {
            let (i, j) = q.pair();
            (q, apply_displacement(d, -i, -j, &f.components))
        })
        .collect();
    for (fm, g) in candidates(d, with_conjugates) {
        let u = clifford_unitary(d, &fm)?;
        for (q, v) in &shifted {
            if eigen_defect(&u, v) > CENTRE_TOL {
                continue;
            }
            let base_flavor_matrix = g.inverse()?.mul(&fm).mul(&g);
            let ug = clifford_unitary(d, &g)?;
            let w = linalg::fix_phase_vec(&(ug.adjoint() * v));
            // w is an eigenvector of U_{F_0}; F_0 is F_z or F_a
            let target = if base_flavor_matrix == fz { &uz } else { &clifford_unitary(d, &base_flavor_matrix)? };
            let residual = eigen_defect(target, &w);
            let suffix = if base_flavor_matrix == fz { "" } else { " (F_a)" };
            let fid = Fiducial {
                dim: d,
                components: w,
                label: format!("{} centred{suffix}", f.label),
                centring: Centring::Centred,
            };
            return Ok(Some(Centred { fiducial: fid, shift: *q, symmetry: fm, residual }));
        }
    }
    Ok(None)
}

/// Find q and an order-3 Zauner-type F with the input an eigenvector of
/// `D_q U_F D_{-q}`, and return the corresponding eigenvector of `U_{F_z}`
/// (or `U_{F_a}` when only that class stabilizes the input).
pub fn centre_fiducial(f: &Fiducial) -> Result<Centred> {
    if f.dim.is_multiple_of(2) || f.dim < 3 {
        return Err(Error::Dimension { dim: f.dim, reason: "centring is implemented for odd d >= 3" });
    }
    overlap_table(f)?;
    if let Some(c) = try_centre(f, false)? {
        return Ok(c);
    }
    if f.dim <= CONJUGATE_SEARCH_MAX_DIM {
        if let Some(c) = try_centre(f, true)? {
            return Ok(c);
        }
    }
    Err(Error::NotCentred(f64::NAN))
}

/// Fixed points of F_z mod N: the three shifts `(-j, j)` with `3 j = 0`.
pub fn triplet_shifts(n: usize) -> Vec<DisplacementIndex> {
    if !n.is_multiple_of(3) {
        return vec![DisplacementIndex::zero(n)];
    }
    (0..3).map(|k| DisplacementIndex::new(-((k * n / 3) as i64), (k * n / 3) as i64, n)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongCentreCandidate {
    pub shift: DisplacementIndex,
    pub observation1_residual: f64,
}

#[derive(Clone, Debug)]
pub struct StrongCentre {
    pub fiducial: Fiducial,
    pub shift: DisplacementIndex,
    pub candidates: Vec<StrongCentreCandidate>,
}

/// Among the F_z-commuting shifts of a centred N-dimensional fiducial, pick
/// the one whose phases on the stride-d sublattice best match Observation 1
/// for the small dimension `d`. Reported as operationally strongly centred.
pub fn strongly_centre(f: &Fiducial, d: usize) -> Result<StrongCentre> {
    let n = f.dim;
    if d < 4 || n != d * (d - 2) {
        return Err(Error::Dimension { dim: n, reason: "expected N = d(d-2)" });
    }
    let mut candidates = Vec::new();
    for t in triplet_shifts(n) {
        let shifted = f.displaced(&t);
        let table = overlap_table(&shifted)?;
        let obs = crate::alignment::check_observation1(&table, d)?;
        candidates.push((StrongCentreCandidate { shift: t, observation1_residual: obs.residual }, shifted));
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.0.observation1_residual.total_cmp(&b.0.observation1_residual))
        .expect("at least one candidate");
    let best_res = best.0.observation1_residual;
    if best_res > crate::alignment::ALIGN_TOL {
        return Err(Error::NoStrongCentre(best_res));
    }
    let mut fiducial = best.1.clone();
    fiducial.centring = f.centring;
    fiducial.label = format!("{} strongly centred", f.label);
    Ok(StrongCentre { fiducial, shift: best.0.shift, candidates: candidates.into_iter().map(|c| c.0).collect() })
}
