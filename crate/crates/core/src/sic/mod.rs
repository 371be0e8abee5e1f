//! SIC fiducials: verification, overlap phases, numerical search and
//! centring under Zauner symmetry.

mod centre;
pub(crate) mod search;
mod zauner;

pub use centre::{centre_fiducial, strongly_centre, triplet_shifts, Centred, StrongCentre};
pub use search::{find_fiducial, sic_objective, SearchOptions, SearchOutcome, SearchSpace};
pub use zauner::{fb_matrix, fb_unitary, joint_subspace, zauner_project, SubspaceChoice, ZaunerSubspace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{self, DisplacementIndex};
use crate::linalg::{self, c, CMat, CVec};
use num_complex::Complex64 as C64;

/// Pass threshold of `sic_verify` on the equiangularity residual.
pub const SIC_TOL: f64 = 1e-10;
/// Threshold on `|| sum_p D_p |psi><psi| D_p^dag - d 1 ||`.
pub const FRAME_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centring {
    Unknown,
    Centred,
    Displaced,
}

#[derive(Clone, Debug)]
pub struct Fiducial {
    pub dim: usize,
    pub components: CVec,
    pub label: String,
    pub centring: Centring,
}

impl Fiducial {
    /// Normalizes the input; fails on a zero vector.
    pub fn new(components: CVec, label: impl Into<String>) -> Result<Self> {
        let components = linalg::normalize(&components).ok_or(Error::ZeroNorm)?;
        Ok(Self { dim: components.len(), components, label: label.into(), centring: Centring::Unknown })
    }

    pub fn with_centring(mut self, centring: Centring) -> Self {
        self.centring = centring;
        self
    }

    /// `D_p |psi>`.
    pub fn displaced(&self, p: &DisplacementIndex) -> Fiducial {
        let (i, j) = p.pair();
        Fiducial {
            dim: self.dim,
            components: heisenberg::apply_displacement(self.dim, i, j, &self.components),
            label: format!("{} displaced by {}", self.label, p),
            centring: if p.is_zero() { self.centring } else { Centring::Displaced },
        }
    }

    pub fn conjugated(&self) -> Fiducial {
        Fiducial {
            dim: self.dim,
            components: self.components.map(|x| x.conj()),
            label: format!("{} conjugated", self.label),
            centring: self.centring,
        }
    }

    /// `<psi| D_p |psi>`.
    pub fn overlap(&self, p: &DisplacementIndex) -> C64 {
        let (i, j) = p.pair();
        heisenberg::expectation(self.dim, i, j, &self.components)
    }

    /// The SIC vector `D_p |psi>` as a plain vector.
    pub fn vector(&self, p: &DisplacementIndex) -> CVec {
        let (i, j) = p.pair();
        heisenberg::apply_displacement(self.dim, i, j, &self.components)
    }

    pub fn projector(&self) -> CMat {
        linalg::outer(&self.components)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SicReport {
    pub dim: usize,
    /// max over p != 0 of `| |<psi|D_p psi>|^2 - 1/(d+1) |`
    pub residual: f64,
    /// operator-norm defect of the resolution of the identity
    pub frame_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn sic_residual(f: &Fiducial) -> f64 {
    let d = f.dim;
    let target = 1.0 / (d as f64 + 1.0);
    DisplacementIndex::all(d).skip(1).map(|p| (f.overlap(&p).norm_sqr() - target).abs()).fold(0.0, f64::max)
}

pub fn sic_verify(f: &Fiducial) -> Result<SicReport> {
    sic_verify_with(f, SIC_TOL)
}

pub fn sic_verify_with(f: &Fiducial, tolerance: f64) -> Result<SicReport> {
    let d = f.dim;
    if d < 2 {
        return Err(Error::Dimension { dim: d, reason: "SICs need d >= 2" });
    }
    let residual = sic_residual(f);
    let mut frame = CMat::zeros(d, d);
    for p in DisplacementIndex::all(d) {
        frame += linalg::outer(&f.vector(&p));
    }
    let frame_residual = linalg::op_norm(&(frame - linalg::identity(d) * c(d as f64, 0.0)));
    Ok(SicReport {
        dim: d,
        residual,
        frame_residual,
        tolerance,
        pass: residual <= tolerance && frame_residual <= FRAME_TOL,
    })
}

/// Overlap phases `sqrt(d+1) <psi|D_p|psi>` with the zero label set to 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OverlapTable {
    pub dim: usize,
    /// row-major in (i, j)
    pub phases: Vec<C64>,
    pub residual: f64,
}

impl OverlapTable {
    pub fn phase(&self, p: &DisplacementIndex) -> C64 {
        assert_eq!(p.dim(), self.dim);
        self.phases[p.flat()]
    }

    pub fn at(&self, i: i64, j: i64) -> C64 {
        self.phase(&DisplacementIndex::new(i, j, self.dim))
    }

    /// Largest deviation of `|phase|` from 1.
    pub fn modulus_defect(&self) -> f64 {
        self.phases.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Labels p != 0 whose phase is real within `tol`.
    pub fn real_phases(&self, tol: f64) -> Vec<DisplacementIndex> {
        DisplacementIndex::all(self.dim).skip(1).filter(|p| self.phase(p).im.abs() <= tol).collect()
    }
}

pub fn overlap_table(f: &Fiducial) -> Result<OverlapTable> {
    let residual = sic_residual(f);
    if f.dim < 2 {
        return Err(Error::Dimension { dim: f.dim, reason: "SICs need d >= 2" });
    }
    if residual > SIC_TOL {
        return Err(Error::NotSic(residual));
    }
    Ok(overlap_table_unchecked(f, residual))
}

/// Overlap phases without the SIC gate; `residual` is recorded as given.
pub(crate) fn overlap_table_unchecked(f: &Fiducial, residual: f64) -> OverlapTable {
    let scale = (f.dim as f64 + 1.0).sqrt();
    let phases =
        DisplacementIndex::all(f.dim).map(|p| if p.is_zero() { c(1.0, 0.0) } else { f.overlap(&p) * scale }).collect();
    OverlapTable { dim: f.dim, phases, residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::symplectic_form;

    #[test]
    fn basis_vector_is_not_a_sic() {
        let f = Fiducial::new(CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]), "e0").unwrap();
        let r = sic_verify(&f).unwrap();
        assert!(!r.pass);
        // D_{0,1} is diagonal, so |<0|D_{0,1}|0>|^2 = 1 sets the worst deviation
        assert!((r.residual - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(overlap_table(&f), Err(Error::NotSic(_))));
    }

    #[test]
    fn tiny_dimension_rejected() {
        let f = Fiducial::new(CVec::from_vec(vec![c(1.0, 0.0)]), "one").unwrap();
        assert!(sic_verify(&f).is_err());
        assert_eq!(Fiducial::new(CVec::zeros(3), "z").unwrap_err(), Error::ZeroNorm);
    }

    #[test]
    fn qubit_tetrahedron() {
        // (sqrt((3+sqrt3)/6), e^{i pi/4} sqrt((3-sqrt3)/6)) is the standard d=2 fiducial
        let s3 = 3f64.sqrt();
        let v = CVec::from_vec(vec![
            c(((3.0 + s3) / 6.0).sqrt(), 0.0),
            linalg::cis(std::f64::consts::FRAC_PI_4) * ((3.0 - s3) / 6.0).sqrt(),
        ]);
        let f = Fiducial::new(v, "2a").unwrap();
        let r = sic_verify(&f).unwrap();
        assert!(r.pass, "{r:?}");
        let t = overlap_table(&f).unwrap();
        assert_eq!(t.phases[0], c(1.0, 0.0));
        assert!(t.modulus_defect() < 1e-8);
    }

    #[test]
    fn displaced_table_picks_up_symplectic_phases() {
        let f = search::tests_support::fiducial(5);
        let t = overlap_table(&f).unwrap();
        for q in DisplacementIndex::all(5) {
            let tq = overlap_table(&f.displaced(&q)).unwrap();
            for p in DisplacementIndex::all(5).skip(1) {
                let k = symplectic_form(&p, &q).unwrap().value() as i64;
                let expect = t.phase(&p) * heisenberg::omega_pow(5, k);
                assert!((tq.phase(&p) - expect).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn conjugate_symmetry_of_table() {
        let f = search::tests_support::fiducial(5);
        let t = overlap_table(&f).unwrap();
        // <psi|D_{-p}|psi> = conj(<psi|D_p|psi>) since D_{-p} = D_p^dag
        for p in DisplacementIndex::all(5).skip(1) {
            assert!((t.phase(&(-p)) - t.phase(&p).conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn sic_vectors_are_equiangular() {
        let f = search::tests_support::fiducial(4);
        let res = sic_residual(&f);
        let vs: Vec<CVec> = DisplacementIndex::all(4).map(|p| f.vector(&p)).collect();
        for a in 0..16 {
            for b in 0..16 {
                if a != b {
                    let o = linalg::inner(&vs[a], &vs[b]).norm_sqr();
                    assert!((o - 0.2).abs() <= 2.0 * res + 1e-14);
                }
            }
        }
    }
}
