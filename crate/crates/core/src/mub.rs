//! Phase-point operators, lines of the affine plane over Z_p, and mutually
//! unbiased bases, both directly and from an aligned SIC in dimension p(p+2).

use std::fmt;

use serde::Serialize;

use crate::entangle::{reduced_density, Factor};
use crate::error::{Error, Result};
use crate::heisenberg::{displaced_parity, DisplacementIndex};
use crate::linalg::{self, c, CMat, CVec};
use crate::numtheory::{is_prime, CrtSplit};
use crate::sic::Fiducial;

/// Orthonormality tolerance for extracted bases.
pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Unbiasedness tolerance.
pub const UNBIASED_TOL: f64 = 1e-7;
/// Largest `|lambda_max - 1|` accepted when reading a basis vector off a W.
pub const RANK_ONE_TOL: f64 = 1e-7;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Slope {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(z) => write!(f, "{z}"),
            Slope::Infinite => f.write_str("inf"),
        }
    }
}

/// `j = z i + a`, or `i = a` for the vertical slope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineLine {
    pub slope: Slope,
    pub intercept: u64,
    pub points: Vec<DisplacementIndex>,
}

impl AffineLine {
    pub fn new(p: usize, slope: Slope, intercept: u64) -> Self {
        let pi = p as i64;
        let a = intercept as i64;
        let points = (0..pi)
            .map(|t| match slope {
                Slope::Finite(z) => DisplacementIndex::new(t, z as i64 * t + a, p),
                Slope::Infinite => DisplacementIndex::new(a, t, p),
            })
            .collect();
        Self { slope, intercept: intercept % p as u64, points }
    }

    pub fn contains(&self, x: &DisplacementIndex) -> bool {
        self.points.contains(x)
    }
}

fn require_odd_prime(p: usize) -> Result<()> {
    if p < 3 || !is_prime(p as u64) {
        return Err(Error::NotOddPrime(p as u64));
    }
    Ok(())
}

pub fn slopes(p: usize) -> Vec<Slope> {
    (0..p as u64).map(Slope::Finite).chain(std::iter::once(Slope::Infinite)).collect()
}

/// All p(p+1) lines, grouped by slope (finite slopes first).
pub fn affine_lines(p: usize) -> Result<Vec<AffineLine>> {
    require_odd_prime(p)?;
    Ok(slopes(p).into_iter().flat_map(|z| (0..p as u64).map(move |a| AffineLine::new(p, z, a))).collect())
}

/// `A_x = D_x P D_{-x}` for all x, row-major.
pub fn phase_point_operators(p: usize) -> Result<Vec<CMat>> {
    require_odd_prime(p)?;
    DisplacementIndex::all(p).map(|x| displaced_parity(p, &x)).collect()
}

/// `W = (1/p) sum_{x on line} A_x` for every line, in `affine_lines` order.
pub fn wootters_projectors(p: usize) -> Result<Vec<(AffineLine, CMat)>> {
    let ops = phase_point_operators(p)?;
    Ok(affine_lines(p)?
        .into_iter()
        .map(|line| {
            let mut acc = CMat::zeros(p, p);
            for x in &line.points {
                acc += &ops[x.flat()];
            }
            (line, acc / c(p as f64, 0.0))
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct MubSet {
    pub p: usize,
    /// p + 1 bases of p vectors each.
    #[serde(skip)]
    pub bases: Vec<Vec<CVec>>,
    /// Largest `|lambda_max - 1|` over the projectors the vectors were read from.
    pub rank_one_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MubReport {
    pub p: usize,
    pub bases: usize,
    pub orthonormality_residual: f64,
    pub unbiasedness_residual: f64,
    pub pass: bool,
}

pub fn mub_verify(m: &MubSet) -> MubReport {
    let p = m.p as f64;
    let mut ortho = 0.0f64;
    let mut unbiased = 0.0f64;
    for (ka, a) in m.bases.iter().enumerate() {
        for (kb, b) in m.bases.iter().enumerate() {
            for (ia, u) in a.iter().enumerate() {
                for (ib, v) in b.iter().enumerate() {
                    let o = linalg::inner(u, v);
                    if ka == kb {
                        let target = if ia == ib { 1.0 } else { 0.0 };
                        ortho = ortho.max((o - c(target, 0.0)).norm());
                    } else {
                        unbiased = unbiased.max((o.norm_sqr() - 1.0 / p).abs());
                    }
                }
            }
        }
    }
    MubReport {
        p: m.p,
        bases: m.bases.len(),
        orthonormality_residual: ortho,
        unbiasedness_residual: unbiased,
        pass: ortho <= ORTHONORMAL_TOL && unbiased <= UNBIASED_TOL,
    }
}

/// Read one vector off each projector (top eigenvector) and group by slope.
pub fn mub_from_projectors(p: usize, projectors: &[(AffineLine, CMat)]) -> MubSet {
    let mut bases: Vec<Vec<CVec>> = vec![Vec::new(); p + 1];
    let mut rank_one_defect = 0.0f64;
    for (line, w) in projectors {
        let (values, vectors) = linalg::hermitian_eigen(w);
        rank_one_defect =
            rank_one_defect.max((values[0] - 1.0).abs()).max(values[1..].iter().fold(0.0, |m, x| m.max(x.abs())));
        let k = match line.slope {
            Slope::Finite(z) => z as usize,
            Slope::Infinite => p,
        };
        bases[k].push(linalg::fix_phase_vec(&vectors.column(0).into_owned()));
    }
    MubSet { p, bases, rank_one_defect }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorMatch {
    /// `matches[k]` is the index in the reference set closest to projector k.
    pub matches: Vec<usize>,
    /// Largest operator-norm distance between matched projectors.
    pub residual: f64,
    /// Whether `matches` is a bijection.
    pub bijective: bool,
}

/// Match two projector families as sets; the identity intertwines them when
/// the match is bijective with a small residual.
pub fn match_projectors(ours: &[CMat], reference: &[CMat]) -> ProjectorMatch {
    let mut matches = Vec::with_capacity(ours.len());
    let mut residual = 0.0f64;
    for w in ours {
        let (k, dist) = reference
            .iter()
            .enumerate()
            .map(|(k, r)| (k, linalg::op_norm(&(w - r))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty reference");
        matches.push(k);
        residual = residual.max(dist);
    }
    let mut seen = matches.clone();
    seen.sort_unstable();
    seen.dedup();
    ProjectorMatch { bijective: seen.len() == reference.len() && ours.len() == reference.len(), matches, residual }
}

#[derive(Clone, Debug, Serialize)]
pub struct SicMub {
    pub d: usize,
    pub p: usize,
    /// `(d-1)/(d-2)` and `1/d`
    pub coefficients: (f64, f64),
    #[serde(skip)]
    pub projectors: Vec<(AffineLine, CMat)>,
    /// Largest `|| W^2 - W ||` and `|tr W - 1|`.
    pub projector_residual: f64,
    pub mubs: MubSet,
    pub report: MubReport,
    /// Relation to the phase-point construction in dimension p.
    pub intertwiner: ProjectorMatch,
}

/// `W = Tr_d[ (d-1)/(d-2) sum_{(i,j) on line} |Psi_{di,dj}><.| - (1/d) 1_N ]`.
pub fn mub_from_aligned_sic(big: &Fiducial, d: usize) -> Result<SicMub> {
    if d < 5 || big.dim != d * (d - 2) {
        return Err(Error::Invalid(format!("fiducial dimension {} is not d(d-2) for d = {d}", big.dim)));
    }
    let p = d - 2;
    require_odd_prime(p)?;
    let split = CrtSplit::tower(d as u64)?;
    let n = big.dim;
    let reduced: Vec<CMat> = DisplacementIndex::all(p)
        .map(|x| {
            let (i, j) = x.pair();
            let v = big.displaced(&DisplacementIndex::new(d as i64 * i, d as i64 * j, n));
            reduced_density(&v, &split, Factor::Second)
        })
        .collect::<Result<_>>()?;
    let a = (d as f64 - 1.0) / (d as f64 - 2.0);
    let b = 1.0 / d as f64;
    let mut projectors = Vec::new();
    let mut projector_residual = 0.0f64;
    for line in affine_lines(p)? {
        let mut acc = CMat::zeros(p, p);
        for x in &line.points {
            acc += &reduced[x.flat()];
        }
        // Tr_d of the identity on C^N is d times the identity on C^p
        let w = acc * c(a, 0.0) - linalg::identity(p) * c(b * d as f64, 0.0);
        projector_residual =
            projector_residual.max(linalg::op_norm(&(&w * &w - &w))).max((w.trace() - c(1.0, 0.0)).norm());
        projectors.push((line, w));
    }
    let mubs = mub_from_projectors(p, &projectors);
    let report = mub_verify(&mubs);
    let reference: Vec<CMat> = wootters_projectors(p)?.into_iter().map(|(_, w)| w).collect();
    let ours: Vec<CMat> = projectors.iter().map(|(_, w)| w.clone()).collect();
    let intertwiner = match_projectors(&ours, &reference);
    Ok(SicMub { d, p, coefficients: (a, b), projectors, projector_residual, mubs, report, intertwiner })
}
