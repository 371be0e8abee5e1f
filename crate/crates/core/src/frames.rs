//! Equiangular tight frames embedded in aligned SICs.

use rayon::prelude::*;
use serde::Serialize;

use crate::entangle::m_prime;
use crate::error::{Error, Result};
use crate::heisenberg::{
    displacement, generalized_parity, parity, to_tensor_basis, DisplacementIndex, SymplecticMatrix,
};
use crate::linalg::{self, c, CMat, CVec};
use crate::numtheory::CrtSplit;
use crate::sic::{Fiducial, OverlapTable};

/// Tolerance on equiangularity and tightness residuals.
pub const ETF_TOL: f64 = 1e-8;
/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;
/// Projectors closer than this in operator norm count as the same subspace.
pub const DISTINCT_TOL: f64 = 1e-4;
/// A phase is real when its imaginary part is at most this.
pub const REAL_PHASE_TOL: f64 = 1e-8;

/// n unit vectors spanning dimension m with `|<a|b>|^2 = (n-m)/(m(n-1))`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct EtfParams {
    pub m: usize,
    pub n: usize,
    /// Reduced fraction `(n - m) / (m (n - 1))`.
    pub coherence_sq_num: usize,
    pub coherence_sq_den: usize,
}

impl EtfParams {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n < m || n > m * m {
            return Err(Error::Invalid(format!("no ETF of {n} vectors in dimension {m}")));
        }
        let (num, den) = (n - m, m * (n - 1));
        let g = crate::numtheory::gcd(num as u64, den as u64).max(1) as usize;
        Ok(Self { m, n, coherence_sq_num: num / g, coherence_sq_den: den / g })
    }

    pub fn coherence_sq(&self) -> f64 {
        self.coherence_sq_num as f64 / self.coherence_sq_den as f64
    }
}

/// The SIC in dimension d(d-2), the two embedded families, and the simplex.
pub fn etf_families(d: usize) -> Result<Vec<EtfParams>> {
    if d < 4 {
        return Err(Error::Dimension { dim: d, reason: "ETF families need d >= 4" });
    }
    let n = d * (d - 2);
    [(n, n * n), (d * (d - 1) / 2, d * d), ((d - 1) * (d - 2) / 2, (d - 2) * (d - 2)), (d - 1, d)]
        .into_iter()
        .map(|(m, k)| EtfParams::new(m, k))
        .collect()
}

/// The vectors `D_{s i, s j} |Psi_0>` for i, j in `0..N/s`, with their labels.
pub fn extract_subset(big: &Fiducial, d: usize, stride: usize) -> Result<Vec<(DisplacementIndex, CVec)>> {
    let n = big.dim;
    if d < 4 || n != d * (d - 2) {
        return Err(Error::Invalid(format!("fiducial dimension {n} is not d(d-2) for d = {d}")));
    }
    if stride != d && stride != d - 2 {
        return Err(Error::Stride { stride, d, dm2: d - 2 });
    }
    let side = n / stride;
    Ok((0..side * side)
        .map(|k| {
            let p = DisplacementIndex::new(((k / side) * stride) as i64, ((k % side) * stride) as i64, n);
            (p, big.vector(&p))
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct EtfCertificate {
    pub params: EtfParams,
    pub indices: Vec<DisplacementIndex>,
    #[serde(skip)]
    pub gram: CMat,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// max over pairs of `| |<a|b>|^2 - coherence^2 |`
    pub equiangularity_residual: f64,
    /// `|| sum |a><a| - (n/m) Pi_span ||`
    pub tightness_residual: f64,
    /// `(tr(G^2) - n) / (n (n - 1))`, which equals the coherence for an ETF
    pub coherence_from_gram: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn certify_etf(vectors: &[CVec], indices: Vec<DisplacementIndex>, expected: &EtfParams) -> Result<EtfCertificate> {
    certify_etf_with(vectors, indices, expected, ETF_TOL)
}

pub fn certify_etf_with(
    vectors: &[CVec],
    indices: Vec<DisplacementIndex>,
    expected: &EtfParams,
    tol: f64,
) -> Result<EtfCertificate> {
    let n = vectors.len();
    if n != expected.n {
        return Err(Error::Invalid(format!("{n} vectors given, {} expected", expected.n)));
    }
    let frame = CMat::from_columns(vectors);
    let gram = frame.adjoint() * &frame;
    let target = expected.coherence_sq();
    let mut equi = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                equi = equi.max((gram[(a, b)].norm_sqr() - target).abs());
            }
        }
    }
    let singular_values = linalg::singular_values(&gram);
    let rank = linalg::numerical_rank(&singular_values, RANK_TOL);
    let frame_op = &frame * frame.adjoint();
    let span = linalg::range_basis(&frame_op, RANK_TOL * linalg::hermitian_norm(&frame_op));
    let pi = &span * span.adjoint();
    let tightness = linalg::op_norm(&(frame_op - pi * c(n as f64 / expected.m as f64, 0.0)));
    let g2: f64 = gram.iter().map(|z| z.norm_sqr()).sum();
    let coherence_from_gram = if n > 1 { (g2 - n as f64) / (n as f64 * (n as f64 - 1.0)) } else { 0.0 };
    Ok(EtfCertificate {
        params: *expected,
        indices,
        gram,
        singular_values,
        rank,
        equiangularity_residual: equi,
        tightness_residual: tightness,
        coherence_from_gram,
        tolerance: tol,
        pass: rank == expected.m && equi <= tol && tightness <= tol,
    })
}

/// Certify the stride-(d-2) and stride-d subsets against the two embedded families.
pub fn certify_embedded(big: &Fiducial, d: usize) -> Result<(EtfCertificate, EtfCertificate)> {
    certify_embedded_with(big, d, ETF_TOL)
}

pub fn certify_embedded_with(big: &Fiducial, d: usize, tol: f64) -> Result<(EtfCertificate, EtfCertificate)> {
    let fam = etf_families(d)?;
    let run = |stride: usize, params: EtfParams| -> Result<EtfCertificate> {
        let (idx, vecs): (Vec<_>, Vec<_>) = extract_subset(big, d, stride)?.into_iter().unzip();
        certify_etf_with(&vecs, idx, &params, tol)
    };
    let (a, b) = rayon::join(|| run(d - 2, fam[1]), || run(d, fam[2]));
    Ok((a?, b?))
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorPair {
    #[serde(skip)]
    pub pi1: CMat,
    #[serde(skip)]
    pub pi2: CMat,
    pub rank1: usize,
    pub rank2: usize,
    pub idempotency1: f64,
    pub idempotency2: f64,
    /// `1 - <Psi_0|Pi|Psi_0>`
    pub fiducial_defect1: f64,
    pub fiducial_defect2: f64,
    pub commutator: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn sum_projectors(vectors: &[(DisplacementIndex, CVec)], weight: f64) -> CMat {
    let n = vectors[0].1.len();
    let mut acc = CMat::zeros(n, n);
    for (_, v) in vectors {
        acc += linalg::outer(v);
    }
    acc * c(weight, 0.0)
}

/// `Pi_1 = (d-1)/(2d) sum |Psi_{(d-2)p}><.|`, `Pi_2 = (d-1)/(2(d-2)) sum |Psi_{dp}><.|`.
pub fn build_projectors(big: &Fiducial, d: usize) -> Result<ProjectorPair> {
    build_projectors_with(big, d, ETF_TOL)
}

pub fn build_projectors_with(big: &Fiducial, d: usize, tol: f64) -> Result<ProjectorPair> {
    if d.is_multiple_of(2) {
        return Err(Error::Dimension { dim: d, reason: "projector identities are for odd d" });
    }
    let df = d as f64;
    let pi1 = sum_projectors(&extract_subset(big, d, d - 2)?, (df - 1.0) / (2.0 * df));
    let pi2 = sum_projectors(&extract_subset(big, d, d)?, (df - 1.0) / (2.0 * (df - 2.0)));
    let rank = |p: &CMat| linalg::numerical_rank(&linalg::singular_values(p), RANK_TOL);
    let idem = |p: &CMat| linalg::op_norm(&(p * p - p));
    let defect = |p: &CMat| (1.0 - linalg::inner(&big.components, &(p * &big.components)).re).abs();
    let commutator = linalg::op_norm(&(&pi1 * &pi2 - &pi2 * &pi1));
    let (rank1, rank2) = (rank(&pi1), rank(&pi2));
    let (idempotency1, idempotency2) = (idem(&pi1), idem(&pi2));
    let (fiducial_defect1, fiducial_defect2) = (defect(&pi1), defect(&pi2));
    let pass = rank1 == d * (d - 1) / 2
        && rank2 == (d - 1) * (d - 2) / 2
        && idempotency1.max(idempotency2).max(fiducial_defect1).max(fiducial_defect2).max(commutator) <= tol;
    Ok(ProjectorPair {
        pi1,
        pi2,
        rank1,
        rank2,
        idempotency1,
        idempotency2,
        fiducial_defect1,
        fiducial_defect2,
        commutator,
        tolerance: tol,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedForms {
    /// `|| Pi_1 - 1 (x) (1 + P)/2 ||` in the CRT tensor basis
    pub pi1_residual: f64,
    /// `|| Pi_2 - (1 - P_theta)/2 (x) 1 ||` in the CRT tensor basis
    pub pi2_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compare both projectors with their tensor-product forms.
pub fn projector_closed_forms(pair: &ProjectorPair, theta: &OverlapTable, m: &SymplecticMatrix) -> Result<ClosedForms> {
    let d = theta.dim;
    let split = CrtSplit::tower(d as u64)?;
    let half = c(0.5, 0.0);
    let right = (linalg::identity(d - 2) + parity(d - 2)?) * half;
    let left = (linalg::identity(d) - generalized_parity(theta, &m_prime(m)?)?) * half;
    let pi1_residual =
        linalg::op_norm(&(to_tensor_basis(&pair.pi1, &split) - linalg::kron(&linalg::identity(d), &right)));
    let pi2_residual =
        linalg::op_norm(&(to_tensor_basis(&pair.pi2, &split) - linalg::kron(&left, &linalg::identity(d - 2))));
    Ok(ClosedForms {
        pi1_residual,
        pi2_residual,
        tolerance: pair.tolerance,
        pass: pi1_residual.max(pi2_residual) <= pair.tolerance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Multiplet {
    /// Number of distinct conjugates `D_P Pi D_P^dag`.
    pub distinct: usize,
    /// Whether every SIC vector lies in exactly one member.
    pub partitions_sic: bool,
}

/// Distinct Weyl-Heisenberg conjugates of a projector, and SIC membership.
pub fn orbit_multiplet(big: &Fiducial, pi: &CMat) -> Multiplet {
    let n = big.dim;
    let conjugates: Vec<CMat> = DisplacementIndex::all(n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| {
            let dp = displacement(n, p);
            &dp * pi * dp.adjoint()
        })
        .collect();
    let mut distinct: Vec<CMat> = Vec::new();
    for m in conjugates {
        if distinct.iter().all(|x| (x - &m).norm() > DISTINCT_TOL && linalg::op_norm(&(x - &m)) > DISTINCT_TOL) {
            distinct.push(m);
        }
    }
    let partitions_sic = DisplacementIndex::all(n).collect::<Vec<_>>().par_iter().all(|p| {
        let v = big.vector(p);
        let inside = distinct.iter().filter(|q| (linalg::inner(&v, &(*q * &v)).re - 1.0).abs() <= 1e-6).count();
        inside == 1
    });
    Multiplet { distinct: distinct.len(), partitions_sic }
}

pub fn orbit_multiplets(big: &Fiducial, projectors: &ProjectorPair) -> (Multiplet, Multiplet) {
    rayon::join(|| orbit_multiplet(big, &projectors.pi1), || orbit_multiplet(big, &projectors.pi2))
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplexProbe {
    pub real_phases: usize,
    /// Largest real-phase count over displacements of the small fiducial.
    pub max_real_phases: usize,
    pub max_real_phases_shift: DisplacementIndex,
    /// Certificate for a stride subset of exactly d vectors, when one exists.
    pub simplex: Option<EtfCertificate>,
}

pub fn simplex_probe(theta: &OverlapTable, big: &Fiducial) -> Result<SimplexProbe> {
    let d = theta.dim;
    let count = |t: &OverlapTable| t.real_phases(REAL_PHASE_TOL).len();
    let real_phases = count(theta);
    let (max_real_phases_shift, max_real_phases) = DisplacementIndex::all(d)
        .map(|q| (q, count(&crate::alignment::displace_table(theta, &q))))
        .max_by_key(|(_, k)| *k)
        .expect("nonempty");
    let params = EtfParams::new(d - 1, d)?;
    let mut simplex = None;
    for stride in [d - 2, d] {
        let side = big.dim / stride;
        if side * side == d {
            let (idx, vecs): (Vec<_>, Vec<_>) = extract_subset(big, d, stride)?.into_iter().unzip();
            simplex = Some(certify_etf(&vecs, idx, &params)?);
        }
    }
    Ok(SimplexProbe { real_phases, max_real_phases, max_real_phases_shift, simplex })
}
