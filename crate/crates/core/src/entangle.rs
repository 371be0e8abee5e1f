//! Tensor structure of C^N for N = n1 n2 with coprime odd factors, partial
//! traces and Schmidt spectra, and the reduced-density identities of aligned
//! fiducials.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::{displacement, generalized_parity, parity, DisplacementIndex, SymplecticMatrix};
use crate::linalg::{self, c, CMat, CVec};
use crate::numtheory::{crt_combine, mod_inverse, CrtSplit, Residue};
use crate::sic::{Fiducial, OverlapTable};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-8;
/// Tolerance on operator-norm distances in the reduced-density identities.
pub const THEOREM_TOL: f64 = 1e-8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    First,
    Second,
}

/// A vector on C^N seen as an n1 x n2 matrix through the CRT bijection.
#[derive(Clone, Debug)]
pub struct TensorView {
    pub split: CrtSplit,
    pub vector: CVec,
    /// `matrix[(r1, r2)]` is the component at `crt_combine(r1, r2)`.
    pub matrix: CMat,
}

impl TensorView {
    pub fn new(vector: &CVec, split: &CrtSplit) -> Result<Self> {
        let n = split.n() as usize;
        if n.is_multiple_of(2) {
            return Err(Error::Dimension { dim: n, reason: "tensor view needs odd N" });
        }
        if vector.len() != n {
            return Err(Error::ModulusMismatch(vector.len() as u64, n as u64));
        }
        let (n1, n2) = (split.n1 as usize, split.n2 as usize);
        let matrix = CMat::from_fn(n1, n2, |r1, r2| {
            let r = crt_combine(Residue::new(r1 as u64, split.n1), Residue::new(r2 as u64, split.n2), split)
                .expect("coprime split");
            vector[r.value() as usize]
        });
        Ok(Self { split: *split, vector: vector.clone(), matrix })
    }

    pub fn of(f: &Fiducial, split: &CrtSplit) -> Result<Self> {
        Self::new(&f.components, split)
    }

    /// Flatten back to C^N.
    pub fn flatten(&self) -> CVec {
        let n = self.split.n() as usize;
        let mut out = CVec::zeros(n);
        for r1 in 0..self.matrix.nrows() {
            for r2 in 0..self.matrix.ncols() {
                let r = crt_combine(
                    Residue::new(r1 as u64, self.split.n1),
                    Residue::new(r2 as u64, self.split.n2),
                    &self.split,
                )
                .expect("coprime split");
                out[r.value() as usize] = self.matrix[(r1, r2)];
            }
        }
        out
    }

    pub fn reduced_density(&self, keep: Factor) -> CMat {
        match keep {
            Factor::First => &self.matrix * self.matrix.adjoint(),
            Factor::Second => self.matrix.transpose() * self.matrix.map(|z| z.conj()),
        }
    }

    pub fn schmidt_spectrum(&self) -> SchmidtSpectrum {
        let coefficients = linalg::singular_values(&self.matrix).into_iter().map(|s| s * s).collect();
        SchmidtSpectrum { coefficients }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SchmidtSpectrum {
    /// Non-increasing squared singular values.
    pub coefficients: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn rank(&self) -> usize {
        let sv: Vec<f64> = self.coefficients.iter().map(|x| x.max(0.0).sqrt()).collect();
        linalg::numerical_rank(&sv, RANK_TOL)
    }

    pub fn total(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

pub fn reduced_density(f: &Fiducial, split: &CrtSplit, keep: Factor) -> Result<CMat> {
    Ok(TensorView::of(f, split)?.reduced_density(keep))
}

pub fn schmidt_spectrum(f: &Fiducial, split: &CrtSplit) -> Result<SchmidtSpectrum> {
    Ok(TensorView::of(f, split)?.schmidt_spectrum())
}

/// The big label whose displacement is `D_p (x) 1` (first factor) or
/// `1 (x) D_p` (second factor) in the CRT tensor basis.
pub fn embed_local_index(p: &DisplacementIndex, split: &CrtSplit, on: Factor) -> Result<DisplacementIndex> {
    let n = split.n();
    let (i, j) = p.pair();
    let (own, other, h_inv) = match on {
        Factor::First => (split.n1, split.n2, split.n2),
        Factor::Second => (split.n2, split.n1, split.n1),
    };
    if p.dim() as u64 != own {
        return Err(Error::ModulusMismatch(p.dim() as u64, own));
    }
    // i = i_local mod own, 0 mod other; j = j_local * (H^-1) mod own, 0 mod other
    let zero = Residue::new(0, other);
    let lift = |x: i64| -> Result<u64> {
        let r = Residue::from_i64(x, own);
        let (r1, r2) = match on {
            Factor::First => (r, zero),
            Factor::Second => (zero, r),
        };
        Ok(crt_combine(r1, r2, split)?.value())
    };
    Ok(DisplacementIndex::new(lift(i)? as i64, lift(j * h_inv as i64)? as i64, n as usize))
}

/// Reduced density rebuilt from overlap phases:
/// `rho = (1/n) sum_p conj(<psi|D_P|psi>) D_p` with P the embedded label.
pub fn reduced_density_from_phases(table: &OverlapTable, split: &CrtSplit, keep: Factor) -> Result<CMat> {
    let n_keep = match keep {
        Factor::First => split.n1,
        Factor::Second => split.n2,
    } as usize;
    if table.dim as u64 != split.n() {
        return Err(Error::ModulusMismatch(table.dim as u64, split.n()));
    }
    let scale = 1.0 / (table.dim as f64 + 1.0).sqrt();
    let mut acc = CMat::zeros(n_keep, n_keep);
    for p in DisplacementIndex::all(n_keep) {
        let big = embed_local_index(&p, split, keep)?;
        let expectation = if big.is_zero() { c(1.0, 0.0) } else { table.phase(&big) * scale };
        acc += displacement(n_keep, &p) * expectation.conj();
    }
    Ok(acc / c(n_keep as f64, 0.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub d: usize,
    /// `|| rho_{d-2} - (1 + P)/(d-1) ||`
    pub residual: f64,
    pub rank: usize,
    pub expected_rank: usize,
    pub spectrum: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

fn density_rank(rho: &CMat) -> (usize, Vec<f64>) {
    let ev = linalg::hermitian_eigenvalues(rho);
    let sv: Vec<f64> = ev.iter().map(|x| x.abs()).collect();
    let mut sorted = sv.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    (linalg::numerical_rank(&sorted, RANK_TOL), ev)
}

fn tower_split(f: &Fiducial, d: usize) -> Result<CrtSplit> {
    if d.is_multiple_of(2) || d < 5 {
        return Err(Error::Dimension { dim: d, reason: "reduced-density identities are for odd d >= 5" });
    }
    if f.dim != d * (d - 2) {
        return Err(Error::Invalid(format!("fiducial has dimension {}, expected {}", f.dim, d * (d - 2))));
    }
    CrtSplit::tower(d as u64)
}

/// Reduced density on C^{d-2} against `(1 + P)/(d-1)`.
pub fn check_theorem1(f: &Fiducial, d: usize) -> Result<Theorem1Report> {
    check_theorem1_with(f, d, THEOREM_TOL)
}

pub fn check_theorem1_with(f: &Fiducial, d: usize, tol: f64) -> Result<Theorem1Report> {
    let split = tower_split(f, d)?;
    let rho = reduced_density(f, &split, Factor::Second)?;
    let target = (linalg::identity(d - 2) + parity(d - 2)?) / c(d as f64 - 1.0, 0.0);
    let residual = linalg::op_norm(&(&rho - target));
    let (rank, spectrum) = density_rank(&rho);
    let expected_rank = (d - 1) / 2;
    Ok(Theorem1Report {
        d,
        residual,
        rank,
        expected_rank,
        spectrum,
        tolerance: tol,
        pass: residual <= tol && rank == expected_rank,
    })
}

/// `M' = M diag(-2^{-1}, 1)` mod d, the matrix feeding the generalized parity.
pub fn m_prime(m: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    let d = m.modulus;
    let half = mod_inverse(Residue::new(2, d))?.value() as i64;
    Ok(m.mul(&SymplecticMatrix::new(-half, 0, 0, 1, d)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem2Report {
    pub d: usize,
    /// `|| rho_d - (1 - P_theta)/(d-1) ||`
    pub residual: f64,
    pub rank: usize,
    pub expected_rank: usize,
    pub spectrum: Vec<f64>,
    pub m: SymplecticMatrix,
    pub m_prime: SymplecticMatrix,
    /// Eigenvalues of `P_theta`, decreasing.
    pub parity_spectrum: Vec<f64>,
    /// `|| P_theta^2 - 1 ||`
    pub parity_involution_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Reduced density on C^d against `(1 - P_theta)/(d-1)` with `P_theta` built
/// from the small table and `M' = M diag(-2^{-1}, 1)`.
pub fn check_theorem2(f: &Fiducial, theta: &OverlapTable, m: &SymplecticMatrix) -> Result<Theorem2Report> {
    check_theorem2_with(f, theta, m, THEOREM_TOL)
}

pub fn check_theorem2_with(
    f: &Fiducial,
    theta: &OverlapTable,
    m: &SymplecticMatrix,
    tol: f64,
) -> Result<Theorem2Report> {
    let d = theta.dim;
    let split = tower_split(f, d)?;
    if m.modulus != d as u64 {
        return Err(Error::ModulusMismatch(m.modulus, d as u64));
    }
    let mp = m_prime(m)?;
    let p_theta = generalized_parity(theta, &mp)?;
    let rho = reduced_density(f, &split, Factor::First)?;
    let target = (linalg::identity(d) - &p_theta) / c(d as f64 - 1.0, 0.0);
    let residual = linalg::op_norm(&(&rho - target));
    let (rank, spectrum) = density_rank(&rho);
    let parity_spectrum = linalg::hermitian_eigenvalues(&p_theta);
    let parity_involution_defect = linalg::op_norm(&(&p_theta * &p_theta - linalg::identity(d)));
    let expected_rank = (d - 1) / 2;
    Ok(Theorem2Report {
        d,
        residual,
        rank,
        expected_rank,
        spectrum,
        m: *m,
        m_prime: mp,
        parity_spectrum,
        parity_involution_defect,
        tolerance: tol,
        pass: residual <= tol && rank == expected_rank,
    })
}
