//! Clifford stabilizers of SIC fiducials and the involution `U_b = 1 (x) P`
//! of aligned fiducials in dimension d(d-2).

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::{
    apply_displacement, clifford_unitary_any, zauner_matrices, DisplacementIndex, SymplecticMatrix, ZaunerFlavor,
};
use crate::linalg::{self, CVec};
use crate::sic::{fb_matrix, fb_unitary, zauner_project, Fiducial, SubspaceChoice};

/// Projective invariance tolerance, in `1 - |<psi|V psi>|`.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Full enumeration of SL(2, Z_m) up to this dimension; sampling above it.
pub const FULL_ENUMERATION_MAX_DIM: usize = 15;
const SAMPLE_SIZE: usize = 4000;

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// Symplectic part mod d; det -1 for anti-unitaries.
    pub matrix: SymplecticMatrix,
    /// Displacement q with `D_q V psi` proportional to psi.
    pub shift: DisplacementIndex,
    pub antiunitary: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub dim: usize,
    pub unitary_order: usize,
    pub extended_order: usize,
    pub witnesses: Vec<Witness>,
    /// Whether F_z or F_a itself (undisplaced) is among the witnesses.
    pub zauner_flavor: Option<ZaunerFlavor>,
    /// Zauner eigenspace holding the fiducial, when it is an eigenvector.
    pub subspace: Option<SubspaceChoice>,
    /// Whether some witness has order 3 and trace -1.
    pub has_zauner_type_element: bool,
    /// Whether the witnesses' matrices are closed under multiplication.
    pub closed: bool,
    /// True when only a sample of the group was tested.
    pub lower_bound: bool,
}

/// Returns the q with `D_q phi` proportional to psi, if any.
fn matching_shift(psi: &CVec, phi: &CVec) -> Option<DisplacementIndex> {
    let d = psi.len();
    DisplacementIndex::all(d).find(|q| {
        let (i, j) = q.pair();
        1.0 - linalg::inner(psi, &apply_displacement(d, i, j, phi)).norm() <= SYMMETRY_TOL
    })
}

fn reflection(m: u64) -> SymplecticMatrix {
    SymplecticMatrix::new(1, 0, 0, -1, m)
}

fn is_zauner_type(f: &SymplecticMatrix) -> bool {
    let m = f.modulus;
    f.is_symplectic() && f.order(3) == Some(3) && f.trace().value() == m - 1
}

/// Symmetries `D_q U_F` (det F = 1) and `D_q U_F K` (reported with det -1)
/// of `|psi><psi|`, counted modulo the Weyl-Heisenberg group.
pub fn stabilizer_order(f: &Fiducial) -> Result<SymmetryReport> {
    stabilizer_order_with(f, FULL_ENUMERATION_MAX_DIM, 0)
}

pub fn stabilizer_order_with(f: &Fiducial, max_full_dim: usize, seed: u64) -> Result<SymmetryReport> {
    let d = f.dim;
    if d < 2 {
        return Err(Error::Dimension { dim: d, reason: "symmetries need d >= 2" });
    }
    let m = if d.is_multiple_of(2) { 2 * d } else { d } as u64;
    let mut group = SymplecticMatrix::special_linear(m);
    let lower_bound = d > max_full_dim;
    if lower_bound {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample: Vec<SymplecticMatrix> = group.choose_multiple(&mut rng, SAMPLE_SIZE).copied().collect();
        sample.extend(zauner_matrices(d).iter().map(|z| {
            if d.is_multiple_of(2) {
                crate::heisenberg::lift_even(z, d).unwrap()
            } else {
                *z
            }
        }));
        group = sample;
    }
    let psi = &f.components;
    let psi_conj = psi.map(|z| z.conj());
    let probe = |g: &SymplecticMatrix| -> Vec<Witness> {
        let Ok(u) = clifford_unitary_any(d, g) else { return Vec::new() };
        let mut out = Vec::new();
        if let Some(q) = matching_shift(psi, &(&u * psi)) {
            out.push(Witness { matrix: g.reduce(d as u64), shift: q, antiunitary: false });
        }
        if let Some(q) = matching_shift(psi, &(&u * &psi_conj)) {
            out.push(Witness { matrix: g.mul(&reflection(m)).reduce(d as u64), shift: q, antiunitary: true });
        }
        out
    };
    let mut tested: HashSet<SymplecticMatrix> = group.iter().copied().collect();
    let mut lifts: Vec<SymplecticMatrix> = Vec::new();
    let mut hits: Vec<Witness> = Vec::new();
    let mut batch = group;
    while !batch.is_empty() {
        let found: Vec<(SymplecticMatrix, Vec<Witness>)> =
            batch.par_iter().map(|g| (*g, probe(g))).filter(|(_, w)| !w.is_empty()).collect();
        let fresh: Vec<SymplecticMatrix> = found.iter().map(|(g, _)| *g).collect();
        hits.extend(found.into_iter().flat_map(|(_, w)| w));
        if !lower_bound {
            break;
        }
        // a sample need not contain the products of its hits; probe those too
        lifts.extend(fresh.iter().copied());
        batch = fresh
            .iter()
            .flat_map(|a| lifts.iter().flat_map(move |b| [a.mul(b), b.mul(a)]))
            .filter(|g| tested.insert(*g))
            .collect();
    }
    // lifts of one matrix mod d differ by displacements, so count matrices mod d
    let mut seen = HashSet::new();
    let mut witnesses: Vec<Witness> = hits.into_iter().filter(|w| seen.insert((w.matrix, w.antiunitary))).collect();
    witnesses.sort_by_key(|w| (w.antiunitary, w.matrix.entries));
    let unitary_order = witnesses.iter().filter(|w| !w.antiunitary).count();
    let extended_order = witnesses.len();
    let zauner_flavor = [ZaunerFlavor::Z, ZaunerFlavor::A].into_iter().find(|fl| {
        crate::heisenberg::zauner_matrix(d, *fl)
            .map(|z| witnesses.iter().any(|w| !w.antiunitary && w.matrix == z && w.shift.is_zero()))
            .unwrap_or(false)
    });
    let subspace = match zauner_flavor {
        Some(fl) if d >= 3 => {
            let spaces = zauner_project(d, fl)?;
            let k = spaces.iter().position(|s| (s.basis.adjoint() * psi).norm() > 1.0 - 1e-6);
            match k {
                Some(0) => Some(SubspaceChoice::Largest),
                Some(k) if k + 1 == spaces.len() && spaces[k].dim() < spaces[0].dim() => Some(SubspaceChoice::Smallest),
                _ => None,
            }
        }
        _ => None,
    };
    let mats: HashSet<SymplecticMatrix> = witnesses.iter().map(|w| w.matrix).collect();
    let closed = mats.iter().all(|a| mats.iter().all(|b| mats.contains(&a.mul(b))));
    let has_zauner_type_element = witnesses.iter().any(|w| !w.antiunitary && is_zauner_type(&w.matrix));
    Ok(SymmetryReport {
        dim: d,
        unitary_order,
        extended_order,
        witnesses,
        zauner_flavor,
        subspace,
        has_zauner_type_element,
        closed,
        lower_bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem5Report {
    pub d: usize,
    pub n: usize,
    pub fb: SymplecticMatrix,
    /// `1 - |<Psi_0|U_b Psi_0>|`
    pub invariance_defect: f64,
    /// `perm[p]` is the flat label of the SIC vector `U_b Psi_p` is proportional to.
    pub permutation: Vec<usize>,
    pub permutation_order: usize,
    /// Largest `1 - |<Psi_{F_b p}|U_b Psi_p>|`.
    pub permutation_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn permutation_order(perm: &[usize]) -> usize {
    let mut cur: Vec<usize> = perm.to_vec();
    for k in 1..=perm.len() {
        if cur.iter().enumerate().all(|(i, &x)| i == x) {
            return k;
        }
        cur = cur.iter().map(|&x| perm[x]).collect();
    }
    0
}

/// Invariance of an aligned fiducial under `U_b` and the induced permutation
/// `p -> F_b p` of the SIC.
pub fn check_theorem5(f: &Fiducial, d: usize) -> Result<Theorem5Report> {
    check_theorem5_with(f, d, SYMMETRY_TOL)
}

pub fn check_theorem5_with(f: &Fiducial, d: usize, tol: f64) -> Result<Theorem5Report> {
    let n = f.dim;
    if d.is_multiple_of(2) || d < 5 || n != d * (d - 2) {
        return Err(Error::Invalid(format!("expected odd d >= 5 and N = d(d-2), got d = {d}, N = {n}")));
    }
    let fb = fb_matrix(d)?;
    let ub = fb_unitary(d)?;
    let psi = &f.components;
    let invariance_defect = (1.0 - linalg::inner(psi, &(&ub * psi)).norm()).max(0.0);
    let labels: Vec<DisplacementIndex> = DisplacementIndex::all(n).collect();
    let results: Vec<(usize, f64)> = labels
        .par_iter()
        .map(|p| {
            let image = fb.apply(p);
            let overlap = linalg::inner(&f.vector(&image), &(&ub * f.vector(p))).norm();
            (image.flat(), (1.0 - overlap).max(0.0))
        })
        .collect();
    let permutation: Vec<usize> = results.iter().map(|r| r.0).collect();
    let permutation_defect = results.iter().fold(0.0f64, |m, r| m.max(r.1));
    let order = permutation_order(&permutation);
    Ok(Theorem5Report {
        d,
        n,
        fb,
        invariance_defect,
        permutation,
        permutation_order: order,
        permutation_defect,
        tolerance: tol,
        pass: invariance_defect <= tol && permutation_defect <= tol && order == 2,
    })
}
