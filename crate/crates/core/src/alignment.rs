//! Aligned SIC pairs in dimensions d and N = d(d-2).
//!
//! Two phase relations are tested. On the stride-d sublattice of the big
//! table, odd d gives `Theta_{di,dj} = 1` and even d gives
//! `Theta_{di,dj} = -(-1)^{(i+1)(j+1)}`. On the stride-(d-2) sublattice,
//! `Theta_{(d-2)p} = s(p) e^{2 i theta_{Mp}}` for a matrix M with det +-1 mod d,
//! where `s(p) = -1` for odd d and `(-1)^{(i+1)(j+1)}` for even d.
//!
//! Fiducial choice matters, so `align` scans displacements of the big
//! fiducial, and displacements and complex conjugation of the small one.
//! Displacing by Q multiplies overlap phases by `omega^<p,Q>`, which is
//! applied to the tables directly.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::{omega_pow, symplectic_form, DisplacementIndex, SymplecticMatrix};
use crate::sic::{overlap_table, Fiducial, OverlapTable};

/// Default tolerance on phase deviations.
pub const ALIGN_TOL: f64 = 1e-8;
/// Residuals within this factor of the tolerance are inconclusive rather than negative.
pub const INCONCLUSIVE_FACTOR: f64 = 100.0;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Aligned,
    NotAligned,
    Inconclusive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(d: usize) -> Self {
        if d.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

pub fn verdict(residual: f64, tol: f64) -> Verdict {
    if residual <= tol {
        Verdict::Aligned
    } else if residual <= INCONCLUSIVE_FACTOR * tol {
        Verdict::Inconclusive
    } else {
        Verdict::NotAligned
    }
}

/// Phases `Theta_{stride i, stride j}` for i, j in `0..N/stride`.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseSubsetView {
    pub stride: usize,
    /// N / stride
    pub side: usize,
    /// row-major in (i, j)
    pub values: Vec<C64>,
}

impl PhaseSubsetView {
    pub fn new(table: &OverlapTable, d: usize, stride: usize) -> Result<Self> {
        check_dims(table.dim, d)?;
        if stride != d && stride != d - 2 {
            return Err(Error::Stride { stride, d, dm2: d - 2 });
        }
        let side = table.dim / stride;
        let values =
            (0..side * side).map(|k| table.at(((k / side) * stride) as i64, ((k % side) * stride) as i64)).collect();
        Ok(Self { stride, side, values })
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.side + j]
    }
}

fn check_dims(n: usize, d: usize) -> Result<()> {
    if d < 4 || n != d * (d - 2) {
        return Err(Error::Invalid(format!("dimensions ({d}, {n}) are not of the form (d, d(d-2)) with d >= 4")));
    }
    Ok(())
}

fn checker_sign(i: usize, j: usize) -> f64 {
    if ((i + 1) * (j + 1)).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Predicted `Theta_{di,dj}`.
pub fn observation1_prediction(d: usize, i: usize, j: usize) -> f64 {
    match Parity::of(d) {
        Parity::Odd => 1.0,
        Parity::Even => -checker_sign(i, j),
    }
}

/// Sign multiplying `e^{2 i theta}` in the second relation.
pub fn observation2_sign(d: usize, i: usize, j: usize) -> f64 {
    match Parity::of(d) {
        Parity::Odd => -1.0,
        Parity::Even => checker_sign(i, j),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Observation1 {
    pub residual: f64,
    pub pattern: &'static str,
}

fn pattern1(d: usize) -> &'static str {
    match Parity::of(d) {
        Parity::Odd => "+1",
        Parity::Even => "-(-1)^((i+1)(j+1))",
    }
}

fn pattern2(d: usize) -> &'static str {
    match Parity::of(d) {
        Parity::Odd => "-exp(2i theta_Mp)",
        Parity::Even => "(-1)^((i+1)(j+1)) exp(2i theta_Mp)",
    }
}

fn observation1_residual(view: &PhaseSubsetView, d: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..view.side {
        for j in 0..view.side {
            if i == 0 && j == 0 {
                continue;
            }
            worst = worst.max((view.at(i, j) - observation1_prediction(d, i, j)).norm());
        }
    }
    worst
}

pub fn check_observation1(big: &OverlapTable, d: usize) -> Result<Observation1> {
    let view = PhaseSubsetView::new(big, d, d)?;
    Ok(Observation1 { residual: observation1_residual(&view, d), pattern: pattern1(d) })
}

#[derive(Clone, Debug, Serialize)]
pub struct Observation2 {
    /// Smallest residual over all M.
    pub residual: f64,
    /// The minimizing M when the residual passes the tolerance.
    pub m: Option<SymplecticMatrix>,
    /// All M passing the tolerance.
    pub minimizers: Vec<SymplecticMatrix>,
    pub pattern: &'static str,
}

/// Matrices mod d with det +-1.
pub fn m_candidates(d: usize) -> Vec<SymplecticMatrix> {
    SymplecticMatrix::enumerate(d as u64, &[1, -1])
}

fn m_residual(view: &PhaseSubsetView, squares: &[C64], m: &SymplecticMatrix, d: usize, bound: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if i == 0 && j == 0 {
                continue;
            }
            let (a, b) = m.apply_raw(i as i64, j as i64);
            let pred = squares[a as usize * d + b as usize] * observation2_sign(d, i, j);
            worst = worst.max((view.at(i, j) - pred).norm());
            if worst > bound {
                return worst;
            }
        }
    }
    worst
}

fn search_m(view: &PhaseSubsetView, squares: &[C64], ms: &[SymplecticMatrix], d: usize, tol: f64) -> Observation2 {
    let scored: Vec<(f64, SymplecticMatrix)> =
        ms.par_iter().map(|m| (m_residual(view, squares, m, d, f64::INFINITY), *m)).collect();
    let (best, best_m) = scored.iter().copied().min_by(|a, b| a.0.total_cmp(&b.0)).expect("nonempty M set");
    let minimizers: Vec<SymplecticMatrix> = scored.iter().filter(|s| s.0 <= tol).map(|s| s.1).collect();
    Observation2 { residual: best, m: (best <= tol).then_some(best_m), minimizers, pattern: pattern2(d) }
}

fn squared_phases(small: &OverlapTable) -> Vec<C64> {
    small.phases.iter().map(|z| z * z).collect()
}

pub fn check_observation2(big: &OverlapTable, small: &OverlapTable) -> Result<Observation2> {
    check_observation2_with(big, small, ALIGN_TOL)
}

pub fn check_observation2_with(big: &OverlapTable, small: &OverlapTable, tol: f64) -> Result<Observation2> {
    let d = small.dim;
    let view = PhaseSubsetView::new(big, d, d - 2)?;
    Ok(search_m(&view, &squared_phases(small), &m_candidates(d), d, tol))
}

/// Table of `D_q |psi>` from the table of `|psi>`.
pub fn displace_table(table: &OverlapTable, q: &DisplacementIndex) -> OverlapTable {
    let d = table.dim;
    let phases = DisplacementIndex::all(d)
        .map(|p| {
            let k = symplectic_form(&p, q).expect("same modulus").value() as i64;
            table.phase(&p) * omega_pow(d, k)
        })
        .collect();
    OverlapTable { dim: d, phases, residual: table.residual }
}

/// Table of the complex conjugate fiducial.
pub fn conjugate_table(table: &OverlapTable) -> OverlapTable {
    let d = table.dim;
    // <psi*|D_{i,j}|psi*> = conj(<psi|D_{i,j}^*|psi>) and D_{i,j}^* = D_{i,-j};
    // for even d the stored label d-j differs from -j by (-1)^i
    let phases = DisplacementIndex::all(d)
        .map(|p| {
            let (i, j) = p.pair();
            let sign = if d.is_multiple_of(2) && j != 0 && i % 2 == 1 { -1.0 } else { 1.0 };
            table.at(i, -j).conj() * sign
        })
        .collect();
    OverlapTable { dim: d, phases, residual: table.residual }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlignmentReport {
    pub d: usize,
    pub n: usize,
    pub parity: Parity,
    pub obs1_residual: f64,
    pub obs1_pattern: &'static str,
    pub obs2_residual: f64,
    pub obs2_pattern: &'static str,
    /// Present iff the second relation passes.
    pub m: Option<SymplecticMatrix>,
    pub m_minimizers: Vec<SymplecticMatrix>,
    /// Displacement applied to the big fiducial.
    pub big_shift: DisplacementIndex,
    /// Displacement applied to the small fiducial (after optional conjugation).
    pub small_shift: DisplacementIndex,
    pub small_conjugated: bool,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Report plus the fiducials in the frame where the relations were tested.
#[derive(Clone, Debug)]
pub struct Alignment {
    pub report: AlignmentReport,
    pub small: Fiducial,
    pub big: Fiducial,
}

impl Alignment {
    pub fn small_table(&self) -> Result<OverlapTable> {
        overlap_table(&self.small)
    }

    pub fn big_table(&self) -> Result<OverlapTable> {
        overlap_table(&self.big)
    }
}

/// Big-fiducial shifts to scan. For odd d only shifts divisible by d are
/// needed: the stride-d phases see Q mod (d-2), and a shift mod d can be
/// absorbed into the small fiducial's displacement.
fn big_shifts(d: usize) -> Vec<DisplacementIndex> {
    let n = d * (d - 2);
    match Parity::of(d) {
        Parity::Odd => {
            let m = d - 2;
            (0..m * m).map(|k| DisplacementIndex::new((d * (k / m)) as i64, (d * (k % m)) as i64, n)).collect()
        }
        Parity::Even => DisplacementIndex::all(n).collect(),
    }
}

pub fn align(small: &Fiducial, big: &Fiducial) -> Result<Alignment> {
    align_with(small, big, ALIGN_TOL)
}

pub fn align_with(small: &Fiducial, big: &Fiducial, tol: f64) -> Result<Alignment> {
    let d = small.dim;
    check_dims(big.dim, d)?;
    let small_table = overlap_table(small)?;
    let big_table = overlap_table(big)?;
    let n = big.dim;
    let ms = m_candidates(d);
    let small_variants: Vec<(bool, DisplacementIndex, Vec<C64>)> = [false, true]
        .into_iter()
        .flat_map(|conj| {
            let base = if conj { conjugate_table(&small_table) } else { small_table.clone() };
            DisplacementIndex::all(d).map(move |q| (conj, q, squared_phases(&displace_table(&base, &q))))
        })
        .collect();

    struct Best {
        score: f64,
        obs1: f64,
        obs2: Observation2,
        big_shift: DisplacementIndex,
        small_shift: DisplacementIndex,
        conj: bool,
    }
    let mut best: Option<Best> = None;
    for big_shift in big_shifts(d) {
        let shifted = displace_table(&big_table, &big_shift);
        let obs1 = observation1_residual(&PhaseSubsetView::new(&shifted, d, d)?, d);
        if best.as_ref().is_some_and(|b| obs1 >= b.score) {
            continue;
        }
        let view2 = PhaseSubsetView::new(&shifted, d, d - 2)?;
        for (conj, q, squares) in &small_variants {
            let obs2 = search_m(&view2, squares, &ms, d, tol);
            let score = obs1.max(obs2.residual);
            if best.as_ref().is_none_or(|b| score < b.score) {
                best = Some(Best { score, obs1, obs2, big_shift, small_shift: *q, conj: *conj });
            }
            if score <= tol {
                break;
            }
        }
        if best.as_ref().is_some_and(|b| b.score <= tol) {
            break;
        }
    }
    let b = best.expect("at least one candidate");
    let small_frame = if b.conj { small.conjugated() } else { small.clone() }.displaced(&b.small_shift);
    let big_frame = big.displaced(&b.big_shift);
    let report = AlignmentReport {
        d,
        n,
        parity: Parity::of(d),
        obs1_residual: b.obs1,
        obs1_pattern: pattern1(d),
        obs2_residual: b.obs2.residual,
        obs2_pattern: pattern2(d),
        m: b.obs2.m,
        m_minimizers: b.obs2.minimizers,
        big_shift: b.big_shift,
        small_shift: b.small_shift,
        small_conjugated: b.conj,
        tolerance: tol,
        verdict: verdict(b.score, tol),
    };
    Ok(Alignment { report, small: small_frame, big: big_frame })
}
