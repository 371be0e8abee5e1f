//! Numerical fiducial search.
//!
//! Minimizes `sum_{p != 0} (|<psi|D_p psi>|^2 - 1/(d+1))^2` over unit vectors,
//! optionally restricted to a subspace (typically a Zauner eigenspace).
//! Each restart draws a Gaussian starting point, runs L-BFGS with a
//! backtracking line search on the scale-invariant objective (its gradient is
//! the projection onto the tangent space of the sphere), then polishes with
//! Levenberg-Marquardt on the residual vector. Restarts are independent and
//! run on the rayon pool; the lowest converged restart index wins, so the
//! outcome does not depend on the thread count.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{sic_residual, Centring, Fiducial};
use crate::error::{Error, Result};
use crate::heisenberg::tau_pow;
use crate::linalg::{self, c, CMat, CVec};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug)]
pub enum SearchSpace {
    Full,
    /// Orthonormal columns spanning the search subspace.
    Subspace {
        basis: CMat,
        description: String,
    },
}

impl SearchSpace {
    pub fn description(&self) -> String {
        match self {
            SearchSpace::Full => "full space".to_string(),
            SearchSpace::Subspace { description, basis } => format!("{description} (dim {})", basis.ncols()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
    pub space: SearchSpace,
    /// Keep the coefficients in `space` real.
    pub real: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { seed: 0, restarts: 64, max_iters: 3000, tolerance: 1e-12, space: SearchSpace::Full, real: false }
    }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Converged { fiducial: Fiducial, residual: f64, restart: usize },
    NotConverged { best: Fiducial, residual: f64 },
}

impl SearchOutcome {
    pub fn residual(&self) -> f64 {
        match self {
            SearchOutcome::Converged { residual, .. } | SearchOutcome::NotConverged { residual, .. } => *residual,
        }
    }

    pub fn fiducial(&self) -> &Fiducial {
        match self {
            SearchOutcome::Converged { fiducial, .. } => fiducial,
            SearchOutcome::NotConverged { best, .. } => best,
        }
    }

    pub fn converged(&self) -> Option<&Fiducial> {
        match self {
            SearchOutcome::Converged { fiducial, .. } => Some(fiducial),
            SearchOutcome::NotConverged { .. } => None,
        }
    }
}

/// Summed squared deviation of the overlaps from equiangularity; the vector is
/// normalized first. Zero exactly on SIC fiducials.
pub fn sic_objective(psi: &CVec) -> f64 {
    let d = psi.len();
    let y = linalg::normalize(psi).expect("zero vector");
    let t = 1.0 / (d as f64 + 1.0);
    let mut acc = 0.0;
    for i in 0..d as i64 {
        for j in 0..d as i64 {
            if i == 0 && j == 0 {
                continue;
            }
            let g = crate::heisenberg::expectation(d, i, j, &y);
            acc += (g.norm_sqr() - t).powi(2);
        }
    }
    acc
}

struct Problem {
    d: usize,
    basis: Option<CMat>,
    real: bool,
    /// tau^k for k in 0..2d
    taus: Vec<C64>,
}

struct Eval {
    residuals: Vec<f64>,
    /// d(r_p)/d(conj v) for the unnormalized vector v, one column per p != 0
    partials: Vec<CVec>,
}

impl Problem {
    fn new(d: usize, basis: Option<CMat>, real: bool) -> Self {
        let taus = (0..2 * d as i64).map(|k| tau_pow(d, k)).collect();
        Self { d, basis, real, taus }
    }

    fn nparams(&self) -> usize {
        let n = self.basis.as_ref().map_or(self.d, |b| b.ncols());
        if self.real {
            n
        } else {
            2 * n
        }
    }

    fn coeffs(&self, x: &[f64]) -> CVec {
        if self.real {
            return CVec::from_iterator(x.len(), x.iter().map(|&a| c(a, 0.0)));
        }
        CVec::from_iterator(x.len() / 2, x.chunks(2).map(|p| c(p[0], p[1])))
    }

    fn vector(&self, x: &[f64]) -> CVec {
        let cf = self.coeffs(x);
        match &self.basis {
            Some(b) => b * cf,
            None => cf,
        }
    }

    fn tau(&self, k: i64) -> C64 {
        self.taus[k.rem_euclid(2 * self.d as i64) as usize]
    }

    fn evaluate(&self, x: &[f64], with_partials: bool) -> Eval {
        let d = self.d;
        let v = self.vector(x);
        let rho = v.norm();
        let y = &v / c(rho, 0.0);
        let t = 1.0 / (d as f64 + 1.0);
        let mut residuals = Vec::with_capacity(d * d - 1);
        let mut partials = Vec::new();
        let mut dy = CVec::zeros(d);
        let mut ddag_y = CVec::zeros(d);
        for i in 0..d as i64 {
            for j in 0..d as i64 {
                if i == 0 && j == 0 {
                    continue;
                }
                let shift = i as usize;
                for s in 0..d {
                    let ph = self.tau(i * j + 2 * j * s as i64);
                    dy[(s + shift) % d] = ph * y[s];
                    ddag_y[s] = ph.conj() * y[(s + shift) % d];
                }
                let g = y.dotc(&dy);
                residuals.push(g.norm_sqr() - t);
                if with_partials {
                    let w = &dy * g.conj() + &ddag_y * g;
                    let radial = y.dotc(&w).re;
                    partials.push((w - &y * c(radial, 0.0)) / c(rho, 0.0));
                }
            }
        }
        Eval { residuals, partials }
    }

    /// Wirtinger partial with respect to conj(coefficients), as real gradient pairs.
    fn to_real(&self, dv: &CVec) -> Vec<f64> {
        let dc = match &self.basis {
            Some(b) => b.adjoint() * dv,
            None => dv.clone(),
        };
        if self.real {
            return dc.iter().map(|z| 2.0 * z.re).collect();
        }
        dc.iter().flat_map(|z| [2.0 * z.re, 2.0 * z.im]).collect()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x, false).residuals.iter().map(|r| r * r).sum()
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let e = self.evaluate(x, true);
        let mut acc = CVec::zeros(self.d);
        for (r, w) in e.residuals.iter().zip(&e.partials) {
            acc += w * c(2.0 * r, 0.0);
        }
        (e.residuals.iter().map(|r| r * r).sum(), self.to_real(&acc))
    }

    fn residual_jacobian(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let e = self.evaluate(x, true);
        let n = self.nparams();
        let mut jac = DMatrix::zeros(e.residuals.len(), n);
        for (row, w) in e.partials.iter().enumerate() {
            for (col, val) in self.to_real(w).into_iter().enumerate() {
                jac[(row, col)] = val;
            }
        }
        (DVector::from_vec(e.residuals), jac)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lbfgs(problem: &Problem, mut x: Vec<f64>, max_iters: usize) -> Vec<f64> {
    const MEMORY: usize = 12;
    let (mut f, mut g) = problem.value_grad(&x);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    for _ in 0..max_iters {
        if f < 1e-28 || dot(&g, &g).sqrt() < 1e-16 {
            break;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = hist.back().map_or(1.0 / dot(&g, &g).sqrt().max(1e-300), |(s, y, _)| dot(s, y) / dot(y, y));
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let ft = problem.value(&trial);
            if ft <= f + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, _)) = accepted else {
            if hist.is_empty() {
                break;
            }
            hist.clear();
            continue;
        };
        let (fn_, gn) = problem.value_grad(&xn);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > MEMORY {
                hist.pop_front();
            }
        }
        x = xn;
        f = fn_;
        g = gn;
        // keep the iterate near the unit sphere; the objective is scale invariant
        let norm = dot(&x, &x).sqrt();
        if !(0.5..=2.0).contains(&norm) {
            x.iter_mut().for_each(|v| *v /= norm);
            let (f2, g2) = problem.value_grad(&x);
            f = f2;
            g = g2;
            hist.clear();
        }
    }
    x
}

fn levenberg_marquardt(problem: &Problem, mut x: Vec<f64>, iters: usize) -> Vec<f64> {
    let mut lambda = 1e-6;
    let mut f = problem.value(&x);
    for _ in 0..iters {
        let (r, jac) = problem.residual_jacobian(&x);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let rhs = -(&jt * &r);
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&rhs)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let ft = problem.value(&trial);
            if ft < f {
                x = trial;
                f = ft;
                lambda = (lambda / 5.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 8.0;
        }
        if !improved || f < 1e-31 {
            break;
        }
        let norm = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

fn run_restart(problem: &Problem, opts: &SearchOptions, restart: usize) -> (CVec, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let mut x: Vec<f64> = (0..problem.nparams()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let x = lbfgs(problem, x, opts.max_iters);
    let x = levenberg_marquardt(problem, x, 60);
    let v = linalg::fix_phase_vec(&linalg::normalize(&problem.vector(&x)).expect("nonzero iterate"));
    let f = Fiducial { dim: problem.d, components: v.clone(), label: String::new(), centring: Centring::Unknown };
    (v, sic_residual(&f))
}

pub fn find_fiducial(d: usize, opts: &SearchOptions) -> Result<SearchOutcome> {
    if d < 2 {
        return Err(Error::Dimension { dim: d, reason: "SIC search needs d >= 2" });
    }
    let basis = match &opts.space {
        SearchSpace::Full => None,
        SearchSpace::Subspace { basis, .. } => {
            if basis.nrows() != d || basis.ncols() == 0 {
                return Err(Error::Invalid(format!(
                    "search basis is {}x{} in dimension {d}",
                    basis.nrows(),
                    basis.ncols()
                )));
            }
            Some(basis.clone())
        }
    };
    let problem = Problem::new(d, basis, opts.real);
    let chunk = rayon::current_num_threads().max(1);
    let mut best: Option<(CVec, f64, usize)> = None;
    let restarts = opts.restarts.max(1);
    for start in (0..restarts).step_by(chunk) {
        let end = (start + chunk).min(restarts);
        let results: Vec<(usize, CVec, f64)> = (start..end)
            .into_par_iter()
            .map(|r| {
                let (v, res) = run_restart(&problem, opts, r);
                (r, v, res)
            })
            .collect();
        for (r, v, res) in results {
            if best.as_ref().is_none_or(|b| res < b.1) {
                best = Some((v.clone(), res, r));
            }
            if res <= opts.tolerance {
                let fiducial = Fiducial {
                    dim: d,
                    components: v,
                    label: format!("search d={d} seed={} restart={r} ({})", opts.seed, opts.space.description()),
                    centring: Centring::Unknown,
                };
                return Ok(SearchOutcome::Converged { fiducial, residual: res, restart: r });
            }
        }
    }
    let (v, res, r) = best.expect("at least one restart");
    let best = Fiducial {
        dim: d,
        components: v,
        label: format!("best of search d={d} seed={} restart={r}", opts.seed),
        centring: Centring::Unknown,
    };
    Ok(SearchOutcome::NotConverged { best, residual: res })
}
