//! Weyl-Heisenberg displacement operators, the symplectic action on their
//! labels, Clifford unitaries, parity operators, and the tensor factorization
//! of all of these in odd dimensions N = n1 n2 with coprime factors.
//!
//! Conventions: `tau = -exp(i pi / d)`, `omega = tau^2`, and
//! `(D_{i,j})_{r,s} = tau^(i j + 2 j s) delta_{r, s+i}`. Phase exponents are
//! taken modulo 2d, which is exact for both parities of d. For odd d,
//! `D_p D_q = tau^<p,q> D_{p+q}` with `<p,q> = k j - l i`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::numtheory::{mod_inverse, CrtSplit, Residue};
use crate::sic::OverlapTable;
use num_complex::Complex64 as C64;

/// `tau^k` for integer k, any dimension.
pub fn tau_pow(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(2 * d as i64);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    linalg::cis(PI * k as f64 / d as f64) * sign
}

pub fn omega_pow(d: usize, k: i64) -> C64 {
    tau_pow(d, 2 * k)
}

/// (tau, omega) for odd d.
pub fn roots(d: usize) -> Result<(C64, C64)> {
    if d.is_multiple_of(2) || d < 3 {
        return Err(Error::Dimension { dim: d, reason: "roots of unity convention is for odd d >= 3" });
    }
    Ok((tau_pow(d, 1), omega_pow(d, 1)))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisplacementIndex {
    pub i: Residue,
    pub j: Residue,
}

impl DisplacementIndex {
    pub fn new(i: i64, j: i64, d: usize) -> Self {
        Self { i: Residue::from_i64(i, d as u64), j: Residue::from_i64(j, d as u64) }
    }

    pub fn zero(d: usize) -> Self {
        Self::new(0, 0, d)
    }

    pub fn dim(&self) -> usize {
        self.i.modulus() as usize
    }

    pub fn pair(&self) -> (i64, i64) {
        (self.i.value() as i64, self.j.value() as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.i.value() == 0 && self.j.value() == 0
    }

    /// Flat position `i d + j` used by overlap tables.
    pub fn flat(&self) -> usize {
        self.i.value() as usize * self.dim() + self.j.value() as usize
    }

    pub fn from_flat(k: usize, d: usize) -> Self {
        Self::new((k / d) as i64, (k % d) as i64, d)
    }

    pub fn scale(&self, k: i64) -> Self {
        let (i, j) = self.pair();
        Self::new(i * k, j * k, self.dim())
    }

    /// All d^2 labels, row-major in (i, j).
    pub fn all(d: usize) -> impl Iterator<Item = DisplacementIndex> {
        (0..d * d).map(move |k| Self::from_flat(k, d))
    }
}

impl std::ops::Add for DisplacementIndex {
    type Output = DisplacementIndex;
    fn add(self, rhs: Self) -> Self {
        Self { i: self.i + rhs.i, j: self.j + rhs.j }
    }
}

impl std::ops::Neg for DisplacementIndex {
    type Output = DisplacementIndex;
    fn neg(self) -> Self {
        Self { i: -self.i, j: -self.j }
    }
}

impl fmt::Display for DisplacementIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i.value(), self.j.value())
    }
}

/// `<p, q> = k j - l i` for p = (i, j), q = (k, l).
pub fn symplectic_form(p: &DisplacementIndex, q: &DisplacementIndex) -> Result<Residue> {
    if p.dim() != q.dim() {
        return Err(Error::ModulusMismatch(p.dim() as u64, q.dim() as u64));
    }
    Ok(q.i * p.j - q.j * p.i)
}

/// Apply `D_{i,j}` to a vector in O(d). `i`, `j` are integer representatives;
/// for even d the representative matters up to a sign.
pub fn apply_displacement(d: usize, i: i64, j: i64, v: &CVec) -> CVec {
    debug_assert_eq!(v.len(), d);
    let mut out = CVec::zeros(d);
    let shift = i.rem_euclid(d as i64) as usize;
    for s in 0..d {
        let phase = tau_pow(d, i * j + 2 * j * s as i64);
        out[(s + shift) % d] = phase * v[s];
    }
    out
}

/// `<v| D_{i,j} |v>`.
pub fn expectation(d: usize, i: i64, j: i64, v: &CVec) -> C64 {
    let shift = i.rem_euclid(d as i64) as usize;
    (0..d).map(|s| v[(s + shift) % d].conj() * tau_pow(d, i * j + 2 * j * s as i64) * v[s]).sum()
}

pub fn displacement_raw(d: usize, i: i64, j: i64) -> CMat {
    let mut m = CMat::zeros(d, d);
    let shift = i.rem_euclid(d as i64) as usize;
    for s in 0..d {
        m[((s + shift) % d, s)] = tau_pow(d, i * j + 2 * j * s as i64);
    }
    m
}

pub fn displacement(d: usize, p: &DisplacementIndex) -> CMat {
    assert_eq!(p.dim(), d, "index modulus differs from dimension");
    let (i, j) = p.pair();
    displacement_raw(d, i, j)
}

/// 2x2 matrix over Z_modulus. Used for symplectic matrices (det 1), the
/// GL(2) matrices with det +-1 relating overlap phases, and their relatives.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymplecticMatrix {
    /// [[alpha, beta], [gamma, delta]]
    pub entries: [[u64; 2]; 2],
    pub modulus: u64,
}

impl SymplecticMatrix {
    pub fn new(alpha: i64, beta: i64, gamma: i64, delta: i64, modulus: u64) -> Self {
        let m = modulus as i64;
        let r = |x: i64| x.rem_euclid(m) as u64;
        Self { entries: [[r(alpha), r(beta)], [r(gamma), r(delta)]], modulus }
    }

    pub fn identity(modulus: u64) -> Self {
        Self::new(1, 0, 0, 1, modulus)
    }

    pub fn scalar(k: i64, modulus: u64) -> Self {
        Self::new(k, 0, 0, k, modulus)
    }

    pub fn alpha(&self) -> i64 {
        self.entries[0][0] as i64
    }
    pub fn beta(&self) -> i64 {
        self.entries[0][1] as i64
    }
    pub fn gamma(&self) -> i64 {
        self.entries[1][0] as i64
    }
    pub fn delta(&self) -> i64 {
        self.entries[1][1] as i64
    }

    pub fn det(&self) -> Residue {
        Residue::from_i64(
            (self.alpha() * self.delta() - self.beta() * self.gamma()) % self.modulus as i64,
            self.modulus,
        )
    }

    pub fn trace(&self) -> Residue {
        Residue::from_i64(self.alpha() + self.delta(), self.modulus)
    }

    pub fn is_symplectic(&self) -> bool {
        self.det().value() == 1 % self.modulus
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.modulus, o.modulus, "matrix modulus mismatch");
        let m = self.modulus as i64;
        let (a, b, g, d) = (self.alpha(), self.beta(), self.gamma(), self.delta());
        let (a2, b2, g2, d2) = (o.alpha(), o.beta(), o.gamma(), o.delta());
        Self::new(
            (a * a2 + b * g2) % m,
            (a * b2 + b * d2) % m,
            (g * a2 + d * g2) % m,
            (g * b2 + d * d2) % m,
            self.modulus,
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.modulus), |acc, _| acc.mul(self))
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv_det = mod_inverse(self.det())?.value() as i64;
        Ok(Self::new(
            self.delta() * inv_det,
            -self.beta() * inv_det,
            -self.gamma() * inv_det,
            self.alpha() * inv_det,
            self.modulus,
        ))
    }

    /// Smallest k >= 1 with F^k = 1, if at most `cap`.
    pub fn order(&self, cap: u32) -> Option<u32> {
        let id = Self::identity(self.modulus);
        let mut acc = *self;
        for k in 1..=cap {
            if acc == id {
                return Some(k);
            }
            acc = acc.mul(self);
        }
        None
    }

    pub fn reduce(&self, modulus: u64) -> Self {
        assert!(self.modulus.is_multiple_of(modulus), "cannot reduce mod {} into mod {}", self.modulus, modulus);
        Self::new(self.alpha(), self.beta(), self.gamma(), self.delta(), modulus)
    }

    /// Integer action on raw representatives, reduced mod the matrix modulus.
    pub fn apply_raw(&self, i: i64, j: i64) -> (i64, i64) {
        let m = self.modulus as i64;
        ((self.alpha() * i + self.beta() * j).rem_euclid(m), (self.gamma() * i + self.delta() * j).rem_euclid(m))
    }

    pub fn apply(&self, p: &DisplacementIndex) -> DisplacementIndex {
        assert_eq!(p.dim() as u64, self.modulus, "index modulus differs from matrix modulus");
        let (i, j) = p.pair();
        let (a, b) = self.apply_raw(i, j);
        DisplacementIndex::new(a, b, p.dim())
    }

    /// All matrices of the given modulus with determinant in `dets`.
    pub fn enumerate(modulus: u64, dets: &[i64]) -> Vec<Self> {
        let m = modulus as i64;
        let wanted: Vec<i64> = dets.iter().map(|x| x.rem_euclid(m)).collect();
        let mut out = Vec::new();
        for a in 0..m {
            for b in 0..m {
                for g in 0..m {
                    for d in 0..m {
                        if wanted.contains(&((a * d - b * g).rem_euclid(m))) {
                            out.push(Self::new(a, b, g, d, modulus));
                        }
                    }
                }
            }
        }
        out
    }

    /// SL(2, Z_modulus).
    pub fn special_linear(modulus: u64) -> Vec<Self> {
        Self::enumerate(modulus, &[1])
    }
}

impl fmt::Display for SymplecticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]] mod {}",
            self.entries[0][0], self.entries[0][1], self.entries[1][0], self.entries[1][1], self.modulus
        )
    }
}

fn normalize_unitary_phase(u: CMat) -> CMat {
    let col = u.column(0).into_owned();
    let v = linalg::fix_phase_vec(&col);
    let k = (0..col.len()).find(|&r| col[r].norm() > 1e-8).unwrap_or(0);
    let phase = if col[k].norm() > 0.0 { v[k] / col[k] } else { c(1.0, 0.0) };
    u * phase
}

/// Residual of `U D_p U^dag = D_{Fp}` on the generators (1,0) and (0,1).
/// `f` may be given mod d (odd d) or mod 2d (even d).
pub fn covariance_residual(d: usize, f: &SymplecticMatrix, u: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for (i, j) in [(1, 0), (0, 1)] {
        let lhs = u * displacement_raw(d, i, j) * u.adjoint();
        let (fi, fj) = f.apply_raw(i, j);
        let rhs = displacement_raw(d, fi, fj);
        worst = worst.max(linalg::op_norm(&(lhs - rhs)));
    }
    worst
}

fn clifford_invertible_beta(d: usize, f: &SymplecticMatrix) -> Result<CMat> {
    let beta_inv = mod_inverse(Residue::new(f.beta() as u64, d as u64))?.value() as i64;
    let (a, dd) = (f.alpha(), f.delta());
    let norm = 1.0 / (d as f64).sqrt();
    Ok(CMat::from_fn(d, d, |r, s| {
        let (r, s) = (r as i64, s as i64);
        let e = (beta_inv * ((a * s * s - 2 * r * s + dd * r * r) % d as i64)) % d as i64;
        tau_pow(d, e) * norm
    }))
}

/// Unitary `U_F` with `U_F D_p U_F^dag = D_{Fp}` for odd d and F in SL(2, Z_d).
///
/// Matrices with non-invertible beta are written as a product of two with
/// invertible beta. The phase is fixed so that the first non-negligible
/// entry of column 0 is real positive, and covariance is checked before
/// returning.
pub fn clifford_unitary(d: usize, f: &SymplecticMatrix) -> Result<CMat> {
    if d.is_multiple_of(2) {
        return Err(Error::Dimension { dim: d, reason: "clifford_unitary is for odd d; use clifford_unitary_any" });
    }
    if f.modulus != d as u64 {
        return Err(Error::ModulusMismatch(f.modulus, d as u64));
    }
    if !f.is_symplectic() {
        return Err(Error::NotSymplectic { det: f.det().value(), modulus: f.modulus });
    }
    let u = if d == 1 {
        linalg::identity(1)
    } else if crate::numtheory::gcd(f.beta() as u64, d as u64) == 1 {
        clifford_invertible_beta(d, f)?
    } else {
        // F = [[0,-1],[1,x]] [[gamma + x alpha, delta + x beta], [-alpha, -beta]]
        let x = (0..d as i64)
            .find(|&x| crate::numtheory::gcd((f.delta() + x * f.beta()).rem_euclid(d as i64) as u64, d as u64) == 1)
            .ok_or(Error::NotSymplectic { det: f.det().value(), modulus: f.modulus })?;
        let f1 = SymplecticMatrix::new(0, -1, 1, x, d as u64);
        let f2 =
            SymplecticMatrix::new(f.gamma() + x * f.alpha(), f.delta() + x * f.beta(), -f.alpha(), -f.beta(), d as u64);
        debug_assert_eq!(f1.mul(&f2), *f);
        clifford_invertible_beta(d, &f1)? * clifford_invertible_beta(d, &f2)?
    };
    let u = normalize_unitary_phase(u);
    let res = covariance_residual(d, f, &u);
    if res > 1e-9 {
        return Err(Error::Covariance(res));
    }
    Ok(u)
}

/// Builds `U_F` by twirling: `sum_p D_{Fp} X D_p^dag = d Tr(U^dag X) U`.
///
/// Works for any d provided F is given mod d (odd) or mod 2d (even) and is
/// symplectic for that modulus. Independent of the closed-form route above.
pub fn twirl_unitary(d: usize, f: &SymplecticMatrix) -> Result<CMat> {
    let want = if d.is_multiple_of(2) { 2 * d } else { d } as u64;
    if f.modulus != want {
        return Err(Error::ModulusMismatch(f.modulus, want));
    }
    if !f.is_symplectic() {
        return Err(Error::NotSymplectic { det: f.det().value(), modulus: f.modulus });
    }
    let mut best: Option<CMat> = None;
    'outer: for a in 0..d {
        for b in 0..d {
            // sum_p D_{Fp} |a><b| D_p^dag
            let mut r = CMat::zeros(d, d);
            for i in 0..d as i64 {
                for j in 0..d as i64 {
                    let (fi, fj) = f.apply_raw(i, j);
                    let row = (a as i64 + fi).rem_euclid(d as i64) as usize;
                    let left = tau_pow(d, fi * fj + 2 * fj * a as i64);
                    let col = (b as i64 + i).rem_euclid(d as i64) as usize;
                    let right = tau_pow(d, i * j + 2 * j * b as i64).conj();
                    r[(row, col)] += left * right;
                }
            }
            let norm = r.norm();
            if norm > 0.5 {
                best = Some(r * c((d as f64).sqrt() / norm, 0.0));
                break 'outer;
            }
        }
    }
    let u = normalize_unitary_phase(best.ok_or(Error::Covariance(f64::INFINITY))?);
    let res = covariance_residual(d, f, &u).max(linalg::unitarity_defect(&u));
    if res > 1e-9 {
        return Err(Error::Covariance(res));
    }
    Ok(u)
}

/// Lift a matrix mod d to a symplectic matrix mod 2d (even d), by adding
/// multiples of d to the entries.
pub fn lift_even(f: &SymplecticMatrix, d: usize) -> Result<SymplecticMatrix> {
    assert_eq!(f.modulus, d as u64);
    let d2 = 2 * d as u64;
    let di = d as i64;
    for mask in 0..16u32 {
        let e = |bit: u32| if mask & (1 << bit) != 0 { di } else { 0 };
        let g = SymplecticMatrix::new(f.alpha() + e(0), f.beta() + e(1), f.gamma() + e(2), f.delta() + e(3), d2);
        if g.is_symplectic() {
            return Ok(g);
        }
    }
    Err(Error::NotSymplectic { det: f.det().value(), modulus: f.modulus })
}

/// `U_F` for any d. For odd d, `f` is mod d. For even d, `f` may be given
/// mod d (a symplectic lift to mod 2d is chosen) or mod 2d.
pub fn clifford_unitary_any(d: usize, f: &SymplecticMatrix) -> Result<CMat> {
    if d % 2 == 1 {
        return clifford_unitary(d, f);
    }
    let lifted = if f.modulus == d as u64 { lift_even(f, d)? } else { *f };
    twirl_unitary(d, &lifted)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZaunerFlavor {
    /// F_z, present in every dimension
    Z,
    /// F_a, only for d = 3 mod 9
    A,
}

impl fmt::Display for ZaunerFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZaunerFlavor::Z => "z",
            ZaunerFlavor::A => "a",
        })
    }
}

pub fn zauner_matrix(d: usize, flavor: ZaunerFlavor) -> Result<SymplecticMatrix> {
    let m = d as u64;
    match flavor {
        ZaunerFlavor::Z => Ok(SymplecticMatrix::new(0, d as i64 - 1, 1, -1, m)),
        ZaunerFlavor::A if d % 9 == 3 => {
            let k = (d as i64 - 3) / 9;
            Ok(SymplecticMatrix::new(1, 3, 3 * k, d as i64 - 2, m))
        }
        ZaunerFlavor::A => Err(Error::Dimension { dim: d, reason: "F_a exists only for d = 3 mod 9" }),
    }
}

/// F_z always, and F_a as well when d = 3 mod 9.
pub fn zauner_matrices(d: usize) -> Vec<SymplecticMatrix> {
    let mut out = vec![zauner_matrix(d, ZaunerFlavor::Z).unwrap()];
    if let Ok(fa) = zauner_matrix(d, ZaunerFlavor::A) {
        out.push(fa);
    }
    out
}

fn require_odd(d: usize) -> Result<()> {
    if d.is_multiple_of(2) {
        return Err(Error::Dimension { dim: d, reason: "needs odd d" });
    }
    Ok(())
}

/// Parity operator `|r> -> |-r>` for odd d.
pub fn parity(d: usize) -> Result<CMat> {
    require_odd(d)?;
    let mut p = CMat::zeros(d, d);
    for r in 0..d {
        p[((d - r) % d, r)] = c(1.0, 0.0);
    }
    Ok(p)
}

/// `(1/d) sum_p D_{-p}`; equals `parity(d)` for odd d.
pub fn parity_by_expansion(d: usize) -> Result<CMat> {
    require_odd(d)?;
    let mut acc = CMat::zeros(d, d);
    for p in DisplacementIndex::all(d) {
        acc += displacement(d, &(-p));
    }
    Ok(acc / c(d as f64, 0.0))
}

/// Phase point operator `D_p P D_{-p}`.
pub fn displaced_parity(d: usize, p: &DisplacementIndex) -> Result<CMat> {
    let dp = displacement(d, p);
    Ok(&dp * parity(d)? * dp.adjoint())
}

/// Tolerance on the SIC residual of an overlap table fed to `generalized_parity`.
pub const GENERALIZED_PARITY_SIC_TOL: f64 = 1e-8;

/// `P_theta = (1/d) sum_p D_{-p} exp(2 i theta_{M' p})` for odd d, with
/// `det M'^{-1} = +-2`.
pub fn generalized_parity(theta: &OverlapTable, m_prime: &SymplecticMatrix) -> Result<CMat> {
    let d = theta.dim;
    require_odd(d)?;
    if theta.residual > GENERALIZED_PARITY_SIC_TOL {
        return Err(Error::NotSic(theta.residual));
    }
    if m_prime.modulus != d as u64 {
        return Err(Error::ModulusMismatch(m_prime.modulus, d as u64));
    }
    let det_inv = m_prime.inverse()?.det();
    let two = Residue::new(2, d as u64);
    if det_inv != two && det_inv != -two {
        return Err(Error::Invalid(format!("det M'^-1 = {} is not +-2", det_inv)));
    }
    let mut acc = CMat::zeros(d, d);
    for p in DisplacementIndex::all(d) {
        let phase = theta.phase(&m_prime.apply(&p));
        acc += displacement(d, &(-p)) * (phase * phase);
    }
    Ok(acc / c(d as f64, 0.0))
}

/// Index maps `H_1 = diag(1, n2^{-1})`, `H_2 = diag(1, n1^{-1})`.
pub fn crt_factor_displacement(
    n: usize,
    p: &DisplacementIndex,
    split: &CrtSplit,
) -> Result<(DisplacementIndex, DisplacementIndex)> {
    check_split(n, split)?;
    if p.dim() != n {
        return Err(Error::ModulusMismatch(p.dim() as u64, n as u64));
    }
    let (i, j) = p.pair();
    let (n1, n2) = (split.n1 as usize, split.n2 as usize);
    let h1 = split.inv_n2_mod_n1.value() as i64;
    let h2 = split.inv_n1_mod_n2.value() as i64;
    Ok((DisplacementIndex::new(i, (j % n1 as i64) * h1, n1), DisplacementIndex::new(i, (j % n2 as i64) * h2, n2)))
}

/// Factor matrices `H_k F H_k^{-1}` reduced mod n1 and n2.
pub fn crt_factor_clifford(
    n: usize,
    f: &SymplecticMatrix,
    split: &CrtSplit,
) -> Result<(SymplecticMatrix, SymplecticMatrix)> {
    check_split(n, split)?;
    if f.modulus != n as u64 {
        return Err(Error::ModulusMismatch(f.modulus, n as u64));
    }
    let factor = |m: u64, h: u64| {
        let h_inv = mod_inverse(Residue::new(h, m)).unwrap().value() as i64;
        let h = h as i64;
        let r = f.reduce(m);
        SymplecticMatrix::new(r.alpha(), r.beta() * h_inv, r.gamma() * h, r.delta(), m)
    };
    Ok((factor(split.n1, split.inv_n2_mod_n1.value()), factor(split.n2, split.inv_n1_mod_n2.value())))
}

fn check_split(n: usize, split: &CrtSplit) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::Dimension { dim: n, reason: "tensor factorization needs odd N" });
    }
    if split.n() != n as u64 {
        return Err(Error::ModulusMismatch(split.n(), n as u64));
    }
    Ok(())
}

/// `perm[r1 * n2 + r2]` is the N-index whose residues are (r1, r2).
pub fn crt_permutation(split: &CrtSplit) -> Vec<usize> {
    let (n1, n2) = (split.n1, split.n2);
    let mut perm = Vec::with_capacity((n1 * n2) as usize);
    for r1 in 0..n1 {
        for r2 in 0..n2 {
            let r = crate::numtheory::crt_combine(Residue::new(r1, n1), Residue::new(r2, n2), split).unwrap();
            perm.push(r.value() as usize);
        }
    }
    perm
}

/// Re-express an operator on C^N in the tensor basis |r1> (x) |r2>.
pub fn to_tensor_basis(op: &CMat, split: &CrtSplit) -> CMat {
    let perm = crt_permutation(split);
    let n = perm.len();
    CMat::from_fn(n, n, |a, b| op[(perm[a], perm[b])])
}

/// Inverse of `to_tensor_basis`.
pub fn from_tensor_basis(op: &CMat, split: &CrtSplit) -> CMat {
    let perm = crt_permutation(split);
    let n = perm.len();
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(perm[a], perm[b])] = op[(a, b)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symplectic(d: usize, rng: &mut ChaCha8Rng) -> SymplecticMatrix {
        loop {
            let f = SymplecticMatrix::new(
                rng.random_range(0..d as i64),
                rng.random_range(0..d as i64),
                rng.random_range(0..d as i64),
                rng.random_range(0..d as i64),
                d as u64,
            );
            if f.is_symplectic() {
                return f;
            }
        }
    }

    #[test]
    fn roots_conventions() {
        let (tau, omega) = roots(3).unwrap();
        assert!((omega - linalg::cis(2.0 * PI / 3.0)).norm() < 1e-15);
        assert!((tau - omega * omega).norm() < 1e-15);
        let (tau, _) = roots(5).unwrap();
        assert!((tau.powu(5) - c(1.0, 0.0)).norm() < 1e-14);
        let (tau, omega) = roots(15).unwrap();
        assert!((omega.powu(8) - tau).norm() < 1e-14);
        assert!((omega.powu(15) - c(1.0, 0.0)).norm() < 1e-13);
        assert!(roots(4).is_err());
    }

    #[test]
    fn basic_displacements() {
        assert!(op_norm(&(displacement(5, &DisplacementIndex::zero(5)) - linalg::identity(5))) < 1e-15);
        let x = displacement(3, &DisplacementIndex::new(1, 0, 3));
        for s in 0..3 {
            assert_eq!(x[((s + 1) % 3, s)], c(1.0, 0.0));
        }
    }

    #[test]
    fn group_law_exhaustive() {
        for d in [3usize, 5, 7] {
            let ops: Vec<CMat> = DisplacementIndex::all(d).map(|p| displacement(d, &p)).collect();
            for p in DisplacementIndex::all(d) {
                let dp = &ops[p.flat()];
                assert!(linalg::unitarity_defect(dp) < 1e-12);
                assert!(op_norm(&(dp.adjoint() - &ops[(-p).flat()])) < 1e-12);
                for q in DisplacementIndex::all(d) {
                    let k = symplectic_form(&p, &q).unwrap().value() as i64;
                    let lhs = dp * &ops[q.flat()];
                    let rhs = &ops[(p + q).flat()] * tau_pow(d, k);
                    assert!(op_norm(&(&lhs - rhs)) < 1e-12);
                    let swapped = &ops[q.flat()] * dp * omega_pow(d, k);
                    assert!(op_norm(&(lhs - swapped)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn form_properties() {
        let p = DisplacementIndex::new(1, 0, 5);
        let q = DisplacementIndex::new(0, 1, 5);
        assert_eq!(symplectic_form(&p, &q).unwrap().value(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = 7;
            let p = DisplacementIndex::new(rng.random_range(0..7), rng.random_range(0..7), d);
            let q = DisplacementIndex::new(rng.random_range(0..7), rng.random_range(0..7), d);
            assert_eq!(symplectic_form(&p, &p).unwrap().value(), 0);
            assert_eq!(symplectic_form(&p, &q).unwrap(), -symplectic_form(&q, &p).unwrap());
            let f = SymplecticMatrix::new(
                rng.random_range(0..7),
                rng.random_range(0..7),
                rng.random_range(0..7),
                rng.random_range(0..7),
                7,
            );
            let lhs = symplectic_form(&f.apply(&p), &f.apply(&q)).unwrap();
            assert_eq!(lhs, symplectic_form(&p, &q).unwrap() * f.det());
        }
        assert!(symplectic_form(&DisplacementIndex::zero(3), &DisplacementIndex::zero(5)).is_err());
    }

    #[test]
    fn clifford_identity_and_rejection() {
        let u = clifford_unitary(5, &SymplecticMatrix::identity(5)).unwrap();
        assert!(op_norm(&(u - linalg::identity(5))) < 1e-12);
        assert!(matches!(clifford_unitary(5, &SymplecticMatrix::new(2, 0, 0, 2, 5)), Err(Error::NotSymplectic { .. })));
    }

    #[test]
    fn clifford_covariance_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [5usize, 7] {
            for _ in 0..20 {
                let f = random_symplectic(d, &mut rng);
                let u = clifford_unitary(d, &f).unwrap();
                for p in DisplacementIndex::all(d) {
                    let lhs = &u * displacement(d, &p) * u.adjoint();
                    assert!(op_norm(&(lhs - displacement(d, &f.apply(&p)))) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_twirl() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [3usize, 5, 9, 15] {
            for _ in 0..10 {
                let f = random_symplectic(d, &mut rng);
                let a = clifford_unitary(d, &f).unwrap();
                let b = twirl_unitary(d, &f).unwrap();
                assert!(linalg::phase_insensitive_distance(&a, &b) < 1e-10, "d={d} F={f}");
            }
        }
    }

    #[test]
    fn even_dimension_clifford() {
        for d in [4usize, 6, 8] {
            for f in zauner_matrices(d) {
                let u = clifford_unitary_any(d, &f).unwrap();
                let u3 = &u * &u * &u;
                // order three up to a phase
                let phase = u3[(0, 0)];
                assert!((phase.norm() - 1.0).abs() < 1e-10);
                assert!(op_norm(&(u3 - linalg::identity(d) * phase)) < 1e-10);
            }
        }
    }

    #[test]
    fn zauner_operator_order_three() {
        let fz = zauner_matrix(5, ZaunerFlavor::Z).unwrap();
        assert_eq!(fz, SymplecticMatrix::new(0, 4, 1, 4, 5));
        let u = clifford_unitary(5, &fz).unwrap();
        let u3 = &u * &u * &u;
        let phase = u3[(0, 0)];
        assert!(op_norm(&(u3 - linalg::identity(5) * phase)) < 1e-10);
    }

    #[test]
    fn zauner_matrix_lists() {
        assert_eq!(zauner_matrices(5).len(), 1);
        let l = zauner_matrices(12);
        assert_eq!(l.len(), 2);
        assert_eq!(l[1], SymplecticMatrix::new(1, 3, 3, 10, 12));
        for d in 4..=30usize {
            for f in zauner_matrices(d) {
                assert!(f.is_symplectic());
                assert_eq!(f.pow(3), SymplecticMatrix::identity(d as u64), "d = {d}");
                assert_eq!(f.trace(), Residue::from_i64(-1, d as u64));
            }
        }
    }

    #[test]
    fn parity_properties() {
        let p3 = parity(3).unwrap();
        assert_eq!(p3[(0, 0)], c(1.0, 0.0));
        assert_eq!(p3[(2, 1)], c(1.0, 0.0));
        assert_eq!(p3[(1, 2)], c(1.0, 0.0));
        assert!((p3.trace() - c(1.0, 0.0)).norm() < 1e-15);
        let spectrum = linalg::hermitian_eigenvalues(&parity(5).unwrap());
        let expect = [1.0, 1.0, 1.0, -1.0, -1.0];
        for (a, b) in spectrum.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        for d in [3usize, 5, 7, 9] {
            let p = parity(d).unwrap();
            assert!(op_norm(&(parity_by_expansion(d).unwrap() - &p)) < 1e-12);
            assert!(op_norm(&(&p * &p - linalg::identity(d))) < 1e-15);
            let from_clifford = clifford_unitary(d, &SymplecticMatrix::scalar(-1, d as u64)).unwrap();
            assert!(op_norm(&(from_clifford - &p)) < 1e-10);
        }
    }

    #[test]
    fn crt_displacement_exhaustive_15() {
        let split = CrtSplit::tower(5).unwrap();
        let zero = crt_factor_displacement(15, &DisplacementIndex::zero(15), &split).unwrap();
        assert!(zero.0.is_zero() && zero.1.is_zero());
        for p in DisplacementIndex::all(15) {
            let (p1, p2) = crt_factor_displacement(15, &p, &split).unwrap();
            let lhs = to_tensor_basis(&displacement(15, &p), &split);
            let rhs = linalg::kron(&displacement(5, &p1), &displacement(3, &p2));
            assert!(op_norm(&(lhs - rhs)) < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn crt_displacement_sampled_35() {
        let split = CrtSplit::tower(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..40 {
            let p = DisplacementIndex::new(rng.random_range(0..35), rng.random_range(0..35), 35);
            let (p1, p2) = crt_factor_displacement(35, &p, &split).unwrap();
            let lhs = to_tensor_basis(&displacement(35, &p), &split);
            let rhs = linalg::kron(&displacement(7, &p1), &displacement(5, &p2));
            assert!(op_norm(&(lhs - rhs)) < 1e-10);
        }
    }

    #[test]
    fn omega_splits() {
        let split = CrtSplit::tower(5).unwrap();
        let k = split.kappa.unwrap() as i64;
        let lhs = omega_pow(15, 1);
        let rhs = omega_pow(5, k) * omega_pow(3, k);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn crt_clifford_split() {
        let split = CrtSplit::tower(5).unwrap();
        let (a, b) = crt_factor_clifford(15, &SymplecticMatrix::identity(15), &split).unwrap();
        assert_eq!((a, b), (SymplecticMatrix::identity(5), SymplecticMatrix::identity(3)));

        let fb = SymplecticMatrix::scalar(11, 15);
        let (a, b) = crt_factor_clifford(15, &fb, &split).unwrap();
        assert_eq!(a, SymplecticMatrix::identity(5));
        assert_eq!(b, SymplecticMatrix::new(2, 0, 0, 2, 3));
        let ub = to_tensor_basis(&clifford_unitary(15, &fb).unwrap(), &split);
        let expect = linalg::kron(&linalg::identity(5), &parity(3).unwrap());
        assert!(linalg::phase_insensitive_distance(&ub, &expect) < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut fs = vec![zauner_matrix(15, ZaunerFlavor::Z).unwrap()];
        fs.extend((0..5).map(|_| random_symplectic(15, &mut rng)));
        for f in fs {
            let (f1, f2) = crt_factor_clifford(15, &f, &split).unwrap();
            let u = to_tensor_basis(&clifford_unitary(15, &f).unwrap(), &split);
            let k = linalg::kron(&clifford_unitary(5, &f1).unwrap(), &clifford_unitary(3, &f2).unwrap());
            assert!(linalg::phase_insensitive_distance(&u, &k) < 1e-10, "F = {f}");
        }
    }

    #[test]
    fn even_modulus_rejected_for_factorization() {
        let split = CrtSplit::new(5, 3).unwrap();
        assert!(crt_factor_displacement(16, &DisplacementIndex::zero(16), &split).is_err());
    }
}
