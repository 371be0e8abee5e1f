//! Exact modular arithmetic: residues with an explicit modulus, square-free
//! parts, the tower step d -> d(d-2) and Chinese remaindering.
//!
//! Every residue carries its own modulus. Arithmetic between residues of
//! different moduli is a bug in this code base (mod-d and mod-(d-2) indices
//! sit next to each other everywhere), so the binary operations panic on a
//! mismatch rather than silently reducing.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: u64, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        Self { value: value % modulus, modulus }
    }

    pub fn from_i64(value: i64, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        Self { value: value.rem_euclid(modulus as i64) as u64, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Reduce into another modulus that divides this one.
    pub fn reduce(&self, modulus: u64) -> Self {
        assert!(self.modulus.is_multiple_of(modulus), "cannot reduce mod {} into mod {}", self.modulus, modulus);
        Self::new(self.value, modulus)
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::new(1, self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    pub fn inverse(&self) -> Result<Self> {
        mod_inverse(*self)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

fn check_same(a: &Residue, b: &Residue) {
    assert_eq!(a.modulus, b.modulus, "residue arithmetic across moduli {} and {}", a.modulus, b.modulus);
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        check_same(&self, &rhs);
        Residue::new(self.value + rhs.value, self.modulus)
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        check_same(&self, &rhs);
        Residue::new(self.value + self.modulus - rhs.value, self.modulus)
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        check_same(&self, &rhs);
        let prod = (self.value as u128 * rhs.value as u128) % self.modulus as u128;
        Residue { value: prod as u64, modulus: self.modulus }
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue::new(self.modulus - self.value, self.modulus)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid; returns (g, x, y) with a x + b y = g.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

pub fn mod_inverse(a: Residue) -> Result<Residue> {
    let (g, x, _) = ext_gcd(a.value as i128, a.modulus as i128);
    if g != 1 {
        return Err(Error::NotInvertible { value: a.value, modulus: a.modulus });
    }
    let m = a.modulus as i128;
    Ok(Residue { value: x.rem_euclid(m) as u64, modulus: a.modulus })
}

/// Prime factorization by trial division, as (prime, multiplicity) pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

/// Product of the primes dividing `n` to an odd power.
pub fn squarefree_part(n: u64) -> u64 {
    assert!(n >= 1, "squarefree_part needs n >= 1");
    factorize(n).into_iter().filter(|&(_, k)| k % 2 == 1).map(|(p, _)| p).product()
}

/// Square-free part of (d+1)(d-3), the quadratic discriminant attached to `d`.
pub fn discriminant(d: u64) -> Result<u64> {
    if d < 4 {
        return Err(Error::Dimension { dim: d as usize, reason: "discriminant needs d >= 4" });
    }
    let product =
        (d + 1).checked_mul(d - 3).ok_or_else(|| Error::Invalid(format!("(d+1)(d-3) overflows for d = {d}")))?;
    Ok(squarefree_part(product))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerStep {
    pub d: u64,
    pub next: u64,
    pub discriminant: u64,
}

pub fn next_rung(d: u64) -> Result<TowerStep> {
    let discriminant = discriminant(d)?;
    let next = d.checked_mul(d - 2).ok_or_else(|| Error::Invalid(format!("d(d-2) overflows for d = {d}")))?;
    Ok(TowerStep { d, next, discriminant })
}

/// Dimensions `start, start(start-2), ...` with `rungs` entries in total.
pub fn tower(start: u64, rungs: usize) -> Result<Vec<TowerStep>> {
    let mut out = Vec::with_capacity(rungs);
    let mut d = start;
    for _ in 0..rungs {
        let step = next_rung(d)?;
        d = step.next;
        out.push(step);
    }
    Ok(out)
}

/// Data for the ring isomorphism Z_{n1 n2} = Z_{n1} x Z_{n2}.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtSplit {
    pub n1: u64,
    pub n2: u64,
    /// n2^{-1} mod n1
    pub inv_n2_mod_n1: Residue,
    /// n1^{-1} mod n2
    pub inv_n1_mod_n2: Residue,
    /// (d-1)/2 when (n1, n2) = (d, d-2)
    pub kappa: Option<u64>,
}

impl CrtSplit {
    pub fn new(n1: u64, n2: u64) -> Result<Self> {
        if n1 == 0 || n2 == 0 || gcd(n1, n2) != 1 {
            return Err(Error::NotCoprime(n1, n2));
        }
        let inv_n2_mod_n1 = mod_inverse(Residue::new(n2, n1))?;
        let inv_n1_mod_n2 = mod_inverse(Residue::new(n1, n2))?;
        let kappa = (n1 == n2 + 2 && n1 % 2 == 1).then(|| (n1 - 1) / 2);
        Ok(Self { n1, n2, inv_n2_mod_n1, inv_n1_mod_n2, kappa })
    }

    /// The split of N = d(d-2) for odd d.
    pub fn tower(d: u64) -> Result<Self> {
        if d.is_multiple_of(2) || d < 5 {
            return Err(Error::Dimension { dim: d as usize, reason: "tensor split of d(d-2) needs odd d >= 5" });
        }
        Self::new(d, d - 2)
    }

    pub fn n(&self) -> u64 {
        self.n1 * self.n2
    }
}

pub fn crt_split(r: Residue, split: &CrtSplit) -> Result<(Residue, Residue)> {
    if r.modulus != split.n() {
        return Err(Error::ModulusMismatch(r.modulus, split.n()));
    }
    Ok((r.reduce(split.n1), r.reduce(split.n2)))
}

pub fn crt_combine(r1: Residue, r2: Residue, split: &CrtSplit) -> Result<Residue> {
    if r1.modulus != split.n1 {
        return Err(Error::ModulusMismatch(r1.modulus, split.n1));
    }
    if r2.modulus != split.n2 {
        return Err(Error::ModulusMismatch(r2.modulus, split.n2));
    }
    let n = split.n() as u128;
    let t1 = r1.value as u128 * split.n2 as u128 * split.inv_n2_mod_n1.value as u128;
    let t2 = r2.value as u128 * split.n1 as u128 * split.inv_n1_mod_n2.value as u128;
    Ok(Residue::new(((t1 + t2) % n) as u64, split.n()))
}
