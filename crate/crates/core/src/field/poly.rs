//! Dense univariate polynomials over a runtime coefficient ring.
//!
//! Polynomials are `Vec<E>` with the constant term first and no trailing
//! zeros; the zero polynomial is the empty vector. The same routines back
//! extension-field arithmetic (coefficients mod p), Hensel lifting
//! (integers mod p^k) and root finding over an arbitrary finite
//! [`Field`](super::Field).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Coefficient arithmetic supplied at runtime.
pub(crate) trait Ring {
    type E: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    /// Multiplicative inverse, `None` for non-units.
    fn inv(&self, a: &Self::E) -> Option<Self::E>;
}

/// Integers modulo a word-sized prime.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ModP(pub u64);

impl ModP {
    pub fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.0 as i64) as u64
    }
}

impl Ring for ModP {
    type E = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.0
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.0
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.0 - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        let (mut r0, mut r1) = (self.0 as i64, *a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            return None;
        }
        Some(self.reduce_i64(t0))
    }
}

/// Integers modulo an arbitrary positive modulus (used for p-adic lifting).
#[derive(Clone, Debug)]
pub(crate) struct IntMod(pub BigInt);

impl Ring for IntMod {
    type E = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one().mod_floor(&self.0)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a + b).mod_floor(&self.0)
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a - b).mod_floor(&self.0)
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b).mod_floor(&self.0)
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        (-a).mod_floor(&self.0)
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        let g = a.extended_gcd(&self.0);
        if g.gcd.abs().is_one() {
            Some((g.x * g.gcd.signum()).mod_floor(&self.0))
        } else {
            None
        }
    }
}

pub(crate) fn trim<R: Ring>(r: &R, mut a: Vec<R::E>) -> Vec<R::E> {
    while a.last().is_some_and(|c| r.is_zero(c)) {
        a.pop();
    }
    a
}

/// Degree, with `None` for the zero polynomial.
pub(crate) fn degree<E>(a: &[E]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub(crate) fn add<R: Ring>(r: &R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => r.add(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(r, out)
}

pub(crate) fn sub<R: Ring>(r: &R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => r.sub(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => r.neg(y),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(r, out)
}

pub(crate) fn mul<R: Ring>(r: &R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![r.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if r.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let prod = r.mul(x, y);
            out[i + j] = r.add(&out[i + j], &prod);
        }
    }
    trim(r, out)
}

pub(crate) fn scale<R: Ring>(r: &R, a: &[R::E], c: &R::E) -> Vec<R::E> {
    trim(r, a.iter().map(|x| r.mul(x, c)).collect())
}

/// Quotient and remainder. The divisor must be nonzero with an invertible
/// leading coefficient.
pub(crate) fn divrem<R: Ring>(r: &R, a: &[R::E], b: &[R::E]) -> (Vec<R::E>, Vec<R::E>) {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = r
        .inv(&b[db])
        .expect("divisor leading coefficient must be a unit");
    let mut rem: Vec<R::E> = a.to_vec();
    if rem.len() <= db {
        return (Vec::new(), trim(r, rem));
    }
    let mut quot = vec![r.zero(); rem.len() - db];
    for k in (0..quot.len()).rev() {
        let c = r.mul(&rem[k + db], &lead_inv);
        if r.is_zero(&c) {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = r.mul(&c, bj);
            rem[k + j] = r.sub(&rem[k + j], &t);
        }
        quot[k] = c;
    }
    rem.truncate(db);
    (trim(r, quot), trim(r, rem))
}

pub(crate) fn rem<R: Ring>(r: &R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    divrem(r, a, b).1
}

pub(crate) fn mul_mod<R: Ring>(r: &R, a: &[R::E], b: &[R::E], m: &[R::E]) -> Vec<R::E> {
    rem(r, &mul(r, a, b), m)
}

/// Scale to a monic polynomial (leading coefficient must be a unit).
pub(crate) fn monic<R: Ring>(r: &R, a: &[R::E]) -> Vec<R::E> {
    match a.last() {
        None => Vec::new(),
        Some(lead) => {
            let inv = r.inv(lead).expect("leading coefficient must be a unit");
            scale(r, a, &inv)
        }
    }
}

/// Monic gcd over a field.
pub(crate) fn gcd<R: Ring>(r: &R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let mut x = trim(r, a.to_vec());
    let mut y = trim(r, b.to_vec());
    while !y.is_empty() {
        let t = rem(r, &x, &y);
        x = y;
        y = t;
    }
    monic(r, &x)
}

/// Inverse of `a` modulo `m` over a field, `None` if they share a factor.
pub(crate) fn inv_mod<R: Ring>(r: &R, a: &[R::E], m: &[R::E]) -> Option<Vec<R::E>> {
    let mut r0 = trim(r, m.to_vec());
    let mut r1 = rem(r, a, m);
    let mut t0: Vec<R::E> = Vec::new();
    let mut t1: Vec<R::E> = vec![r.one()];
    while !r1.is_empty() {
        let (q, rr) = divrem(r, &r0, &r1);
        let t2 = sub(r, &t0, &mul(r, &q, &t1));
        r0 = r1;
        r1 = rr;
        t0 = t1;
        t1 = t2;
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = r.inv(&r0[0])?;
    Some(rem(r, &scale(r, &t0, &c), m))
}

/// `base^exp mod m` with an arbitrary-size exponent.
pub(crate) fn pow_mod<R: Ring>(
    r: &R,
    base: &[R::E],
    exp: &num_bigint::BigUint,
    m: &[R::E],
) -> Vec<R::E> {
    let mut acc = rem(r, &[r.one()], m);
    let b = rem(r, base, m);
    for i in (0..exp.bits()).rev() {
        acc = mul_mod(r, &acc, &acc, m);
        if exp.bit(i) {
            acc = mul_mod(r, &acc, &b, m);
        }
    }
    acc
}

/// Exact division in `Z[x]` by a monic divisor; `None` if it leaves a remainder.
pub(crate) fn exact_div_int(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let db = degree(b)?;
    debug_assert!(b[db].is_one());
    let mut rem: Vec<BigInt> = a.to_vec();
    if rem.len() <= db {
        return if rem.iter().all(Zero::is_zero) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let mut quot = vec![BigInt::zero(); rem.len() - db];
    for k in (0..quot.len()).rev() {
        let c = rem[k + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[k + j] -= &c * bj;
        }
        quot[k] = c;
    }
    if rem.iter().any(|c| !c.is_zero()) {
        return None;
    }
    while quot.last().is_some_and(Zero::is_zero) {
        quot.pop();
    }
    Some(quot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modp_inverse_mod_eleven() {
        let f = ModP(11);
        assert_eq!(f.inv(&3), Some(4));
        assert_eq!(f.inv(&0), None);
    }

    #[test]
    fn divrem_reconstructs_dividend() {
        let f = ModP(7);
        let a = vec![3, 0, 5, 1, 6];
        let b = vec![2, 1, 3];
        let (q, r) = divrem(&f, &a, &b);
        assert_eq!(add(&f, &mul(&f, &q, &b), &r), a);
        assert!(r.len() < b.len());
    }

    #[test]
    fn inverse_modulo_irreducible() {
        // x^2 + x + 1 is irreducible over GF(5)
        let f = ModP(5);
        let m = vec![1, 1, 1];
        let a = vec![2, 3];
        let inv = inv_mod(&f, &a, &m).unwrap();
        assert_eq!(mul_mod(&f, &a, &inv, &m), vec![1]);
    }

    #[test]
    fn intmod_inverse() {
        let r = IntMod(BigInt::from(125));
        let inv = r.inv(&BigInt::from(7)).unwrap();
        assert_eq!(r.mul(&inv, &BigInt::from(7)), BigInt::one());
        assert!(r.inv(&BigInt::from(10)).is_none());
    }
}
