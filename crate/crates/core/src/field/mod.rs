//! Exact scalars over GF(p), GF(p^k) and Q(ζ_n).
//!
//! Every [`Element`] is stored as a fixed-length coefficient vector in the
//! power basis of its field, reduced on construction, so equality is
//! structural and the canonical order is plain lexicographic order on the
//! vector (constant term first).

pub(crate) mod poly;
pub(crate) mod roots;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use poly::{ModP, Ring};

/// Exclusive upper bound on the characteristic of finite fields.
pub const MAX_PRIME: u64 = 1 << 31;
/// Largest supported cyclotomic conductor.
pub const MAX_CONDUCTOR: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("prime {0} is outside the supported range (p < 2^31)")]
    PrimeOutOfRange(u64),
    #[error("bad extension modulus: {0}")]
    BadModulus(String),
    #[error("extension modulus is reducible over GF({0})")]
    NotIrreducible(u64),
    #[error("cyclotomic conductor {0} is outside 1..=64")]
    ConductorOutOfRange(u32),
    #[error("no primitive {n}-th root of unity in {field}")]
    NoPrimitiveRoot { n: u64, field: String },
    #[error("cannot parse element: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Serializable description of a field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldDescriptor {
    Prime { p: u64 },
    Extension { p: u64, modulus: Vec<u64> },
    Cyclotomic { n: u32 },
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDescriptor::Prime { p } => write!(f, "GF({p})"),
            FieldDescriptor::Extension { p, modulus } => {
                write!(f, "GF({p}^{})", modulus.len().saturating_sub(1))
            }
            FieldDescriptor::Cyclotomic { n } => write!(f, "Q(zeta_{n})"),
        }
    }
}

enum Arith {
    /// `modulus` is monic of degree `k`; for prime fields it is `x`.
    Finite {
        p: u64,
        k: usize,
        modulus: Vec<u64>,
        order: BigUint,
    },
    Cyclotomic {
        m: u32,
        phi_int: Vec<BigInt>,
        deg: usize,
    },
}

struct Inner {
    desc: FieldDescriptor,
    arith: Arith,
}

/// A validated field. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.desc == other.0.desc
    }
}
impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.desc.hash(state)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.desc)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.desc)
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The n-th cyclotomic polynomial, integer coefficients, constant term first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    assert!(n >= 1, "cyclotomic polynomial needs n >= 1");
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        num = poly::exact_div_int(&num, &cyclotomic_polynomial(d))
            .expect("cyclotomic factor divides x^n - 1");
    }
    num
}

fn is_irreducible_mod_p(f: &[u64], p: u64) -> bool {
    let r = ModP(p);
    let k = f.len() - 1;
    let x = vec![0, 1];
    let mut h = poly::rem(&r, &x, f);
    let pb = BigUint::from(p);
    for _ in 1..=k / 2 {
        h = poly::pow_mod(&r, &h, &pb, f);
        let g = poly::gcd(&r, &poly::sub(&r, &h, &x), f);
        if poly::degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

fn pad_u64(mut v: Vec<u64>, len: usize) -> Vec<u64> {
    v.resize(len, 0);
    v
}

/// Integer numerators over a common denominator.
fn common_denominator(v: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let den = v.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let nums = v.iter().map(|c| c.numer() * (&den / c.denom())).collect();
    (nums, den)
}

/// Product in Q[x]/(Φ) computed on integer numerators; Φ is monic of
/// degree `deg`.
fn cyclotomic_mul(
    x: &[BigRational],
    y: &[BigRational],
    phi: &[BigInt],
    deg: usize,
) -> Vec<BigRational> {
    let (a, da) = common_denominator(x);
    let (b, db) = common_denominator(y);
    let mut prod = vec![BigInt::zero(); 2 * deg];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                prod[i + j] += ai * bj;
            }
        }
    }
    for k in (deg..2 * deg).rev() {
        if prod[k].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut prod[k]);
        for t in 0..deg {
            if !phi[t].is_zero() {
                prod[k - deg + t] -= &c * &phi[t];
            }
        }
    }
    let den = da * db;
    prod.truncate(deg);
    prod.into_iter()
        .map(|p| BigRational::new(p, den.clone()))
        .collect()
}

/// Inverse in Q[x]/(Φ): solves (multiplication by a)·y = 1 with
/// fraction-free elimination on the integer numerators.
fn cyclotomic_inv(x: &[BigRational], phi: &[BigInt], deg: usize) -> Option<Vec<BigRational>> {
    let (a, da) = common_denominator(x);
    if a.iter().all(Zero::is_zero) {
        return None;
    }
    // column j holds a·x^j
    let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(deg);
    let mut cur = a.clone();
    for _ in 0..deg {
        cols.push(cur.clone());
        let mut next = vec![BigInt::zero(); deg];
        next[1..].clone_from_slice(&cur[..deg - 1]);
        let top = &cur[deg - 1];
        if !top.is_zero() {
            for t in 0..deg {
                next[t] -= top * &phi[t];
            }
        }
        cur = next;
    }
    let mut m: Vec<Vec<BigInt>> = (0..deg)
        .map(|i| {
            let mut row: Vec<BigInt> = (0..deg).map(|j| cols[j][i].clone()).collect();
            row.push(if i == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            });
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..deg {
        let piv = (k..deg).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, piv);
        for i in k + 1..deg {
            for j in k + 1..=deg {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut y = vec![BigRational::zero(); deg];
    for i in (0..deg).rev() {
        let mut acc = BigRational::from_integer(m[i][deg].clone());
        for j in i + 1..deg {
            acc -= BigRational::from_integer(m[i][j].clone()) * &y[j];
        }
        y[i] = acc / BigRational::from_integer(m[i][i].clone());
    }
    let da = BigRational::from_integer(da);
    Some(y.into_iter().map(|c| c * &da).collect())
}

fn pad_rat(mut v: Vec<BigRational>, len: usize) -> Vec<BigRational> {
    v.resize(len, BigRational::zero());
    v
}

fn parse_rational(tok: &str) -> Result<BigRational, FieldError> {
    let tok = tok.trim();
    let bad = || FieldError::Parse(format!("bad number {tok:?}"));
    match tok.split_once('/') {
        Some((a, b)) => {
            let a = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let b = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if b.is_zero() {
                return Err(FieldError::DivisionByZero);
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(tok).map_err(|_| bad())?,
        )),
    }
}

impl Field {
    pub fn new(desc: &FieldDescriptor) -> Result<Field, FieldError> {
        let arith = match desc {
            FieldDescriptor::Prime { p } => {
                Self::check_prime(*p)?;
                Arith::Finite {
                    p: *p,
                    k: 1,
                    modulus: vec![0, 1],
                    order: BigUint::from(*p),
                }
            }
            FieldDescriptor::Extension { p, modulus } => {
                Self::check_prime(*p)?;
                if modulus.len() < 2 {
                    return Err(FieldError::BadModulus("degree must be at least 1".into()));
                }
                if modulus.iter().any(|&c| c >= *p) {
                    return Err(FieldError::BadModulus(format!(
                        "coefficients must be residues in 0..{p}"
                    )));
                }
                if *modulus.last().unwrap() != 1 {
                    return Err(FieldError::BadModulus("modulus must be monic".into()));
                }
                if !is_irreducible_mod_p(modulus, *p) {
                    return Err(FieldError::NotIrreducible(*p));
                }
                let k = modulus.len() - 1;
                Arith::Finite {
                    p: *p,
                    k,
                    modulus: modulus.clone(),
                    order: BigUint::from(*p).pow(k as u32),
                }
            }
            FieldDescriptor::Cyclotomic { n } => {
                if *n == 0 || *n > MAX_CONDUCTOR {
                    return Err(FieldError::ConductorOutOfRange(*n));
                }
                let phi_int = cyclotomic_polynomial(*n);
                let deg = phi_int.len() - 1;
                Arith::Cyclotomic {
                    m: *n,
                    phi_int,
                    deg,
                }
            }
        };
        Ok(Field(Arc::new(Inner {
            desc: desc.clone(),
            arith,
        })))
    }

    fn check_prime(p: u64) -> Result<(), FieldError> {
        if p >= MAX_PRIME {
            return Err(FieldError::PrimeOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(())
    }

    pub fn prime(p: u64) -> Result<Field, FieldError> {
        Field::new(&FieldDescriptor::Prime { p })
    }

    pub fn extension(p: u64, modulus: Vec<u64>) -> Result<Field, FieldError> {
        Field::new(&FieldDescriptor::Extension { p, modulus })
    }

    pub fn cyclotomic(n: u32) -> Result<Field, FieldError> {
        Field::new(&FieldDescriptor::Cyclotomic { n })
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.0.desc
    }

    /// Characteristic; 0 for cyclotomic fields.
    pub fn characteristic(&self) -> u64 {
        match &self.0.arith {
            Arith::Finite { p, .. } => *p,
            Arith::Cyclotomic { .. } => 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.0.arith, Arith::Finite { .. })
    }

    /// Number of elements, `None` for infinite fields.
    pub fn order(&self) -> Option<BigUint> {
        match &self.0.arith {
            Arith::Finite { order, .. } => Some(order.clone()),
            Arith::Cyclotomic { .. } => None,
        }
    }

    /// Length of the coefficient vector of every element.
    pub fn degree(&self) -> usize {
        match &self.0.arith {
            Arith::Finite { k, .. } => *k,
            Arith::Cyclotomic { deg, .. } => *deg,
        }
    }

    pub fn conductor(&self) -> Option<u32> {
        match &self.0.arith {
            Arith::Cyclotomic { m, .. } => Some(*m),
            Arith::Finite { .. } => None,
        }
    }

    fn elem(&self, repr: Repr) -> Element {
        Element {
            field: self.clone(),
            repr,
        }
    }

    pub fn zero(&self) -> Element {
        self.from_i64(0)
    }

    pub fn one(&self) -> Element {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Element {
        self.from_int(&BigInt::from(v))
    }

    pub fn from_int(&self, v: &BigInt) -> Element {
        match &self.0.arith {
            Arith::Finite { p, k, .. } => {
                let r = v.mod_floor(&BigInt::from(*p)).to_u64().unwrap();
                self.elem(Repr::Mod(pad_u64(vec![r], *k)))
            }
            Arith::Cyclotomic { deg, .. } => self.elem(Repr::Rat(pad_rat(
                vec![BigRational::from_integer(v.clone())],
                *deg,
            ))),
        }
    }

    /// Embeds a rational number; fails if the denominator vanishes in F.
    pub fn from_rational(&self, v: &BigRational) -> Result<Element, FieldError> {
        match &self.0.arith {
            Arith::Finite { .. } => {
                let num = self.from_int(v.numer());
                let den = self.from_int(v.denom());
                num.try_div(&den)
            }
            Arith::Cyclotomic { deg, .. } => {
                Ok(self.elem(Repr::Rat(pad_rat(vec![v.clone()], *deg))))
            }
        }
    }

    /// Element from residues, constant term first; reduced mod p.
    pub fn from_residues(&self, coeffs: &[u64]) -> Result<Element, FieldError> {
        match &self.0.arith {
            Arith::Finite { p, k, .. } => {
                if coeffs.len() != *k {
                    return Err(FieldError::Parse(format!(
                        "expected {k} coefficients, got {}",
                        coeffs.len()
                    )));
                }
                Ok(self.elem(Repr::Mod(coeffs.iter().map(|c| c % p).collect())))
            }
            Arith::Cyclotomic { .. } => {
                let v: Vec<BigRational> = coeffs
                    .iter()
                    .map(|&c| BigRational::from_integer(BigInt::from(c)))
                    .collect();
                self.from_rationals(&v)
            }
        }
    }

    /// Element from rational coefficients in the power basis.
    pub fn from_rationals(&self, coeffs: &[BigRational]) -> Result<Element, FieldError> {
        if coeffs.len() != self.degree() {
            return Err(FieldError::Parse(format!(
                "expected {} coefficients, got {}",
                self.degree(),
                coeffs.len()
            )));
        }
        match &self.0.arith {
            Arith::Finite { .. } => {
                let x = self.generator_power_basis();
                let mut acc = self.zero();
                for (c, b) in coeffs.iter().zip(x) {
                    acc = &acc + &(&self.from_rational(c)? * &b);
                }
                Ok(acc)
            }
            Arith::Cyclotomic { .. } => Ok(self.elem(Repr::Rat(coeffs.to_vec()))),
        }
    }

    fn generator_power_basis(&self) -> Vec<Element> {
        let k = self.degree();
        (0..k)
            .map(|i| match &self.0.arith {
                Arith::Finite { .. } => {
                    let mut v = vec![0u64; k];
                    v[i] = 1;
                    self.elem(Repr::Mod(v))
                }
                Arith::Cyclotomic { .. } => {
                    let mut v = vec![BigRational::zero(); k];
                    v[i] = BigRational::one();
                    self.elem(Repr::Rat(v))
                }
            })
            .collect()
    }

    /// The class of `x`: `t` for extensions, `ζ` for cyclotomic fields.
    /// Prime fields have no distinguished generator.
    pub fn generator(&self) -> Option<Element> {
        match &self.0.arith {
            Arith::Finite { k: 1, .. } => match self.0.desc {
                FieldDescriptor::Prime { .. } => None,
                _ => Some(self.reduce_poly_mod(&[0, 1])),
            },
            Arith::Finite { .. } => Some(self.generator_power_basis()[1].clone()),
            Arith::Cyclotomic { deg: 1, .. } => {
                let phi = cyclotomic_polynomial(self.conductor().unwrap());
                // ζ is the root of the linear Φ
                Some(self.from_int(&-&phi[0]))
            }
            Arith::Cyclotomic { .. } => Some(self.generator_power_basis()[1].clone()),
        }
    }

    fn reduce_poly_mod(&self, a: &[u64]) -> Element {
        match &self.0.arith {
            Arith::Finite { p, k, modulus, .. } => {
                let r = ModP(*p);
                let v = poly::rem(&r, &poly::trim(&r, a.to_vec()), modulus);
                self.elem(Repr::Mod(pad_u64(v, *k)))
            }
            Arith::Cyclotomic { .. } => unreachable!(),
        }
    }

    /// All elements of a finite field in canonical order.
    pub fn elements(&self) -> Result<Elements, FieldError> {
        let total = self
            .order()
            .and_then(|o| o.to_u64())
            .filter(|&o| o <= 1 << 32)
            .ok_or_else(|| FieldError::Unsupported(format!("cannot enumerate {self}")))?;
        Ok(Elements {
            field: self.clone(),
            next: 0,
            total,
        })
    }

    /// Elements of the prime subfield (GF(p) or small integers for Q).
    pub fn prime_field_elements(&self) -> Result<Vec<Element>, FieldError> {
        match &self.0.arith {
            Arith::Finite { p, .. } => Ok((0..*p as i64).map(|i| self.from_i64(i)).collect()),
            Arith::Cyclotomic { .. } => Err(FieldError::Unsupported(
                "prime subfield of a cyclotomic field is infinite".into(),
            )),
        }
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        match &self.0.arith {
            Arith::Finite { p, k, .. } => {
                self.elem(Repr::Mod((0..*k).map(|_| rng.gen_range(0..*p)).collect()))
            }
            Arith::Cyclotomic { deg, .. } => {
                let v = (0..*deg)
                    .map(|_| {
                        let num = rng.gen_range(-4i64..=4);
                        let den = if rng.gen_bool(0.25) {
                            rng.gen_range(2i64..=3)
                        } else {
                            1
                        };
                        BigRational::new(num.into(), den.into())
                    })
                    .collect();
                self.elem(Repr::Rat(v))
            }
        }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        loop {
            let e = self.random_element(rng);
            if !e.is_zero() {
                return e;
            }
        }
    }

    /// Parses the text encoding: a scalar (`3`, `-1/2`) or a parenthesized
    /// coefficient vector (`(1,4)`, `(1/2,0,0,-1)`).
    pub fn parse_element(&self, s: &str) -> Result<Element, FieldError> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| FieldError::Parse(format!("unbalanced parentheses in {s:?}")))?;
            let toks: Vec<BigRational> = inner
                .split(',')
                .map(parse_rational)
                .collect::<Result<_, _>>()?;
            self.from_rationals(&toks)
        } else {
            self.from_rational(&parse_rational(s)?)
        }
    }

    /// Decodes the JSON encoding produced by [`Element::to_json`]; scalar
    /// numbers and strings are accepted for every field.
    pub fn element_from_json(&self, v: &Value) -> Result<Element, FieldError> {
        match v {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(self.from_i64(i))
                } else if let Some(u) = n.as_u64() {
                    Ok(self.from_int(&BigInt::from(u)))
                } else {
                    Err(FieldError::Parse(format!("non-integer number {n}")))
                }
            }
            Value::String(s) => self.parse_element(s),
            Value::Array(items) => {
                let coeffs: Vec<BigRational> = items
                    .iter()
                    .map(|it| match it {
                        Value::Number(n) => n
                            .as_i64()
                            .map(|i| BigRational::from_integer(i.into()))
                            .ok_or_else(|| FieldError::Parse(format!("bad coefficient {n}"))),
                        Value::String(s) => parse_rational(s),
                        other => Err(FieldError::Parse(format!("bad coefficient {other}"))),
                    })
                    .collect::<Result<_, _>>()?;
                self.from_rationals(&coeffs)
            }
            other => Err(FieldError::Parse(format!("bad element {other}"))),
        }
    }

    /// Every ω in F with ω^n = 1, in canonical order.
    pub fn roots_of_unity(&self, n: u64) -> Result<Vec<Element>, FieldError> {
        if n == 0 {
            return Err(FieldError::Unsupported("0-th roots of unity".into()));
        }
        match &self.0.arith {
            Arith::Finite { .. } => self.nth_roots(&self.one(), n),
            Arith::Cyclotomic { m, .. } => {
                let z = self.generator().unwrap();
                let mut set = BTreeSet::new();
                let mut w = self.one();
                for _ in 0..*m {
                    for c in [w.clone(), -&w] {
                        if c.pow(n).is_one() {
                            set.insert(c);
                        }
                    }
                    w = &w * &z;
                }
                Ok(set.into_iter().collect())
            }
        }
    }

    /// All primitive n-th roots of unity in canonical order.
    pub fn primitive_nth_roots(&self, n: u64) -> Result<Vec<Element>, FieldError> {
        let none = || FieldError::NoPrimitiveRoot {
            n,
            field: self.to_string(),
        };
        if n == 0 {
            return Err(none());
        }
        let all = match &self.0.arith {
            Arith::Finite { p, order, .. } => {
                if n.is_multiple_of(*p) {
                    return Err(none());
                }
                let qm1 = order - 1u32;
                if !(&qm1 % n).is_zero() {
                    return Err(none());
                }
                let g = self.element_of_order(n, &(qm1 / n)).ok_or_else(none)?;
                (1..=n)
                    .filter(|j| j.gcd(&n) == 1)
                    .map(|j| g.pow(j))
                    .collect()
            }
            Arith::Cyclotomic { .. } => self.roots_of_unity(n)?,
        };
        let mut out: Vec<Element> = all.into_iter().filter(|w| w.has_order(n)).collect();
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(none());
        }
        Ok(out)
    }

    fn element_of_order(&self, n: u64, cofactor: &BigUint) -> Option<Element> {
        self.elements()
            .ok()?
            .filter(|x| !x.is_zero())
            .map(|x| x.pow_big(cofactor))
            .find(|g| g.has_order(n))
    }

    /// A deterministic primitive n-th root of unity.
    ///
    /// Finite fields return the canonical minimum. Cyclotomic fields return
    /// ζ^(m/n) when n divides the conductor m (so ζ itself for n = m), and
    /// -ζ^(2m/n) for the extra even orders available when m is odd.
    pub fn find_primitive_nth_root(&self, n: u64) -> Result<Element, FieldError> {
        match &self.0.arith {
            Arith::Finite { .. } => Ok(self.primitive_nth_roots(n)?.remove(0)),
            Arith::Cyclotomic { m, .. } => {
                let m = *m as u64;
                let z = self.generator().unwrap();
                if n > 0 && m.is_multiple_of(n) {
                    Ok(z.pow(m / n))
                } else if n > 0 && m % 2 == 1 && n.is_multiple_of(2) && m.is_multiple_of(n / 2) {
                    Ok(-z.pow(m / (n / 2)))
                } else {
                    Err(FieldError::NoPrimitiveRoot {
                        n,
                        field: self.to_string(),
                    })
                }
            }
        }
    }

    /// Distinct roots in F of a polynomial given low-degree first, sorted.
    /// General polynomials are supported over finite fields only.
    pub fn roots(&self, coeffs: &[Element]) -> Result<Vec<Element>, FieldError> {
        for c in coeffs {
            self.check(c)?;
        }
        let f = poly::trim(self, coeffs.to_vec());
        if f.is_empty() {
            return Err(FieldError::Unsupported(
                "roots of the zero polynomial".into(),
            ));
        }
        if f.len() == 1 {
            return Ok(Vec::new());
        }
        if f.len() == 2 {
            return Ok(vec![-(&f[0] / &f[1])]);
        }
        if !self.is_finite() {
            // binomials reduce to n-th roots
            if f[1..f.len() - 1].iter().all(Element::is_zero) {
                let a = -(&f[0] / f.last().unwrap());
                return self.nth_roots(&a, (f.len() - 1) as u64);
            }
            return Err(FieldError::Unsupported(
                "root finding over cyclotomic fields is limited to x^n - a".into(),
            ));
        }
        let mut out = roots::finite_roots(self, &f);
        out.sort();
        Ok(out)
    }

    /// All x in F with x^n = a, sorted.
    pub fn nth_roots(&self, a: &Element, n: u64) -> Result<Vec<Element>, FieldError> {
        self.check(a)?;
        if n == 0 {
            return Err(FieldError::Unsupported("0-th roots".into()));
        }
        if a.is_zero() {
            return Ok(vec![self.zero()]);
        }
        match &self.0.arith {
            Arith::Finite { .. } => {
                let mut f = vec![self.zero(); n as usize + 1];
                f[0] = -a;
                f[n as usize] = self.one();
                let mut out = roots::finite_roots(self, &f);
                out.sort();
                Ok(out)
            }
            Arith::Cyclotomic { m, .. } => {
                let Repr::Rat(c) = &a.repr else {
                    unreachable!()
                };
                match roots::cyclotomic_nth_root(*m, c, n as u32) {
                    None => Ok(Vec::new()),
                    Some(u) => {
                        let u = self.elem(Repr::Rat(u));
                        let mut out: Vec<Element> =
                            self.roots_of_unity(n)?.iter().map(|w| &u * w).collect();
                        out.sort();
                        out.dedup();
                        Ok(out)
                    }
                }
            }
        }
    }

    fn check(&self, a: &Element) -> Result<(), FieldError> {
        if &a.field == self {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn add_repr(&self, a: &Repr, b: &Repr) -> Repr {
        match (&self.0.arith, a, b) {
            (Arith::Finite { p, .. }, Repr::Mod(x), Repr::Mod(y)) => {
                let r = ModP(*p);
                Repr::Mod(x.iter().zip(y).map(|(u, v)| r.add(u, v)).collect())
            }
            (Arith::Cyclotomic { .. }, Repr::Rat(x), Repr::Rat(y)) => {
                Repr::Rat(x.iter().zip(y).map(|(u, v)| u + v).collect())
            }
            _ => unreachable!("representation does not match field"),
        }
    }

    fn sub_repr(&self, a: &Repr, b: &Repr) -> Repr {
        match (&self.0.arith, a, b) {
            (Arith::Finite { p, .. }, Repr::Mod(x), Repr::Mod(y)) => {
                let r = ModP(*p);
                Repr::Mod(x.iter().zip(y).map(|(u, v)| r.sub(u, v)).collect())
            }
            (Arith::Cyclotomic { .. }, Repr::Rat(x), Repr::Rat(y)) => {
                Repr::Rat(x.iter().zip(y).map(|(u, v)| u - v).collect())
            }
            _ => unreachable!("representation does not match field"),
        }
    }

    fn neg_repr(&self, a: &Repr) -> Repr {
        match (&self.0.arith, a) {
            (Arith::Finite { p, .. }, Repr::Mod(x)) => {
                let r = ModP(*p);
                Repr::Mod(x.iter().map(|u| r.neg(u)).collect())
            }
            (Arith::Cyclotomic { .. }, Repr::Rat(x)) => Repr::Rat(x.iter().map(|u| -u).collect()),
            _ => unreachable!("representation does not match field"),
        }
    }

    fn mul_repr(&self, a: &Repr, b: &Repr) -> Repr {
        match (&self.0.arith, a, b) {
            (Arith::Finite { p, k: 1, .. }, Repr::Mod(x), Repr::Mod(y)) => {
                Repr::Mod(vec![x[0] * y[0] % p])
            }
            (Arith::Finite { p, k, modulus, .. }, Repr::Mod(x), Repr::Mod(y)) => {
                let r = ModP(*p);
                let prod = poly::mul(&r, &poly::trim(&r, x.clone()), &poly::trim(&r, y.clone()));
                Repr::Mod(pad_u64(poly::rem(&r, &prod, modulus), *k))
            }
            (Arith::Cyclotomic { phi_int, deg, .. }, Repr::Rat(x), Repr::Rat(y)) => {
                Repr::Rat(cyclotomic_mul(x, y, phi_int, *deg))
            }
            _ => unreachable!("representation does not match field"),
        }
    }

    fn inv_repr(&self, a: &Repr) -> Option<Repr> {
        match (&self.0.arith, a) {
            (Arith::Finite { p, k: 1, .. }, Repr::Mod(x)) => {
                ModP(*p).inv(&x[0]).map(|v| Repr::Mod(vec![v]))
            }
            (Arith::Finite { p, k, modulus, .. }, Repr::Mod(x)) => {
                let r = ModP(*p);
                let v = poly::trim(&r, x.clone());
                if v.is_empty() {
                    return None;
                }
                poly::inv_mod(&r, &v, modulus).map(|w| Repr::Mod(pad_u64(w, *k)))
            }
            (Arith::Cyclotomic { phi_int, deg, .. }, Repr::Rat(x)) => {
                cyclotomic_inv(x, phi_int, *deg).map(Repr::Rat)
            }
            _ => unreachable!("representation does not match field"),
        }
    }
}

/// Iterator over a finite field in canonical order.
pub struct Elements {
    field: Field,
    next: u64,
    total: u64,
}

impl Iterator for Elements {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        if self.next >= self.total {
            return None;
        }
        let p = self.field.characteristic();
        let k = self.field.degree();
        let mut idx = self.next;
        let mut c = vec![0u64; k];
        for j in (0..k).rev() {
            c[j] = idx % p;
            idx /= p;
        }
        self.next += 1;
        Some(self.field.elem(Repr::Mod(c)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = (self.total - self.next) as usize;
        (r, Some(r))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Mod(Vec<u64>),
    Rat(Vec<BigRational>),
}

/// An element of a [`Field`] in canonical encoding.
#[derive(Clone)]
pub struct Element {
    field: Field,
    repr: Repr,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr && self.field == other.field
    }
}
impl Eq for Element {}

impl Hash for Element {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.hash(state);
        self.repr.hash(state);
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Elements of one field compare by [`canonical_compare`]; elements of
/// different fields compare by their descriptors.
impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        self.field
            .descriptor()
            .cmp(other.field.descriptor())
            .then_with(|| self.repr.cmp(&other.repr))
    }
}

/// Total order on one field: lexicographic on coefficient vectors,
/// constant term first, rationals by value.
pub fn canonical_compare(a: &Element, b: &Element) -> Result<Ordering, FieldError> {
    a.field.check(b)?;
    Ok(a.repr.cmp(&b.repr))
}

impl Element {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Mod(v) => v.iter().all(|&c| c == 0),
            Repr::Rat(v) => v.iter().all(Zero::is_zero),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Mod(v) => v[0] == 1 && v[1..].iter().all(|&c| c == 0),
            Repr::Rat(v) => v[0].is_one() && v[1..].iter().all(Zero::is_zero),
        }
    }

    /// Residue vector for finite-field elements.
    pub fn residues(&self) -> Option<&[u64]> {
        match &self.repr {
            Repr::Mod(v) => Some(v),
            Repr::Rat(_) => None,
        }
    }

    /// Rational coefficient vector for cyclotomic elements.
    pub fn rationals(&self) -> Option<&[BigRational]> {
        match &self.repr {
            Repr::Rat(v) => Some(v),
            Repr::Mod(_) => None,
        }
    }

    /// True when the element lies in the prime subfield.
    pub fn is_in_prime_field(&self) -> bool {
        match &self.repr {
            Repr::Mod(v) => v[1..].iter().all(|&c| c == 0),
            Repr::Rat(v) => v[1..].iter().all(Zero::is_zero),
        }
    }

    pub fn try_add(&self, o: &Element) -> Result<Element, FieldError> {
        self.field.check(o)?;
        Ok(self.field.elem(self.field.add_repr(&self.repr, &o.repr)))
    }

    pub fn try_sub(&self, o: &Element) -> Result<Element, FieldError> {
        self.field.check(o)?;
        Ok(self.field.elem(self.field.sub_repr(&self.repr, &o.repr)))
    }

    pub fn try_mul(&self, o: &Element) -> Result<Element, FieldError> {
        self.field.check(o)?;
        Ok(self.field.elem(self.field.mul_repr(&self.repr, &o.repr)))
    }

    pub fn try_div(&self, o: &Element) -> Result<Element, FieldError> {
        self.try_mul(&o.inv()?)
    }

    pub fn inv(&self) -> Result<Element, FieldError> {
        self.field
            .inv_repr(&self.repr)
            .map(|r| self.field.elem(r))
            .ok_or(FieldError::DivisionByZero)
    }

    pub fn pow(&self, e: u64) -> Element {
        self.pow_big(&BigUint::from(e))
    }

    pub fn pow_big(&self, e: &BigUint) -> Element {
        let mut acc = self.field.one();
        for i in (0..e.bits()).rev() {
            acc = &acc * &acc;
            if e.bit(i) {
                acc = &acc * self;
            }
        }
        acc
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, e: i64) -> Result<Element, FieldError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    /// True when the multiplicative order of `self` is exactly n.
    pub fn has_order(&self, n: u64) -> bool {
        if n == 0 || !self.pow(n).is_one() {
            return false;
        }
        prime_factors(n)
            .into_iter()
            .all(|l| !self.pow(n / l).is_one())
    }

    /// JSON encoding: residue integer (prime), residue vector (extension)
    /// or vector of rational strings (cyclotomic).
    pub fn to_json(&self) -> Value {
        match (&self.field.0.desc, &self.repr) {
            (FieldDescriptor::Prime { .. }, Repr::Mod(v)) => Value::from(v[0]),
            (_, Repr::Mod(v)) => Value::from(v.clone()),
            (_, Repr::Rat(v)) => Value::from(v.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
        }
    }

    /// Residue in 0..p of a prime-field element of a finite field.
    pub fn as_prime_residue(&self) -> Option<u64> {
        match &self.repr {
            Repr::Mod(v) if self.is_in_prime_field() => Some(v[0]),
            _ => None,
        }
    }

    /// Rational value of an element of the prime subfield of Q(ζ_n).
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Rat(v) if self.is_in_prime_field() => Some(v[0].clone()),
            _ => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.field.0.desc, &self.repr) {
            (FieldDescriptor::Prime { .. }, Repr::Mod(v)) => write!(f, "{}", v[0]),
            (_, Repr::Mod(v)) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
            (_, Repr::Rat(v)) => {
                let parts: Vec<String> = v.iter().map(BigRational::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.field)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&Element> for &Element {
            type Output = Element;
            fn $method(self, rhs: &Element) -> Element {
                self.$try(rhs)
                    .unwrap_or_else(|e| panic!("{} {self:?}, {rhs:?}: {e}", stringify!($method)))
            }
        }
        impl $tr<Element> for Element {
            type Output = Element;
            fn $method(self, rhs: Element) -> Element {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Element> for Element {
            type Output = Element;
            fn $method(self, rhs: &Element) -> Element {
                (&self).$method(rhs)
            }
        }
        impl $tr<Element> for &Element {
            type Output = Element;
            fn $method(self, rhs: Element) -> Element {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.field.elem(self.field.neg_repr(&self.repr))
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        -&self
    }
}

impl Ring for Field {
    type E = Element;

    fn zero(&self) -> Element {
        Field::zero(self)
    }
    fn one(&self) -> Element {
        Field::one(self)
    }
    fn is_zero(&self, a: &Element) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Element, b: &Element) -> Element {
        a + b
    }
    fn sub(&self, a: &Element, b: &Element) -> Element {
        a - b
    }
    fn mul(&self, a: &Element, b: &Element) -> Element {
        a * b
    }
    fn neg(&self, a: &Element) -> Element {
        -a
    }
    fn inv(&self, a: &Element) -> Option<Element> {
        a.inv().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn inverse_of_three_mod_eleven() {
        let f = Field::prime(11).unwrap();
        assert_eq!(f.from_i64(3).inv().unwrap(), f.from_i64(4));
        assert_eq!(f.zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(4), ints(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(5), ints(&[1, 1, 1, 1, 1]));
        assert_eq!(cyclotomic_polynomial(12), ints(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn zeta_five_times_zeta_four_is_one() {
        let f = Field::cyclotomic(5).unwrap();
        let z = f.generator().unwrap();
        assert!((&z * &z.pow(4)).is_one());
    }

    #[test]
    fn primitive_roots() {
        let f = Field::prime(11).unwrap();
        assert_eq!(f.find_primitive_nth_root(5).unwrap(), f.from_i64(3));
        let g = Field::prime(7).unwrap();
        assert!(matches!(
            g.find_primitive_nth_root(5),
            Err(FieldError::NoPrimitiveRoot { .. })
        ));
        let c = Field::cyclotomic(5).unwrap();
        assert_eq!(
            c.find_primitive_nth_root(5).unwrap(),
            c.generator().unwrap()
        );
        assert_eq!(c.find_primitive_nth_root(10).unwrap().pow(5), -c.one());
    }

    #[test]
    fn canonical_order_examples() {
        let f = Field::prime(11).unwrap();
        assert_eq!(
            canonical_compare(&f.from_i64(2), &f.from_i64(8)).unwrap(),
            Ordering::Less
        );
        let c = Field::cyclotomic(5).unwrap();
        assert_eq!(
            canonical_compare(&c.one(), &c.generator().unwrap()).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            canonical_compare(&f.one(), &c.one()),
            Err(FieldError::FieldMismatch)
        );
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^2 + 4 = (x+1)(x+4) over GF(5)
        assert_eq!(
            Field::extension(5, vec![4, 0, 1]).unwrap_err(),
            FieldError::NotIrreducible(5)
        );
        assert!(Field::extension(5, vec![1, 1, 1]).is_ok());
        assert_eq!(Field::prime(91).unwrap_err(), FieldError::NotPrime(91));
    }

    #[test]
    fn text_and_json_round_trip() {
        for f in [
            Field::prime(11).unwrap(),
            Field::extension(5, vec![1, 1, 1]).unwrap(),
            Field::cyclotomic(8).unwrap(),
        ] {
            let mut rng = rand::thread_rng();
            for _ in 0..20 {
                let a = f.random_element(&mut rng);
                assert_eq!(f.parse_element(&a.to_string()).unwrap(), a);
                assert_eq!(f.element_from_json(&a.to_json()).unwrap(), a);
            }
        }
    }

    #[test]
    fn elements_enumerate_in_order() {
        let f = Field::extension(3, vec![1, 0, 1]).unwrap();
        let all: Vec<Element> = f.elements().unwrap().collect();
        assert_eq!(all.len(), 9);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn roots_of_unity_counts() {
        let c = Field::cyclotomic(5).unwrap();
        assert_eq!(c.roots_of_unity(10).unwrap().len(), 10);
        assert_eq!(c.roots_of_unity(4).unwrap().len(), 2);
        let f = Field::extension(5, vec![1, 1, 1]).unwrap();
        assert_eq!(f.roots_of_unity(8).unwrap().len(), 8);
    }

    #[test]
    fn nth_roots_in_cyclotomic_field() {
        let c = Field::cyclotomic(7).unwrap();
        let mut rng = rand::thread_rng();
        for _ in 0..5 {
            let u = c.random_nonzero(&mut rng);
            for n in [2u64, 3, 7] {
                let roots = c.nth_roots(&u.pow(n), n).unwrap();
                assert!(roots.contains(&u), "root of {u} missing for n={n}");
                assert!(roots.iter().all(|r| r.pow(n) == u.pow(n)));
            }
        }
        // 2 is not a square in Q(ζ_5)
        let c5 = Field::cyclotomic(5).unwrap();
        assert!(c5.nth_roots(&c5.from_i64(2), 2).unwrap().is_empty());
        // but 5 is
        assert_eq!(c5.nth_roots(&c5.from_i64(5), 2).unwrap().len(), 2);
    }

    #[test]
    fn roots_over_finite_fields() {
        let f = Field::extension(2, vec![1, 1, 1]).unwrap();
        let t = f.generator().unwrap();
        // (x - t)(x - t - 1) = x^2 + x + t(t+1)
        let poly = vec![&t * &(&t + &f.one()), f.one(), f.one()];
        let r = f.roots(&poly).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.contains(&t));
    }
}
