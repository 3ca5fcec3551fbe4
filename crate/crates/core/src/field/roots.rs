//! Root finding.
//!
//! Finite fields use Cantor–Zassenhaus. Over Q(ζ_m) an n-th root of K is
//! found modularly: pick a prime p with Φ_m splitting into few factors mod p,
//! take n-th roots in each residue field, combine by CRT, lift p-adically and
//! keep the lift that verifies exactly.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{self, IntMod, ModP, Ring};
use super::{cyclotomic_polynomial, is_prime, Field};

const EDF_SEED: u64 = 0x00c0_ffee;
/// Upper bound on residue-root combinations tried in the cyclotomic lift.
const COMBINATION_BUDGET: usize = 50_000;

pub(crate) trait FiniteRing: Ring {
    fn size(&self) -> BigUint;
    fn char(&self) -> u64;
    fn random(&self, rng: &mut ChaCha8Rng) -> Self::E;
}

impl FiniteRing for ModP {
    fn size(&self) -> BigUint {
        BigUint::from(self.0)
    }
    fn char(&self) -> u64 {
        self.0
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> u64 {
        rng.gen_range(0..self.0)
    }
}

impl FiniteRing for Field {
    fn size(&self) -> BigUint {
        self.order().expect("finite field")
    }
    fn char(&self) -> u64 {
        self.characteristic()
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> super::Element {
        self.random_element(rng)
    }
}

/// Splits a squarefree monic `f` whose irreducible factors all have degree
/// `deg` into those factors.
pub(crate) fn equal_degree_factors<R: FiniteRing>(
    r: &R,
    f: &[R::E],
    deg: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<R::E>> {
    let n = poly::degree(f).unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    if n == deg {
        return vec![poly::monic(r, f)];
    }
    let q = r.size();
    let exp = (q.pow(deg as u32) - 1u32) / 2u32;
    let ext_bits = q.bits() as usize - 1; // q = 2^e when char is 2
    loop {
        let h: Vec<R::E> = poly::trim(r, (0..n).map(|_| r.random(rng)).collect());
        if poly::degree(&h).unwrap_or(0) == 0 {
            continue;
        }
        let g = if r.char() == 2 {
            let mut acc = h.clone();
            let mut sq = h.clone();
            for _ in 1..ext_bits * deg {
                sq = poly::mul_mod(r, &sq, &sq, f);
                acc = poly::add(r, &acc, &sq);
            }
            acc
        } else {
            poly::sub(r, &poly::pow_mod(r, &h, &exp, f), &[r.one()])
        };
        let d = poly::gcd(r, &g, f);
        let dd = poly::degree(&d).unwrap_or(0);
        if dd > 0 && dd < n {
            let (other, _) = poly::divrem(r, f, &d);
            let mut out = equal_degree_factors(r, &d, deg, rng);
            out.extend(equal_degree_factors(r, &poly::monic(r, &other), deg, rng));
            return out;
        }
    }
}

/// Distinct roots of a nonzero polynomial over a finite field (unsorted).
pub(crate) fn finite_roots<R: FiniteRing>(r: &R, f: &[R::E]) -> Vec<R::E> {
    let f = poly::monic(r, &poly::trim(r, f.to_vec()));
    if poly::degree(&f).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let x = vec![r.zero(), r.one()];
    let xq = poly::pow_mod(r, &x, &r.size(), &f);
    let g = poly::gcd(r, &poly::sub(r, &xq, &x), &f);
    let mut rng = ChaCha8Rng::seed_from_u64(EDF_SEED);
    equal_degree_factors(r, &g, 1, &mut rng)
        .into_iter()
        .map(|lin| r.neg(&lin[0]))
        .collect()
}

fn carmichael(m: u64) -> u64 {
    (1..m.max(2))
        .filter(|a| a.gcd(&m) == 1)
        .map(|a| mult_order(a, m))
        .max()
        .unwrap_or(1)
}

fn mult_order(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    let mut x = a % m;
    let mut k = 1;
    while x != 1 {
        x = x * a % m;
        k += 1;
    }
    k
}

/// ‖V⁻¹‖∞ for the Vandermonde matrix of the complex embeddings of Q(ζ_m).
fn inverse_vandermonde_norm(m: u32, deg: usize) -> f64 {
    let roots: Vec<Complex64> = (1..=m)
        .filter(|k| k.gcd(&m) == 1)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
        .collect();
    let mut a: Vec<Vec<Complex64>> = roots
        .iter()
        .map(|z| {
            let mut row: Vec<Complex64> = (0..deg).map(|j| z.powu(j as u32)).collect();
            row.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), deg));
            row
        })
        .collect();
    for (i, row) in a.iter_mut().enumerate() {
        row[deg + i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..deg {
        let piv = (col..deg)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap();
        a.swap(col, piv);
        let pv = a[col][col];
        for v in a[col].iter_mut() {
            *v /= pv;
        }
        for row in 0..deg {
            if row != col {
                let f = a[row][col];
                if f.norm() != 0.0 {
                    for j in 0..2 * deg {
                        let t = a[col][j];
                        a[row][j] -= f * t;
                    }
                }
            }
        }
    }
    a.iter()
        .map(|row| row[deg..].iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn symmetric(v: &BigInt, modulus: &BigInt) -> BigInt {
    let r = v.mod_floor(modulus);
    if &r * 2 > *modulus {
        r - modulus
    } else {
        r
    }
}

fn int_rem(a: &[BigInt], f: &[BigInt], r: &IntMod) -> Vec<BigInt> {
    let a: Vec<BigInt> = a.iter().map(|c| c.mod_floor(&r.0)).collect();
    poly::rem(r, &poly::trim(r, a), f)
}

fn int_pow_mod(a: &[BigInt], n: u32, f: &[BigInt], r: &IntMod) -> Vec<BigInt> {
    poly::pow_mod(r, a, &BigUint::from(n), f)
}

/// One n-th root of K (power-basis rational coefficients) in Q(ζ_m), if any.
pub(crate) fn cyclotomic_nth_root(m: u32, k: &[BigRational], n: u32) -> Option<Vec<BigRational>> {
    let deg = k.len();
    if k.iter().all(Zero::is_zero) {
        return Some(k.to_vec());
    }
    if n == 1 {
        return Some(k.to_vec());
    }
    let den = k.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let dn = num_traits::pow(den.clone(), n as usize);
    let kk: Vec<BigInt> = k
        .iter()
        .map(|c| (c * BigRational::from_integer(dn.clone())).to_integer())
        .collect();

    if deg == 1 {
        let v = &kk[0];
        if v.is_negative() && n.is_multiple_of(2) {
            return None;
        }
        let root = v.abs().nth_root(n);
        if num_traits::pow(root.clone(), n as usize) != v.abs() {
            return None;
        }
        let root = if v.is_negative() { -root } else { root };
        return Some(vec![BigRational::new(root, den)]);
    }

    let phi = cyclotomic_polynomial(m);
    let lambda = carmichael(m as u64) as usize;
    let groups = deg / lambda;

    // prime with maximal splitting degree, not dividing m, n or K'
    let mut p = 101u64;
    let (p, factors) = loop {
        p += 1;
        if !is_prime(p) || (m as u64).is_multiple_of(p) || (n as u64).is_multiple_of(p) {
            continue;
        }
        if mult_order(p % m as u64, m as u64) as usize != lambda {
            continue;
        }
        let r = ModP(p);
        let phi_p: Vec<u64> = phi
            .iter()
            .map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap())
            .collect();
        let k_p: Vec<u64> = poly::trim(
            &r,
            kk.iter()
                .map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap())
                .collect(),
        );
        if k_p.is_empty() || poly::degree(&poly::gcd(&r, &k_p, &phi_p)) != Some(0) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(EDF_SEED ^ p);
        let fs = equal_degree_factors(&r, &phi_p, lambda, &mut rng);
        debug_assert_eq!(fs.len(), groups);
        break (p, fs);
    };
    let rp = ModP(p);
    let phi_p: Vec<u64> = phi
        .iter()
        .map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap())
        .collect();
    let kp: Vec<u64> = kk
        .iter()
        .map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap())
        .collect();

    // residue fields and roots of x^n - K' in each
    let mut comp_roots: Vec<Vec<Vec<u64>>> = Vec::new();
    let mut comp_fields: Vec<Field> = Vec::new();
    for f in &factors {
        let field = Field::extension(p, f.clone()).expect("factor of Φ_m is irreducible");
        let a = field.reduce_poly_mod(&kp);
        let rts = field.nth_roots(&a, n as u64).ok()?;
        if rts.is_empty() {
            return None;
        }
        comp_roots.push(
            rts.iter()
                .map(|e| poly::trim(&rp, e.residues().unwrap().to_vec()))
                .collect(),
        );
        comp_fields.push(field);
    }
    // CRT idempotents: e_i ≡ 1 mod f_i, ≡ 0 mod f_j
    let idem: Vec<Vec<u64>> = factors
        .iter()
        .map(|f| {
            let (cof, _) = poly::divrem(&rp, &phi_p, f);
            let inv = poly::inv_mod(&rp, &cof, f).expect("factors are coprime");
            poly::mul_mod(&rp, &cof, &inv, &phi_p)
        })
        .collect();
    let combine = |parts: &[Vec<u64>]| -> Vec<u64> {
        parts.iter().zip(&idem).fold(Vec::new(), |acc, (x, e)| {
            poly::add(&rp, &acc, &poly::mul_mod(&rp, x, e, &phi_p))
        })
    };

    // coefficient bound for D·u, and the lifting precision
    let sum_k: f64 = kk
        .iter()
        .map(|c| c.abs().to_f64().unwrap_or(f64::MAX))
        .sum();
    let log_bound = inverse_vandermonde_norm(m, deg).max(1.0).ln() + sum_k.ln() / n as f64;
    let log_needed = log_bound + (16.0f64).ln();
    let k_prec = (log_needed / (p as f64).ln()).ceil().max(1.0) as u32 + 1;
    let pk = BigInt::from(p).pow(k_prec);
    let ring = IntMod(pk.clone());
    let phi_big: Vec<BigInt> = phi.clone();
    let kk_mod = int_rem(&kk, &phi_big, &ring);

    let mut idx = vec![0usize; groups];
    for _ in 0..COMBINATION_BUDGET {
        let parts: Vec<Vec<u64>> = idx
            .iter()
            .enumerate()
            .map(|(g, &i)| comp_roots[g][i].clone())
            .collect();
        let u0 = combine(&parts);
        // inverse of n·u0^(n-1) mod p, componentwise
        let inv_parts: Vec<Vec<u64>> = parts
            .iter()
            .zip(&comp_fields)
            .map(|(x, fld)| {
                let e = fld.reduce_poly_mod(x);
                let d = (&fld.from_i64(n as i64) * &e.pow(n as u64 - 1))
                    .inv()
                    .expect("unit");
                poly::trim(&rp, d.residues().unwrap().to_vec())
            })
            .collect();
        let w0: Vec<BigInt> = combine(&inv_parts).into_iter().map(BigInt::from).collect();
        let mut u: Vec<BigInt> = u0.into_iter().map(BigInt::from).collect();
        for _ in 1..k_prec {
            let err = poly::sub(&ring, &int_pow_mod(&u, n, &phi_big, &ring), &kk_mod);
            if err.is_empty() {
                break;
            }
            let corr = poly::mul_mod(&ring, &err, &w0, &phi_big);
            u = poly::sub(&ring, &u, &corr);
        }
        let cand: Vec<BigInt> = (0..deg)
            .map(|i| u.get(i).map(|c| symmetric(c, &pk)).unwrap_or_default())
            .collect();
        if is_exact_root(&cand, n, &kk, &phi_big) {
            return Some(
                cand.into_iter()
                    .map(|c| BigRational::new(c, den.clone()))
                    .collect(),
            );
        }
        // advance odometer
        let mut g = 0;
        loop {
            if g == groups {
                return None;
            }
            idx[g] += 1;
            if idx[g] < comp_roots[g].len() {
                break;
            }
            idx[g] = 0;
            g += 1;
        }
    }
    None
}

/// Exact test of w^n = K in Z[x]/Φ_m.
fn is_exact_root(w: &[BigInt], n: u32, k: &[BigInt], phi: &[BigInt]) -> bool {
    let mut acc: Vec<BigInt> = vec![BigInt::one()];
    for _ in 0..n {
        acc = int_reduce(&int_mul(&acc, w), phi);
    }
    let mut kk: Vec<BigInt> = k.to_vec();
    while kk.last().is_some_and(Zero::is_zero) {
        kk.pop();
    }
    acc == kk
}

fn int_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Remainder modulo a monic integer polynomial, trimmed.
fn int_reduce(a: &[BigInt], f: &[BigInt]) -> Vec<BigInt> {
    let df = f.len() - 1;
    let mut r = a.to_vec();
    while r.len() > df {
        let c = r.pop().unwrap();
        if !c.is_zero() {
            let off = r.len() - df;
            for (j, fj) in f[..df].iter().enumerate() {
                r[off + j] -= &c * fj;
            }
        }
    }
    while r.last().is_some_and(Zero::is_zero) {
        r.pop();
    }
    r
}
