//! The two model families CBP(F; d, q, ε) and CBP(F; d, γ), their
//! transition and raising matrices, affine transformations and duality.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::exactla::{LinalgError, Matrix};
use crate::field::{Element, Field};
use crate::qseries::{poch_q, PochhammerCache};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("bad root: {0}")]
    BadRoot(String),
    #[error("bad eps: {0}")]
    BadEps(String),
    #[error("bad characteristic: {0}")]
    BadChar(String),
    #[error("bad gamma: {0}")]
    BadGamma(String),
    #[error("affine scale factors s and s* must be nonzero")]
    ZeroScale,
    #[error("Hessenberg export needs d >= 3, got d = {0}")]
    TooSmall(usize),
    #[error("the two matrices must be square of equal size over one field")]
    Shape,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An ordered pair (A, A*) of equal-size square matrices over one field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CbpPair {
    pub a: Matrix,
    pub astar: Matrix,
}

impl CbpPair {
    pub fn new(a: Matrix, astar: Matrix) -> Result<CbpPair, FamilyError> {
        if a.dim() != astar.dim() || a.field() != astar.field() || a.dim() == 0 {
            return Err(FamilyError::Shape);
        }
        Ok(CbpPair { a, astar })
    }

    pub fn field(&self) -> &Field {
        self.a.field()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// d = dimension − 1.
    pub fn d(&self) -> usize {
        self.a.dim() - 1
    }

    /// (S⁻¹AS, S⁻¹A*S).
    pub fn conjugate(&self, s: &Matrix) -> Result<CbpPair, FamilyError> {
        let inv = s.inverse()?;
        Ok(CbpPair {
            a: &(&inv * &self.a) * s,
            astar: &(&inv * &self.astar) * s,
        })
    }

    /// True when σ·A = B·σ and σ·A* = B*·σ, with σ invertible.
    pub fn is_isomorphism(&self, sigma: &Matrix, other: &CbpPair) -> bool {
        sigma.dim() == self.dim()
            && other.dim() == self.dim()
            && sigma.field() == self.field()
            && other.field() == self.field()
            && sigma * &self.a == &other.a * sigma
            && sigma * &self.astar == &other.astar * sigma
            && sigma.inverse().is_ok()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.field().descriptor(),
            "d": self.d(),
            "A": self.a.rows_json(),
            "Astar": self.astar.rows_json(),
        })
    }
}

/// Parameters of CBP(F; d, q, ε).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilyParamsQ {
    pub d: usize,
    pub q: Element,
    pub eps: Element,
}

impl FamilyParamsQ {
    pub fn new(d: usize, q: Element, eps: Element) -> Result<FamilyParamsQ, FamilyError> {
        if d < 1 {
            return Err(FamilyError::BadRoot("d must be at least 1".into()));
        }
        if q.field() != eps.field() {
            return Err(FamilyError::Linalg(LinalgError::FieldMismatch));
        }
        if !q.has_order(d as u64 + 1) {
            return Err(FamilyError::BadRoot(format!(
                "q = {q} is not a primitive {}-th root of unity",
                d + 1
            )));
        }
        if (0..=d).any(|i| q.pow(i as u64) == eps) {
            return Err(FamilyError::BadEps(format!(
                "eps = {eps} must be not among 1,q,q^2,…,q^d"
            )));
        }
        Ok(FamilyParamsQ { d, q, eps })
    }

    pub fn field(&self) -> &Field {
        self.q.field()
    }

    /// Same ε with q replaced by q⁻¹.
    pub fn with_inverse_q(&self) -> FamilyParamsQ {
        FamilyParamsQ {
            d: self.d,
            q: self.q.inv().expect("root of unity"),
            eps: self.eps.clone(),
        }
    }

    /// Same q with ε replaced by q^k·ε.
    pub fn shifted(&self, k: i64) -> FamilyParamsQ {
        FamilyParamsQ {
            d: self.d,
            q: self.q.clone(),
            eps: &self.eps * &self.q.powi(k).expect("root of unity"),
        }
    }
}

/// Parameters of CBP(F; d, γ).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilyParamsP {
    pub d: usize,
    pub gamma: Element,
}

impl FamilyParamsP {
    pub fn new(d: usize, gamma: Element) -> Result<FamilyParamsP, FamilyError> {
        let n = d as u64 + 1;
        let p = gamma.field().characteristic();
        if d < 1 || p != n {
            return Err(FamilyError::BadChar(format!(
                "need char(F) = d+1 prime, got char {p} with d = {d}"
            )));
        }
        if gamma.is_in_prime_field() {
            return Err(FamilyError::BadGamma(format!(
                "gamma = {gamma} lies in the prime field; it must be not among 0,1,2,…,d (d = {d})"
            )));
        }
        Ok(FamilyParamsP { d, gamma })
    }

    pub fn field(&self) -> &Field {
        self.gamma.field()
    }

    pub fn negated(&self) -> FamilyParamsP {
        FamilyParamsP {
            d: self.d,
            gamma: -&self.gamma,
        }
    }

    /// γ replaced by γ + k.
    pub fn shifted(&self, k: i64) -> FamilyParamsP {
        FamilyParamsP {
            d: self.d,
            gamma: &self.gamma + &self.field().from_i64(k),
        }
    }
}

/// Either family.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FamilyParams {
    Q(FamilyParamsQ),
    P(FamilyParamsP),
}

impl FamilyParams {
    pub fn d(&self) -> usize {
        match self {
            FamilyParams::Q(p) => p.d,
            FamilyParams::P(p) => p.d,
        }
    }

    pub fn pair(&self) -> CbpPair {
        match self {
            FamilyParams::Q(p) => make_cbp_q(p),
            FamilyParams::P(p) => make_cbp_p(p),
        }
    }
}

fn a_q(q: &Element, eps: &Element, d: usize) -> Matrix {
    let f = q.field();
    let n = d + 1;
    let qi = q.inv().expect("root of unity");
    let mut a = Matrix::zero(f, n);
    let mut w = eps.clone();
    for i in 0..n {
        a.set(i, i, w.clone());
        if i > 0 {
            a.set(i, i - 1, &f.one() - &w);
        }
        w = &w * &qi;
    }
    a.set(0, d, &f.one() - eps);
    a
}

fn astar_q(q: &Element, d: usize) -> Matrix {
    let diag: Vec<Element> = (0..=d).map(|i| q.pow(i as u64)).collect();
    Matrix::diag(q.field(), &diag).expect("same field")
}

/// A(q, ε) and A*(q).
pub fn make_cbp_q(p: &FamilyParamsQ) -> CbpPair {
    CbpPair {
        a: a_q(&p.q, &p.eps, p.d),
        astar: astar_q(&p.q, p.d),
    }
}

/// A(γ) and A* = diag(0, 1, …, d).
pub fn make_cbp_p(p: &FamilyParamsP) -> CbpPair {
    let f = p.field();
    let n = p.d + 1;
    let mut a = Matrix::zero(f, n);
    for i in 0..n {
        let v = &f.from_i64(i as i64) + &p.gamma;
        if i > 0 {
            a.set(i, i - 1, -&v);
        }
        a.set(i, i, v);
    }
    a.set(0, p.d, -&p.gamma);
    let diag: Vec<Element> = (0..n).map(|i| f.from_i64(i as i64)).collect();
    CbpPair {
        a,
        astar: Matrix::diag(f, &diag).expect("same field"),
    }
}

/// P_{ij} = q^{ij} (εq^{−i}; q)_j / (εq; q)_j.
pub fn make_p_q(p: &FamilyParamsQ) -> Matrix {
    let f = p.field();
    let den = PochhammerCache::q_symbol(&(&p.eps * &p.q), &p.q, p.d);
    let den_inv: Vec<Element> = den
        .values
        .iter()
        .map(|v| v.inv().expect("(εq;q)_j is nonzero for admissible ε"))
        .collect();
    let qi = p.q.inv().expect("root of unity");
    Matrix::from_fn(f, p.d + 1, |i, j| {
        let num = poch_q(&(&p.eps * &qi.pow(i as u64)), &p.q, j);
        &(&p.q.pow((i * j) as u64) * &num) * &den_inv[j]
    })
}

/// P_{ij} = (−i−γ)_j / (1−γ)_j.
pub fn make_p_p(p: &FamilyParamsP) -> Matrix {
    let f = p.field();
    let den = PochhammerCache::shifted(&(&f.one() - &p.gamma), p.d);
    let den_inv: Vec<Element> = den
        .values
        .iter()
        .map(|v| v.inv().expect("(1-γ)_j is nonzero for admissible γ"))
        .collect();
    Matrix::from_fn(f, p.d + 1, |i, j| {
        let base = -&(&f.from_i64(i as i64) + &p.gamma);
        &PochhammerCache::shifted(&base, j).values[j] * &den_inv[j]
    })
}

/// R_{0,d} = 1 − ε, R_{i,i−1} = q^i − ε.
pub fn make_raising_q(p: &FamilyParamsQ) -> Matrix {
    let f = p.field();
    let mut r = Matrix::zero(f, p.d + 1);
    for i in 1..=p.d {
        r.set(i, i - 1, &p.q.pow(i as u64) - &p.eps);
    }
    r.set(0, p.d, &f.one() - &p.eps);
    r
}

/// R_{0,d} = γ, R_{i,i−1} = i + γ.
pub fn make_raising_p(p: &FamilyParamsP) -> Matrix {
    let f = p.field();
    let mut r = Matrix::zero(f, p.d + 1);
    for i in 1..=p.d {
        r.set(i, i - 1, &f.from_i64(i as i64) + &p.gamma);
    }
    r.set(0, p.d, p.gamma.clone());
    r
}

/// Outcome of [`verify_family_relations`]; `failed` names the first broken
/// relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub failed: Option<&'static str>,
}

impl RelationReport {
    pub fn holds(&self) -> bool {
        self.failed.is_none()
    }
}

/// Which defining relations to check.
#[derive(Clone, Debug)]
pub enum RelationCase {
    Q { q: Element, eps: Element },
    P { gamma: Element },
}

pub fn verify_family_relations(pair: &CbpPair, which: &RelationCase) -> RelationReport {
    let n = pair.dim() as u64;
    let f = pair.field();
    let fail = |name| RelationReport { failed: Some(name) };
    match which {
        RelationCase::Q { q, eps } => {
            if !pair.a.pow(n).is_identity() {
                return fail("A^n = I");
            }
            if !pair.astar.pow(n).is_identity() {
                return fail("(A*)^n = I");
            }
            let lhs = &(&pair.a * &pair.astar).scale(q) - &(&pair.astar * &pair.a);
            let rhs = Matrix::scalar(&(eps * &(q - &f.one())), pair.dim());
            if q.is_one() || lhs != rhs {
                return fail("(qAA* - A*A)/(q-1) = eps I");
            }
        }
        RelationCase::P { gamma } => {
            if pair.a.pow(n) != pair.a {
                return fail("A^n = A");
            }
            if pair.astar.pow(n) != pair.astar {
                return fail("(A*)^n = A*");
            }
            let lhs =
                &(&(&pair.a * &pair.astar) - &(&pair.astar * &pair.a)) + &(&pair.a - &pair.astar);
            if lhs != Matrix::scalar(gamma, pair.dim()) {
                return fail("AA* - A*A + A - A* = gamma I");
            }
        }
    }
    RelationReport { failed: None }
}

/// (A, A*) ↦ (sA + tI, s*A* + t*I).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub s: Element,
    pub s_star: Element,
    pub t: Element,
    pub t_star: Element,
}

impl Affine {
    pub fn new(
        s: Element,
        s_star: Element,
        t: Element,
        t_star: Element,
    ) -> Result<Affine, FamilyError> {
        if s.is_zero() || s_star.is_zero() {
            return Err(FamilyError::ZeroScale);
        }
        Ok(Affine {
            s,
            s_star,
            t,
            t_star,
        })
    }

    pub fn identity(f: &Field) -> Affine {
        Affine {
            s: f.one(),
            s_star: f.one(),
            t: f.zero(),
            t_star: f.zero(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.s.is_one() && self.s_star.is_one() && self.t.is_zero() && self.t_star.is_zero()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Affine) -> Affine {
        Affine {
            s: &next.s * &self.s,
            s_star: &next.s_star * &self.s_star,
            t: &(&next.s * &self.t) + &next.t,
            t_star: &(&next.s_star * &self.t_star) + &next.t_star,
        }
    }

    pub fn inverse(&self) -> Affine {
        let si = self.s.inv().expect("nonzero scale");
        let ssi = self.s_star.inv().expect("nonzero scale");
        Affine {
            t: -&(&self.t * &si),
            t_star: -&(&self.t_star * &ssi),
            s: si,
            s_star: ssi,
        }
    }

    pub fn apply(&self, pair: &CbpPair) -> CbpPair {
        CbpPair {
            a: pair.a.scale(&self.s).shift(&self.t),
            astar: pair.astar.scale(&self.s_star).shift(&self.t_star),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": self.s.to_json(),
            "s_star": self.s_star.to_json(),
            "t": self.t.to_json(),
            "t_star": self.t_star.to_json(),
        })
    }
}

pub fn affine_transform(
    pair: &CbpPair,
    s: &Element,
    s_star: &Element,
    t: &Element,
    t_star: &Element,
) -> Result<CbpPair, FamilyError> {
    let aff = Affine::new(s.clone(), s_star.clone(), t.clone(), t_star.clone())?;
    Ok(aff.apply(pair))
}

/// (A, A*) ↦ (A*, A).
pub fn dual_pair(pair: &CbpPair) -> CbpPair {
    CbpPair {
        a: pair.astar.clone(),
        astar: pair.a.clone(),
    }
}

/// Parameter record of a family pair viewed as a circular Hessenberg pair.
/// Vectors hold θ_i, θ*_i, a_i, a*_i for 0 ≤ i ≤ d; b_i, b*_i for
/// 0 ≤ i ≤ d−1; φ_i, ϑ_i, c_i, c*_i for 1 ≤ i ≤ d (stored from index 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HessenbergData {
    pub d: usize,
    /// The eight scalars a, b, c, a*, b*, c*, y, z in that order.
    pub constants: Vec<(&'static str, Element)>,
    pub theta: Vec<Element>,
    pub theta_star: Vec<Element>,
    pub phi: Vec<Element>,
    pub vartheta: Vec<Element>,
    pub b: Vec<Element>,
    pub b_star: Vec<Element>,
    pub a: Vec<Element>,
    pub a_star: Vec<Element>,
    pub c: Vec<Element>,
    pub c_star: Vec<Element>,
    pub xi: Element,
    pub xi_star: Element,
}

impl HessenbergData {
    pub fn constant(&self, name: &str) -> Option<&Element> {
        self.constants
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| v)
    }

    /// Flat `name → value` record with true subscripts, e.g. `phi_1`.
    pub fn entries(&self) -> Vec<(String, Element)> {
        let mut out: Vec<(String, Element)> = self
            .constants
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        let mut push = |name: &str, v: &[Element], start: usize| {
            for (i, x) in v.iter().enumerate() {
                out.push((format!("{name}_{}", i + start), x.clone()));
            }
        };
        push("theta", &self.theta, 0);
        push("theta_star", &self.theta_star, 0);
        push("phi", &self.phi, 1);
        push("vartheta", &self.vartheta, 1);
        push("b", &self.b, 0);
        push("b_star", &self.b_star, 0);
        push("a", &self.a, 0);
        push("a_star", &self.a_star, 0);
        push("c", &self.c, 1);
        push("c_star", &self.c_star, 1);
        out.push(("xi".into(), self.xi.clone()));
        out.push(("xi_star".into(), self.xi_star.clone()));
        out
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in self.entries() {
            m.insert(k, v.to_json());
        }
        Value::Object(m)
    }
}

pub fn hessenberg_export(params: &FamilyParams) -> Result<HessenbergData, FamilyError> {
    let d = params.d();
    if d < 3 {
        return Err(FamilyError::TooSmall(d));
    }
    Ok(match params {
        FamilyParams::Q(p) => {
            let f = p.field();
            let one = f.one();
            let qp = |i: usize| p.q.pow(i as u64);
            let qm = |i: usize| p.q.powi(-(i as i64)).expect("root of unity");
            let one_minus_eps = &one - &p.eps;
            HessenbergData {
                d,
                constants: vec![
                    ("a", f.zero()),
                    ("b", f.zero()),
                    ("c", one.clone()),
                    ("a_star", f.zero()),
                    ("b_star", one.clone()),
                    ("c_star", f.zero()),
                    ("y", one_minus_eps.clone()),
                    ("z", f.zero()),
                ],
                theta: (0..=d).map(qm).collect(),
                theta_star: (0..=d).map(qp).collect(),
                phi: (1..=d)
                    .map(|i| &(&qp(i) - &one) * &(&qp(i) - &p.eps))
                    .collect(),
                vartheta: (1..=d).map(|i| &(&qp(i) - &one) * &one_minus_eps).collect(),
                b: vec![f.zero(); d],
                b_star: vec![f.zero(); d],
                a: (0..=d).map(|i| &qm(i) * &p.eps).collect(),
                a_star: (0..=d).map(|i| &qp(i) * &p.eps).collect(),
                c: (1..=d).map(|i| &one - &(&qm(i) * &p.eps)).collect(),
                c_star: (1..=d).map(|i| &one - &(&qp(i) * &p.eps)).collect(),
                xi: one_minus_eps.clone(),
                xi_star: one_minus_eps,
            }
        }
        FamilyParams::P(p) => {
            let f = p.field();
            let g = &p.gamma;
            let int = |i: usize| f.from_i64(i as i64);
            HessenbergData {
                d,
                constants: vec![
                    ("a", f.zero()),
                    ("b", f.one()),
                    ("c", f.zero()),
                    ("a_star", f.zero()),
                    ("b_star", f.one()),
                    ("c_star", f.zero()),
                    ("y", -g),
                    ("z", f.zero()),
                ],
                theta: (0..=d).map(int).collect(),
                theta_star: (0..=d).map(int).collect(),
                phi: (1..=d).map(|i| -&(&int(i) * &(&int(i) + g))).collect(),
                vartheta: (1..=d).map(|i| -&(&int(i) * g)).collect(),
                b: vec![f.zero(); d],
                b_star: vec![f.zero(); d],
                a: (0..=d).map(|i| &int(i) + g).collect(),
                a_star: (0..=d).map(|i| &int(i) - g).collect(),
                c: (1..=d).map(|i| -&(&int(i) + g)).collect(),
                c_star: (1..=d).map(|i| g - &int(i)).collect(),
                xi: -g,
                xi_star: g.clone(),
            }
        }
    })
}
