//! Recognition and classification of circular bidiagonal pairs given in
//! standard presentation, plus the isomorphism and affine-equivalence
//! decisions built on top of it.
//!
//! A pair is in standard presentation when A is circular bidiagonal and A*
//! is diagonal with distinct entries. The pipeline solves for the profile,
//! picks standard orderings, moves the pair to normalized position by an
//! affine map, changes basis to {E*_i ξ} and reads off the family
//! parameter. Every witness is checked by multiplication before it is
//! returned.

use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::exactla::{
    dot, is_circular_bidiagonal, is_diagonal_distinct, kernel_vector, poly_from_roots,
    primitive_idempotents, rank_one_factors, solve_system, IdempotentSet, LinalgError, Matrix,
};
use crate::families::{
    make_cbp_p, make_cbp_q, Affine, CbpPair, FamilyError, FamilyParams, FamilyParamsP,
    FamilyParamsQ,
};
use crate::field::{Element, Field, FieldError};

/// Largest field scanned by [`bruteforce_verify_cbp`].
pub const BRUTEFORCE_MAX_FIELD: u64 = 1 << 12;
/// Largest d accepted by [`bruteforce_verify_cbp`].
pub const BRUTEFORCE_MAX_D: usize = 4;

/// The check that rejected a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbpCheck {
    ProfileInconsistent,
    ProfileUnderdetermined,
    Recurrence,
    Eigenvalues(String),
    TraceRelation(String),
    Inequality(&'static str),
    RootCondition(String),
    Membership(String),
    BasisDegenerate,
    FinalMismatch(&'static str),
}

impl fmt::Display for CbpCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CbpCheck::ProfileInconsistent => write!(f, "profile system inconsistent"),
            CbpCheck::ProfileUnderdetermined => write!(f, "profile system underdetermined"),
            CbpCheck::Recurrence => {
                write!(
                    f,
                    "eigenvalue recurrence fails for the diagonal of A* under every rotation"
                )
            }
            CbpCheck::Eigenvalues(m) => write!(f, "eigenvalues of A: {m}"),
            CbpCheck::TraceRelation(m) => write!(f, "trace coefficient relation: {m}"),
            CbpCheck::Inequality(m) => write!(f, "normalization inequality fails: {m}"),
            CbpCheck::RootCondition(m) => write!(f, "root of unity condition fails: {m}"),
            CbpCheck::Membership(m) => write!(f, "parameter membership fails: {m}"),
            CbpCheck::BasisDegenerate => write!(f, "vectors E*_i xi do not form a basis"),
            CbpCheck::FinalMismatch(m) => write!(f, "final matrix mismatch: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("not in standard presentation: {0}")]
    NotStandardPresentation(String),
    #[error("not a circular bidiagonal pair: {0}")]
    NotCbp(CbpCheck),
    #[error("brute-force check needs a finite field of order at most 4096 and d <= 4")]
    FieldTooLarge,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl ClassifyError {
    /// The failed check, for NotCbp errors.
    pub fn check(&self) -> Option<&CbpCheck> {
        match self {
            ClassifyError::NotCbp(c) => Some(c),
            _ => None,
        }
    }
}

fn not_cbp<T>(c: CbpCheck) -> Result<T, ClassifyError> {
    Err(ClassifyError::NotCbp(c))
}

/// The unique (q, α, β, γ) with qAA* − A*A + αA − βA* = γI.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    pub q: Element,
    pub alpha: Element,
    pub beta: Element,
    pub gamma: Element,
}

impl Profile {
    /// True when the defining relation holds for `pair`.
    pub fn holds_for(&self, pair: &CbpPair) -> bool {
        let (a, s) = (&pair.a, &pair.astar);
        let lhs =
            &(&(&(a * s).scale(&self.q) - &(s * a)) + &a.scale(&self.alpha)) - &s.scale(&self.beta);
        lhs == Matrix::scalar(&self.gamma, pair.dim())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q.to_json(),
            "alpha": self.alpha.to_json(),
            "beta": self.beta.to_json(),
            "gamma": self.gamma.to_json(),
        })
    }
}

/// a_i = tr(A E*_i) and a*_i = tr(A* E_i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCoefficients {
    pub a: Vec<Element>,
    pub astar: Vec<Element>,
}

/// Eigenvalues in standard order with their idempotents. `rotation` is the
/// index r with θ*_i = A*[(i+r) mod n][(i+r) mod n].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenData {
    pub theta: Vec<Element>,
    pub theta_star: Vec<Element>,
    pub e: IdempotentSet,
    pub e_star: IdempotentSet,
    pub rotation: usize,
}

/// `affine` followed by conjugation S⁻¹(·)S with S = `basis_change`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessChain {
    pub affine: Affine,
    pub basis_change: Matrix,
}

impl WitnessChain {
    /// True when S⁻¹·affine(source)·S equals `target`.
    pub fn maps(&self, source: &CbpPair, target: &CbpPair) -> bool {
        let moved = self.affine.apply(source);
        let s = &self.basis_change;
        s.dim() == source.dim()
            && target.dim() == source.dim()
            && &moved.a * s == s * &target.a
            && &moved.astar * s == s * &target.astar
            && s.inverse().is_ok()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "affine": self.affine.to_json(),
            "basis_change": self.basis_change.rows_json(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    Q,
    CharP,
}

/// Classification of a pair with d ≥ 1.
///
/// `param` is the orbit minimum, `raw_param` the value read off after
/// normalization. `witness` maps the input onto the family pair at `param`
/// and `raw_witness` onto the one at `raw_param`. For the char-p case `q`
/// is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyForm {
    pub case: Case,
    pub d: usize,
    pub q: Element,
    pub param: Element,
    pub raw_param: Element,
    pub witness: WitnessChain,
    pub raw_witness: WitnessChain,
}

impl FamilyForm {
    fn params_at(&self, v: &Element) -> FamilyParams {
        match self.case {
            Case::Q => FamilyParams::Q(FamilyParamsQ {
                d: self.d,
                q: self.q.clone(),
                eps: v.clone(),
            }),
            Case::CharP => FamilyParams::P(FamilyParamsP {
                d: self.d,
                gamma: v.clone(),
            }),
        }
    }

    /// Parameters of the canonical family pair.
    pub fn params(&self) -> FamilyParams {
        self.params_at(&self.param)
    }

    pub fn raw_params(&self) -> FamilyParams {
        self.params_at(&self.raw_param)
    }

    /// Same label: case, d, q and orbit representative.
    pub fn same_label(&self, other: &FamilyForm) -> bool {
        self.case == other.case
            && self.d == other.d
            && self.q == other.q
            && self.param == other.param
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalForm {
    /// Dimension one: every pair of scalars.
    Trivial,
    Family(FamilyForm),
}

impl CanonicalForm {
    pub fn family(&self) -> Option<&FamilyForm> {
        match self {
            CanonicalForm::Trivial => None,
            CanonicalForm::Family(f) => Some(f),
        }
    }

    /// Label equality, ignoring witnesses.
    pub fn same_label(&self, other: &CanonicalForm) -> bool {
        match (self, other) {
            (CanonicalForm::Trivial, CanonicalForm::Trivial) => true,
            (CanonicalForm::Family(a), CanonicalForm::Family(b)) => a.same_label(b),
            _ => false,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CanonicalForm::Trivial => json!({ "case": "trivial", "d": 0 }),
            CanonicalForm::Family(f) => {
                let mut v = json!({
                    "case": match f.case { Case::Q => "q", Case::CharP => "p" },
                    "d": f.d,
                    "param": f.param.to_json(),
                    "raw_param": f.raw_param.to_json(),
                    "witness": f.witness.to_json(),
                });
                if f.case == Case::Q {
                    v["q"] = f.q.to_json();
                }
                v
            }
        }
    }
}

fn check_standard(pair: &CbpPair) -> Result<(), ClassifyError> {
    if !is_circular_bidiagonal(&pair.a)? {
        return Err(ClassifyError::NotStandardPresentation(
            "A is not circular bidiagonal".into(),
        ));
    }
    if !is_diagonal_distinct(&pair.astar) {
        return Err(ClassifyError::NotStandardPresentation(
            "A* is not diagonal with distinct entries".into(),
        ));
    }
    Ok(())
}

pub fn extract_profile(pair: &CbpPair) -> Result<Profile, ClassifyError> {
    if pair.dim() < 2 {
        return Err(ClassifyError::NotStandardPresentation(
            "dimension must be at least 2".into(),
        ));
    }
    check_standard(pair)?;
    let (a, s) = (&pair.a, &pair.astar);
    let aas = a * s;
    let asa = s * a;
    let n = pair.dim();
    let f = pair.field();
    let mut rows = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { f.one() } else { f.zero() };
            rows.push(vec![
                aas.get(i, j).clone(),
                a.get(i, j).clone(),
                -s.get(i, j),
                -&id,
            ]);
            rhs.push(asa.get(i, j).clone());
        }
    }
    match solve_system(&rows, &rhs) {
        Ok(x) => Ok(Profile {
            q: x[0].clone(),
            alpha: x[1].clone(),
            beta: x[2].clone(),
            gamma: x[3].clone(),
        }),
        Err(LinalgError::Inconsistent) => not_cbp(CbpCheck::ProfileInconsistent),
        Err(LinalgError::Underdetermined) => not_cbp(CbpCheck::ProfileUnderdetermined),
        Err(e) => Err(e.into()),
    }
}

/// Profile of (sA + tI, s*A* + t*I) computed from the profile of (A, A*).
pub fn profile_affine_image(p: &Profile, aff: &Affine) -> Profile {
    let one = p.q.field().one();
    let (s, ss, t, ts) = (&aff.s, &aff.s_star, &aff.t, &aff.t_star);
    let omq = &one - &p.q;
    Profile {
        q: p.q.clone(),
        alpha: &(ss * &p.alpha) + &(ts * &omq),
        beta: &(s * &p.beta) - &(t * &omq),
        gamma: &(&(&(&(s * ss) * &p.gamma) + &(&(t * ss) * &p.alpha)) - &(&(s * ts) * &p.beta))
            + &(&(t * ts) * &omq),
    }
}

fn root_condition(p: &Profile, n: usize) -> Result<(), ClassifyError> {
    let char_n = p.q.field().characteristic() == n as u64;
    if p.q.is_one() {
        if !char_n {
            return not_cbp(CbpCheck::RootCondition(format!(
                "q = 1 requires characteristic {n}, field is {}",
                p.q.field()
            )));
        }
    } else if !p.q.has_order(n as u64) {
        return not_cbp(CbpCheck::RootCondition(format!(
            "q = {} is not a primitive {n}-th root of unity",
            p.q
        )));
    }
    Ok(())
}

/// Index of the preferred candidate: the one whose key is 1 (q ≠ 1) or 0
/// (q = 1) if present, else the one with the smallest key.
fn preferred(keys: &[Element], unit: &Element) -> usize {
    if let Some(i) = keys.iter().position(|k| k == unit) {
        return i;
    }
    (0..keys.len())
        .min_by(|&i, &j| keys[i].cmp(&keys[j]))
        .expect("nonempty")
}

/// det(xI − A) for circular bidiagonal A, constant term first.
fn circular_charpoly(a: &Matrix) -> Vec<Element> {
    let n = a.dim();
    let f = a.field();
    let diag = a.diagonal();
    let refs: Vec<&Element> = diag.iter().collect();
    let mut c = poly_from_roots(f, &refs);
    let cyc = (1..n).fold(a.get(0, n - 1).clone(), |acc, i| &acc * a.get(i, i - 1));
    c[0] = &c[0] - &cyc;
    c
}

/// Eigenvalues and idempotents in standard order, for a pair whose profile
/// is `p`.
///
/// The rotation of A*'s diagonal and the starting eigenvalue θ_0 of A are
/// chosen so that the normalizing affine map has scale 1 (q ≠ 1) or shift 0
/// (q = 1) when possible, and otherwise the smallest such value. The choice
/// depends only on the isomorphism class.
pub fn eigen_data(pair: &CbpPair, p: &Profile) -> Result<EigenData, ClassifyError> {
    check_standard(pair)?;
    let n = pair.dim();
    let f = pair.field();
    let one = f.one();
    root_condition(p, n)?;
    let w = pair.astar.diagonal();
    if (0..n).any(|i| w[(i + 1) % n] != &(&p.q * &w[i]) + &p.alpha) {
        return not_cbp(CbpCheck::Recurrence);
    }
    let q_is_one = p.q.is_one();
    if q_is_one && (p.alpha.is_zero() || p.beta.is_zero()) {
        return not_cbp(CbpCheck::Inequality(
            "alpha and beta must be nonzero when q = 1",
        ));
    }

    // rotation of θ*
    let omq = &one - &p.q;
    let star_keys: Vec<Element> = if q_is_one {
        w.iter().map(|x| -&(x / &p.alpha)).collect()
    } else {
        w.iter()
            .map(|x| {
                let den = &(&omq * x) - &p.alpha;
                if den.is_zero() {
                    Err(ClassifyError::NotCbp(CbpCheck::Inequality(
                        "alpha = (1-q) theta*_0",
                    )))
                } else {
                    Ok(&omq / &den)
                }
            })
            .collect::<Result<_, _>>()?
    };
    let unit = if q_is_one { f.zero() } else { one.clone() };
    let rotation = preferred(&star_keys, &unit);
    let theta_star: Vec<Element> = (0..n).map(|i| w[(i + rotation) % n].clone()).collect();

    // eigenvalues of A
    let theta: Vec<Element> = if q_is_one {
        let mut roots = f.roots(&circular_charpoly(&pair.a))?;
        if roots.len() != n {
            return not_cbp(CbpCheck::Eigenvalues(format!(
                "{} distinct eigenvalues in F, need {n}",
                roots.len()
            )));
        }
        let keys: Vec<Element> = roots.iter().map(|r| -&(r / &p.beta)).collect();
        let t0 = roots.swap_remove(preferred(&keys, &unit));
        (0..n)
            .map(|i| &t0 + &(&f.from_i64(i as i64) * &p.beta))
            .collect()
    } else {
        let qm1 = -&omq;
        let c = &p.beta / &qm1;
        let k = -&pair.a.shift(&-&c).det();
        let k = if n.is_multiple_of(2) { k } else { -&k };
        if k.is_zero() {
            return not_cbp(CbpCheck::Eigenvalues("repeated eigenvalue".into()));
        }
        let vs = f.nth_roots(&k, n as u64)?;
        if vs.len() != n {
            return not_cbp(CbpCheck::Eigenvalues(format!(
                "{} distinct eigenvalues in F, need {n}",
                vs.len()
            )));
        }
        let keys: Vec<Element> = vs.iter().map(|v| v.inv().expect("nonzero root")).collect();
        let v0 = vs[preferred(&keys, &unit)].clone();
        let qinv = p.q.inv()?;
        let mut out = Vec::with_capacity(n);
        let mut v = v0;
        for _ in 0..n {
            out.push(&c + &v);
            v = &v * &qinv;
        }
        out
    };
    let e = match primitive_idempotents(&pair.a, &theta) {
        Ok(e) => e,
        Err(LinalgError::NotMultiplicityFree(m)) => return not_cbp(CbpCheck::Eigenvalues(m)),
        Err(e) => return Err(e.into()),
    };
    let e_star = primitive_idempotents(&pair.astar, &theta_star)?;
    Ok(EigenData {
        theta,
        theta_star,
        e,
        e_star,
        rotation,
    })
}

/// Trace coefficients, with both trace relations and θ ≠ a_i checked.
pub fn trace_coefficients(
    pair: &CbpPair,
    p: &Profile,
    ed: &EigenData,
) -> Result<TraceCoefficients, ClassifyError> {
    let n = pair.dim();
    let one = pair.field().one();
    let a: Vec<Element> = (0..n)
        .map(|i| (&pair.a * &ed.e_star.idempotents[i]).trace())
        .collect();
    let astar: Vec<Element> = (0..n)
        .map(|i| (&pair.astar * &ed.e.idempotents[i]).trace())
        .collect();
    let qm1 = &p.q - &one;
    for i in 0..n {
        let lhs = &a[i] * &(&(&ed.theta_star[i] * &qm1) + &p.alpha);
        if lhs != &(&p.beta * &ed.theta_star[i]) + &p.gamma {
            return not_cbp(CbpCheck::TraceRelation(format!("fails for a_{i}")));
        }
        let lhs = &astar[i] * &(&p.beta - &(&ed.theta[i] * &qm1));
        if lhs != &(&p.alpha * &ed.theta[i]) - &p.gamma {
            return not_cbp(CbpCheck::TraceRelation(format!("fails for a*_{i}")));
        }
    }
    if ed.theta.iter().any(|t| a.contains(t)) {
        return not_cbp(CbpCheck::TraceRelation(
            "an eigenvalue of A equals some a_i".into(),
        ));
    }
    Ok(TraceCoefficients { a, astar })
}

fn normalizing_affine(p: &Profile, ed: &EigenData, n: usize) -> Result<Affine, ClassifyError> {
    root_condition(p, n)?;
    let one = p.q.field().one();
    let (t0, ts0) = (&ed.theta[0], &ed.theta_star[0]);
    let aff = if p.q.is_one() {
        if p.alpha.is_zero() || p.beta.is_zero() {
            return not_cbp(CbpCheck::Inequality(
                "alpha and beta must be nonzero when q = 1",
            ));
        }
        Affine {
            s: p.beta.inv()?,
            s_star: p.alpha.inv()?,
            t: -&(t0 / &p.beta),
            t_star: -&(ts0 / &p.alpha),
        }
    } else {
        let qm1 = &p.q - &one;
        let den = &(&qm1 * t0) - &p.beta;
        let den_star = &(&-&qm1 * ts0) - &p.alpha;
        if den.is_zero() {
            return not_cbp(CbpCheck::Inequality("beta = (q-1) theta_0"));
        }
        if den_star.is_zero() {
            return not_cbp(CbpCheck::Inequality("alpha = (1-q) theta*_0"));
        }
        Affine {
            s: &qm1 / &den,
            t: -&(&p.beta / &den),
            s_star: &-&qm1 / &den_star,
            t_star: -&(&p.alpha / &den_star),
        }
    };
    let img = profile_affine_image(p, &aff);
    let (want_ab, want_t) = if p.q.is_one() {
        (one.clone(), one.field().zero())
    } else {
        (one.field().zero(), one.clone())
    };
    let t0n = &(&aff.s * t0) + &aff.t;
    let ts0n = &(&aff.s_star * ts0) + &aff.t_star;
    if img.alpha != want_ab || img.beta != want_ab || t0n != want_t || ts0n != want_t {
        return not_cbp(CbpCheck::FinalMismatch(
            "normalized profile differs from the expected table",
        ));
    }
    Ok(aff)
}

/// Affine map taking the pair to normalized position, together with the
/// moved pair.
pub fn normalize(pair: &CbpPair, p: &Profile) -> Result<(CbpPair, Affine), ClassifyError> {
    let ed = eigen_data(pair, p)?;
    let aff = normalizing_affine(p, &ed, pair.dim())?;
    Ok((aff.apply(pair), aff))
}

fn moved_eigen_data(ed: &EigenData, aff: &Affine) -> EigenData {
    let mv = |v: &[Element], s: &Element, t: &Element| {
        v.iter().map(|x| &(s * x) + t).collect::<Vec<_>>()
    };
    let theta = mv(&ed.theta, &aff.s, &aff.t);
    let theta_star = mv(&ed.theta_star, &aff.s_star, &aff.t_star);
    EigenData {
        e: IdempotentSet {
            eigenvalues: theta.clone(),
            idempotents: ed.e.idempotents.clone(),
        },
        e_star: IdempotentSet {
            eigenvalues: theta_star.clone(),
            idempotents: ed.e_star.idempotents.clone(),
        },
        theta,
        theta_star,
        rotation: ed.rotation,
    }
}

/// Product T_0 T_1 ⋯ T_{k−1} of the orbit-step intertwiners starting at
/// `start`, with the affine map that goes with it. Conjugating
/// affine(family(start)) by the product gives the family pair at the end
/// of the orbit walk.
fn orbit_walk(case: Case, q: &Element, start: &Element, k: usize, d: usize) -> (Affine, Matrix) {
    let f = start.field();
    let n = d + 1;
    let astar = match case {
        Case::Q => Matrix::diag(f, &(0..n).map(|i| q.pow(i as u64)).collect::<Vec<_>>()),
        Case::CharP => Matrix::diag(f, &(0..n).map(|i| f.from_i64(i as i64)).collect::<Vec<_>>()),
    }
    .expect("same field");
    let mut prod = Matrix::identity(f, n);
    for step in 0..k {
        let t = match case {
            Case::Q => astar.shift(&-&(&q.pow(step as u64) * start)),
            Case::CharP => astar.shift(&(start - &f.from_i64(step as i64))),
        };
        prod = &prod * &t;
    }
    let aff = match case {
        Case::Q => Affine::new(q.pow(k as u64), f.one(), f.zero(), f.zero()),
        Case::CharP => Affine::new(f.one(), f.one(), f.from_i64(-(k as i64)), f.zero()),
    }
    .expect("nonzero scales");
    (aff, prod)
}

/// Orbit of a family parameter, paired with the number of steps taken.
fn orbit(case: Case, q: &Element, v: &Element, d: usize) -> Vec<(usize, Element)> {
    let f = v.field();
    match case {
        Case::Q => (0..=d).map(|k| (k, &q.pow(k as u64) * v)).collect(),
        Case::CharP => (0..=d).map(|k| (k, v - &f.from_i64(k as i64))).collect(),
    }
}

pub fn classify(pair: &CbpPair) -> Result<CanonicalForm, ClassifyError> {
    if pair.dim() == 1 {
        return Ok(CanonicalForm::Trivial);
    }
    let n = pair.dim();
    let d = n - 1;
    let f = pair.field().clone();
    let profile = extract_profile(pair)?;
    let ed = eigen_data(pair, &profile)?;
    let aff = normalizing_affine(&profile, &ed, n)?;
    let norm = aff.apply(pair);
    let nprof = profile_affine_image(&profile, &aff);
    if !nprof.holds_for(&norm) {
        return not_cbp(CbpCheck::FinalMismatch("normalized profile relation fails"));
    }
    let ned = moved_eigen_data(&ed, &aff);
    trace_coefficients(&norm, &nprof, &ned)?;

    let xi = kernel_vector(&norm.a.shift(&-&ned.theta[0]))?;
    let cols: Vec<Vec<Element>> = ned
        .e_star
        .idempotents
        .iter()
        .map(|e| e.mul_vec(&xi))
        .collect();
    let s = Matrix::from_columns(&f, &cols)?;
    let sinv = match s.inverse() {
        Ok(m) => m,
        Err(_) => return not_cbp(CbpCheck::BasisDegenerate),
    };
    let b = &(&sinv * &norm.a) * &s;
    let bstar = &(&sinv * &norm.astar) * &s;
    if !is_circular_bidiagonal(&b)? {
        return not_cbp(CbpCheck::FinalMismatch(
            "conjugated A is not circular bidiagonal",
        ));
    }
    let ones = vec![f.one(); n];
    if b.mul_vec(&ones).iter().any(|x| x != &ned.theta[0]) {
        return not_cbp(CbpCheck::FinalMismatch("row sums differ from theta_0"));
    }
    let raw = b.get(0, 0).clone();
    let (case, q, fam) = if profile.q.is_one() {
        let params = FamilyParamsP::new(d, raw.clone())
            .map_err(|e| ClassifyError::NotCbp(CbpCheck::Membership(e.to_string())))?;
        (Case::CharP, f.one(), make_cbp_p(&params))
    } else {
        let params = FamilyParamsQ::new(d, profile.q.clone(), raw.clone())
            .map_err(|e| ClassifyError::NotCbp(CbpCheck::Membership(e.to_string())))?;
        (Case::Q, profile.q.clone(), make_cbp_q(&params))
    };
    if b != fam.a || bstar != fam.astar {
        return not_cbp(CbpCheck::FinalMismatch(
            "conjugated pair is not the family pair",
        ));
    }
    let raw_witness = WitnessChain {
        affine: aff.clone(),
        basis_change: s.clone(),
    };

    let (k, param) = orbit(case, &q, &raw, d)
        .into_iter()
        .min_by(|x, y| x.1.cmp(&y.1))
        .expect("nonempty orbit");
    let (step, walk) = orbit_walk(case, &q, &raw, k, d);
    let witness = WitnessChain {
        affine: aff.then(&step),
        basis_change: &s * &walk,
    };
    let form = FamilyForm {
        case,
        d,
        q,
        param,
        raw_param: raw,
        witness,
        raw_witness,
    };
    assert!(
        form.raw_witness.maps(pair, &fam),
        "raw witness failed verification"
    );
    assert!(
        form.witness.maps(pair, &form.params().pair()),
        "witness failed verification"
    );
    Ok(CanonicalForm::Family(form))
}

/// Parameters when the pair literally equals a family pair.
pub fn family_form(pair: &CbpPair) -> Option<FamilyParams> {
    let n = pair.dim();
    if n < 2 {
        return None;
    }
    let d = n - 1;
    let x = pair.a.get(0, 0).clone();
    let q = pair.astar.get(1, 1).clone();
    let cand = if pair.astar.get(0, 0).is_one() {
        FamilyParamsQ::new(d, q, x).ok().map(FamilyParams::Q)
    } else {
        FamilyParamsP::new(d, x).ok().map(FamilyParams::P)
    }?;
    (cand.pair() == *pair).then_some(cand)
}

/// σ with σA₁ = A₂σ and σA*₁ = A*₂σ, or None when the pairs are not
/// isomorphic.
pub fn is_isomorphic(p1: &CbpPair, p2: &CbpPair) -> Result<Option<Matrix>, ClassifyError> {
    if p1.dim() != p2.dim() || p1.field() != p2.field() {
        return Ok(None);
    }
    let n = p1.dim();
    if let (Some(x), Some(y)) = (family_form(p1), family_form(p2)) {
        return Ok((x == y).then(|| Matrix::identity(p1.field(), n)));
    }
    let (c1, c2) = (classify(p1)?, classify(p2)?);
    let sigma = match (c1, c2) {
        (CanonicalForm::Trivial, CanonicalForm::Trivial) => {
            if p1 != p2 {
                return Ok(None);
            }
            Matrix::identity(p1.field(), 1)
        }
        (CanonicalForm::Family(x), CanonicalForm::Family(y)) => {
            if x.case != y.case
                || x.q != y.q
                || x.raw_param != y.raw_param
                || x.raw_witness.affine != y.raw_witness.affine
            {
                return Ok(None);
            }
            &y.raw_witness.basis_change * &x.raw_witness.basis_change.inverse()?
        }
        _ => return Ok(None),
    };
    assert!(
        p1.is_isomorphism(&sigma, p2),
        "isomorphism witness failed verification"
    );
    Ok(Some(sigma))
}

/// An affine map w and σ with σ·w(p1) = p2·σ, or None when the pairs are
/// not affine equivalent.
pub fn is_affine_equivalent(
    p1: &CbpPair,
    p2: &CbpPair,
) -> Result<Option<(Affine, Matrix)>, ClassifyError> {
    if p1.dim() != p2.dim() || p1.field() != p2.field() {
        return Ok(None);
    }
    let f = p1.field();
    let (c1, c2) = (classify(p1)?, classify(p2)?);
    let (w, sigma) = match (c1, c2) {
        (CanonicalForm::Trivial, CanonicalForm::Trivial) => {
            let t = p2.a.get(0, 0) - p1.a.get(0, 0);
            let ts = p2.astar.get(0, 0) - p1.astar.get(0, 0);
            (
                Affine::new(f.one(), f.one(), t, ts)?,
                Matrix::identity(f, 1),
            )
        }
        (CanonicalForm::Family(x), CanonicalForm::Family(y)) => {
            if !x.same_label(&y) {
                return Ok(None);
            }
            let w = x.witness.affine.then(&y.witness.affine.inverse());
            let sigma = &y.witness.basis_change * &x.witness.basis_change.inverse()?;
            (w, sigma)
        }
        _ => return Ok(None),
    };
    assert!(
        w.apply(p1).is_isomorphism(&sigma, p2),
        "affine equivalence witness failed verification"
    );
    Ok(Some((w, sigma)))
}

/// Successor map of the arrow relation on primitive idempotents `idems`
/// induced by `other`: E_a → E_b when `other` maps E_aV into E_aV + E_bV
/// and not into E_aV. Returns the successor of each index when the arrows
/// form one n-cycle, and None otherwise or if some E_a is not rank one.
///
/// With E_a = v_a w_aᵀ, E_c·other·E_a vanishes exactly when
/// w_cᵀ·other·v_a = 0.
pub fn arrow_cycle(idems: &[Matrix], other: &Matrix) -> Option<Vec<usize>> {
    let n = idems.len();
    let factors: Vec<(Vec<Element>, Vec<Element>)> =
        idems.iter().map(rank_one_factors).collect::<Option<_>>()?;
    let mut next = vec![usize::MAX; n];
    for a in 0..n {
        let img = other.mul_vec(&factors[a].0);
        let hits: Vec<usize> = (0..n)
            .filter(|&c| c != a && !dot(&factors[c].1, &img).is_zero())
            .collect();
        if hits.len() != 1 {
            return None;
        }
        next[a] = hits[0];
    }
    let mut seen = vec![false; n];
    let mut cur = 0;
    for _ in 0..n {
        if seen[cur] {
            return None;
        }
        seen[cur] = true;
        cur = next[cur];
    }
    (cur == 0).then_some(next)
}

/// The d+1 standard orderings as index sequences, each a cyclic rotation
/// of the one found by following arrows from index 0.
pub fn orderings_from_cycle(next: &[usize]) -> Vec<Vec<usize>> {
    let n = next.len();
    let mut base = Vec::with_capacity(n);
    let mut cur = 0;
    for _ in 0..n {
        base.push(cur);
        cur = next[cur];
    }
    (0..n)
        .map(|r| (0..n).map(|i| base[(i + r) % n]).collect())
        .collect()
}

/// Standard orderings of the idempotents of A (`e`) and of A* (`e_star`),
/// as index lists into the sets returned by [`eigen_data`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardOrderings {
    pub e: Vec<Vec<usize>>,
    pub e_star: Vec<Vec<usize>>,
}

pub fn standard_orderings(pair: &CbpPair) -> Result<StandardOrderings, ClassifyError> {
    let p = extract_profile(pair)?;
    standard_orderings_with(pair, &eigen_data(pair, &p)?)
}

/// [`standard_orderings`] for already computed eigen data.
pub fn standard_orderings_with(
    pair: &CbpPair,
    ed: &EigenData,
) -> Result<StandardOrderings, ClassifyError> {
    let fail =
        || ClassifyError::NotCbp(CbpCheck::FinalMismatch("arrows do not form a single cycle"));
    let e = arrow_cycle(&ed.e.idempotents, &pair.astar).ok_or_else(fail)?;
    let es = arrow_cycle(&ed.e_star.idempotents, &pair.a).ok_or_else(fail)?;
    let out = StandardOrderings {
        e: orderings_from_cycle(&e),
        e_star: orderings_from_cycle(&es),
    };
    assert_eq!(out.e.len(), pair.dim());
    assert_eq!(out.e_star.len(), pair.dim());
    Ok(out)
}

fn scan_eigenvalues(x: &Matrix, field_elems: &[Element]) -> Vec<Element> {
    field_elems
        .iter()
        .filter(|c| x.shift(&-*c).det().is_zero())
        .cloned()
        .collect()
}

/// True when `y` acts circular-bidiagonally on some eigenbasis of `x`.
fn acts_circularly(x: &Matrix, y: &Matrix, field_elems: &[Element]) -> Result<bool, ClassifyError> {
    let n = x.dim();
    let eig = scan_eigenvalues(x, field_elems);
    if eig.len() != n {
        return Ok(false);
    }
    let mut cols = Vec::with_capacity(n);
    for c in &eig {
        match kernel_vector(&x.shift(&-c)) {
            Ok(v) => cols.push(v),
            Err(LinalgError::NotRankDeficientByOne(_)) => return Ok(false),
            Err(e) => return Err(e.into()),
        }
    }
    let v = Matrix::from_columns(x.field(), &cols)?;
    let m = &(&v.inverse()? * y) * &v;
    if n == 1 {
        return Ok(true);
    }
    let mut next = vec![0; n];
    for j in 0..n {
        let nz: Vec<usize> = (0..n)
            .filter(|&i| i != j && !m.get(i, j).is_zero())
            .collect();
        if nz.len() != 1 {
            return Ok(false);
        }
        next[j] = nz[0];
    }
    let mut seen = vec![false; n];
    let mut cur = 0;
    for _ in 0..n {
        if seen[cur] {
            return Ok(false);
        }
        seen[cur] = true;
        cur = next[cur];
    }
    Ok(cur == 0)
}

/// Direct check of the definition by scanning a small finite field for
/// eigenvalues. Works in any basis and shares no code with [`classify`]
/// beyond matrix arithmetic.
pub fn bruteforce_verify_cbp(pair: &CbpPair) -> Result<bool, ClassifyError> {
    let f: &Field = pair.field();
    let small = f
        .order()
        .is_some_and(|o| o <= num_bigint::BigUint::from(BRUTEFORCE_MAX_FIELD));
    if !small || pair.d() > BRUTEFORCE_MAX_D {
        return Err(ClassifyError::FieldTooLarge);
    }
    let elems: Vec<Element> = f.elements()?.collect();
    Ok(acts_circularly(&pair.astar, &pair.a, &elems)?
        && acts_circularly(&pair.a, &pair.astar, &elems)?)
}
