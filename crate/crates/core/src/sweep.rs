//! Self-test sweep over the standard parameter grid. Each identity family
//! reports a pass and fail count; the CLI `selftest` command prints them.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{
    bruteforce_verify_cbp, classify, eigen_data, extract_profile, is_affine_equivalent,
    is_isomorphic, standard_orderings_with, trace_coefficients, CanonicalForm, Case, ClassifyError,
};
use crate::exactla::{dot, is_independent, rank_one_factors, Matrix};
use crate::families::{
    dual_pair, hessenberg_export, make_cbp_p, make_cbp_q, make_p_p, make_p_q, make_raising_p,
    make_raising_q, verify_family_relations, Affine, CbpPair, FamilyParams, FamilyParamsP,
    FamilyParamsQ, RelationCase,
};
use crate::field::{Element, Field};
use crate::qseries::{poch_q, poch_shifted, q_vandermonde_check, vandermonde_check};

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepFamily {
    Field,
    QVandermonde,
    Vandermonde,
    FamilyQ,
    FamilyP,
    Transition,
    Raising,
    Structural,
    Classify,
    Decide,
    Oracle,
    Hessenberg,
}

impl SweepFamily {
    pub const ALL: [SweepFamily; 12] = [
        SweepFamily::Field,
        SweepFamily::QVandermonde,
        SweepFamily::Vandermonde,
        SweepFamily::FamilyQ,
        SweepFamily::FamilyP,
        SweepFamily::Transition,
        SweepFamily::Raising,
        SweepFamily::Structural,
        SweepFamily::Classify,
        SweepFamily::Decide,
        SweepFamily::Oracle,
        SweepFamily::Hessenberg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepFamily::Field => "field",
            SweepFamily::QVandermonde => "qvandermonde",
            SweepFamily::Vandermonde => "vandermonde",
            SweepFamily::FamilyQ => "family-q",
            SweepFamily::FamilyP => "family-p",
            SweepFamily::Transition => "transition",
            SweepFamily::Raising => "raising",
            SweepFamily::Structural => "structural",
            SweepFamily::Classify => "classify",
            SweepFamily::Decide => "decide",
            SweepFamily::Oracle => "oracle",
            SweepFamily::Hessenberg => "hessenberg",
        }
    }
}

impl fmt::Display for SweepFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown sweep family {s:?}"))
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub seed: u64,
    /// Largest d swept.
    pub d_max: usize,
    /// Families to run; empty means all.
    pub only: Vec<SweepFamily>,
    /// Randomized affine trials per case in the classify family.
    pub trials: usize,
    /// ε samples per cyclotomic cell.
    pub samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: DEFAULT_SEED,
            d_max: 7,
            only: Vec::new(),
            trials: 200,
            samples: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyReport {
    pub family: SweepFamily,
    pub passed: usize,
    pub failed: usize,
    /// Descriptions of the first few failures.
    pub failures: Vec<String>,
}

impl FamilyReport {
    fn new(family: SweepFamily) -> Self {
        FamilyReport {
            family,
            passed: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failures.len() < 10 {
                self.failures.push(what());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// GF(p²) with the least monic irreducible quadratic x² + bx + c, ordered
/// by (c, b).
pub fn quadratic_extension(p: u64) -> Field {
    for c in 0..p {
        for b in 0..p {
            if let Ok(f) = Field::extension(p, vec![c, b, 1]) {
                return f;
            }
        }
    }
    unreachable!("an irreducible quadratic exists over every prime field")
}

/// Fields of the q-case grid.
pub fn q_fields() -> Vec<Field> {
    let mut out: Vec<Field> = [11, 31, 41]
        .iter()
        .map(|&p| Field::prime(p).unwrap())
        .collect();
    out.extend((2..=8).map(|n| Field::cyclotomic(n).unwrap()));
    out
}

/// Every admissible q-case parameter set with n = d+1 ≤ `d_max`+1: all
/// primitive roots q, every ε over finite fields and ε = 0 plus `samples`
/// random ε over cyclotomic fields.
pub fn q_cells(d_max: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<FamilyParamsQ> {
    let mut out = Vec::new();
    for f in q_fields() {
        let ns: Vec<u64> = match f.conductor() {
            Some(m) => vec![m as u64],
            None => (2..=8).collect(),
        };
        for n in ns {
            let d = n as usize - 1;
            if d > d_max {
                continue;
            }
            let Ok(qs) = f.primitive_nth_roots(n) else {
                continue;
            };
            for q in qs {
                if f.is_finite() {
                    let all = f.elements().unwrap();
                    out.extend(all.filter_map(|e| FamilyParamsQ::new(d, q.clone(), e).ok()));
                    continue;
                }
                // ε = 0 plus `samples` distinct admissible draws
                let mut seen = vec![f.zero()];
                out.extend(FamilyParamsQ::new(d, q.clone(), f.zero()).ok());
                let mut kept = 0;
                for _ in 0..100 * samples {
                    if kept == samples {
                        break;
                    }
                    let e = sparse_element(&f, rng);
                    if seen.contains(&e) {
                        continue;
                    }
                    seen.push(e.clone());
                    if let Ok(c) = FamilyParamsQ::new(d, q.clone(), e) {
                        out.push(c);
                        kept += 1;
                    }
                }
            }
        }
    }
    out
}

/// Element of Q(ζ_m) with at most two nonzero coordinates, each a small
/// integer or half-integer. Keeps coefficient growth in the sweep modest.
pub fn sparse_element(f: &Field, rng: &mut ChaCha8Rng) -> Element {
    let deg = f.degree();
    let mut c = vec![BigRational::zero(); deg];
    for _ in 0..2 {
        let num = rng.gen_range(-3i64..=3);
        let den = if rng.gen_bool(0.2) { 2 } else { 1 };
        c[rng.gen_range(0..deg)] = BigRational::new(num.into(), den.into());
    }
    f.from_rationals(&c).expect("length matches degree")
}

/// Every γ outside the prime subfield of GF(n²), n ∈ {2, 3, 5, 7}, d = n−1.
pub fn p_cells(d_max: usize) -> Vec<FamilyParamsP> {
    let mut out = Vec::new();
    for n in [2u64, 3, 5, 7] {
        let d = n as usize - 1;
        if d > d_max {
            continue;
        }
        let f = quadratic_extension(n);
        out.extend(
            f.elements()
                .unwrap()
                .filter_map(|g| FamilyParamsP::new(d, g).ok()),
        );
    }
    out
}

pub fn random_affine(f: &Field, rng: &mut ChaCha8Rng) -> Affine {
    Affine::new(
        f.random_nonzero(rng),
        f.random_nonzero(rng),
        f.random_element(rng),
        f.random_element(rng),
    )
    .expect("nonzero scales")
}

/// Conjugation by a random invertible diagonal matrix and a random cyclic
/// rotation of the basis; keeps standard presentation.
pub fn random_relabel(pair: &CbpPair, rng: &mut ChaCha8Rng) -> CbpPair {
    let n = pair.dim();
    let f = pair.field();
    let diag: Vec<Element> = (0..n).map(|_| f.random_nonzero(rng)).collect();
    let r = rng.gen_range(0..n);
    let s = Matrix::from_fn(f, n, |i, j| {
        if i == (j + r) % n {
            diag[j].clone()
        } else {
            f.zero()
        }
    });
    pair.conjugate(&s).expect("invertible")
}

fn report_of(fam: SweepFamily, cfg: &SweepConfig) -> bool {
    cfg.only.is_empty() || cfg.only.contains(&fam)
}

pub fn run_sweep(cfg: &SweepConfig) -> Vec<FamilyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let qc = q_cells(cfg.d_max, cfg.samples, &mut rng);
    let pc = p_cells(cfg.d_max);
    let mut out = Vec::new();
    for fam in SweepFamily::ALL {
        if !report_of(fam, cfg) {
            continue;
        }
        let mut r = FamilyReport::new(fam);
        match fam {
            SweepFamily::Field => sweep_field(&mut r, &mut rng),
            SweepFamily::QVandermonde => {
                for p in &qc {
                    r.check(q_vandermonde_check(p.d, &p.eps, &p.q) == Ok(true), || {
                        label_q(p)
                    });
                }
            }
            SweepFamily::Vandermonde => {
                for p in &pc {
                    r.check(vandermonde_check(p.d, &p.gamma) == Ok(true), || label_p(p));
                }
            }
            SweepFamily::FamilyQ => {
                for p in &qc {
                    let rep = verify_family_relations(
                        &make_cbp_q(p),
                        &RelationCase::Q {
                            q: p.q.clone(),
                            eps: p.eps.clone(),
                        },
                    );
                    r.check(rep.holds(), || format!("{}: {:?}", label_q(p), rep.failed));
                }
            }
            SweepFamily::FamilyP => {
                for p in &pc {
                    let rep = verify_family_relations(
                        &make_cbp_p(p),
                        &RelationCase::P {
                            gamma: p.gamma.clone(),
                        },
                    );
                    r.check(rep.holds(), || format!("{}: {:?}", label_p(p), rep.failed));
                }
            }
            SweepFamily::Transition => {
                for p in &qc {
                    r.check(transition_q(p), || label_q(p));
                }
                for p in &pc {
                    r.check(transition_p(p), || label_p(p));
                }
            }
            SweepFamily::Raising => {
                for p in &qc {
                    r.check(raising_q(p), || label_q(p));
                }
                for p in &pc {
                    r.check(raising_p(p), || label_p(p));
                }
            }
            SweepFamily::Structural => {
                for p in &qc {
                    r.check(structural(&make_cbp_q(p)).is_ok(), || label_q(p));
                }
                for p in &pc {
                    r.check(structural(&make_cbp_p(p)).is_ok(), || label_p(p));
                }
            }
            SweepFamily::Classify => sweep_classify(&mut r, &qc, &pc, cfg.trials, &mut rng),
            SweepFamily::Decide => sweep_decide(&mut r, &mut rng),
            SweepFamily::Oracle => sweep_oracle(&mut r, &mut rng),
            SweepFamily::Hessenberg => {
                for p in &qc {
                    if p.d >= 3 {
                        let ok = hessenberg_matches(&FamilyParams::Q(p.clone()));
                        r.check(ok, || label_q(p));
                    }
                }
                for p in &pc {
                    if p.d >= 3 {
                        let ok = hessenberg_matches(&FamilyParams::P(p.clone()));
                        r.check(ok, || label_p(p));
                    }
                }
            }
        }
        out.push(r);
    }
    out
}

fn label_q(p: &FamilyParamsQ) -> String {
    format!("{} d={} q={} eps={}", p.field(), p.d, p.q, p.eps)
}

fn label_p(p: &FamilyParamsP) -> String {
    format!("{} d={} gamma={}", p.field(), p.d, p.gamma)
}

fn sweep_field(r: &mut FamilyReport, rng: &mut ChaCha8Rng) {
    let mut fields = q_fields();
    fields.extend([2, 3, 5, 7].map(quadratic_extension));
    for f in &fields {
        for _ in 0..20 {
            let (a, b, c) = (
                f.random_element(rng),
                f.random_element(rng),
                f.random_element(rng),
            );
            r.check(&(&a * &b) * &c == &a * &(&b * &c), || {
                format!("{f}: associativity")
            });
            r.check(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), || {
                format!("{f}: distributivity")
            });
            if !a.is_zero() {
                r.check((&a * &a.inv().unwrap()).is_one(), || {
                    format!("{f}: inverse of {a}")
                });
            }
            r.check(f.parse_element(&a.to_string()).as_ref() == Ok(&a), || {
                format!("{f}: text round trip")
            });
            r.check(f.element_from_json(&a.to_json()).as_ref() == Ok(&a), || {
                format!("{f}: json round trip")
            });
        }
    }
}

fn transition_q(p: &FamilyParamsQ) -> bool {
    let pm = make_p_q(p);
    let pinv = p.with_inverse_q();
    let c = &poch_q(&p.q, &p.q, p.d) / &poch_q(&(&p.eps * &p.q), &p.q, p.d);
    let fam = make_cbp_q(p);
    let fam_inv = make_cbp_q(&pinv);
    !c.is_zero()
        && &pm * &make_p_q(&pinv) == Matrix::scalar(&c, p.d + 1)
        && fam_inv.is_isomorphism(&pm, &dual_pair(&fam))
}

fn transition_p(p: &FamilyParamsP) -> bool {
    let pm = make_p_p(p);
    let f = p.field();
    let c = &poch_shifted(&f.one(), p.d) / &poch_shifted(&(&f.one() - &p.gamma), p.d);
    let fam = make_cbp_p(p);
    let fam_neg = make_cbp_p(&p.negated());
    !c.is_zero()
        && &pm * &make_p_p(&p.negated()) == Matrix::scalar(&c, p.d + 1)
        && fam_neg.is_isomorphism(&pm, &dual_pair(&fam))
}

fn raising_common(pair: &CbpPair, r: &Matrix, c: &Element, target: &CbpPair) -> bool {
    let Ok(p) = extract_profile(pair) else {
        return false;
    };
    let Ok(ed) = eigen_data(pair, &p) else {
        return false;
    };
    let n = pair.dim() as i64;
    r.pow(n as u64) == Matrix::scalar(c, pair.dim())
        && (0..n).all(|i| {
            r * ed.e.at(i) == ed.e.at(i + 1) * r && r * ed.e_star.at(i) == ed.e_star.at(i + 1) * r
        })
        && pair.is_isomorphism(r, target)
}

fn raising_q(p: &FamilyParamsQ) -> bool {
    let pair = make_cbp_q(p);
    let r = make_raising_q(p);
    let f = p.field();
    let sign = if p.d.is_multiple_of(2) {
        f.one()
    } else {
        -&f.one()
    };
    let c = &sign * &poch_q(&p.eps, &p.q, p.d + 1);
    let target = CbpPair {
        a: pair.a.scale(&p.q),
        astar: pair.astar.scale(&p.q.inv().unwrap()),
    };
    let eps_i = Matrix::scalar(&p.eps, p.d + 1);
    let as_a = &pair.astar * &pair.a;
    raising_common(&pair, &r, &c, &target)
        && r == &as_a - &eps_i
        && r == (&(&pair.a * &pair.astar) - &eps_i).scale(&p.q)
}

fn raising_p(p: &FamilyParamsP) -> bool {
    let pair = make_cbp_p(p);
    let r = make_raising_p(p);
    let f = p.field();
    let c = poch_shifted(&p.gamma, p.d + 1);
    let one = f.one();
    let target = CbpPair {
        a: pair.a.shift(&-&one),
        astar: pair.astar.shift(&-&one),
    };
    raising_common(&pair, &r, &c, &target)
        && r == (&pair.astar - &pair.a).shift(&p.gamma)
        && r == &(&pair.a * &pair.astar) - &(&pair.astar * &pair.a)
}

/// Idempotent axioms, E_iE*_j ≠ 0, the (d+1)² basis property, d+1 standard
/// orderings on both sides, trace relations and the circular action.
///
/// Idempotents are checked through exact rank-one factorizations E_i =
/// v_i w_iᵀ: then E_iE_j = (w_i·v_j) v_i w_jᵀ, so the products are fixed by
/// the scalars w_i·v_j.
pub fn structural(pair: &CbpPair) -> Result<(), String> {
    let n = pair.dim();
    let f = pair.field();
    let p = extract_profile(pair).map_err(|e| e.to_string())?;
    let ed = eigen_data(pair, &p).map_err(|e| e.to_string())?;
    let mut fac = Vec::new();
    for (set, m) in [(&ed.e, &pair.a), (&ed.e_star, &pair.astar)] {
        let factors: Vec<(Vec<Element>, Vec<Element>)> = set
            .idempotents
            .iter()
            .map(rank_one_factors)
            .collect::<Option<_>>()
            .ok_or("idempotent is not rank one")?;
        let mut sum = Matrix::zero(f, n);
        for i in 0..n {
            sum = &sum + &set.idempotents[i];
            let (v, _) = &factors[i];
            let mv = m.mul_vec(v);
            if mv
                .iter()
                .zip(v)
                .any(|(x, y)| x != &(&set.eigenvalues[i] * y))
            {
                return Err(format!("A E_{i} != theta_{i} E_{i}"));
            }
            for j in 0..n {
                let s = dot(&factors[i].1, &factors[j].0);
                if (i == j && !s.is_one()) || (i != j && !s.is_zero()) {
                    return Err(format!("E_{i} E_{j} wrong"));
                }
            }
        }
        if !sum.is_identity() {
            return Err("idempotents do not sum to I".into());
        }
        fac.push(factors);
    }
    for i in 0..n {
        for j in 0..n {
            // E_i E*_j = (w_i·v*_j) v_i w*_jᵀ
            if dot(&fac[0][i].1, &fac[1][j].0).is_zero() {
                return Err(format!("E_{i} E*_{j} = 0"));
            }
        }
    }
    let mut vecs = Vec::with_capacity(n * n);
    let mut ai = Matrix::identity(f, n);
    for _ in 0..n {
        let mut aij = ai.clone();
        for _ in 0..n {
            vecs.push(aij.vec().to_vec());
            aij = &aij * &pair.astar;
        }
        ai = &ai * &pair.a;
    }
    if !is_independent(&vecs) {
        return Err("A^i A*^j do not span".into());
    }
    let ord = standard_orderings_with(pair, &ed).map_err(|e| e.to_string())?;
    let ident: Vec<usize> = (0..n).collect();
    if ord.e.len() != n || ord.e_star.len() != n || ord.e[0] != ident || ord.e_star[0] != ident {
        return Err("standard orderings".into());
    }
    let tc = trace_coefficients(pair, &p, &ed).map_err(|e| e.to_string())?;
    for i in 0..n {
        // E*_i is diagonal here only for family pairs; use its factors
        let (v, w) = &fac[1][i];
        let av = pair.a.mul_vec(v);
        if dot(w, &av) != tc.a[i] {
            return Err(format!("E*_{i} A E*_{i} != a_{i} E*_{i}"));
        }
        // (A − a_i I)E*_i V is spanned by (A − a_i I)v_i and must lie in E*_{i+1}V
        let u: Vec<Element> = av.iter().zip(v).map(|(x, y)| x - &(&tc.a[i] * y)).collect();
        let next = ed.e_star.at(i as i64 + 1);
        if u.iter().all(Element::is_zero) || next.mul_vec(&u) != u {
            return Err(format!("circular action fails at {i}"));
        }
    }
    Ok(())
}

fn canonical_ok(
    form: &CanonicalForm,
    case: Case,
    q: &Element,
    orbit_min: &Element,
    pair: &CbpPair,
) -> bool {
    match form {
        CanonicalForm::Family(x) => {
            x.case == case
                && &x.q == q
                && &x.param == orbit_min
                && x.witness.maps(pair, &x.params().pair())
                && x.raw_witness.maps(pair, &x.raw_params().pair())
        }
        CanonicalForm::Trivial => false,
    }
}

pub fn orbit_min_q(p: &FamilyParamsQ) -> Element {
    (0..=p.d)
        .map(|i| &p.q.pow(i as u64) * &p.eps)
        .min()
        .unwrap()
}

pub fn orbit_min_p(p: &FamilyParamsP) -> Element {
    let f = p.field();
    (0..=p.d)
        .map(|i| &p.gamma + &f.from_i64(i as i64))
        .min()
        .unwrap()
}

fn sweep_classify(
    r: &mut FamilyReport,
    qc: &[FamilyParamsQ],
    pc: &[FamilyParamsP],
    trials: usize,
    rng: &mut ChaCha8Rng,
) {
    for p in qc {
        let pair = make_cbp_q(p);
        let ok = classify(&pair).is_ok_and(|c| {
            canonical_ok(&c, Case::Q, &p.q, &orbit_min_q(p), &pair)
                && c.family()
                    .is_some_and(|x| x.raw_param == p.eps && x.raw_witness.affine.is_identity())
        });
        r.check(ok, || format!("round trip {}", label_q(p)));
    }
    for p in pc {
        let pair = make_cbp_p(p);
        let one = p.field().one();
        let ok = classify(&pair).is_ok_and(|c| {
            canonical_ok(&c, Case::CharP, &one, &orbit_min_p(p), &pair)
                && c.family()
                    .is_some_and(|x| x.raw_param == p.gamma && x.raw_witness.affine.is_identity())
        });
        r.check(ok, || format!("round trip {}", label_p(p)));
    }
    let finite_q: Vec<&FamilyParamsQ> = qc.iter().filter(|p| p.field().is_finite()).collect();
    let cyc_q: Vec<&FamilyParamsQ> = qc
        .iter()
        .filter(|p| !p.field().is_finite() && p.d <= 4)
        .collect();
    for k in 0..trials {
        // one trial in ten over a cyclotomic field
        let pool = if k % 10 == 9 && !cyc_q.is_empty() {
            &cyc_q
        } else {
            &finite_q
        };
        if pool.is_empty() {
            break;
        }
        let p = pool[rng.gen_range(0..pool.len())];
        let pair = make_cbp_q(p);
        let aff = random_affine(p.field(), rng);
        let moved = aff.apply(&pair);
        let ok = classify(&moved)
            .is_ok_and(|c| canonical_ok(&c, Case::Q, &p.q, &orbit_min_q(p), &moved));
        r.check(ok, || {
            format!("affine trial {} under {:?}", label_q(p), aff)
        });
    }
    if !pc.is_empty() {
        for _ in 0..trials {
            let p = &pc[rng.gen_range(0..pc.len())];
            let pair = make_cbp_p(p);
            let aff = random_affine(p.field(), rng);
            let moved = aff.apply(&pair);
            let one = p.field().one();
            let ok = classify(&moved)
                .is_ok_and(|c| canonical_ok(&c, Case::CharP, &one, &orbit_min_p(p), &moved));
            r.check(ok, || {
                format!("affine trial {} under {:?}", label_p(p), aff)
            });
        }
    }
}

fn sweep_decide(r: &mut FamilyReport, rng: &mut ChaCha8Rng) {
    let f = Field::prime(11).unwrap();
    let mut grid: Vec<FamilyParams> = Vec::new();
    for q in f.primitive_nth_roots(5).unwrap() {
        for e in f.elements().unwrap() {
            if let Ok(p) = FamilyParamsQ::new(4, q.clone(), e) {
                grid.push(FamilyParams::Q(p));
            }
        }
    }
    decide_grid(r, &grid, rng);
    let g = quadratic_extension(5);
    let grid: Vec<FamilyParams> = g
        .elements()
        .unwrap()
        .filter_map(|x| FamilyParamsP::new(4, x).ok().map(FamilyParams::P))
        .collect();
    decide_grid(r, &grid, rng);
}

/// Expected verdicts from parameters alone: isomorphic iff equal parameters,
/// affine equivalent iff same q and the parameters share an orbit.
pub fn expected_verdicts(x: &FamilyParams, y: &FamilyParams) -> (bool, bool) {
    match (x, y) {
        (FamilyParams::Q(a), FamilyParams::Q(b)) => {
            let iso = a.q == b.q && a.eps == b.eps;
            let aff = a.q == b.q && (0..=a.d).any(|i| &a.q.pow(i as u64) * &a.eps == b.eps);
            (iso, aff)
        }
        (FamilyParams::P(a), FamilyParams::P(b)) => {
            let f = a.field();
            let iso = a.gamma == b.gamma;
            let aff = (0..=a.d).any(|i| &a.gamma + &f.from_i64(i as i64) == b.gamma);
            (iso, aff)
        }
        _ => (false, false),
    }
}

fn decide_grid(r: &mut FamilyReport, grid: &[FamilyParams], rng: &mut ChaCha8Rng) {
    let pairs: Vec<CbpPair> = grid.iter().map(FamilyParams::pair).collect();
    for (i, x) in grid.iter().enumerate() {
        for (j, y) in grid.iter().enumerate() {
            let (want_iso, want_aff) = expected_verdicts(x, y);
            let relabelled = random_relabel(&pairs[j], rng);
            let iso = is_isomorphic(&pairs[i], &pairs[j]).map(|o| o.is_some());
            let iso_general = is_isomorphic(&pairs[i], &relabelled).map(|o| o.is_some());
            let aff = is_affine_equivalent(&pairs[i], &relabelled).map(|o| o.is_some());
            r.check(
                iso == Ok(want_iso) && iso_general == Ok(want_iso) && aff == Ok(want_aff),
                || format!("{x:?} vs {y:?}"),
            );
        }
    }
}

fn verdict(pair: &CbpPair) -> Result<bool, ClassifyError> {
    match classify(pair) {
        Ok(_) => Ok(true),
        Err(ClassifyError::NotCbp(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Pairs in standard presentation over GF(11) and GF(13) with d ≤ 4: relabelled
/// affine images of family pairs (`positives` of them) and `corrupted` pairs made by
/// changing one allowed entry of such an image.
pub fn oracle_pairs(positives: usize, corrupted: usize, rng: &mut ChaCha8Rng) -> Vec<CbpPair> {
    let mut pool: Vec<FamilyParamsQ> = Vec::new();
    for p in [11u64, 13] {
        let f = Field::prime(p).unwrap();
        for n in 2..=5u64 {
            let Ok(qs) = f.primitive_nth_roots(n) else {
                continue;
            };
            for q in qs {
                for e in f.elements().unwrap() {
                    if let Ok(x) = FamilyParamsQ::new(n as usize - 1, q.clone(), e) {
                        pool.push(x);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for k in 0..positives + corrupted {
        let p = &pool[rng.gen_range(0..pool.len())];
        let f = p.field();
        let good = random_relabel(&random_affine(f, rng).apply(&make_cbp_q(p)), rng);
        if k < positives {
            out.push(good);
            continue;
        }
        let n = good.dim();
        let mut bad = good;
        loop {
            let i = rng.gen_range(0..n);
            let j = if rng.gen_bool(0.5) {
                i
            } else {
                (i + n - 1) % n
            };
            let v = bad.a.get(i, j) + &f.random_nonzero(rng);
            if i != j && v.is_zero() {
                continue;
            }
            bad.a.set(i, j, v);
            break;
        }
        out.push(bad);
    }
    out
}

fn sweep_oracle(r: &mut FamilyReport, rng: &mut ChaCha8Rng) {
    for pair in oracle_pairs(400, 150, rng) {
        let got = (bruteforce_verify_cbp(&pair), verdict(&pair));
        r.check(matches!(got, (Ok(a), Ok(b)) if a == b), || {
            format!("oracle disagreement {pair:?}: {got:?}")
        });
    }
}

/// Exported Hessenberg record against values read off the family matrices.
pub fn hessenberg_matches(params: &FamilyParams) -> bool {
    let Ok(h) = hessenberg_export(params) else {
        return false;
    };
    let pair = params.pair();
    let d = params.d();
    let dual = match params {
        FamilyParams::Q(p) => make_cbp_q(&p.with_inverse_q()),
        FamilyParams::P(p) => make_cbp_p(&p.negated()),
    };
    let Ok(prof) = extract_profile(&pair) else {
        return false;
    };
    let Ok(ed) = eigen_data(&pair, &prof) else {
        return false;
    };
    let a_ok = (0..=d).all(|i| h.a[i] == *pair.a.get(i, i) && h.a_star[i] == *dual.a.get(i, i));
    let c_ok = (1..=d)
        .all(|i| h.c[i - 1] == *pair.a.get(i, i - 1) && h.c_star[i - 1] == *dual.a.get(i, i - 1));
    let xi_ok = h.xi == *pair.a.get(0, d) && h.xi_star == *dual.a.get(0, d);
    let theta_ok = h.theta == ed.theta && h.theta_star == ed.theta_star;
    let trace_ok = (0..=d).all(|i| (&pair.astar * &ed.e.idempotents[i]).trace() == h.a_star[i]);
    a_ok && c_ok
        && xi_ok
        && theta_ok
        && trace_ok
        && h.entries().len() == 8 + 4 * (d + 1) + 4 * d + 2 * d + 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for f in SweepFamily::ALL {
            assert_eq!(f.name().parse::<SweepFamily>(), Ok(f));
        }
        assert!("nope".parse::<SweepFamily>().is_err());
    }

    #[test]
    fn quadratic_extensions() {
        assert_eq!(quadratic_extension(2).descriptor().to_string(), "GF(2^2)");
        assert_eq!(quadratic_extension(5).order().unwrap(), 25u32.into());
    }

    #[test]
    fn small_sweep_passes() {
        let cfg = SweepConfig {
            d_max: 2,
            trials: 5,
            samples: 2,
            only: vec![
                SweepFamily::FamilyQ,
                SweepFamily::Transition,
                SweepFamily::Raising,
                SweepFamily::Structural,
            ],
            ..SweepConfig::default()
        };
        for rep in run_sweep(&cfg) {
            assert!(rep.ok(), "{:?}", rep);
            assert!(rep.passed > 0);
        }
    }
}
