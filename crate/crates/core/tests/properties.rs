use cbpkit::classify::{classify, extract_profile, profile_affine_image, CanonicalForm};
use cbpkit::families::{affine_transform, make_cbp_q, Affine, CbpPair, FamilyParamsQ};
use cbpkit::qseries::q_vandermonde_check;
use cbpkit::sweep::random_relabel;
use cbpkit::{canonical_compare, Element, Field};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fields() -> Vec<Field> {
    vec![
        Field::prime(11).unwrap(),
        Field::prime(2_147_483_647).unwrap(),
        Field::extension(5, vec![2, 1, 1]).unwrap(),
        Field::extension(2, vec![1, 1, 0, 1]).unwrap(),
        Field::cyclotomic(5).unwrap(),
        Field::cyclotomic(12).unwrap(),
    ]
}

fn element(f: &Field, coeffs: &[i64; 4], den: i64) -> Element {
    if f.is_finite() {
        let p = f.characteristic() as i64;
        let r: Vec<u64> = coeffs[..f.degree()]
            .iter()
            .map(|c| c.rem_euclid(p) as u64)
            .collect();
        f.from_residues(&r).unwrap()
    } else {
        let r: Vec<BigRational> = (0..f.degree())
            .map(|i| BigRational::new(coeffs[i % 4].into(), den.into()))
            .collect();
        f.from_rationals(&r).unwrap()
    }
}

fn coeffs() -> impl Strategy<Value = [i64; 4]> {
    prop::array::uniform4(-40i64..40)
}

fn gf11() -> Field {
    Field::prime(11).unwrap()
}

fn family(eps: i64) -> CbpPair {
    let f = gf11();
    make_cbp_q(&FamilyParamsQ::new(4, f.from_i64(3), f.from_i64(eps)).unwrap())
}

// ε ∉ {1, 3, 9, 5, 4} for q = 3 over GF(11)
fn admissible_eps() -> impl Strategy<Value = i64> {
    prop::sample::select(vec![0i64, 2, 6, 7, 8, 10])
}

fn affine() -> impl Strategy<Value = Affine> {
    (1i64..11, 1i64..11, 0i64..11, 0i64..11).prop_map(|(s, ss, t, ts)| {
        let f = gf11();
        Affine::new(f.from_i64(s), f.from_i64(ss), f.from_i64(t), f.from_i64(ts)).unwrap()
    })
}

proptest! {
    #[test]
    fn field_axioms(fi in 0usize..6, a in coeffs(), b in coeffs(), c in coeffs(), den in 1i64..5) {
        let f = &fields()[fi];
        let (x, y, z) = (element(f, &a, den), element(f, &b, 1), element(f, &c, den));
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert!((&x - &x).is_zero());
        if !x.is_zero() {
            prop_assert!((&x * &x.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn canonical_order_is_total(fi in 0usize..6, a in coeffs(), b in coeffs()) {
        let f = &fields()[fi];
        let (x, y) = (element(f, &a, 1), element(f, &b, 2));
        let xy = canonical_compare(&x, &y).unwrap();
        prop_assert_eq!(xy.reverse(), canonical_compare(&y, &x).unwrap());
        prop_assert_eq!(xy.is_eq(), x == y);
    }

    #[test]
    fn affine_group_law(u in affine(), v in affine(), w in affine(), eps in admissible_eps()) {
        let pair = family(eps);
        prop_assert_eq!(u.then(&v).then(&w), u.then(&v.then(&w)));
        prop_assert!(u.then(&u.inverse()).is_identity());
        prop_assert!(u.inverse().then(&u).is_identity());
        prop_assert_eq!(u.then(&v).apply(&pair), v.apply(&u.apply(&pair)));
    }

    #[test]
    fn profile_follows_affine_maps(u in affine(), eps in admissible_eps()) {
        let pair = family(eps);
        let p = extract_profile(&pair).unwrap();
        let moved = extract_profile(&u.apply(&pair)).unwrap();
        prop_assert_eq!(profile_affine_image(&p, &u), moved.clone());
        prop_assert!(moved.holds_for(&u.apply(&pair)));
    }

    #[test]
    fn classification_is_invariant(u in affine(), eps in admissible_eps(), seed in any::<u64>()) {
        let pair = family(eps);
        let base = classify(&pair).unwrap();
        let moved = affine_transform(&pair, &u.s, &u.s_star, &u.t, &u.t_star).unwrap();
        let relabelled = random_relabel(&moved, &mut ChaCha8Rng::seed_from_u64(seed));
        let form = classify(&relabelled).unwrap();
        prop_assert!(form.same_label(&base));
        if let CanonicalForm::Family(ff) = &form {
            prop_assert!(ff.witness.maps(&relabelled, &ff.params().pair()));
        } else {
            prop_assert!(false, "family pair classified as trivial");
        }
    }

    #[test]
    fn q_vandermonde_holds_off_the_poles(p in prop::sample::select(vec![11u64, 31, 41]), e in 0u64..41) {
        let f = Field::prime(p).unwrap();
        let q = f.find_primitive_nth_root(5).unwrap();
        let eps = f.from_i64(e as i64);
        let poles = (1..=4).any(|j| (&eps * &q.pow(j)).is_one());
        match q_vandermonde_check(4, &eps, &q) {
            Ok(holds) => prop_assert!(holds && !poles),
            Err(_) => prop_assert!(poles),
        }
    }
}
