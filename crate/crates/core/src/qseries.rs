//! Pochhammer symbols and two terminating summation identities, checked by
//! exact evaluation.

use thiserror::Error;

use crate::field::Element;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QSeriesError {
    #[error("zero denominator: {0} vanishes")]
    ZeroDenominator(String),
    #[error("arguments belong to different fields")]
    FieldMismatch,
}

/// `(a;q)_r = (1 − a)(1 − aq)⋯(1 − aq^{r−1})`.
pub fn poch_q(a: &Element, q: &Element, r: usize) -> Element {
    let one = a.field().one();
    let mut acc = one.clone();
    let mut aq = a.clone();
    for _ in 0..r {
        acc = &acc * &(&one - &aq);
        aq = &aq * q;
    }
    acc
}

/// `(a)_r = a(a + 1)⋯(a + r − 1)`.
pub fn poch_shifted(a: &Element, r: usize) -> Element {
    let f = a.field();
    (0..r).fold(f.one(), |acc, l| &acc * &(a + &f.from_i64(l as i64)))
}

/// Values `(a;q)_r` or `(a)_r` for `r = 0..=r_max`.
#[derive(Clone, Debug)]
pub struct PochhammerCache {
    pub base: Element,
    pub q: Option<Element>,
    pub values: Vec<Element>,
}

impl PochhammerCache {
    pub fn q_symbol(a: &Element, q: &Element, r_max: usize) -> PochhammerCache {
        let one = a.field().one();
        let mut values = vec![one.clone()];
        let mut aq = a.clone();
        for _ in 0..r_max {
            let next = values.last().unwrap() * &(&one - &aq);
            values.push(next);
            aq = &aq * q;
        }
        PochhammerCache {
            base: a.clone(),
            q: Some(q.clone()),
            values,
        }
    }

    pub fn shifted(a: &Element, r_max: usize) -> PochhammerCache {
        let f = a.field();
        let mut values = vec![f.one()];
        for l in 0..r_max {
            let next = values.last().unwrap() * &(a + &f.from_i64(l as i64));
            values.push(next);
        }
        PochhammerCache {
            base: a.clone(),
            q: None,
            values,
        }
    }

    pub fn get(&self, r: usize) -> &Element {
        &self.values[r]
    }
}

fn checked(a: &Element, b: &Element) -> Result<(), QSeriesError> {
    if a.field() == b.field() {
        Ok(())
    } else {
        Err(QSeriesError::FieldMismatch)
    }
}

/// ∑_{j=0}^{d} (ε;q)_j/(εq;q)_j = (q;q)_d/(εq;q)_d.
pub fn q_vandermonde_check(d: usize, eps: &Element, q: &Element) -> Result<bool, QSeriesError> {
    checked(eps, q)?;
    let num = PochhammerCache::q_symbol(eps, q, d);
    let den = PochhammerCache::q_symbol(&(eps * q), q, d);
    let mut lhs = eps.field().zero();
    for j in 0..=d {
        let inv = den
            .get(j)
            .inv()
            .map_err(|_| QSeriesError::ZeroDenominator(format!("(εq;q)_{j}")))?;
        lhs = &lhs + &(num.get(j) * &inv);
    }
    let rhs = &poch_q(q, q, d) * &den.get(d).inv().expect("checked above");
    Ok(lhs == rhs)
}

/// ∑_{j=0}^{d} (−γ)_j/(1−γ)_j = d!/(1−γ)_d.
pub fn vandermonde_check(d: usize, gamma: &Element) -> Result<bool, QSeriesError> {
    let f = gamma.field();
    let num = PochhammerCache::shifted(&-gamma, d);
    let den = PochhammerCache::shifted(&(&f.one() - gamma), d);
    let mut lhs = f.zero();
    for j in 0..=d {
        let inv = den
            .get(j)
            .inv()
            .map_err(|_| QSeriesError::ZeroDenominator(format!("(1-γ)_{j}")))?;
        lhs = &lhs + &(num.get(j) * &inv);
    }
    let fact = poch_shifted(&f.one(), d);
    let rhs = &fact * &den.get(d).inv().expect("checked above");
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    #[test]
    fn small_values() {
        let f = Field::prime(11).unwrap();
        let (a, q) = (f.from_i64(2), f.from_i64(3));
        assert!(poch_q(&a, &q, 0).is_one());
        assert_eq!(poch_q(&a, &q, 2), f.from_i64(5));
        assert!(poch_q(&f.one(), &q, 3).is_zero());
        let g = Field::extension(5, vec![1, 1, 1]).unwrap();
        let t = g.generator().unwrap();
        assert_eq!(poch_shifted(&t, 2), g.from_i64(4));
        assert!(poch_shifted(&g.zero(), 3).is_zero());
    }

    #[test]
    fn vandermonde_instances() {
        let f = Field::prime(11).unwrap();
        assert!(q_vandermonde_check(4, &f.from_i64(2), &f.from_i64(3)).unwrap());
        assert!(q_vandermonde_check(4, &f.zero(), &f.from_i64(3)).unwrap());
        let c = Field::cyclotomic(5).unwrap();
        assert!(q_vandermonde_check(4, &c.from_i64(2), &c.generator().unwrap()).unwrap());
        let g = Field::extension(5, vec![1, 1, 1]).unwrap();
        assert!(vandermonde_check(4, &g.generator().unwrap()).unwrap());
        assert!(matches!(
            vandermonde_check(4, &g.one()),
            Err(QSeriesError::ZeroDenominator(_))
        ));
        let h = Field::extension(7, vec![1, 0, 1]).unwrap();
        assert!(vandermonde_check(6, &h.generator().unwrap()).unwrap());
    }

    #[test]
    fn cache_recurrences() {
        let f = Field::prime(13).unwrap();
        let (a, q) = (f.from_i64(5), f.from_i64(4));
        let c = PochhammerCache::q_symbol(&a, &q, 6);
        for r in 0..6 {
            assert_eq!(
                c.get(r + 1),
                &(c.get(r) * &(&f.one() - &(&a * &q.pow(r as u64))))
            );
            assert_eq!(c.get(r), &poch_q(&a, &q, r));
        }
        let s = PochhammerCache::shifted(&a, 6);
        for r in 0..6 {
            assert_eq!(s.get(r + 1), &(s.get(r) * &(&a + &f.from_i64(r as i64))));
        }
    }
}
