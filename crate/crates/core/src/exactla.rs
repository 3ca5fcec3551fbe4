//! Dense square matrices over a [`Field`], exact Gaussian elimination and
//! primitive idempotents.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde_json::{json, Value};
use thiserror::Error;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::field::{is_prime, Element, Field, FieldDescriptor, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("linear system has more than one solution")]
    Underdetermined,
    #[error("matrix is nonsingular, kernel is zero")]
    Nonsingular,
    #[error("kernel has dimension {0}, expected 1")]
    NotRankDeficientByOne(usize),
    #[error("not multiplicity-free: {0}")]
    NotMultiplicityFree(String),
    #[error("bad matrix encoding: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Square matrix, rows and columns indexed from 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    dim: usize,
    entries: Vec<Element>,
}

impl Matrix {
    pub fn zero(field: &Field, dim: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            dim,
            entries: vec![field.zero(); dim * dim],
        }
    }

    pub fn identity(field: &Field, dim: usize) -> Matrix {
        Matrix::scalar(&field.one(), dim)
    }

    pub fn scalar(c: &Element, dim: usize) -> Matrix {
        let mut m = Matrix::zero(c.field(), dim);
        for i in 0..dim {
            m.entries[i * dim + i] = c.clone();
        }
        m
    }

    pub fn diag(field: &Field, d: &[Element]) -> Result<Matrix, LinalgError> {
        let mut m = Matrix::zero(field, d.len());
        for (i, x) in d.iter().enumerate() {
            if x.field() != field {
                return Err(LinalgError::FieldMismatch);
            }
            m.entries[i * d.len() + i] = x.clone();
        }
        Ok(m)
    }

    pub fn from_fn(
        field: &Field,
        dim: usize,
        mut f: impl FnMut(usize, usize) -> Element,
    ) -> Matrix {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Matrix {
            field: field.clone(),
            dim,
            entries,
        }
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<Element>>) -> Result<Matrix, LinalgError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(LinalgError::DimMismatch(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for x in row {
                if x.field() != field {
                    return Err(LinalgError::FieldMismatch);
                }
                entries.push(x);
            }
        }
        Ok(Matrix {
            field: field.clone(),
            dim,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &Element {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Element) {
        assert!(v.field() == &self.field, "entry from a different field");
        self.entries[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Element>> {
        self.entries
            .chunks(self.dim.max(1))
            .map(<[Element]>::to_vec)
            .take(self.dim)
            .collect()
    }

    pub fn diagonal(&self) -> Vec<Element> {
        (0..self.dim).map(|i| self.get(i, i).clone()).collect()
    }

    /// Row-major vectorization.
    pub fn vec(&self) -> &[Element] {
        &self.entries
    }

    fn compatible(&self, o: &Matrix) -> Result<(), LinalgError> {
        if self.field != o.field {
            return Err(LinalgError::FieldMismatch);
        }
        if self.dim != o.dim {
            return Err(LinalgError::DimMismatch(format!(
                "{} vs {}",
                self.dim, o.dim
            )));
        }
        Ok(())
    }

    pub fn try_mul(&self, o: &Matrix) -> Result<Matrix, LinalgError> {
        self.compatible(o)?;
        let n = self.dim;
        let mut out = Matrix::zero(&self.field, n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let idx = i * n + j;
                        out.entries[idx] = &out.entries[idx] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, o: &Matrix) -> Result<Matrix, LinalgError> {
        self.compatible(o)?;
        Ok(self.zip(o, |a, b| a + b))
    }

    pub fn try_sub(&self, o: &Matrix) -> Result<Matrix, LinalgError> {
        self.compatible(o)?;
        Ok(self.zip(o, |a, b| a - b))
    }

    fn zip(&self, o: &Matrix, f: impl Fn(&Element, &Element) -> Element) -> Matrix {
        Matrix {
            field: self.field.clone(),
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Element) -> Matrix {
        Matrix {
            field: self.field.clone(),
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    /// `self + c·I`.
    pub fn shift(&self, c: &Element) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.entries[i * self.dim + i] = &m.entries[i * self.dim + i] + c;
        }
        m
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.field, self.dim, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> Element {
        (0..self.dim).fold(self.field.zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn det(&self) -> Element {
        let mut a = self.rows();
        let n = self.dim;
        let mut det = self.field.one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return self.field.zero();
            };
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det = &det * &a[col][col];
            let inv = a[col][col].inv().expect("nonzero pivot");
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] * &inv;
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &t;
                }
            }
        }
        det
    }

    /// Inverse, checked by multiplying back.
    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        let n = self.dim;
        let mut a: Vec<Vec<Element>> = self.rows();
        for (i, row) in a.iter_mut().enumerate() {
            row.extend((0..n).map(|j| {
                if i == j {
                    self.field.one()
                } else {
                    self.field.zero()
                }
            }));
        }
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(LinalgError::Singular)?;
            a.swap(piv, col);
            let inv = a[col][col].inv()?;
            for x in a[col].iter_mut() {
                *x = &*x * &inv;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in col..2 * n {
                    let t = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &t;
                }
            }
        }
        let inv = Matrix::from_rows(
            &self.field,
            a.into_iter().map(|r| r[n..].to_vec()).collect(),
        )?;
        assert!((self * &inv).is_identity(), "inverse failed verification");
        Ok(inv)
    }

    pub fn pow(&self, e: u64) -> Matrix {
        let mut acc = Matrix::identity(&self.field, self.dim);
        for i in (0..64 - e.leading_zeros()).rev() {
            acc = &acc * &acc;
            if (e >> i) & 1 == 1 {
                acc = &acc * self;
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Element::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.scalar_value().is_some_and(|c| c.is_one())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// `Some(c)` when the matrix equals `c·I`.
    pub fn scalar_value(&self) -> Option<Element> {
        if self.dim == 0 || !self.is_diagonal() {
            return None;
        }
        let c = self.get(0, 0);
        (1..self.dim)
            .all(|i| self.get(i, i) == c)
            .then(|| c.clone())
    }

    pub fn mul_vec(&self, v: &[Element]) -> Vec<Element> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(self.field.zero(), |acc, j| &acc + &(self.get(i, j) * &v[j]))
            })
            .collect()
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: &Field, cols: &[Vec<Element>]) -> Result<Matrix, LinalgError> {
        let n = cols.len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(LinalgError::DimMismatch(
                "columns must have length equal to their count".into(),
            ));
        }
        Ok(Matrix::from_fn(field, n, |i, j| cols[j][i].clone()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.field.descriptor(),
            "dim": self.dim,
            "rows": self.rows_json(),
        })
    }

    /// Rows as nested JSON arrays of element encodings.
    pub fn rows_json(&self) -> Value {
        Value::Array(
            self.rows()
                .iter()
                .map(|r| Value::Array(r.iter().map(Element::to_json).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Matrix, LinalgError> {
        let desc: FieldDescriptor = serde_json::from_value(v["field"].clone())
            .map_err(|e| LinalgError::Parse(e.to_string()))?;
        let field = Field::new(&desc)?;
        let m = Matrix::rows_from_json(&field, &v["rows"])?;
        if v["dim"].as_u64() != Some(m.dim as u64) {
            return Err(LinalgError::Parse("dim does not match rows".into()));
        }
        Ok(m)
    }

    pub fn rows_from_json(field: &Field, rows: &Value) -> Result<Matrix, LinalgError> {
        let rows = rows
            .as_array()
            .ok_or_else(|| LinalgError::Parse("rows must be an array".into()))?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| LinalgError::Parse("row must be an array".into()))?
                    .iter()
                    .map(|x| field.element_from_json(x).map_err(LinalgError::from))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Matrix::from_rows(field, parsed)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix over {} [", self.field)?;
        for r in self.rows() {
            let parts: Vec<String> = r.iter().map(Element::to_string).collect();
            writeln!(f, "  [{}]", parts.join(", "))?;
        }
        write!(f, "]")
    }
}

macro_rules! matop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&Matrix> for &Matrix {
            type Output = Matrix;
            fn $method(self, rhs: &Matrix) -> Matrix {
                self.$try(rhs)
                    .unwrap_or_else(|e| panic!("matrix {}: {e}", stringify!($method)))
            }
        }
        impl $tr<Matrix> for Matrix {
            type Output = Matrix;
            fn $method(self, rhs: Matrix) -> Matrix {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Matrix> for Matrix {
            type Output = Matrix;
            fn $method(self, rhs: &Matrix) -> Matrix {
                (&self).$method(rhs)
            }
        }
        impl $tr<Matrix> for &Matrix {
            type Output = Matrix;
            fn $method(self, rhs: Matrix) -> Matrix {
                self.$method(&rhs)
            }
        }
    };
}

matop!(Add, add, try_add);
matop!(Sub, sub, try_sub);
matop!(Mul, mul, try_mul);

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(&-self.field.one())
    }
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(a: &mut [Vec<Element>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == a.len() {
            break;
        }
        let Some(piv) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(piv, row);
        let inv = a[row][col].inv().expect("nonzero pivot");
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..a.len() {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..a[r].len() {
                let t = &f * &a[row][c];
                a[r][c] = &a[r][c] - &t;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Rank of a list of equal-length vectors.
pub fn rank(rows: &[Vec<Element>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let ncols = first.len();
    let mut a = rows.to_vec();
    rref(&mut a, ncols).len()
}

/// Image of `v` under Z_(p)[ζ_m] → GF(p), ζ ↦ ω. None when a denominator
/// is divisible by p.
fn reduce_cyclotomic(v: &Element, target: &Field, omega: &Element) -> Option<Element> {
    let p = BigInt::from(target.characteristic());
    let mut acc = target.zero();
    let mut w = target.one();
    for c in v.rationals()? {
        if (c.denom() % &p).is_zero() {
            return None;
        }
        let x = &target.from_int(c.numer()) / &target.from_int(c.denom());
        acc = &acc + &(&x * &w);
        w = &w * omega;
    }
    Some(acc)
}

/// Prime p ≡ 1 (mod m) just below 2^30 with a primitive m-th root ω.
fn certificate_prime(m: u32) -> (Field, Element) {
    let m = m as u64;
    let mut p = ((1u64 << 30) / m) * m + 1;
    loop {
        if is_prime(p) {
            let f = Field::prime(p).expect("prime below 2^31");
            let omega = f.find_primitive_nth_root(m).expect("m divides p - 1");
            return (f, omega);
        }
        p -= m;
    }
}

/// True when the vectors are linearly independent. Over Q(ζ_m) the rows
/// are first reduced modulo a large prime p ≡ 1 (mod m); independence of
/// the images implies independence, and only an inconclusive reduction
/// falls back to elimination over Q(ζ_m).
pub fn is_independent(rows: &[Vec<Element>]) -> bool {
    let Some(first) = rows.first() else {
        return true;
    };
    if rows.len() > first.len() {
        return false;
    }
    let field = first[0].field();
    if let Some(m) = field.conductor() {
        let (target, omega) = certificate_prime(m);
        let reduced: Option<Vec<Vec<Element>>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| reduce_cyclotomic(x, &target, &omega))
                    .collect()
            })
            .collect();
        if reduced.is_some_and(|r| rank(&r) == rows.len()) {
            return true;
        }
    }
    rank(rows) == rows.len()
}

/// Unique solution x of `a·x = b`, where `a` is given by rows.
pub fn solve_system(a: &[Vec<Element>], b: &[Element]) -> Result<Vec<Element>, LinalgError> {
    if a.len() != b.len() {
        return Err(LinalgError::DimMismatch("right-hand side length".into()));
    }
    let Some(first) = a.first() else {
        return Err(LinalgError::Underdetermined);
    };
    let k = first.len();
    let mut aug: Vec<Vec<Element>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, k + 1);
    if pivots.last() == Some(&k) {
        return Err(LinalgError::Inconsistent);
    }
    if pivots.len() < k {
        return Err(LinalgError::Underdetermined);
    }
    Ok((0..k).map(|i| aug[i][k].clone()).collect())
}

/// Basis of the right kernel.
pub fn nullspace(m: &Matrix) -> Vec<Vec<Element>> {
    let n = m.dim();
    let mut a = m.rows();
    let pivots = rref(&mut a, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![m.field().zero(); n];
            v[f] = m.field().one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -&a[r][f];
            }
            v
        })
        .collect()
}

/// Spanning vector of a one-dimensional kernel, first nonzero entry 1.
pub fn kernel_vector(m: &Matrix) -> Result<Vec<Element>, LinalgError> {
    let basis = nullspace(m);
    match basis.len() {
        0 => Err(LinalgError::Nonsingular),
        1 => {
            let v = basis.into_iter().next().unwrap();
            let lead = v.iter().find(|x| !x.is_zero()).unwrap().inv()?;
            Ok(v.iter().map(|x| x * &lead).collect())
        }
        k => Err(LinalgError::NotRankDeficientByOne(k)),
    }
}

/// Nonzero entries only on the diagonal, the subdiagonal and the corner
/// (0, d); every subdiagonal entry and the corner nonzero.
pub fn is_circular_bidiagonal(m: &Matrix) -> Result<bool, LinalgError> {
    let n = m.dim();
    if n < 2 {
        return Err(LinalgError::DimMismatch(
            "shape test needs dimension at least 2".into(),
        ));
    }
    for i in 0..n {
        for j in 0..n {
            let allowed = i == j || i == j + 1 || (i == 0 && j == n - 1);
            let nz = !m.get(i, j).is_zero();
            if !allowed && nz {
                return Ok(false);
            }
            if (i == j + 1 || (i == 0 && j == n - 1)) && !nz {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Diagonal with pairwise distinct diagonal entries.
pub fn is_diagonal_distinct(m: &Matrix) -> bool {
    if !m.is_diagonal() {
        return false;
    }
    let mut d = m.diagonal();
    d.sort();
    d.windows(2).all(|w| w[0] != w[1])
}

/// Eigenvalues θ_i with their primitive idempotents E_i. Index lookups via
/// [`IdempotentSet::at`] are taken mod n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentSet {
    pub eigenvalues: Vec<Element>,
    pub idempotents: Vec<Matrix>,
}

impl IdempotentSet {
    pub fn len(&self) -> usize {
        self.idempotents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idempotents.is_empty()
    }

    pub fn at(&self, i: i64) -> &Matrix {
        &self.idempotents[i.rem_euclid(self.len() as i64) as usize]
    }

    pub fn theta(&self, i: i64) -> &Element {
        &self.eigenvalues[i.rem_euclid(self.len() as i64) as usize]
    }

    /// Same eigenspaces, cyclically relabelled so index 0 becomes `shift`.
    pub fn rotated(&self, shift: usize) -> IdempotentSet {
        let n = self.len();
        IdempotentSet {
            eigenvalues: (0..n)
                .map(|i| self.eigenvalues[(i + shift) % n].clone())
                .collect(),
            idempotents: (0..n)
                .map(|i| self.idempotents[(i + shift) % n].clone())
                .collect(),
        }
    }
}

/// (v, w) with e = v·wᵀ, checked entrywise; None unless e has rank one.
pub fn rank_one_factors(e: &Matrix) -> Option<(Vec<Element>, Vec<Element>)> {
    let n = e.dim();
    let (i, j) = (0..n * n)
        .map(|k| (k / n, k % n))
        .find(|&(i, j)| !e.get(i, j).is_zero())?;
    let scale = e.get(i, j).inv().ok()?;
    let v: Vec<Element> = (0..n).map(|r| e.get(r, j).clone()).collect();
    let w: Vec<Element> = (0..n).map(|c| e.get(i, c) * &scale).collect();
    let exact = (0..n).all(|r| (0..n).all(|c| *e.get(r, c) == &v[r] * &w[c]));
    exact.then_some((v, w))
}

pub fn dot(a: &[Element], b: &[Element]) -> Element {
    let f = a[0].field();
    a.iter()
        .zip(b)
        .fold(f.zero(), |acc, (x, y)| &acc + &(x * y))
}

/// Coefficients of ∏(x − r), constant term first.
pub(crate) fn poly_from_roots(field: &Field, roots: &[&Element]) -> Vec<Element> {
    let mut c = vec![field.one()];
    for r in roots {
        let mut next = vec![field.zero(); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k + 1] = &next[k + 1] + ck;
            next[k] = &next[k] - &(ck * *r);
        }
        c = next;
    }
    c
}

fn eval_matrix_poly(powers: &[Matrix], coeffs: &[Element]) -> Matrix {
    coeffs.iter().zip(powers).fold(
        Matrix::zero(powers[0].field(), powers[0].dim()),
        |acc, (c, p)| {
            if c.is_zero() {
                acc
            } else {
                acc + p.scale(c)
            }
        },
    )
}

/// E_i = ∏_{j≠i} (A − θ_j I)/(θ_i − θ_j), after checking the θ_i are
/// distinct and ∏(A − θ_i I) = 0.
pub fn primitive_idempotents(
    a: &Matrix,
    eigenvalues: &[Element],
) -> Result<IdempotentSet, LinalgError> {
    let n = a.dim();
    if eigenvalues.len() != n {
        return Err(LinalgError::DimMismatch(format!(
            "{} eigenvalues for dimension {n}",
            eigenvalues.len()
        )));
    }
    let f = a.field();
    if eigenvalues.iter().any(|t| t.field() != f) {
        return Err(LinalgError::FieldMismatch);
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(LinalgError::NotMultiplicityFree(
            "repeated eigenvalue".into(),
        ));
    }
    let mut powers = vec![Matrix::identity(f, n)];
    for k in 1..=n {
        powers.push(&powers[k - 1] * a);
    }
    let all: Vec<&Element> = eigenvalues.iter().collect();
    if !eval_matrix_poly(&powers, &poly_from_roots(f, &all)).is_zero() {
        return Err(LinalgError::NotMultiplicityFree(
            "product of (A - θ_i I) is nonzero".into(),
        ));
    }
    let idempotents = (0..n)
        .map(|i| {
            let others: Vec<&Element> = (0..n)
                .filter(|&j| j != i)
                .map(|j| &eigenvalues[j])
                .collect();
            let denom = others
                .iter()
                .fold(f.one(), |acc, t| &acc * &(&eigenvalues[i] - *t))
                .inv()
                .expect("distinct eigenvalues");
            let coeffs: Vec<Element> = poly_from_roots(f, &others)
                .iter()
                .map(|c| c * &denom)
                .collect();
            eval_matrix_poly(&powers[..n], &coeffs)
        })
        .collect();
    Ok(IdempotentSet {
        eigenvalues: eigenvalues.to_vec(),
        idempotents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    #[test]
    fn independence_certificate_agrees_with_rank() {
        let c = Field::cyclotomic(7).unwrap();
        let z = c.generator().unwrap();
        let rows: Vec<Vec<Element>> = (0..4)
            .map(|i| {
                (0..5)
                    .map(|j| z.pow((i * j) as u64) + c.from_i64(j as i64))
                    .collect()
            })
            .collect();
        assert_eq!(is_independent(&rows), rank(&rows) == rows.len());
        assert!(is_independent(&rows));
        let mut dep = rows.clone();
        dep.push(
            rows[0]
                .iter()
                .zip(&rows[1])
                .map(|(a, b)| a + &(b * &z))
                .collect(),
        );
        assert!(!is_independent(&dep));
        let f = gf(5);
        let r = vec![
            vec![f.one(), f.from_i64(2)],
            vec![f.from_i64(2), f.from_i64(4)],
        ];
        assert!(!is_independent(&r));
    }

    #[test]
    fn rank_one_factorization() {
        let f = gf(7);
        let e = m(&f, &[&[0, 0, 0], &[2, 4, 6], &[1, 2, 3]]);
        let (v, w) = rank_one_factors(&e).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(e.get(r, c), &(&v[r] * &w[c]));
            }
        }
        assert!(rank_one_factors(&Matrix::identity(&f, 3)).is_none());
        assert!(rank_one_factors(&Matrix::zero(&f, 3)).is_none());
        assert_eq!(dot(&v, &w), e.trace());
    }

    fn m(f: &Field, rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(
            f,
            rows.iter()
                .map(|r| r.iter().map(|&x| f.from_i64(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_inverse_mod_eleven() {
        let f = gf(11);
        let a = m(&f, &[&[3, 0], &[1, 4]]);
        assert_eq!(a.inverse().unwrap(), m(&f, &[&[4, 0], &[10, 3]]));
        assert_eq!(
            m(&f, &[&[1, 2], &[2, 4]]).inverse(),
            Err(LinalgError::Singular)
        );
    }

    #[test]
    fn shape_predicates() {
        let f = gf(11);
        let a = m(
            &f,
            &[&[3, 0, 0, 1], &[1, 4, 0, 0], &[0, -1, 1, 0], &[0, 0, -1, 2]],
        );
        assert!(is_circular_bidiagonal(&a).unwrap());
        let mut b = a.clone();
        b.set(1, 0, f.zero());
        assert!(!is_circular_bidiagonal(&b).unwrap());
        assert!(is_circular_bidiagonal(&m(&f, &[&[1]])).is_err());
        assert!(!is_diagonal_distinct(&a));
        assert!(!is_diagonal_distinct(&Matrix::identity(&f, 2)));
    }

    #[test]
    fn kernel_vectors() {
        let f = gf(7);
        assert_eq!(kernel_vector(&Matrix::zero(&f, 1)).unwrap(), vec![f.one()]);
        assert_eq!(
            kernel_vector(&Matrix::identity(&f, 2)),
            Err(LinalgError::Nonsingular)
        );
        assert_eq!(
            kernel_vector(&Matrix::zero(&f, 2)),
            Err(LinalgError::NotRankDeficientByOne(2))
        );
        let a = m(&f, &[&[0, 2], &[0, 3]]);
        assert_eq!(kernel_vector(&a).unwrap(), vec![f.one(), f.zero()]);
    }

    #[test]
    fn solve_reports_inconsistency() {
        let f = gf(5);
        let a = vec![vec![f.one()], vec![f.one()]];
        assert_eq!(
            solve_system(&a, &[f.one(), f.from_i64(2)]),
            Err(LinalgError::Inconsistent)
        );
        assert_eq!(
            solve_system(&a, &[f.one(), f.one()]).unwrap(),
            vec![f.one()]
        );
    }

    #[test]
    fn determinant_matches_inverse() {
        let f = gf(13);
        let a = m(&f, &[&[2, 5, 1], &[0, 3, 7], &[4, 1, 1]]);
        let d = a.det();
        assert!(!d.is_zero());
        assert!((&a * &a.inverse().unwrap()).is_identity());
    }

    #[test]
    fn diagonal_idempotents_are_units() {
        let f = gf(11);
        let d: Vec<Element> = [1, 3, 9, 5, 4].iter().map(|&x| f.from_i64(x)).collect();
        let a = Matrix::diag(&f, &d).unwrap();
        let e = primitive_idempotents(&a, &d).unwrap();
        for i in 0..5 {
            let mut unit = Matrix::zero(&f, 5);
            unit.set(i, i, f.one());
            assert_eq!(e.idempotents[i], unit);
        }
        assert!(matches!(
            primitive_idempotents(
                &a,
                &[
                    d[0].clone(),
                    d[0].clone(),
                    d[2].clone(),
                    d[3].clone(),
                    d[4].clone()
                ]
            ),
            Err(LinalgError::NotMultiplicityFree(_))
        ));
    }
}
