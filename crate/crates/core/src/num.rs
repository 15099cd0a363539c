//! Exact rational vectors and matrices.
//!
//! Everything geometric in this crate is computed over `BigRational`; there is
//! no floating point anywhere on the computation path. Vectors that stand for
//! rays or normals are kept in primitive integer form (denominators cleared,
//! content divided out) so that equal rays compare equal.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses a decimal integer (`"-3"`) or a fraction (`"7/2"`).
pub fn parse_rational(text: &str) -> Result<Q, ParseError> {
    let s = text.trim();
    let bad = || ParseError::InvalidRational(text.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(ParseError::ZeroDenominator(text.to_string()));
            }
            Ok(Q::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Q::from_integer(p))
        }
    }
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Sign of a rational as -1, 0, 1.
pub fn sign(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// A vector of exact rationals in a lattice of fixed rank.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QVector(Vec<Q>);

impl QVector {
    pub fn new(entries: Vec<Q>) -> Self {
        QVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        QVector(vec![Q::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = Q::one();
        v
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        QVector(entries.iter().map(|&e| q(e)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Q] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Q> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Q> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &QVector) -> Q {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn add(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: &Q) -> QVector {
        QVector(self.0.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> QVector {
        QVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn l1_norm(&self) -> Q {
        self.0.iter().fold(Q::zero(), |acc, a| acc + a.abs())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|a| a.is_integer())
    }

    /// Scales to the primitive integer vector on the same ray. The zero
    /// vector is returned unchanged.
    pub fn primitive(&self) -> QVector {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|a| (a * Q::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
        QVector(
            ints.into_iter()
                .map(|a| Q::from_integer(a / &g))
                .collect(),
        )
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|a| a.to_string()).collect()
    }

    pub fn sum<'a>(n: usize, vs: impl IntoIterator<Item = &'a QVector>) -> QVector {
        vs.into_iter().fold(QVector::zeros(n), |acc, v| acc.add(v))
    }
}

impl Index<usize> for QVector {
    type Output = Q;
    fn index(&self, i: usize) -> &Q {
        &self.0[i]
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(","))
    }
}

impl fmt::Display for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<Vec<Q>> for QVector {
    fn from(v: Vec<Q>) -> Self {
        QVector(v)
    }
}

impl Serialize for QVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for QVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<NumberLiteral> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|n| n.to_rational().map_err(D::Error::custom))
            .collect::<Result<Vec<_>, _>>()
            .map(QVector)
    }
}

/// A JSON number or string holding a rational literal.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum NumberLiteral {
    Int(i64),
    Text(String),
}

impl NumberLiteral {
    pub fn to_rational(&self) -> Result<Q, ParseError> {
        match self {
            NumberLiteral::Int(i) => Ok(q(*i)),
            NumberLiteral::Text(s) => parse_rational(s),
        }
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Q::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed only when there are no rows.
    pub fn from_rows(rows: Vec<QVector>, cols: usize) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(cols, QVector::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row.into_inner());
        }
        QMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_columns(cols: &[QVector], rows: usize) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(rows, QVector::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..r {
                m.data[i * c + j] = col[i].clone();
            }
        }
        m
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(rows.iter().map(|r| QVector::from_ints(r)).collect(), cols)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> QVector {
        QVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn rows(&self) -> Vec<QVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column(&self, j: usize) -> QVector {
        QVector((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn columns(&self) -> Vec<QVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &QVector) -> QVector {
        assert_eq!(self.cols, v.len(), "matrix/vector shape mismatch");
        QVector(
            (0..self.rows)
                .map(|i| {
                    (0..self.cols).fold(Q::zero(), |acc, j| acc + self.get(i, j) * &v[j])
                })
                .collect(),
        )
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|a| a.is_integer())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn rank(&self) -> usize {
        rank(&self.rows())
    }

    pub fn determinant(&self) -> Q {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        let mut m: Vec<Vec<Q>> = self.rows().into_iter().map(QVector::into_inner).collect();
        let mut det = Q::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return Q::zero();
            };
            if p != col {
                m.swap(p, col);
                det = -det;
            }
            let pivot = m[col][col].clone();
            det *= &pivot;
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let f = &m[r][col] / &pivot;
                for c in col..n {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug: Vec<Vec<Q>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).into_inner();
                r.extend(QVector::unit(n, i).into_inner());
                r
            })
            .collect();
        let pivots = rref_in_place(&mut aug, n);
        if pivots.len() < n {
            return None;
        }
        Some(QMatrix::from_rows(
            aug.into_iter().map(|r| QVector(r[n..].to_vec())).collect(),
            n,
        ))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.rows().iter().map(QVector::to_strings).collect()
    }

    pub fn hconcat(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.rows, other.rows);
        let rows = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).into_inner();
                r.extend(other.row(i).into_inner());
                QVector(r)
            })
            .collect();
        QMatrix::from_rows(rows, self.cols + other.cols)
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.to_strings().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl Serialize for QMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

/// Reduces `rows` (each of length `width` or more; only the first `width`
/// columns are used for pivoting) to reduced row echelon form. Zero rows are
/// dropped. Returns pivot columns.
fn rref_in_place(rows: &mut Vec<Vec<Q>>, width: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(p, r);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i == r || rows[i][col].is_zero() {
                continue;
            }
            let f = rows[i][col].clone();
            let (head, tail) = if i < r {
                let (a, b) = rows.split_at_mut(r);
                (&mut a[i], &b[0])
            } else {
                let (a, b) = rows.split_at_mut(i);
                (&mut b[0], &a[r])
            };
            for (x, y) in head.iter_mut().zip(tail.iter()) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Reduced row echelon form of the span of `vectors` (nonzero rows only).
pub fn rref(vectors: &[QVector]) -> (Vec<QVector>, Vec<usize>) {
    let Some(width) = vectors.first().map(QVector::len) else {
        return (Vec::new(), Vec::new());
    };
    let mut rows: Vec<Vec<Q>> = vectors.iter().map(|v| v.0.clone()).collect();
    let pivots = rref_in_place(&mut rows, width);
    (rows.into_iter().map(QVector).collect(), pivots)
}

pub fn rank(vectors: &[QVector]) -> usize {
    rref(vectors).1.len()
}

/// Canonical basis of `{x : <v, x> = 0 for all v}` in dimension `n`, one
/// vector per free column of the reduced echelon form, each primitive.
pub fn nullspace(vectors: &[QVector], n: usize) -> Vec<QVector> {
    let (rows, pivots) = rref(vectors);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = QVector::zeros(n);
            v.0[f] = Q::one();
            for (row, &p) in rows.iter().zip(&pivots) {
                v.0[p] = -row[f].clone();
            }
            v.primitive()
        })
        .collect()
}

/// Solves `A x = b` for square invertible `A`.
pub fn solve(a: &QMatrix, b: &QVector) -> Option<QVector> {
    let n = a.nrows();
    if !a.is_square() || b.len() != n {
        return None;
    }
    let mut aug: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut r = a.row(i).into_inner();
            r.push(b[i].clone());
            r
        })
        .collect();
    let pivots = rref_in_place(&mut aug, n);
    if pivots.len() < n {
        return None;
    }
    Some(QVector(aug.into_iter().map(|r| r[n].clone()).collect()))
}

/// Some solution of `A x = b` for arbitrary `A`, or `None` if inconsistent.
pub fn solve_any(a: &QMatrix, b: &QVector) -> Option<QVector> {
    let n = a.ncols();
    let mut aug: Vec<Vec<Q>> = (0..a.nrows())
        .map(|i| {
            let mut r = a.row(i).into_inner();
            r.push(b[i].clone());
            r
        })
        .collect();
    if aug.is_empty() {
        return Some(QVector::zeros(n));
    }
    let pivots = rref_in_place(&mut aug, n + 1);
    if pivots.contains(&n) {
        return None;
    }
    let mut x = QVector::zeros(n);
    for (row, &p) in aug.iter().zip(&pivots) {
        x.0[p] = row[n].clone();
    }
    Some(x)
}

/// Lexicographic comparison used for every deterministic ordering of rays.
pub fn lex_cmp(a: &QVector, b: &QVector) -> Ordering {
    a.cmp(b)
}
