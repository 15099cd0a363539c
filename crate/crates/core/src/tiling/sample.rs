//! Seeded lattice samplers.
//!
//! Interior points come from rejection sampling of integer points in the box
//! `[-B, B]^n`; every strict condition must hold with margin at least `1/B`,
//! so irrational boundary rays are never touched.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::PolyCone;
use crate::num::{q, QMatrix, QVector, Q};

use super::TilingError;

/// A cone given by linear inequalities `<a, x> >= 0` (an exact description
/// or an outer approximation of its closure) and optional quadratic forms
/// `x^T Q x > 0` carving out its interior.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct AmbientRegion {
    rank: usize,
    closure: Vec<QVector>,
    strict_quadratic: Vec<QMatrix>,
}

impl AmbientRegion {
    pub fn new(
        rank: usize,
        closure: Vec<QVector>,
        strict_quadratic: Vec<QMatrix>,
    ) -> Result<Self, TilingError> {
        let bad_linear = closure.iter().any(|a| a.len() != rank);
        let bad_quadratic = strict_quadratic
            .iter()
            .any(|m| m.nrows() != rank || m.ncols() != rank);
        if bad_linear || bad_quadratic {
            return Err(TilingError::AmbientShape { rank });
        }
        Ok(AmbientRegion {
            rank,
            closure,
            strict_quadratic,
        })
    }

    /// The exact region of a polyhedral cone.
    pub fn from_cone(c: &PolyCone) -> Self {
        AmbientRegion {
            rank: c.rank(),
            closure: c.inequalities().to_vec(),
            strict_quadratic: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn linear(&self) -> &[QVector] {
        &self.closure
    }

    pub fn quadratic(&self) -> &[QMatrix] {
        &self.strict_quadratic
    }

    /// True when the region is exactly the polyhedral cone of its linear part.
    pub fn is_polyhedral(&self) -> bool {
        self.strict_quadratic.is_empty()
    }

    pub fn closure_cone(&self) -> PolyCone {
        PolyCone::from_inequalities(self.rank, &self.closure).expect("validated shape")
    }

    fn quad(m: &QMatrix, x: &QVector) -> Q {
        x.dot(&m.mul_vec(x))
    }

    pub fn closure_contains(&self, x: &QVector) -> bool {
        x.len() == self.rank
            && self.closure.iter().all(|a| a.dot(x) >= Q::zero())
            && self
                .strict_quadratic
                .iter()
                .all(|m| Self::quad(m, x) >= Q::zero())
    }

    pub fn contains_cone(&self, c: &PolyCone) -> bool {
        c.generators().iter().all(|g| self.closure_contains(g))
    }

    /// Every condition holds strictly, with value at least `margin`.
    pub fn strictly_contains(&self, x: &QVector, margin: &Q) -> bool {
        x.len() == self.rank
            && self.closure.iter().all(|a| a.dot(x) >= *margin)
            && self
                .strict_quadratic
                .iter()
                .all(|m| Self::quad(m, x) >= *margin)
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> QVector {
    QVector::new((0..n).map(|_| q(rng.gen_range(-bound..=bound))).collect())
}

/// `count` integer points of the strict region, in draw order.
pub fn sample_interior(
    region: &AmbientRegion,
    count: usize,
    seed: u64,
    bound: i64,
) -> Result<Vec<QVector>, TilingError> {
    let bound = bound.max(1);
    let margin = Q::new(BigInt::one(), BigInt::from(bound));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 10_000usize.max(2_000 * count);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == max_attempts {
            return Err(TilingError::NoInteriorPoints {
                attempts,
                found: out.len(),
            });
        }
        attempts += 1;
        let x = random_point(&mut rng, region.rank, bound);
        if region.strictly_contains(&x, &margin) {
            out.push(x);
        }
    }
    Ok(out)
}

/// `count` points of the relative interior of `c`: positive integer
/// combinations of its canonical generators with coefficients in `1..=B`.
pub fn sample_relative_interior(c: &PolyCone, count: usize, seed: u64, bound: i64) -> Vec<QVector> {
    if c.is_zero() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            c.generators().iter().fold(QVector::zeros(c.rank()), |acc, g| {
                acc.add(&g.scale(&q(rng.gen_range(1..=bound.max(1)))))
            })
        })
        .collect()
}
