//! Unimodular integer matrix groups acting on the lattice.
//!
//! Groups are given by finite generating sets and are never assumed to be
//! finite. Every enumeration goes through an orbit ball of explicit radius,
//! deduplicated by matrix, with a global element cap.

use std::collections::HashMap;

use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::cone::{ConeError, PolyCone};
use crate::num::{QMatrix, QVector};

/// Default cap on the number of elements of an orbit ball.
pub const DEFAULT_BUDGET_CAP: usize = 100_000;

/// Environment variable overriding [`DEFAULT_BUDGET_CAP`].
pub const BUDGET_CAP_ENV: &str = "CONETOOL_BUDGET_CAP";

pub fn budget_cap_from_env() -> usize {
    std::env::var(BUDGET_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET_CAP)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("generator {index}: not a square matrix ({rows}x{cols})")]
    NotSquare { index: usize, rows: usize, cols: usize },
    #[error("generator {index}: size {found} does not match rank {expected}")]
    RankMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("generator {index}: entries are not integers")]
    NotIntegral { index: usize },
    #[error("generator {index}: determinant {det}")]
    NotUnimodular { index: usize, det: String },
    #[error("generator {index} does not preserve the invariant cone: ray {ray} maps outside")]
    ViolatesInvariantCone { index: usize, ray: String },
    #[error("orbit ball of radius {radius} exceeds the budget cap of {cap} elements")]
    BudgetExceeded { radius: usize, cap: usize },
    #[error("rank mismatch: group acts on rank {expected}, object has rank {found}")]
    ActRankMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// A group element with the word that produced it.
///
/// The word lists signed 1-based generator indices (`-k` is the inverse of
/// generator `k`); the matrix is the left-to-right product of the letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    matrix: QMatrix,
    inverse: QMatrix,
    word: Vec<i32>,
}

impl GroupElement {
    pub fn identity(rank: usize) -> Self {
        GroupElement {
            matrix: QMatrix::identity(rank),
            inverse: QMatrix::identity(rank),
            word: Vec::new(),
        }
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &QMatrix {
        &self.inverse
    }

    pub fn word(&self) -> &[i32] {
        &self.word
    }

    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
            word: self.word.iter().rev().map(|l| -l).collect(),
        }
    }

    /// `self · other`
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        GroupElement {
            matrix: self.matrix.mul(&other.matrix),
            inverse: other.inverse.mul(&self.inverse),
            word,
        }
    }

    pub fn act_vector(&self, x: &QVector) -> Result<QVector, ActionError> {
        if x.len() != self.rank() {
            return Err(ActionError::ActRankMismatch {
                expected: self.rank(),
                found: x.len(),
            });
        }
        Ok(self.matrix.mul_vec(x))
    }

    /// Generators are mapped by the matrix, inequalities by its inverse
    /// transpose.
    pub fn act_cone(&self, c: &PolyCone) -> Result<PolyCone, ActionError> {
        if c.rank() != self.rank() {
            return Err(ActionError::ActRankMismatch {
                expected: self.rank(),
                found: c.rank(),
            });
        }
        Ok(c.transform_invertible(&self.matrix, &self.inverse)?)
    }

    /// `g^T ξ`, the pairing partner used by Dirichlet cuts.
    pub fn transpose_apply(&self, xi: &QVector) -> QVector {
        self.matrix.transpose().mul_vec(xi)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GroupElement", 2)?;
        st.serialize_field("matrix", &self.matrix)?;
        st.serialize_field("word", &self.word)?;
        st.end()
    }
}

/// A subgroup of `GL(V_Z)` given by generators.
#[derive(Clone, Debug)]
pub struct ActionGroup {
    rank: usize,
    /// Each input generator followed by its inverse.
    letters: Vec<GroupElement>,
    base: Vec<QMatrix>,
    invariant_cone: Option<PolyCone>,
    cap: usize,
}

/// Output of [`ActionGroup::ball`]: the elements plus whether the ball had
/// already stopped growing, in which case it is the whole group.
#[derive(Clone, Debug)]
pub struct Ball {
    pub elements: Vec<GroupElement>,
    pub complete: bool,
}

impl ActionGroup {
    /// Validates generators (square, integral, determinant ±1) and, when an
    /// invariant cone is given, that each generator and its inverse maps the
    /// cone's generators back into the cone.
    pub fn new(
        rank: usize,
        gens: Vec<QMatrix>,
        invariant_cone: Option<PolyCone>,
    ) -> Result<Self, ActionError> {
        let mut letters = Vec::with_capacity(2 * gens.len());
        for (index, g) in gens.iter().enumerate() {
            if !g.is_square() {
                return Err(ActionError::NotSquare {
                    index,
                    rows: g.nrows(),
                    cols: g.ncols(),
                });
            }
            if g.nrows() != rank {
                return Err(ActionError::RankMismatch {
                    index,
                    expected: rank,
                    found: g.nrows(),
                });
            }
            if !g.is_integral() {
                return Err(ActionError::NotIntegral { index });
            }
            let det = g.determinant();
            if !det.abs().is_one() {
                return Err(ActionError::NotUnimodular {
                    index,
                    det: det.to_string(),
                });
            }
            let inv = g.inverse().expect("unimodular matrix is invertible");
            if let Some(c) = &invariant_cone {
                if c.rank() != rank {
                    return Err(ConeError::DimensionMismatch {
                        expected: rank,
                        found: c.rank(),
                    }
                    .into());
                }
                for m in [g, &inv] {
                    if let Some(r) = c
                        .generators()
                        .iter()
                        .find(|r| !c.contains_unchecked(&m.mul_vec(r)))
                    {
                        return Err(ActionError::ViolatesInvariantCone {
                            index,
                            ray: r.to_string(),
                        });
                    }
                }
            }
            let letter = index as i32 + 1;
            letters.push(GroupElement {
                matrix: g.clone(),
                inverse: inv.clone(),
                word: vec![letter],
            });
            letters.push(GroupElement {
                matrix: inv,
                inverse: g.clone(),
                word: vec![-letter],
            });
        }
        Ok(ActionGroup {
            rank,
            letters,
            base: gens,
            invariant_cone,
            cap: budget_cap_from_env(),
        })
    }

    pub fn trivial(rank: usize) -> Self {
        Self::new(rank, Vec::new(), None).expect("empty generating set")
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The input generators, without inverses.
    pub fn generator_matrices(&self) -> &[QMatrix] {
        &self.base
    }

    /// Generators interleaved with their inverses: `g1, g1^-1, g2, ...`.
    pub fn letters(&self) -> &[GroupElement] {
        &self.letters
    }

    pub fn invariant_cone(&self) -> Option<&PolyCone> {
        self.invariant_cone.as_ref()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.rank)
    }

    /// Matrix of a word in the generators.
    pub fn matrix_of_word(&self, word: &[i32]) -> QMatrix {
        word.iter().fold(QMatrix::identity(self.rank), |acc, &l| {
            let g = &self.base[l.unsigned_abs() as usize - 1];
            let m = if l > 0 {
                g.clone()
            } else {
                g.inverse().expect("unimodular")
            };
            acc.mul(&m)
        })
    }

    /// Breadth-first ball of words of length at most `radius`, deduplicated
    /// by matrix (the first, hence shortest, word is kept).
    pub fn ball(&self, radius: usize) -> Result<Ball, ActionError> {
        let mut seen: HashMap<QMatrix, ()> = HashMap::new();
        let id = self.identity();
        seen.insert(id.matrix.clone(), ());
        let mut elements = vec![id.clone()];
        let mut frontier = vec![id];
        let mut level = 0;
        loop {
            // One level past the radius is explored only to learn whether the
            // ball has stopped growing.
            let probing = level == radius;
            let mut next = Vec::new();
            for e in &frontier {
                for s in &self.letters {
                    let m = s.matrix.mul(&e.matrix);
                    if seen.contains_key(&m) {
                        continue;
                    }
                    if probing {
                        return Ok(Ball {
                            elements,
                            complete: false,
                        });
                    }
                    seen.insert(m.clone(), ());
                    let mut word = s.word.clone();
                    word.extend_from_slice(&e.word);
                    next.push(GroupElement {
                        matrix: m,
                        inverse: e.inverse.mul(&s.inverse),
                        word,
                    });
                    if elements.len() + next.len() > self.cap {
                        return Err(ActionError::BudgetExceeded {
                            radius,
                            cap: self.cap,
                        });
                    }
                }
            }
            if next.is_empty() {
                return Ok(Ball {
                    elements,
                    complete: true,
                });
            }
            elements.extend(next.iter().cloned());
            frontier = next;
            level += 1;
        }
    }

    pub fn orbit_ball(&self, radius: usize) -> Result<Vec<GroupElement>, ActionError> {
        Ok(self.ball(radius)?.elements)
    }

    /// Ball elements fixing `c` as a set.
    pub fn stabilizer_in_ball(
        &self,
        c: &PolyCone,
        radius: usize,
    ) -> Result<Vec<GroupElement>, ActionError> {
        let ball = self.orbit_ball(radius)?;
        let mut out = Vec::new();
        for g in ball {
            if g.act_cone(c)? == *c {
                out.push(g);
            }
        }
        Ok(out)
    }

    /// The group generated by a finite set of elements, e.g. a stabilizer
    /// window. Identity elements are dropped.
    pub fn from_elements(rank: usize, elements: &[GroupElement]) -> Result<Self, ActionError> {
        let gens: Vec<QMatrix> = elements
            .iter()
            .filter(|g| !g.is_identity())
            .map(|g| g.matrix.clone())
            .collect();
        Ok(Self::new(rank, gens, None)?)
    }
}

impl Serialize for ActionGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ActionGroup", 3)?;
        st.serialize_field("rank", &self.rank)?;
        st.serialize_field("gens", &self.base)?;
        st.serialize_field("invariant_cone", &self.invariant_cone)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pell() -> QMatrix {
        QMatrix::from_i64(&[&[3, 4], &[2, 3]])
    }

    fn swap() -> QMatrix {
        QMatrix::from_i64(&[&[0, 1], &[1, 0]])
    }

    #[test]
    fn identity_generates_trivial_group() {
        let g = ActionGroup::new(2, vec![QMatrix::identity(2)], None).unwrap();
        let ball = g.ball(5).unwrap();
        assert_eq!(ball.elements.len(), 1);
        assert!(ball.complete);
    }

    #[test]
    fn swap_group_preserves_quadrant() {
        let g = ActionGroup::new(2, vec![swap()], Some(PolyCone::orthant(2))).unwrap();
        let ball = g.ball(3).unwrap();
        assert_eq!(ball.elements.len(), 2);
        assert!(ball.complete);
    }

    #[test]
    fn pell_rejected_by_rational_outer_cone() {
        // x >= |y| contains the Pell cone but is not preserved by g.
        let outer = PolyCone::from_inequalities(
            2,
            &[QVector::from_ints(&[1, -1]), QVector::from_ints(&[1, 1])],
        )
        .unwrap();
        let err = ActionGroup::new(2, vec![pell()], Some(outer)).unwrap_err();
        assert!(matches!(err, ActionError::ViolatesInvariantCone { index: 0, .. }));
        assert!(ActionGroup::new(2, vec![pell()], None).is_ok());
    }

    #[test]
    fn non_unimodular_generator() {
        let err = ActionGroup::new(2, vec![QMatrix::from_i64(&[&[2, 0], &[0, 1]])], None)
            .unwrap_err();
        assert_eq!(err.to_string(), "generator 0: determinant 2");
    }

    #[test]
    fn pell_ball_has_seven_elements() {
        let g = ActionGroup::new(2, vec![pell()], None).unwrap();
        let ball = g.ball(3).unwrap();
        assert_eq!(ball.elements.len(), 7);
        assert!(!ball.complete);
        let mut power = QMatrix::identity(2);
        for _ in 0..3 {
            power = power.mul(&pell());
        }
        assert!(ball.elements.iter().any(|e| e.matrix == power));
    }

    #[test]
    fn budget_cap_is_enforced() {
        let g = ActionGroup::new(2, vec![pell()], None).unwrap().with_cap(4);
        assert!(matches!(
            g.ball(3),
            Err(ActionError::BudgetExceeded { cap: 4, .. })
        ));
    }

    #[test]
    fn act_examples() {
        let g = ActionGroup::new(2, vec![swap(), pell()], None).unwrap();
        let s = &g.letters()[0];
        assert_eq!(
            s.act_vector(&QVector::from_ints(&[1, 0])).unwrap(),
            QVector::from_ints(&[0, 1])
        );
        let p = &g.letters()[2];
        let tile = PolyCone::from_int_rays(2, &[&[1, 0], &[3, 2]]);
        assert_eq!(
            p.act_cone(&tile).unwrap(),
            PolyCone::from_int_rays(2, &[&[3, 2], &[17, 12]])
        );
        assert!(g.identity().act_cone(&tile).unwrap() == tile);
        assert!(s.act_vector(&QVector::from_ints(&[1])).is_err());
    }

    #[test]
    fn stabilizer_examples() {
        let g = ActionGroup::new(2, vec![swap()], None).unwrap();
        let half = PolyCone::from_int_rays(2, &[&[1, 0], &[1, 1]]);
        assert_eq!(g.stabilizer_in_ball(&half, 3).unwrap().len(), 1);
        assert_eq!(g.stabilizer_in_ball(&PolyCone::orthant(2), 3).unwrap().len(), 2);
        let p = ActionGroup::new(2, vec![pell()], None).unwrap();
        assert_eq!(p.stabilizer_in_ball(&PolyCone::full(2), 2).unwrap().len(), 5);
    }
}
