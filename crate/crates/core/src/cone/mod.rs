//! Exact rational polyhedral cones.
//!
//! A [`PolyCone`] always carries both descriptions in canonical form:
//!
//! * generators: the extreme rays of the pointed part plus `±b` for a
//!   canonical basis `b` of the lineality space;
//! * inequalities: the facet normals (taken inside the linear span of the
//!   cone) plus `±e` for a canonical basis `e` of the orthogonal complement
//!   of the span, i.e. the implicit equalities.
//!
//! All vectors are primitive integer vectors and both lists are sorted
//! lexicographically, so two cones are equal as sets exactly when they are
//! equal as values.

mod dd;

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::num::{rank, QMatrix, QVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("dimension mismatch: expected rank {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix shape {rows}x{cols} incompatible with cone of rank {rank}")]
    ShapeMismatch { rows: usize, cols: usize, rank: usize },
    #[error("generator and inequality descriptions define different cones")]
    RepresentationMismatch,
    #[error("cone of dimension {dim} in rank {rank} is not full-dimensional")]
    NotFullDimensional { dim: usize, rank: usize },
    #[error("ambient rank must be positive")]
    ZeroRank,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyCone {
    rank: usize,
    rays: Vec<QVector>,
    lineality: Vec<QVector>,
    facets: Vec<QVector>,
    equalities: Vec<QVector>,
    generators: Vec<QVector>,
    inequalities: Vec<QVector>,
}

fn check_lengths(rank: usize, vs: &[QVector]) -> Result<(), ConeError> {
    if rank == 0 {
        return Err(ConeError::ZeroRank);
    }
    match vs.iter().find(|v| v.len() != rank) {
        Some(v) => Err(ConeError::DimensionMismatch {
            expected: rank,
            found: v.len(),
        }),
        None => Ok(()),
    }
}

fn with_negatives(base: &[QVector], basis: &[QVector]) -> Vec<QVector> {
    let mut out: Vec<QVector> = base.to_vec();
    for b in basis {
        out.push(b.clone());
        out.push(b.neg());
    }
    out.sort();
    out
}

impl PolyCone {
    /// The cone generated by `rays` (V-representation input).
    pub fn from_rays(rank: usize, rays: &[QVector]) -> Result<Self, ConeError> {
        check_lengths(rank, rays)?;
        let dual = dd::convert(rays, rank);
        let inequalities = with_negatives(&dual.rays, &dual.lineality);
        Ok(Self::assemble(rank, &inequalities, dual.rays, dual.lineality))
    }

    /// The cone `{x : <a, x> >= 0 for every a}` (H-representation input).
    pub fn from_inequalities(rank: usize, ineqs: &[QVector]) -> Result<Self, ConeError> {
        check_lengths(rank, ineqs)?;
        let primal = dd::convert(ineqs, rank);
        let generators = with_negatives(&primal.rays, &primal.lineality);
        let dual = dd::convert(&generators, rank);
        Ok(PolyCone {
            rank,
            generators,
            inequalities: with_negatives(&dual.rays, &dual.lineality),
            rays: primal.rays,
            lineality: primal.lineality,
            facets: dual.rays,
            equalities: dual.lineality,
        })
    }

    /// Both descriptions supplied by the caller; they must agree.
    pub fn from_both(
        rank: usize,
        rays: &[QVector],
        ineqs: &[QVector],
    ) -> Result<Self, ConeError> {
        let a = Self::from_rays(rank, rays)?;
        let b = Self::from_inequalities(rank, ineqs)?;
        if a != b {
            return Err(ConeError::RepresentationMismatch);
        }
        Ok(a)
    }

    fn assemble(
        rank: usize,
        inequalities: &[QVector],
        facets: Vec<QVector>,
        equalities: Vec<QVector>,
    ) -> Self {
        let primal = dd::convert(inequalities, rank);
        PolyCone {
            rank,
            generators: with_negatives(&primal.rays, &primal.lineality),
            inequalities: inequalities.to_vec(),
            rays: primal.rays,
            lineality: primal.lineality,
            facets,
            equalities,
        }
    }

    pub fn zero(rank: usize) -> Self {
        Self::from_rays(rank, &[]).expect("positive rank")
    }

    pub fn full(rank: usize) -> Self {
        Self::from_inequalities(rank, &[]).expect("positive rank")
    }

    pub fn orthant(rank: usize) -> Self {
        let units: Vec<QVector> = (0..rank).map(|i| QVector::unit(rank, i)).collect();
        Self::from_rays(rank, &units).expect("positive rank")
    }

    pub fn ray(v: QVector) -> Self {
        let n = v.len();
        Self::from_rays(n, &[v]).expect("positive rank")
    }

    /// Convenience constructor from integer rays.
    pub fn from_int_rays(rank: usize, rays: &[&[i64]]) -> Self {
        let rays: Vec<QVector> = rays.iter().map(|r| QVector::from_ints(r)).collect();
        Self::from_rays(rank, &rays).expect("well-formed integer rays")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Canonical generators: extreme rays and `±` lineality basis, sorted.
    pub fn generators(&self) -> &[QVector] {
        &self.generators
    }

    /// Canonical inequalities: facet normals and `±` equalities, sorted.
    pub fn inequalities(&self) -> &[QVector] {
        &self.inequalities
    }

    pub fn extreme_rays(&self) -> &[QVector] {
        &self.rays
    }

    pub fn lineality_basis(&self) -> &[QVector] {
        &self.lineality
    }

    pub fn facet_normals(&self) -> &[QVector] {
        &self.facets
    }

    pub fn equality_basis(&self) -> &[QVector] {
        &self.equalities
    }

    fn check_point(&self, p: &QVector) -> Result<(), ConeError> {
        if p.len() != self.rank {
            return Err(ConeError::DimensionMismatch {
                expected: self.rank,
                found: p.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, p: &QVector) -> Result<bool, ConeError> {
        self.check_point(p)?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &QVector) -> bool {
        self.inequalities.iter().all(|a| !a.dot(p).is_negative())
    }

    /// Membership in the relative interior.
    pub fn relative_interior_contains(&self, p: &QVector) -> Result<bool, ConeError> {
        self.check_point(p)?;
        Ok(self.equalities.iter().all(|e| e.dot(p).is_zero())
            && self.facets.iter().all(|a| a.dot(p).is_positive()))
    }

    /// Strict interior membership; false for every point of a cone that is
    /// not full-dimensional.
    pub fn interior_contains(&self, p: &QVector) -> Result<bool, ConeError> {
        Ok(self.is_full_dimensional() && self.relative_interior_contains(p)?)
    }

    pub fn contains_cone(&self, other: &PolyCone) -> bool {
        self.rank == other.rank
            && other
                .generators
                .iter()
                .all(|g| self.contains_unchecked(g))
    }

    pub fn dim(&self) -> usize {
        self.rank - self.equalities.len()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.equalities.is_empty()
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    /// Sum of the canonical generators; lies in the relative interior.
    pub fn relative_interior_point(&self) -> QVector {
        QVector::sum(self.rank, &self.generators)
    }

    pub fn intersect(&self, other: &PolyCone) -> Result<PolyCone, ConeError> {
        self.same_rank(other)?;
        let mut ineqs = self.inequalities.clone();
        ineqs.extend(other.inequalities.iter().cloned());
        PolyCone::from_inequalities(self.rank, &ineqs)
    }

    /// Minkowski sum.
    pub fn sum(&self, other: &PolyCone) -> Result<PolyCone, ConeError> {
        self.same_rank(other)?;
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        PolyCone::from_rays(self.rank, &gens)
    }

    pub fn sum_all<'a>(
        rank: usize,
        cones: impl IntoIterator<Item = &'a PolyCone>,
    ) -> Result<PolyCone, ConeError> {
        let mut gens = Vec::new();
        for c in cones {
            if c.rank != rank {
                return Err(ConeError::DimensionMismatch {
                    expected: rank,
                    found: c.rank,
                });
            }
            gens.extend(c.generators.iter().cloned());
        }
        PolyCone::from_rays(rank, &gens)
    }

    fn same_rank(&self, other: &PolyCone) -> Result<(), ConeError> {
        if self.rank != other.rank {
            return Err(ConeError::DimensionMismatch {
                expected: self.rank,
                found: other.rank,
            });
        }
        Ok(())
    }

    /// Image under `m` (an `m x n` matrix acting on column vectors).
    pub fn linear_image(&self, m: &QMatrix) -> Result<PolyCone, ConeError> {
        if m.ncols() != self.rank || m.nrows() == 0 {
            return Err(ConeError::ShapeMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                rank: self.rank,
            });
        }
        let gens: Vec<QVector> = self.generators.iter().map(|g| m.mul_vec(g)).collect();
        PolyCone::from_rays(m.nrows(), &gens)
    }

    /// `{x : m x in self}`; normals are pulled back as `a -> m^T a`.
    pub fn linear_preimage(&self, m: &QMatrix) -> Result<PolyCone, ConeError> {
        if m.nrows() != self.rank || m.ncols() == 0 {
            return Err(ConeError::ShapeMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                rank: self.rank,
            });
        }
        let t = m.transpose();
        let ineqs: Vec<QVector> = self.inequalities.iter().map(|a| t.mul_vec(a)).collect();
        PolyCone::from_inequalities(m.ncols(), &ineqs)
    }

    /// Image under an invertible map given with its inverse. Pointed cones
    /// skip the double description pass: extreme rays map to extreme rays
    /// and facet normals transform by the inverse transpose.
    pub fn transform_invertible(
        &self,
        m: &QMatrix,
        inverse: &QMatrix,
    ) -> Result<PolyCone, ConeError> {
        if !m.is_square() || m.nrows() != self.rank {
            return Err(ConeError::ShapeMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                rank: self.rank,
            });
        }
        if !self.lineality.is_empty() || !self.equalities.is_empty() {
            return self.linear_image(m);
        }
        let inv_t = inverse.transpose();
        let mut rays: Vec<QVector> = self.rays.iter().map(|r| m.mul_vec(r).primitive()).collect();
        let mut facets: Vec<QVector> = self
            .facets
            .iter()
            .map(|a| inv_t.mul_vec(a).primitive())
            .collect();
        rays.sort();
        facets.sort();
        Ok(PolyCone {
            rank: self.rank,
            generators: rays.clone(),
            inequalities: facets.clone(),
            rays,
            lineality: Vec::new(),
            facets,
            equalities: Vec::new(),
        })
    }

    /// Whether two full-dimensional cones have overlapping interiors.
    pub fn interiors_intersect(&self, other: &PolyCone) -> Result<bool, ConeError> {
        self.same_rank(other)?;
        for c in [self, other] {
            if !c.is_full_dimensional() {
                return Err(ConeError::NotFullDimensional {
                    dim: c.dim(),
                    rank: c.rank,
                });
            }
        }
        Ok(self.intersect(other)?.is_full_dimensional())
    }

    /// For a rational polyhedral cone the convex cone generated by its
    /// lattice points is the cone itself.
    pub fn plus_closure(&self) -> PolyCone {
        self.clone()
    }

    /// All faces, from `{0}` (or the lineality space) up to the cone itself,
    /// ordered by dimension then by generators.
    pub fn faces(&self) -> Vec<Face> {
        let parent = Arc::new(self.clone());
        let gens = &self.generators;
        let ineqs = &self.inequalities;
        let active_of = |gset: &[usize]| -> Vec<usize> {
            (0..ineqs.len())
                .filter(|&j| gset.iter().all(|&g| ineqs[j].dot(&gens[g]).is_zero()))
                .collect()
        };
        let top: Vec<usize> = (0..gens.len()).collect();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue = VecDeque::from([top.clone()]);
        seen.insert(top);
        let mut faces = Vec::new();
        while let Some(gset) = queue.pop_front() {
            let active = active_of(&gset);
            for j in (0..ineqs.len()).filter(|j| !active.contains(j)) {
                let sub: Vec<usize> = gset
                    .iter()
                    .copied()
                    .filter(|&g| ineqs[j].dot(&gens[g]).is_zero())
                    .collect();
                if seen.insert(sub.clone()) {
                    queue.push_back(sub);
                }
            }
            let face_gens: Vec<QVector> = gset.iter().map(|&g| gens[g].clone()).collect();
            let cone = PolyCone::from_rays(self.rank, &face_gens).expect("same rank");
            faces.push(Face {
                parent: Arc::clone(&parent),
                active_inequalities: active,
                cone,
            });
        }
        faces.sort_by(|a, b| {
            (a.cone.dim(), a.cone.generators()).cmp(&(b.cone.dim(), b.cone.generators()))
        });
        faces
    }

    /// Whether `self` is one of the faces of `other`.
    pub fn is_face_of(&self, other: &PolyCone) -> bool {
        other.contains_cone(self) && other.faces().iter().any(|f| f.cone == *self)
    }

    pub fn generator_matrix_rank(&self) -> usize {
        if self.generators.is_empty() {
            0
        } else {
            rank(&self.generators)
        }
    }
}

impl std::fmt::Debug for PolyCone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cone{:?}", self.generators)
    }
}

impl Serialize for PolyCone {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PolyCone", 3)?;
        st.serialize_field("rank", &self.rank)?;
        st.serialize_field("rays", &self.generators)?;
        st.serialize_field("ineqs", &self.inequalities)?;
        st.end()
    }
}

/// A face of a cone together with the parent inequalities that vanish on it.
#[derive(Clone, Debug)]
pub struct Face {
    pub parent: Arc<PolyCone>,
    /// Indices into `parent.inequalities()`.
    pub active_inequalities: Vec<usize>,
    pub cone: PolyCone,
}

impl Face {
    /// Checks the segment characterisation of a face on the closed segment
    /// `[a, b]`, which must lie in the parent: if it meets the face, either
    /// it is contained in the face or it meets it in one endpoint only.
    pub fn segment_property(&self, a: &QVector, b: &QVector) -> bool {
        let ina = self.cone.contains_unchecked(a);
        let inb = self.cone.contains_unchecked(b);
        let mid = a.add(b).scale(&crate::num::frac(1, 2));
        let inmid = self.cone.contains_unchecked(&mid);
        // An interior point of the segment lying in the face forces the
        // whole segment into it.
        if ina && inb {
            inmid
        } else {
            !inmid
        }
    }
}
