//! Chamber systems built from marking data.
//!
//! A [`Marking`] models a birational contraction `f: X ⇢ Y` by its pullback
//! matrix and exceptional classes; a [`Chamber`] adds a rational polyhedral
//! model of the target's nef cone and yields the chamber cone
//! `f^* Nef(Y) + Σ R_{≥0} E`. A [`ChamberSystem`] collects chambers under a
//! group action, and the pipeline functions turn chamber-level tiles into
//! certificates for the effective, movable and nef cones.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{ActionError, ActionGroup, GroupElement};
use crate::cone::{ConeError, PolyCone};
use crate::num::{rank, solve_any, QMatrix, QVector, Q};
use crate::tiling::{
    digest, glue_chambers, sample_interior, sample_relative_interior, AmbientRegion, Budgets,
    Certificate, CertificateKind, ChamberTile, FaceDescent, Parameters, TiledCone, TilingError,
    Verdict, Witness,
};

const MAX_WITNESSES: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChamberError {
    #[error("marking {id}: pullback is {rows}x{cols}, expected {expected} rows")]
    PullbackShape {
        id: String,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("marking {id}: pullback does not have full column rank")]
    PullbackNotInjective { id: String },
    #[error("marking {id}: pullback columns and exceptional rays are not independent")]
    NotDirectSum { id: String },
    #[error("marking {id}: declared {declared:?} but data describes {derived:?}")]
    KindMismatch {
        id: String,
        declared: MarkingKind,
        derived: MarkingKind,
    },
    #[error("marking {id}: expected a small modification (square, no exceptional rays)")]
    NotSqm { id: String },
    #[error("chamber {id}: target nef model must be strictly convex and full-dimensional in rank {rank}")]
    DegenerateNef { id: String, rank: usize },
    #[error("chamber {id}: chamber cone is not full-dimensional")]
    ChamberNotFullDimensional { id: String },
    #[error("chamber {id}: tile is not contained in the chamber cone")]
    TileOutsideChamber { id: String },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("duplicate chamber id {id}")]
    DuplicateId { id: String },
    #[error("dichotomy violation: chambers {first} and {second} overlap in their interiors but differ")]
    Dichotomy { first: String, second: String },
    #[error("generator letter {letter} maps chamber {chamber} onto a cone that overlaps listed chambers without matching one")]
    NotPermuted { letter: i32, chamber: String },
    #[error("movable systems admit only small modifications; chamber {id} is a contraction")]
    MovableNeedsSqm { id: String },
    #[error("chamber {chamber}: stabilizing element {word:?} does not preserve the exceptional subcone")]
    ExceptionalViolation { chamber: String, word: Vec<i32> },
    #[error("cone generator {ray} lies outside the target closure")]
    OutsideTarget { ray: String },
    #[error("{0}")]
    NotAFace(String),
    #[error("no chamber has the identity marking, so there is no ample model")]
    NoAmpleChamber,
    #[error("no listed chamber translate meets the tile")]
    NoChamberMeetsTile,
    #[error("no chamber carries a tile")]
    NoTiles,
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkingKind {
    #[serde(rename = "SQM")]
    Sqm,
    #[serde(rename = "QBC")]
    Qbc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Marking {
    id: String,
    source_rank: usize,
    target_rank: usize,
    pullback: QMatrix,
    exceptional_rays: Vec<QVector>,
    kind: MarkingKind,
}

impl Marking {
    /// Validates the pullback (`n x m`, injective) and the direct sum of its
    /// image with the span of the exceptional rays. The kind is derived from
    /// the data; a declared kind must agree with it.
    pub fn new(
        id: &str,
        source_rank: usize,
        pullback: QMatrix,
        exceptional_rays: Vec<QVector>,
        declared: Option<MarkingKind>,
    ) -> Result<Self, ChamberError> {
        let id = id.to_string();
        let m = pullback.ncols();
        if pullback.nrows() != source_rank || m > source_rank {
            return Err(ChamberError::PullbackShape {
                id,
                rows: pullback.nrows(),
                cols: m,
                expected: source_rank,
            });
        }
        if let Some(e) = exceptional_rays.iter().find(|e| e.len() != source_rank) {
            return Err(ChamberError::RankMismatch {
                expected: source_rank,
                found: e.len(),
            });
        }
        if pullback.rank() != m {
            return Err(ChamberError::PullbackNotInjective { id });
        }
        let mut span = pullback.columns();
        span.extend(exceptional_rays.iter().cloned());
        if rank(&span) != m + exceptional_rays.len() || exceptional_rays.iter().any(|e| e.is_zero()) {
            return Err(ChamberError::NotDirectSum { id });
        }
        let derived = if exceptional_rays.is_empty() && m == source_rank {
            MarkingKind::Sqm
        } else {
            MarkingKind::Qbc
        };
        if let Some(declared) = declared {
            if declared != derived {
                return Err(ChamberError::KindMismatch {
                    id,
                    declared,
                    derived,
                });
            }
        }
        Ok(Marking {
            id,
            source_rank,
            target_rank: m,
            pullback,
            exceptional_rays,
            kind: derived,
        })
    }

    pub fn identity(id: &str, n: usize) -> Self {
        Marking::new(id, n, QMatrix::identity(n), Vec::new(), None).expect("identity is valid")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn pullback(&self) -> &QMatrix {
        &self.pullback
    }

    pub fn exceptional_rays(&self) -> &[QVector] {
        &self.exceptional_rays
    }

    pub fn kind(&self) -> MarkingKind {
        self.kind
    }

    pub fn is_identity(&self) -> bool {
        self.kind == MarkingKind::Sqm && self.pullback.is_identity()
    }

    /// `(P^T P)^{-1} P^T`, the pushforward on the image of the pullback.
    pub fn left_inverse(&self) -> QMatrix {
        let pt = self.pullback.transpose();
        pt.mul(&self.pullback)
            .inverse()
            .expect("injective pullback")
            .mul(&pt)
    }
}

/// Marking of `f ∘ α` for a small modification `α` of the source: the
/// pullback becomes `α^* f^*` and exceptional classes move by `α^*`.
pub fn compose_marking(outer: &Marking, inner: &Marking) -> Result<Marking, ChamberError> {
    if inner.kind != MarkingKind::Sqm {
        return Err(ChamberError::NotSqm {
            id: inner.id.clone(),
        });
    }
    if inner.source_rank != outer.source_rank {
        return Err(ChamberError::RankMismatch {
            expected: outer.source_rank,
            found: inner.source_rank,
        });
    }
    let a = &inner.pullback;
    Marking::new(
        &format!("{}.{}", outer.id, inner.id),
        outer.source_rank,
        a.mul(&outer.pullback),
        outer.exceptional_rays.iter().map(|e| a.mul_vec(e)).collect(),
        None,
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chamber {
    marking: Marking,
    target_nef: PolyCone,
    tile: Option<PolyCone>,
    cone: PolyCone,
}

impl Serialize for Chamber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Chamber", 4)?;
        st.serialize_field("marking", &self.marking)?;
        st.serialize_field("target_nef", &self.target_nef)?;
        st.serialize_field("tile", &self.tile)?;
        st.serialize_field("cone", &self.cone)?;
        st.end()
    }
}

impl Chamber {
    pub fn new(marking: Marking, target_nef: PolyCone) -> Result<Self, ChamberError> {
        let m = marking.target_rank;
        if target_nef.rank() != m
            || !target_nef.is_strictly_convex()
            || !target_nef.is_full_dimensional()
        {
            return Err(ChamberError::DegenerateNef {
                id: marking.id.clone(),
                rank: m,
            });
        }
        let n = marking.source_rank;
        let mut gens: Vec<QVector> = if m == 0 {
            Vec::new()
        } else {
            target_nef.linear_image(&marking.pullback)?.generators().to_vec()
        };
        gens.extend(marking.exceptional_rays.iter().cloned());
        let cone = PolyCone::from_rays(n, &gens)?;
        if !cone.is_full_dimensional() {
            return Err(ChamberError::ChamberNotFullDimensional {
                id: marking.id.clone(),
            });
        }
        Ok(Chamber {
            marking,
            target_nef,
            tile: None,
            cone,
        })
    }

    /// Attaches an orbit-representative tile, which must lie in the cone.
    pub fn with_tile(mut self, tile: PolyCone) -> Result<Self, ChamberError> {
        if tile.rank() != self.cone.rank() || !self.cone.contains_cone(&tile) {
            return Err(ChamberError::TileOutsideChamber {
                id: self.marking.id.clone(),
            });
        }
        self.tile = Some(tile);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.marking.id
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    pub fn target_nef(&self) -> &PolyCone {
        &self.target_nef
    }

    pub fn tile(&self) -> Option<&PolyCone> {
        self.tile.as_ref()
    }

    pub fn cone(&self) -> &PolyCone {
        &self.cone
    }

    pub fn exceptional_cone(&self) -> PolyCone {
        PolyCone::from_rays(self.marking.source_rank, &self.marking.exceptional_rays)
            .expect("validated ranks")
    }
}

pub fn chamber_cone(ch: &Chamber) -> &PolyCone {
    ch.cone()
}

/// Whether two chambers coincide. Distinct listed chambers must have
/// disjoint interiors; overlapping but unequal cones are rejected.
pub fn chambers_equivalent(c1: &Chamber, c2: &Chamber) -> Result<bool, ChamberError> {
    if c1.cone.rank() != c2.cone.rank() {
        return Err(ChamberError::RankMismatch {
            expected: c1.cone.rank(),
            found: c2.cone.rank(),
        });
    }
    if !c1.cone.interiors_intersect(&c2.cone)? {
        return Ok(false);
    }
    if c1.cone != c2.cone {
        return Err(ChamberError::Dichotomy {
            first: c1.id().to_string(),
            second: c2.id().to_string(),
        });
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Effective,
    Movable,
}

#[derive(Clone, Debug)]
pub struct ChamberSystem {
    rank: usize,
    group: ActionGroup,
    chambers: Vec<Chamber>,
    target: AmbientRegion,
    kind: SystemKind,
}

impl Serialize for ChamberSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ChamberSystem", 5)?;
        st.serialize_field("rank", &self.rank)?;
        st.serialize_field("group", &self.group)?;
        st.serialize_field("chambers", &self.chambers)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("kind", &self.kind)?;
        st.end()
    }
}

impl ChamberSystem {
    /// Validates ranks, unique ids, the SQM-only rule for movable systems,
    /// and that every generator letter sends each listed chamber either onto
    /// a listed chamber or onto a cone whose interior avoids all of them.
    pub fn new(
        group: ActionGroup,
        chambers: Vec<Chamber>,
        target: AmbientRegion,
        kind: SystemKind,
    ) -> Result<Self, ChamberError> {
        let n = group.rank();
        if target.rank() != n {
            return Err(ChamberError::RankMismatch {
                expected: n,
                found: target.rank(),
            });
        }
        let mut ids = HashSet::new();
        for c in &chambers {
            if c.cone.rank() != n {
                return Err(ChamberError::RankMismatch {
                    expected: n,
                    found: c.cone.rank(),
                });
            }
            if !ids.insert(c.id().to_string()) {
                return Err(ChamberError::DuplicateId {
                    id: c.id().to_string(),
                });
            }
            if kind == SystemKind::Movable && c.marking.kind != MarkingKind::Sqm {
                return Err(ChamberError::MovableNeedsSqm {
                    id: c.id().to_string(),
                });
            }
        }
        for s in group.letters() {
            for c in &chambers {
                let moved = s.act_cone(&c.cone)?;
                if chambers.iter().any(|d| d.cone == moved) {
                    continue;
                }
                for d in &chambers {
                    if moved.interiors_intersect(&d.cone)? {
                        return Err(ChamberError::NotPermuted {
                            letter: s.word()[0],
                            chamber: c.id().to_string(),
                        });
                    }
                }
            }
        }
        Ok(ChamberSystem {
            rank: n,
            group,
            chambers,
            target,
            kind,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn group(&self) -> &ActionGroup {
        &self.group
    }

    pub fn chambers(&self) -> &[Chamber] {
        &self.chambers
    }

    pub fn chamber(&self, id: &str) -> Option<&Chamber> {
        self.chambers.iter().find(|c| c.id() == id)
    }

    pub fn target(&self) -> &AmbientRegion {
        &self.target
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    /// The chamber with identity marking: the ample model's nef cone.
    pub fn ample_chamber(&self) -> Option<&Chamber> {
        self.chambers.iter().find(|c| c.marking.is_identity())
    }

    /// First `(g, chamber index)` in ball order with `g x` in the chamber.
    pub fn locate(&self, x: &QVector, ball: &[GroupElement]) -> Option<(GroupElement, usize)> {
        for g in ball {
            let y = g.matrix().mul_vec(x);
            if let Some(i) = self.chambers.iter().position(|c| c.cone.contains_unchecked(&y)) {
                return Some((g.clone(), i));
            }
        }
        None
    }
}

fn uncovered_verdict(complete: bool) -> Verdict {
    if complete {
        Verdict::Refuted
    } else {
        Verdict::BudgetExhausted
    }
}

/// Pairwise dichotomy over the listed chambers plus sampled covering of the
/// target interior by group translates of the chambers.
pub fn validate_system(sys: &ChamberSystem, budgets: &Budgets) -> Result<Certificate, ChamberError> {
    let mut cert = Certificate::new(
        CertificateKind::SystemValidation,
        digest(sys),
        Parameters {
            radius: Some(budgets.radius),
            fuel: None,
            samples: Some(budgets.samples),
            seed: Some(budgets.seed),
            box_bound: Some(budgets.box_bound),
        },
    );
    let mut violations = 0;
    for (i, a) in sys.chambers.iter().enumerate() {
        for b in &sys.chambers[i + 1..] {
            if let Err(ChamberError::Dichotomy { .. }) = chambers_equivalent(a, b) {
                violations += 1;
                let meet = a.cone.intersect(&b.cone)?;
                cert.witnesses.push(Witness::cone(
                    &format!("overlap:{}:{}", a.id(), b.id()),
                    meet,
                ));
            }
        }
    }
    cert.check(
        "dichotomy",
        if violations == 0 {
            Verdict::VerifiedOnSamples
        } else {
            Verdict::Refuted
        },
        format!("{violations} pairs of listed chambers overlap without being equal"),
    );

    let ball = sys.group.ball(budgets.radius)?;
    let points = sample_interior(&sys.target, budgets.samples, budgets.seed, budgets.box_bound)?;
    let mut uncovered = 0;
    for p in &points {
        if sys.locate(p, &ball.elements).is_none() {
            uncovered += 1;
            if cert.witnesses.len() < MAX_WITNESSES {
                cert.witnesses.push(Witness::point("uncovered", p.clone()));
            }
        }
    }
    cert.check(
        "covering",
        if uncovered == 0 {
            Verdict::VerifiedOnSamples
        } else {
            uncovered_verdict(ball.complete)
        },
        format!(
            "{} of {} target samples lie in a translate of a listed chamber (ball of {} elements{})",
            points.len() - uncovered,
            points.len(),
            ball.elements.len(),
            if ball.complete { ", whole group" } else { "" }
        ),
    );
    Ok(cert)
}

#[derive(Clone, Debug, Serialize)]
pub struct Piece {
    /// Listed chamber whose translate contributes the piece.
    pub chamber: String,
    pub element: GroupElement,
    pub chamber_cone: PolyCone,
    pub cone: PolyCone,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub pieces: Vec<Piece>,
    pub certificate: Certificate,
}

/// Cuts `pi` by every chamber translate (listed chambers under the radius
/// ball) that meets it in full dimension.
pub fn decompose_polytope_cone(
    pi: &PolyCone,
    sys: &ChamberSystem,
    budgets: &Budgets,
) -> Result<Decomposition, ChamberError> {
    let all: Vec<&Chamber> = sys.chambers.iter().collect();
    decompose_with(pi, sys, &all, budgets)
}

fn decompose_with(
    pi: &PolyCone,
    sys: &ChamberSystem,
    chambers: &[&Chamber],
    budgets: &Budgets,
) -> Result<Decomposition, ChamberError> {
    if pi.rank() != sys.rank {
        return Err(ChamberError::RankMismatch {
            expected: sys.rank,
            found: pi.rank(),
        });
    }
    if let Some(r) = pi.generators().iter().find(|r| !sys.target.closure_contains(r)) {
        return Err(ChamberError::OutsideTarget { ray: r.to_string() });
    }
    #[derive(Serialize)]
    struct Inputs<'a> {
        cone: &'a PolyCone,
        system: &'a ChamberSystem,
    }
    let mut cert = Certificate::new(
        CertificateKind::Decomposition,
        digest(&Inputs { cone: pi, system: sys }),
        Parameters {
            radius: Some(budgets.radius),
            fuel: None,
            samples: Some(budgets.samples),
            seed: Some(budgets.seed),
            box_bound: Some(budgets.box_bound),
        },
    );
    let ball = sys.group.ball(budgets.radius)?;
    let mut pieces: Vec<Piece> = Vec::new();
    let mut seen: HashSet<PolyCone> = HashSet::new();
    for g in &ball.elements {
        for c in chambers {
            let k = g.act_cone(&c.cone)?;
            if seen.contains(&k) {
                continue;
            }
            let meet = pi.intersect(&k)?;
            if meet.dim() == pi.dim() && !meet.is_zero() {
                seen.insert(k.clone());
                pieces.push(Piece {
                    chamber: c.id().to_string(),
                    element: g.clone(),
                    chamber_cone: k,
                    cone: meet,
                });
            }
        }
    }

    let mut overlaps = 0;
    for (i, a) in pieces.iter().enumerate() {
        for b in &pieces[i + 1..] {
            let meet = a.cone.intersect(&b.cone)?;
            if meet.dim() == pi.dim() {
                overlaps += 1;
                cert.witnesses.push(
                    Witness::cone("overlapping-pieces", meet.clone())
                        .with_point(meet.relative_interior_point()),
                );
            }
        }
    }
    cert.check(
        "pieces-disjoint",
        if overlaps == 0 {
            Verdict::VerifiedOnSamples
        } else {
            Verdict::Refuted
        },
        format!("{overlaps} pairs of pieces overlap in full dimension"),
    );
    cert.check(
        "pieces-rational",
        Verdict::VerifiedOnSamples,
        format!("{} pieces, each an exact intersection of rational cones", pieces.len()),
    );

    let points = sample_relative_interior(pi, budgets.samples, budgets.seed, budgets.box_bound);
    let mut uncovered = 0;
    for p in &points {
        if !pieces.iter().any(|piece| piece.cone.contains_unchecked(p)) {
            uncovered += 1;
            if cert.witnesses.len() < MAX_WITNESSES {
                cert.witnesses.push(Witness::point("unreduced", p.clone()));
            }
        }
    }
    cert.check(
        "covering",
        if uncovered == 0 {
            Verdict::VerifiedOnSamples
        } else {
            uncovered_verdict(ball.complete)
        },
        format!(
            "{} of {} samples of the cone lie in some piece (radius {})",
            points.len() - uncovered,
            points.len(),
            budgets.radius
        ),
    );
    Ok(Decomposition {
        pieces,
        certificate: cert,
    })
}

/// Ball elements stabilizing the chamber cone. Each must also preserve the
/// exceptional subcone; a violation means the scenario data is inconsistent.
pub fn chamber_stabilizer(
    sys: &ChamberSystem,
    ch: &Chamber,
    radius: usize,
) -> Result<Vec<GroupElement>, ChamberError> {
    if ch.cone.rank() != sys.rank {
        return Err(ChamberError::RankMismatch {
            expected: sys.rank,
            found: ch.cone.rank(),
        });
    }
    let stab = sys.group.stabilizer_in_ball(&ch.cone, radius)?;
    let exc = ch.exceptional_cone();
    for g in &stab {
        if g.act_cone(&exc)? != exc {
            return Err(ChamberError::ExceptionalViolation {
                chamber: ch.id().to_string(),
                word: g.word().to_vec(),
            });
        }
    }
    Ok(stab)
}

#[derive(Clone, Debug)]
pub struct NefDescent {
    /// `F`, the pullback image of the face chamber's nef model.
    pub face: PolyCone,
    pub descent: FaceDescent,
    /// Matrices `L h P` of the stabilizer window on the target.
    pub induced: Vec<QMatrix>,
    /// The descended tiling in the target rank.
    pub tiling: TiledCone,
}

/// Descends a nef tiling to the face `F = f^* Nef(Y)` of a contraction and
/// pushes the face tile and stabilizer window down to the target.
pub fn nef_descent(
    nef_tiling: &TiledCone,
    face_chamber: &Chamber,
    budgets: &Budgets,
) -> Result<NefDescent, ChamberError> {
    let marking = &face_chamber.marking;
    let n = nef_tiling.group().rank();
    if marking.source_rank != n {
        return Err(ChamberError::RankMismatch {
            expected: n,
            found: marking.source_rank,
        });
    }
    let face = face_chamber.target_nef.linear_image(&marking.pullback)?;
    if let Some(a) = nef_tiling.ambient() {
        if a.is_polyhedral() && !face.is_face_of(&a.closure_cone()) {
            return Err(ChamberError::NotAFace(format!(
                "{face:?} is not a face of the nef model"
            )));
        }
    }
    let descent = nef_tiling.descend_to_face(&face, budgets)?;
    let left = marking.left_inverse();
    let p = &marking.pullback;
    let mut induced: Vec<QMatrix> = Vec::new();
    for h in &descent.stabilizer {
        let m = left.mul(h.matrix()).mul(p);
        if !induced.contains(&m) {
            induced.push(m);
        }
    }
    let m = marking.target_rank;
    let gens: Vec<QMatrix> = induced.iter().filter(|x| !x.is_identity()).cloned().collect();
    let group = ActionGroup::new(m, gens, None)?;
    let tile = if descent.tile.is_zero() {
        PolyCone::zero(m)
    } else {
        descent.tile.linear_image(&left)?
    };
    let tiling = TiledCone::with_any_tile(
        group,
        tile,
        Some(AmbientRegion::from_cone(&face_chamber.target_nef)),
    )?;
    Ok(NefDescent {
        face,
        descent,
        induced,
        tiling,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub role: String,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineCertificate {
    pub statement: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tile: Option<PolyCone>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<PolyCone>,
    pub components: Vec<Component>,
}

impl PipelineCertificate {
    fn new(statement: &str) -> Self {
        PipelineCertificate {
            statement: statement.to_string(),
            verdict: Verdict::VerifiedOnSamples,
            tile: None,
            domain: None,
            components: Vec::new(),
        }
    }

    /// Adds a component; the pipeline verdict is the conjunction.
    fn push(&mut self, role: impl Into<String>, certificate: Certificate) {
        self.verdict = self.verdict.max(certificate.verdict);
        self.components.push(Component {
            role: role.into(),
            certificate,
        });
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::VerifiedOnSamples
    }
}

/// From chamber-level tiles on orbit representatives to a tile for the
/// whole target cone, followed by a carved fundamental domain when the
/// gluing succeeds.
pub fn build_effective_certificate(
    sys: &ChamberSystem,
    budgets: &Budgets,
) -> Result<PipelineCertificate, ChamberError> {
    let statement = match sys.kind {
        SystemKind::Effective => "effective cone: rational polyhedral fundamental domain",
        SystemKind::Movable => "movable cone: rational polyhedral fundamental domain",
    };
    let mut out = PipelineCertificate::new(statement);
    let mut reps = Vec::new();
    for c in &sys.chambers {
        let Some(tile) = &c.tile else { continue };
        let window = chamber_stabilizer(sys, c, budgets.radius)?;
        let group = ActionGroup::from_elements(sys.rank, &window)?;
        let local = TiledCone::with_any_tile(
            group,
            tile.clone(),
            Some(AmbientRegion::from_cone(&c.cone)),
        )?;
        out.push(
            format!("chamber-tile:{}", c.id()),
            local.certify_polyhedral_type(budgets)?,
        );
        reps.push(ChamberTile {
            chamber: c.cone.clone(),
            tile: tile.clone(),
        });
    }
    if reps.is_empty() {
        return Err(ChamberError::NoTiles);
    }
    let glued = glue_chambers(&sys.group, &reps, &sys.target, budgets)?;
    let glue_ok = glued.certificate.is_verified();
    out.push("glue", glued.certificate);
    out.tile = Some(glued.tile.clone());
    if glue_ok && glued.tile.is_full_dimensional() {
        let tiling = TiledCone::with_any_tile(sys.group.clone(), glued.tile, Some(sys.target.clone()))?;
        let carving = tiling.carve_fundamental_domain(budgets.radius)?;
        out.push(
            "fundamental-domain",
            tiling.verify_fundamental_domain(&carving.domain, budgets)?,
        );
        out.domain = Some(carving.domain);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct NefExtraction {
    /// Elements `γ_j` whose nef translates meet the tile.
    pub gammas: Vec<GroupElement>,
    /// `Σ = Σ_j (γ_j^{-1} Π ∩ Nef)`.
    pub sigma: PolyCone,
    /// One listed chamber id per class of small-modification targets met.
    pub classes: Vec<String>,
    pub decomposition: Decomposition,
    pub certificate: PipelineCertificate,
}

/// From an effective (or movable) tile to a nef tile `Σ` and the finite
/// list of small-modification targets meeting the tile.
pub fn extract_nef_certificates(
    sys: &ChamberSystem,
    eff_tile: &PolyCone,
    budgets: &Budgets,
) -> Result<NefExtraction, ChamberError> {
    let ample = sys.ample_chamber().ok_or(ChamberError::NoAmpleChamber)?;
    let nef = &ample.cone;
    let sqm: Vec<&Chamber> = sys
        .chambers
        .iter()
        .filter(|c| c.marking.kind == MarkingKind::Sqm)
        .collect();
    let decomposition = decompose_with(eff_tile, sys, &sqm, budgets)?;
    if decomposition.pieces.is_empty() {
        return Err(ChamberError::NoChamberMeetsTile);
    }
    let ball = sys.group.orbit_ball(budgets.radius)?;
    let mut gammas: Vec<GroupElement> = Vec::new();
    let mut found: Vec<PolyCone> = Vec::new();
    for piece in &decomposition.pieces {
        for g in &ball {
            let moved = g.act_cone(nef)?;
            if moved == piece.chamber_cone {
                if !found.contains(&moved) {
                    found.push(moved);
                    gammas.push(g.clone());
                }
                break;
            }
        }
    }
    if gammas.is_empty() {
        return Err(ChamberError::NoChamberMeetsTile);
    }
    let mut parts = Vec::new();
    for g in &gammas {
        parts.push(g.inverse().act_cone(eff_tile)?.intersect(nef)?);
    }
    let sigma = PolyCone::sum_all(sys.rank, &parts)?;

    let mut classes: Vec<&Chamber> = Vec::new();
    for piece in &decomposition.pieces {
        let c = sys.chamber(&piece.chamber).expect("piece from listed chamber");
        let mut known = false;
        for k in &classes {
            if chambers_equivalent(c, k)? {
                known = true;
                break;
            }
            for g in &ball {
                if g.act_cone(&k.cone)? == c.cone {
                    known = true;
                    break;
                }
            }
            if known {
                break;
            }
        }
        if !known {
            classes.push(c);
        }
    }

    let window = sys.group.stabilizer_in_ball(nef, budgets.radius)?;
    #[derive(Serialize)]
    struct Inputs<'a> {
        system: &'a ChamberSystem,
        tile: &'a PolyCone,
    }
    let mut cover = Certificate::new(
        CertificateKind::PolyhedralType,
        digest(&Inputs { system: sys, tile: eff_tile }),
        Parameters {
            radius: Some(budgets.radius),
            fuel: None,
            samples: Some(budgets.samples),
            seed: Some(budgets.seed),
            box_bound: Some(budgets.box_bound),
        },
    );
    let points = sample_interior(
        &AmbientRegion::from_cone(nef),
        budgets.samples,
        budgets.seed,
        budgets.box_bound,
    )?;
    let mut uncovered = 0;
    for p in &points {
        let hit = window
            .iter()
            .any(|h| sigma.contains_unchecked(&h.matrix().mul_vec(p)));
        if !hit {
            uncovered += 1;
            if cover.witnesses.len() < MAX_WITNESSES {
                cover.witnesses.push(Witness::point("uncovered", p.clone()));
            }
        }
    }
    cover.check(
        "nef-covering",
        if uncovered == 0 {
            Verdict::VerifiedOnSamples
        } else {
            Verdict::BudgetExhausted
        },
        format!(
            "{} of {} nef samples lie in a stabilizer-window translate of the nef tile ({} elements)",
            points.len() - uncovered,
            points.len(),
            window.len()
        ),
    );
    cover.notes.push(format!(
        "{} small-modification target classes meet the tile",
        classes.len()
    ));

    let mut pipeline = PipelineCertificate::new("(3) nef cone: tile under automorphisms, finitely many targets");
    pipeline.push("decomposition", decomposition.certificate.clone());
    pipeline.push("nef-tile", cover);
    pipeline.tile = Some(sigma.clone());
    Ok(NefExtraction {
        gammas,
        sigma,
        classes: classes.iter().map(|c| c.id().to_string()).collect(),
        decomposition,
        certificate: pipeline,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductCone {
    pub cone: PolyCone,
    /// Rank of `[p1 | p2]`.
    pub span_rank: usize,
    /// Whether the pullbacks together span the ambient space.
    pub spans: bool,
    #[serde(skip)]
    first: Vec<QVector>,
    #[serde(skip)]
    second: Vec<QVector>,
}

fn image_generators(eff: &PolyCone, p: &QMatrix, n: usize) -> Result<Vec<QVector>, ChamberError> {
    if p.nrows() != n {
        return Err(ChamberError::RankMismatch {
            expected: n,
            found: p.nrows(),
        });
    }
    if p.ncols() == 0 {
        return Ok(Vec::new());
    }
    if p.rank() != p.ncols() {
        return Err(ChamberError::PullbackNotInjective {
            id: "product".into(),
        });
    }
    Ok(eff.linear_image(p)?.generators().to_vec())
}

/// `p1 Eff_1 + p2 Eff_2` together with the span check on the pullbacks.
/// A pullback with no columns contributes nothing, whatever its cone.
pub fn product_effective_cone(
    eff1: &PolyCone,
    eff2: &PolyCone,
    p1: &QMatrix,
    p2: &QMatrix,
) -> Result<ProductCone, ChamberError> {
    let n = p1.nrows();
    let first = image_generators(eff1, p1, n)?;
    let second = image_generators(eff2, p2, n)?;
    let mut span = p1.columns();
    span.extend(p2.columns());
    let span_rank = rank(&span);
    let mut all = first.clone();
    all.extend(second.iter().cloned());
    Ok(ProductCone {
        cone: PolyCone::from_rays(n, &all)?,
        span_rank,
        spans: span_rank == n,
        first,
        second,
    })
}

impl ProductCone {
    /// Splits `x` as `a + b` with `a` in the first image and `b` in the
    /// second, via a nonnegative solution on a basis of generators.
    pub fn split(&self, x: &QVector) -> Option<(QVector, QVector)> {
        let n = self.cone.rank();
        let gens: Vec<&QVector> = self.first.iter().chain(&self.second).collect();
        let owned: Vec<QVector> = gens.iter().map(|g| (*g).clone()).collect();
        let d = rank(&owned);
        if d == 0 {
            return x.is_zero().then(|| (QVector::zeros(n), QVector::zeros(n)));
        }
        let mut chosen = Vec::with_capacity(d);
        self.search(x, &gens, d, 0, &mut chosen)
    }

    fn search(
        &self,
        x: &QVector,
        gens: &[&QVector],
        d: usize,
        start: usize,
        chosen: &mut Vec<usize>,
    ) -> Option<(QVector, QVector)> {
        if chosen.len() == d {
            let cols: Vec<QVector> = chosen.iter().map(|&i| gens[i].clone()).collect();
            let coeffs = solve_any(&QMatrix::from_columns(&cols, x.len()), x)?;
            if coeffs.iter().any(|c| *c < Q::from_integer(0.into())) {
                return None;
            }
            let n = x.len();
            let mut a = QVector::zeros(n);
            let mut b = QVector::zeros(n);
            for (&i, c) in chosen.iter().zip(coeffs.iter()) {
                let part = gens[i].scale(c);
                if i < self.first.len() {
                    a = a.add(&part);
                } else {
                    b = b.add(&part);
                }
            }
            return (a.add(&b) == *x).then_some((a, b));
        }
        for i in start..gens.len() {
            chosen.push(i);
            let cols: Vec<QVector> = chosen.iter().map(|&j| gens[j].clone()).collect();
            if rank(&cols) == chosen.len() {
                if let Some(found) = self.search(x, gens, d, i + 1, chosen) {
                    chosen.pop();
                    return Some(found);
                }
            }
            chosen.pop();
        }
        None
    }
}
