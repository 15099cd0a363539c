//! Tiled cones `Γ·Π` and the certificates built on them.
//!
//! A [`TiledCone`] stands in for `C^+` when `C` is not itself rational
//! polyhedral: the set it represents is the union of the translates of the
//! tile. Membership is tested by greedy reduction into the tile, and every
//! statement about the tiling (polyhedral type, fundamental domains, face
//! descent, gluing) is returned as a [`Certificate`] whose verdict never
//! claims more than the sampled, bounded check that produced it.

mod certificate;
mod sample;

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::action::{ActionError, ActionGroup, GroupElement};
use crate::cone::{ConeError, PolyCone};
use crate::num::{q, QVector, Q};

pub use certificate::{
    digest, Certificate, CertificateKind, Check, Parameters, Verdict, Witness,
};
pub use sample::{sample_interior, sample_relative_interior, AmbientRegion};

/// Witnesses kept per failing check.
const MAX_WITNESSES: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TilingError {
    #[error("ambient description does not match rank {rank}")]
    AmbientShape { rank: usize },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("tile must be strictly convex and full-dimensional")]
    DegenerateTile,
    #[error("tile generator {ray} lies outside the ambient closure")]
    TileOutsideAmbient { ray: String },
    #[error("an ambient cone description is required for sampling")]
    NoAmbient,
    #[error("sampler found {found} interior points in {attempts} attempts")]
    NoInteriorPoints { attempts: usize, found: usize },
    #[error("point {point} lies outside the ambient cone")]
    OutsideAmbient { point: String },
    #[error("cannot reduce the zero vector")]
    ZeroVector,
    #[error("fuel must be at least 1")]
    NoFuel,
    #[error("{0}")]
    NotAFace(String),
    #[error("candidate domain generator {ray} lies outside the ambient closure")]
    DomainOutsideAmbient { ray: String },
    #[error("chamber {index}: tile is not contained in the chamber")]
    TileNotInChamber { index: usize },
    #[error("chamber {index}: chamber cone is not full-dimensional")]
    ChamberNotFullDimensional { index: usize },
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// Search and sampling budgets, echoed into every certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budgets {
    pub radius: usize,
    pub fuel: usize,
    pub samples: usize,
    pub seed: u64,
    pub box_bound: i64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            radius: 6,
            fuel: 64,
            samples: 500,
            seed: 0,
            box_bound: 50,
        }
    }
}

impl Budgets {
    fn sampling(&self) -> Parameters {
        Parameters {
            radius: None,
            fuel: Some(self.fuel),
            samples: Some(self.samples),
            seed: Some(self.seed),
            box_bound: Some(self.box_bound),
        }
    }

    fn with_radius(&self) -> Parameters {
        Parameters {
            radius: Some(self.radius),
            ..self.sampling()
        }
    }
}

#[derive(Clone, Debug)]
pub struct TiledCone {
    group: ActionGroup,
    tile: PolyCone,
    ambient: Option<AmbientRegion>,
    xi: QVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    /// `element · x` is the reduced point.
    pub element: GroupElement,
    pub point: QVector,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The reachable orbit is finite and never meets the tile.
    Stalled,
    FuelExhausted,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("reduction stopped ({reason:?}) at {last} after letters {trace:?}")]
    Exhausted {
        reason: StopReason,
        last: QVector,
        trace: Vec<i32>,
    },
    #[error(transparent)]
    Domain(#[from] TilingError),
}

/// Pairing with the reference direction, normalized by the l1 norm.
fn alignment(xi: &QVector, y: &QVector) -> Q {
    xi.dot(y) / y.l1_norm()
}

/// Frontier entry ordered by score, then by discovery order (earlier wins).
struct Node {
    score: Q,
    seq: Reverse<usize>,
    point: QVector,
    element: GroupElement,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.score, self.seq).cmp(&(&other.score, other.seq))
    }
}

impl Serialize for TiledCone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TiledCone", 3)?;
        st.serialize_field("group", &self.group)?;
        st.serialize_field("tile", &self.tile)?;
        st.serialize_field("ambient", &self.ambient)?;
        st.end()
    }
}

impl TiledCone {
    /// Validates that the tile is strictly convex, full-dimensional and
    /// inside the ambient closure when one is given.
    pub fn new(
        group: ActionGroup,
        tile: PolyCone,
        ambient: Option<AmbientRegion>,
    ) -> Result<Self, TilingError> {
        if !tile.is_strictly_convex() || !tile.is_full_dimensional() {
            return Err(TilingError::DegenerateTile);
        }
        Self::with_any_tile(group, tile, ambient)
    }

    /// Like [`TiledCone::new`] but accepts lower-dimensional tiles, which
    /// can never cover an interior; used to report undersized tiles.
    pub fn with_any_tile(
        group: ActionGroup,
        tile: PolyCone,
        ambient: Option<AmbientRegion>,
    ) -> Result<Self, TilingError> {
        if tile.rank() != group.rank() {
            return Err(TilingError::RankMismatch {
                expected: group.rank(),
                found: tile.rank(),
            });
        }
        if let Some(a) = &ambient {
            if a.rank() != group.rank() {
                return Err(TilingError::AmbientShape { rank: group.rank() });
            }
            if let Some(r) = tile.generators().iter().find(|r| !a.closure_contains(r)) {
                return Err(TilingError::TileOutsideAmbient { ray: r.to_string() });
            }
        }
        let xi = QVector::sum(tile.rank(), tile.generators());
        Ok(TiledCone {
            group,
            tile,
            ambient,
            xi,
        })
    }

    pub fn group(&self) -> &ActionGroup {
        &self.group
    }

    pub fn tile(&self) -> &PolyCone {
        &self.tile
    }

    pub fn ambient(&self) -> Option<&AmbientRegion> {
        self.ambient.as_ref()
    }

    /// The fixed reference direction: sum of the tile's generators.
    pub fn reference(&self) -> &QVector {
        &self.xi
    }

    /// Best-first reduction into the tile.
    ///
    /// Orbit points are expanded in order of decreasing alignment with the
    /// reference direction, each expansion applying every generator and
    /// inverse (in letter order). `fuel` bounds the number of expansions.
    /// The search stalls only when the reachable orbit is finite and has
    /// been exhausted.
    pub fn reduce_point(&self, x: &QVector, fuel: usize) -> Result<Reduction, ReduceError> {
        if x.len() != self.group.rank() {
            return Err(TilingError::RankMismatch {
                expected: self.group.rank(),
                found: x.len(),
            }
            .into());
        }
        if x.is_zero() {
            return Err(TilingError::ZeroVector.into());
        }
        if fuel == 0 {
            return Err(TilingError::NoFuel.into());
        }
        if let Some(a) = &self.ambient {
            if !a.closure_contains(x) {
                return Err(TilingError::OutsideAmbient {
                    point: x.to_string(),
                }
                .into());
            }
        }
        let found = |element: GroupElement, point: QVector| {
            let steps = element.word().len();
            Ok(Reduction {
                element,
                point,
                steps,
            })
        };
        if self.tile.contains_unchecked(x) {
            return found(self.group.identity(), x.clone());
        }
        let mut seen = HashSet::from([x.clone()]);
        let mut frontier = BinaryHeap::from([Node {
            score: alignment(&self.xi, x),
            seq: Reverse(0),
            point: x.clone(),
            element: self.group.identity(),
        }]);
        let mut best = (alignment(&self.xi, x), x.clone(), self.group.identity());
        let mut expansions = 0;
        while let Some(node) = frontier.pop() {
            if expansions == fuel {
                return Err(ReduceError::Exhausted {
                    reason: StopReason::FuelExhausted,
                    last: best.1,
                    trace: best.2.word().to_vec(),
                });
            }
            expansions += 1;
            for s in self.group.letters() {
                let y = s.matrix().mul_vec(&node.point);
                if !seen.insert(y.clone()) {
                    continue;
                }
                let element = s.compose(&node.element);
                if self.tile.contains_unchecked(&y) {
                    return found(element, y);
                }
                let score = alignment(&self.xi, &y);
                if score > best.0 {
                    best = (score.clone(), y.clone(), element.clone());
                }
                frontier.push(Node {
                    score,
                    seq: Reverse(seen.len()),
                    point: y,
                    element,
                });
            }
        }
        Err(ReduceError::Exhausted {
            reason: StopReason::Stalled,
            last: best.1,
            trace: best.2.word().to_vec(),
        })
    }

    fn ambient_or_err(&self) -> Result<&AmbientRegion, TilingError> {
        self.ambient.as_ref().ok_or(TilingError::NoAmbient)
    }

    /// Sampled check that the interior of the ambient region lies in `Γ·Π`,
    /// together with the exact check that `Π` lies in the ambient closure.
    pub fn certify_polyhedral_type(&self, budgets: &Budgets) -> Result<Certificate, TilingError> {
        let ambient = self.ambient_or_err()?;
        let mut cert = Certificate::new(
            CertificateKind::PolyhedralType,
            digest(self),
            budgets.sampling(),
        );
        tile_in_ambient(&mut cert, &self.tile, ambient);
        let points = sample_interior(ambient, budgets.samples, budgets.seed, budgets.box_bound)?;
        self.covering_check(&mut cert, "covering", &points, budgets.fuel);
        Ok(cert)
    }

    fn covering_check(&self, cert: &mut Certificate, name: &str, points: &[QVector], fuel: usize) {
        let mut stalled_at = Vec::new();
        let mut failures = 0;
        for p in points {
            match self.reduce_point(p, fuel) {
                Ok(_) => {}
                Err(ReduceError::Exhausted { last, .. }) => {
                    failures += 1;
                    if cert.witnesses.len() < MAX_WITNESSES {
                        cert.witnesses.push(Witness::point("unreduced", p.clone()));
                    }
                    stalled_at.push(last);
                }
                Err(ReduceError::Domain(e)) => {
                    failures += 1;
                    cert.notes.push(format!("sample {p}: {e}"));
                }
            }
        }
        if failures == 0 {
            cert.check(
                name,
                Verdict::VerifiedOnSamples,
                format!("{} of {} samples reduced into the tile", points.len(), points.len()),
            );
            return;
        }
        cert.check(
            name,
            Verdict::BudgetExhausted,
            format!(
                "{failures} of {} samples did not reduce; greedy reduction is incomplete, so this is not a disproof",
                points.len()
            ),
        );
        // Best-aligned orbit points of the failures, grouped by the tile
        // facet they violate most, span the gap cones next to the tile.
        let facets = self.tile.inequalities();
        let mut by_facet: Vec<Vec<QVector>> = vec![Vec::new(); facets.len()];
        for y in stalled_at {
            let worst = facets
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.dot(&y).cmp(&b.dot(&y)))
                .map(|(i, _)| i);
            if let Some(i) = worst {
                by_facet[i].push(y.primitive());
            }
        }
        for group in by_facet.into_iter().filter(|g| g.len() > 1) {
            if let Ok(gap) = PolyCone::from_rays(self.tile.rank(), &group) {
                if gap.is_strictly_convex() {
                    cert.notes.push(format!(
                        "systematic gap: {} reductions stalled inside {gap:?}",
                        group.len()
                    ));
                    cert.witnesses.push(Witness::cone("gap", gap));
                }
            }
        }
    }

    /// Dirichlet-style carving of `Π` around a reference direction `ξ`.
    ///
    /// Every non-identity ball element `g` whose translate overlaps `Π` in
    /// full dimension contributes the cut `<ξ - g^T ξ, x> >= 0`, which keeps
    /// the points of `Π` that are at least as well aligned with `ξ` as their
    /// `g`-translates. `ξ` is the first interior point of `Π`, among
    /// weighted sums of its generators, that none of those elements fixes.
    pub fn carve_fundamental_domain(&self, radius: usize) -> Result<Carving, TilingError> {
        let ball = self.group.orbit_ball(radius)?;
        let mut overlapping = Vec::new();
        for g in ball.into_iter().filter(|g| !g.is_identity()) {
            let moved = g.act_cone(&self.tile)?;
            if moved.intersect(&self.tile)?.is_full_dimensional() {
                overlapping.push(g);
            }
        }
        let xi = self.carving_reference(&overlapping);
        let cuts: Vec<Cut> = overlapping
            .into_iter()
            .filter_map(|g| {
                let normal = xi.sub(&g.transpose_apply(&xi)).primitive();
                (!normal.is_zero()).then_some(Cut { element: g, normal })
            })
            .collect();
        let mut ineqs = self.tile.inequalities().to_vec();
        ineqs.extend(cuts.iter().map(|c| c.normal.clone()));
        let domain = PolyCone::from_inequalities(self.tile.rank(), &ineqs)?;
        Ok(Carving {
            domain,
            reference: xi,
            cuts,
        })
    }

    /// Candidates are the plain generator sum, weights `1, 2, .., m`, then
    /// weights `k^i` for small `k`. Falls back to the plain sum.
    fn carving_reference(&self, overlapping: &[GroupElement]) -> QVector {
        let gens = self.tile.generators();
        let n = self.tile.rank();
        let weighted = |w: &dyn Fn(usize) -> Q| {
            gens.iter()
                .enumerate()
                .fold(QVector::zeros(n), |acc, (i, g)| acc.add(&g.scale(&w(i))))
        };
        let mut candidates = vec![self.xi.clone(), weighted(&|i| q(i as i64 + 1))];
        for k in 2..=6i64 {
            candidates.push(weighted(&|i| (0..i).fold(q(1), |a, _| a * q(k))));
        }
        candidates
            .into_iter()
            .find(|xi| overlapping.iter().all(|g| g.transpose_apply(xi) != *xi))
            .unwrap_or_else(|| self.xi.clone())
    }

    /// Checks that no non-identity ball element moves `d` onto itself with
    /// interior overlap, and that sampled interior points reduce into `Γ·d`.
    pub fn verify_fundamental_domain(
        &self,
        d: &PolyCone,
        budgets: &Budgets,
    ) -> Result<Certificate, TilingError> {
        let ambient = self.ambient_or_err()?;
        if let Some(r) = d.generators().iter().find(|r| !ambient.closure_contains(r)) {
            return Err(TilingError::DomainOutsideAmbient { ray: r.to_string() });
        }
        #[derive(Serialize)]
        struct Inputs<'a> {
            tiling: &'a TiledCone,
            domain: &'a PolyCone,
        }
        let mut cert = Certificate::new(
            CertificateKind::FundamentalDomain,
            digest(&Inputs { tiling: self, domain: d }),
            budgets.with_radius(),
        );
        let ball = self.group.orbit_ball(budgets.radius)?;
        if d.is_full_dimensional() {
            let mut overlaps = 0;
            for g in ball.iter().filter(|g| !g.is_identity()) {
                let moved = g.act_cone(d)?;
                let meet = moved.intersect(d)?;
                if meet.is_full_dimensional() {
                    overlaps += 1;
                    if cert.witnesses.len() < MAX_WITNESSES {
                        cert.witnesses.push(
                            Witness::element("overlap", g.clone())
                                .with_point(meet.relative_interior_point()),
                        );
                    }
                }
            }
            let verdict = if overlaps == 0 {
                Verdict::VerifiedOnSamples
            } else {
                Verdict::Refuted
            };
            cert.check(
                "strictness",
                verdict,
                format!(
                    "{overlaps} of {} non-identity ball elements overlap the domain in full dimension",
                    ball.len() - 1
                ),
            );
        } else {
            cert.check(
                "strictness",
                Verdict::Refuted,
                format!("domain has dimension {} < {}", d.dim(), d.rank()),
            );
            cert.witnesses.push(Witness::cone("degenerate-domain", d.clone()));
        }
        let by_domain = TiledCone::with_any_tile(self.group.clone(), d.clone(), None)?;
        let points = sample_interior(ambient, budgets.samples, budgets.seed, budgets.box_bound)?;
        by_domain.covering_check(&mut cert, "covering", &points, budgets.fuel);
        cert.notes.push(format!(
            "strictness checked on the orbit ball of radius {} only",
            budgets.radius
        ));
        Ok(cert)
    }

    /// Descends the tiling to a face `F` of the tiled structure.
    ///
    /// For every nonzero face `F_i` of `Π` the ball is searched, in order, for
    /// an element moving the relative-interior point of `F_i` into `ri(F)`;
    /// the translates found are summed into `Π_F`. The stabilizer of `F` in
    /// the ball is returned as a finite window of `Stab(Γ, F)`.
    pub fn descend_to_face(
        &self,
        face: &PolyCone,
        budgets: &Budgets,
    ) -> Result<FaceDescent, TilingError> {
        let n = self.group.rank();
        if face.rank() != n {
            return Err(TilingError::RankMismatch {
                expected: n,
                found: face.rank(),
            });
        }
        let meet = face.intersect(&self.tile)?;
        if !meet.is_zero() && !meet.is_face_of(&self.tile) {
            return Err(TilingError::NotAFace(format!(
                "{meet:?} = F ∩ Π is not a face of the tile"
            )));
        }
        if let Some(a) = &self.ambient {
            if let Some(r) = face.generators().iter().find(|r| !a.closure_contains(r)) {
                return Err(TilingError::NotAFace(format!(
                    "face generator {r} lies outside the ambient closure"
                )));
            }
        }
        #[derive(Serialize)]
        struct Inputs<'a> {
            tiling: &'a TiledCone,
            face: &'a PolyCone,
        }
        let mut cert = Certificate::new(
            CertificateKind::FaceDescent,
            digest(&Inputs { tiling: self, face }),
            Parameters {
                fuel: None,
                ..budgets.with_radius()
            },
        );
        let ball = self.group.orbit_ball(budgets.radius)?;
        let mut summands = Vec::new();
        let mut unmatched = Vec::new();
        for f in self.tile.faces().into_iter().filter(|f| !f.cone.is_zero()) {
            let p = f.cone.relative_interior_point();
            let mut found = None;
            for g in &ball {
                if face.relative_interior_contains(&g.act_vector(&p)?)? {
                    found = Some(g.clone());
                    break;
                }
            }
            match found {
                Some(g) => {
                    let image = g.act_cone(&f.cone)?;
                    summands.push(FaceSummand {
                        tile_face: f.cone,
                        element: g,
                        image,
                    });
                }
                None => unmatched.push(f.cone),
            }
        }
        let tile = PolyCone::sum_all(n, summands.iter().map(|s| &s.image))?;
        let stabilizer = self.group.stabilizer_in_ball(face, budgets.radius)?;

        let outside: Vec<&FaceSummand> = summands
            .iter()
            .filter(|s| !face.contains_cone(&s.image))
            .collect();
        if outside.is_empty() {
            cert.check(
                "summands-in-face",
                Verdict::VerifiedOnSamples,
                format!("all {} translated tile faces lie in F", summands.len()),
            );
        } else {
            for s in &outside {
                cert.witnesses.push(Witness::element("summand-outside-face", s.element.clone()));
            }
            cert.check(
                "summands-in-face",
                Verdict::Refuted,
                format!("{} translated tile faces leave F", outside.len()),
            );
        }

        let points = sample_relative_interior(face, budgets.samples, budgets.seed, budgets.box_bound);
        let mut uncovered = 0;
        for p in &points {
            let covered = stabilizer
                .iter()
                .any(|h| tile.contains_unchecked(&h.matrix().mul_vec(p)));
            if !covered {
                uncovered += 1;
                if cert.witnesses.len() < MAX_WITNESSES {
                    cert.witnesses.push(Witness::point("uncovered", p.clone()));
                }
            }
        }
        cert.check(
            "face-covering",
            if uncovered == 0 {
                Verdict::VerifiedOnSamples
            } else {
                Verdict::BudgetExhausted
            },
            format!(
                "{} of {} relative-interior samples covered by the stabilizer window",
                points.len() - uncovered,
                points.len()
            ),
        );
        if !unmatched.is_empty() {
            cert.notes.push(format!(
                "{} nonzero faces of the tile found no translate into ri(F) within radius {}",
                unmatched.len(),
                budgets.radius
            ));
        }
        cert.notes.push(format!(
            "stabilizer window of {} elements from the radius-{} ball; transitivity over the full stabilizer is not checked",
            stabilizer.len(),
            budgets.radius
        ));
        Ok(FaceDescent {
            stabilizer,
            tile,
            summands,
            unmatched,
            certificate: cert,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Cut {
    pub element: GroupElement,
    /// Inward normal `ξ - g^T ξ` (primitive).
    pub normal: QVector,
}

#[derive(Clone, Debug)]
pub struct Carving {
    pub domain: PolyCone,
    pub reference: QVector,
    pub cuts: Vec<Cut>,
}

#[derive(Clone, Debug)]
pub struct FaceSummand {
    pub tile_face: PolyCone,
    pub element: GroupElement,
    pub image: PolyCone,
}

#[derive(Clone, Debug)]
pub struct FaceDescent {
    pub stabilizer: Vec<GroupElement>,
    /// `Π_F`, the sum of the translated tile faces.
    pub tile: PolyCone,
    pub summands: Vec<FaceSummand>,
    pub unmatched: Vec<PolyCone>,
    pub certificate: Certificate,
}

fn tile_in_ambient(cert: &mut Certificate, tile: &PolyCone, ambient: &AmbientRegion) {
    let outside: Vec<&QVector> = tile
        .generators()
        .iter()
        .filter(|r| !ambient.closure_contains(r))
        .collect();
    if outside.is_empty() {
        cert.check(
            "tile-in-ambient-closure",
            Verdict::VerifiedOnSamples,
            "every tile generator satisfies the ambient closure conditions",
        );
    } else {
        for r in &outside {
            cert.witnesses.push(Witness::point("tile-generator-outside", (*r).clone()));
        }
        cert.check(
            "tile-in-ambient-closure",
            Verdict::Refuted,
            format!("{} tile generators lie outside the ambient closure", outside.len()),
        );
    }
}

/// A chamber cone `N_i` paired with a tile `Π_i ⊆ N_i`.
#[derive(Clone, Debug)]
pub struct ChamberTile {
    pub chamber: PolyCone,
    pub tile: PolyCone,
}

#[derive(Clone, Debug)]
pub struct Glued {
    pub tile: PolyCone,
    pub certificate: Certificate,
}

/// Glues orbit-representative tiles into one tile `Π = Σ Π_i` and checks
/// that `Π` lies in the ambient closure and that `Γ·Π` covers sampled
/// interior points.
pub fn glue_chambers(
    group: &ActionGroup,
    reps: &[ChamberTile],
    ambient: &AmbientRegion,
    budgets: &Budgets,
) -> Result<Glued, TilingError> {
    let n = group.rank();
    for (index, r) in reps.iter().enumerate() {
        if r.chamber.rank() != n || r.tile.rank() != n {
            return Err(TilingError::RankMismatch {
                expected: n,
                found: r.chamber.rank().max(r.tile.rank()),
            });
        }
        if !r.chamber.is_full_dimensional() {
            return Err(TilingError::ChamberNotFullDimensional { index });
        }
        if !r.chamber.contains_cone(&r.tile) {
            return Err(TilingError::TileNotInChamber { index });
        }
    }
    let tile = PolyCone::sum_all(n, reps.iter().map(|r| &r.tile))?;
    #[derive(Serialize)]
    struct Inputs<'a> {
        group: &'a ActionGroup,
        chambers: Vec<&'a PolyCone>,
        tiles: Vec<&'a PolyCone>,
        ambient: &'a AmbientRegion,
    }
    let mut cert = Certificate::new(
        CertificateKind::Glue,
        digest(&Inputs {
            group,
            chambers: reps.iter().map(|r| &r.chamber).collect(),
            tiles: reps.iter().map(|r| &r.tile).collect(),
            ambient,
        }),
        budgets.sampling(),
    );
    tile_in_ambient(&mut cert, &tile, ambient);
    let tiling = TiledCone::with_any_tile(group.clone(), tile.clone(), None)?;
    let points = sample_interior(ambient, budgets.samples, budgets.seed, budgets.box_bound)?;
    tiling.covering_check(&mut cert, "covering", &points, budgets.fuel);
    Ok(Glued {
        tile,
        certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{QMatrix, QVector};

    fn v(x: &[i64]) -> QVector {
        QVector::from_ints(x)
    }

    fn pell_group() -> ActionGroup {
        ActionGroup::new(2, vec![QMatrix::from_i64(&[&[3, 4], &[2, 3]])], None).unwrap()
    }

    fn swap_group() -> ActionGroup {
        ActionGroup::new(2, vec![QMatrix::from_i64(&[&[0, 1], &[1, 0]])], None).unwrap()
    }

    fn pell_region() -> AmbientRegion {
        AmbientRegion::new(
            2,
            vec![v(&[1, 0])],
            vec![QMatrix::from_i64(&[&[1, 0], &[0, -2]])],
        )
        .unwrap()
    }

    fn pell_tiling() -> TiledCone {
        TiledCone::new(
            pell_group(),
            PolyCone::from_int_rays(2, &[&[1, 0], &[3, 2]]),
            Some(pell_region()),
        )
        .unwrap()
    }

    #[test]
    fn reduce_examples() {
        let t = pell_tiling();
        let r = t.reduce_point(&v(&[2, 1]), 8).unwrap();
        assert!(r.element.is_identity());
        assert_eq!(r.point, v(&[2, 1]));

        let r = t.reduce_point(&v(&[17, 12]), 8).unwrap();
        assert_eq!(r.element.word(), &[-1]);
        assert_eq!(r.point, v(&[3, 2]));

        let r = t.reduce_point(&v(&[3, -2]), 8).unwrap();
        assert_eq!(r.element.word(), &[1]);
        assert_eq!(r.point, v(&[1, 0]));
    }

    #[test]
    fn reduce_rejects_points_outside_ambient() {
        let t = pell_tiling();
        assert!(matches!(
            t.reduce_point(&v(&[1, 1]), 8),
            Err(ReduceError::Domain(TilingError::OutsideAmbient { .. }))
        ));
        assert!(matches!(
            t.reduce_point(&v(&[0, 0]), 8),
            Err(ReduceError::Domain(TilingError::ZeroVector))
        ));
    }

    #[test]
    fn undersized_pell_tile_leaves_gap_point() {
        let t = TiledCone::new(
            pell_group(),
            PolyCone::from_int_rays(2, &[&[1, 0], &[2, 1]]),
            Some(pell_region()),
        )
        .unwrap();
        assert!(matches!(
            t.reduce_point(&v(&[5, 3]), 64),
            Err(ReduceError::Exhausted {
                reason: StopReason::FuelExhausted,
                ..
            })
        ));
        let cert = t
            .certify_polyhedral_type(&Budgets {
                samples: 200,
                ..Budgets::default()
            })
            .unwrap();
        assert_eq!(cert.verdict, Verdict::BudgetExhausted);
        let between = PolyCone::from_int_rays(2, &[&[2, 1], &[3, 2]]);
        let below = PolyCone::from_int_rays(2, &[&[2, -1], &[1, 0]]);
        let gaps: Vec<_> = cert.witnesses.iter().filter_map(|w| w.cone.clone()).collect();
        assert!(!gaps.is_empty());
        for gap in gaps {
            assert!(between.contains_cone(&gap) || below.contains_cone(&gap), "{gap:?}");
        }
    }

    #[test]
    fn finite_orbit_missing_the_tile_stalls() {
        let t = TiledCone::with_any_tile(swap_group(), PolyCone::ray(v(&[1, 0])), None).unwrap();
        match t.reduce_point(&v(&[2, 1]), 64) {
            Err(ReduceError::Exhausted { reason, .. }) => assert_eq!(reason, StopReason::Stalled),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pell_reductions_match_power_search() {
        let t = pell_tiling();
        let g = QMatrix::from_i64(&[&[3, 4], &[2, 3]]);
        let gi = g.inverse().unwrap();
        let pts = sample_interior(&pell_region(), 300, 3, 50).unwrap();
        for p in pts {
            let r = t.reduce_point(&p, 64).unwrap();
            assert!(t.tile().contains(&r.point).unwrap());
            assert_eq!(r.element.matrix().mul_vec(&p), r.point);
            // The unique power moving p into the half-open tile.
            let mut found = None;
            for (step, m) in [(1i32, &g), (-1, &gi)] {
                let mut y = p.clone();
                for k in 0..=40 {
                    if t.tile().contains(&y).unwrap() {
                        found.get_or_insert(step * k);
                    }
                    y = m.mul_vec(&y);
                }
            }
            let k = found.expect("some power reaches the tile");
            let word_sum: i32 = r.element.word().iter().map(|l| l.signum()).sum();
            assert!((word_sum - k).abs() <= 1, "{p}: word {:?}, power {k}", r.element.word());
        }
    }

    #[test]
    fn trivial_group_quadrant_is_verified() {
        let q = PolyCone::orthant(2);
        let t = TiledCone::new(ActionGroup::trivial(2), q.clone(), Some(AmbientRegion::from_cone(&q)))
            .unwrap();
        let cert = t.certify_polyhedral_type(&Budgets::default()).unwrap();
        assert!(cert.is_verified());
    }

    #[test]
    fn carving_examples() {
        let q = PolyCone::orthant(2);
        let t = TiledCone::new(ActionGroup::trivial(2), q.clone(), None).unwrap();
        assert_eq!(t.carve_fundamental_domain(3).unwrap().domain, q);

        let t = TiledCone::new(swap_group(), q.clone(), Some(AmbientRegion::from_cone(&q))).unwrap();
        let carving = t.carve_fundamental_domain(2).unwrap();
        // (1,1) is fixed by the swap, so the weighted sum (2,1) is used.
        assert_eq!(carving.reference, v(&[2, 1]));
        assert_eq!(carving.cuts.len(), 1);
        assert_eq!(carving.cuts[0].normal, v(&[1, -1]));
        assert_eq!(carving.domain, PolyCone::from_int_rays(2, &[&[1, 0], &[1, 1]]));
        let cert = t.verify_fundamental_domain(&carving.domain, &Budgets::default()).unwrap();
        assert!(cert.is_verified());

        let c = pell_tiling().carve_fundamental_domain(6).unwrap();
        assert!(c.cuts.is_empty());
        assert_eq!(c.domain, *pell_tiling().tile());
    }

    #[test]
    fn verify_domain_examples() {
        let q = PolyCone::orthant(2);
        let t = TiledCone::new(swap_group(), q.clone(), Some(AmbientRegion::from_cone(&q))).unwrap();
        let cert = t.verify_fundamental_domain(&q, &Budgets::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert_eq!(
            cert.witnesses[0].element.as_ref().unwrap().matrix(),
            &QMatrix::from_i64(&[&[0, 1], &[1, 0]])
        );

        let t = pell_tiling();
        let cert = t
            .verify_fundamental_domain(
                t.tile(),
                &Budgets {
                    samples: 200,
                    ..Budgets::default()
                },
            )
            .unwrap();
        assert!(cert.is_verified(), "{cert:?}");
    }

    #[test]
    fn glue_examples() {
        let q = PolyCone::orthant(2);
        let half = PolyCone::from_int_rays(2, &[&[1, 0], &[1, 1]]);
        let region = AmbientRegion::from_cone(&q);
        let budgets = Budgets {
            samples: 100,
            ..Budgets::default()
        };
        let glued = glue_chambers(
            &swap_group(),
            &[ChamberTile {
                chamber: half.clone(),
                tile: half.clone(),
            }],
            &region,
            &budgets,
        )
        .unwrap();
        assert_eq!(glued.tile, half);
        assert!(glued.certificate.is_verified());

        let small = glue_chambers(
            &swap_group(),
            &[ChamberTile {
                chamber: half.clone(),
                tile: PolyCone::ray(v(&[1, 0])),
            }],
            &region,
            &budgets,
        )
        .unwrap();
        assert_eq!(small.certificate.verdict, Verdict::BudgetExhausted);

        let err = glue_chambers(
            &swap_group(),
            &[ChamberTile {
                chamber: half,
                tile: q,
            }],
            &region,
            &budgets,
        )
        .unwrap_err();
        assert_eq!(err, TilingError::TileNotInChamber { index: 0 });
    }
}
