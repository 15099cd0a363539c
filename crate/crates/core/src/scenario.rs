//! Scenario files.
//!
//! A scenario is a JSON document describing a chamber system together with
//! the optional data some commands need:
//!
//! ```json
//! {
//!   "name": "pell",
//!   "rank": 2,
//!   "group": {"gens": [[[3, 4], [2, 3]]]},
//!   "target": {"kind": "movable",
//!              "cone": {"ineqs": [[1, 0]], "strict_quadratic": [[[1, 0], [0, -2]]]}},
//!   "chambers": [{"id": "X", "kind": "SQM", "pullback": [[1, 0], [0, 1]],
//!                 "exc_rays": [], "target_nef": {"rays": [[1, 0], [3, 2]]},
//!                 "tile": {"rays": [[1, 0], [3, 2]]}}],
//!   "polytope": {"rays": [[1, 0], [17, 12]]},
//!   "budgets": {"radius": 6, "fuel": 64, "samples": 500, "seed": 0}
//! }
//! ```
//!
//! Numbers are JSON integers or strings such as `"-3/4"`. Cone literals
//! carry `rays`, `ineqs` or both (which must agree). Further optional keys:
//! `tile` (overrides the sum of chamber tiles), `faces` (face markings, same
//! shape as chambers) and `product` (`eff1`, `eff2`, `p1`, `p2`). The group
//! may also be given as a bare list of generator matrices.
//!
//! Loading never stops at the first problem: every issue is collected with
//! the JSON path it refers to.

use std::fmt;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use crate::action::ActionGroup;
use crate::chambers::{Chamber, ChamberSystem, Marking, MarkingKind, SystemKind};
use crate::cone::PolyCone;
use crate::num::{parse_rational, QMatrix, QVector, Q};
use crate::tiling::{digest, AmbientRegion};

pub const BUNDLED: [(&str, &str); 4] = [
    ("pell", include_str!("../scenarios/pell.json")),
    ("quadrant-swap", include_str!("../scenarios/quadrant-swap.json")),
    ("dihedral", include_str!("../scenarios/dihedral.json")),
    ("schoen-toy", include_str!("../scenarios/schoen-toy.json")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{origin}: line {line}, column {column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: invalid scenario:\n{}", render(issues))]
    Invalid { origin: String, issues: Vec<Issue> },
}

fn render(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl LoadError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            LoadError::Invalid { issues, .. } => issues,
            _ => &[],
        }
    }
}

/// Budget values given in the file; unset entries fall back to defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BudgetOverrides {
    pub radius: Option<usize>,
    pub fuel: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub box_bound: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct ProductData {
    pub eff1: PolyCone,
    pub eff2: PolyCone,
    pub p1: QMatrix,
    pub p2: QMatrix,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub source: String,
    /// SHA-256 of the raw file contents.
    pub digest: String,
    pub system: ChamberSystem,
    pub budgets: BudgetOverrides,
    pub tile: Option<PolyCone>,
    pub polytope: Option<PolyCone>,
    pub faces: Vec<Chamber>,
    pub product: Option<ProductData>,
}

impl Scenario {
    pub fn rank(&self) -> usize {
        self.system.rank()
    }

    /// The explicit tile, or the sum of the chamber tiles if any exist.
    pub fn tiling_tile(&self) -> Option<PolyCone> {
        if let Some(t) = &self.tile {
            return Some(t.clone());
        }
        let tiles: Vec<&PolyCone> = self.system.chambers().iter().filter_map(|c| c.tile()).collect();
        if tiles.is_empty() {
            return None;
        }
        PolyCone::sum_all(self.rank(), tiles).ok()
    }
}

/// Reads and validates a scenario file. A name of a bundled scenario is
/// accepted when no such file exists.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, LoadError> {
    let path = path.as_ref();
    let label = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(text) => parse_scenario(&text, &label),
        Err(e) => match bundled(&label) {
            Some(text) => parse_scenario(text, &format!("bundled:{label}")),
            None => Err(LoadError::Io {
                path: label,
                source: e,
            }),
        },
    }
}

pub fn load_bundled(name: &str) -> Option<Result<Scenario, LoadError>> {
    bundled(name).map(|text| parse_scenario(text, &format!("bundled:{name}")))
}

pub fn parse_scenario(text: &str, source: &str) -> Result<Scenario, LoadError> {
    let value: Value = serde_json::from_str(text).map_err(|e| LoadError::Parse {
        origin: source.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut r = Reader::default();
    let scenario = r.scenario(&value, source, text);
    match scenario {
        Some(s) if r.issues.is_empty() => Ok(s),
        _ => Err(LoadError::Invalid {
            origin: source.to_string(),
            issues: r.issues,
        }),
    }
}

/// An optional field that was absent (`Some(None)`), read (`Some(Some)`)
/// or present but invalid (`None`).
fn settled<T>(x: Option<Option<T>>) -> Option<Option<T>> {
    match x {
        None => Some(None),
        Some(inner) => inner.map(Some),
    }
}

#[derive(Default)]
struct Reader {
    issues: Vec<Issue>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn index(path: &str, i: usize) -> String {
    format!("{path}[{i}]")
}

impl Reader {
    fn issue(&mut self, path: &str, message: impl fmt::Display) {
        self.issues.push(Issue {
            path: if path.is_empty() { "$".into() } else { path.to_string() },
            message: message.to_string(),
        });
    }

    fn required<'a>(&mut self, obj: &'a Value, path: &str, key: &str) -> Option<&'a Value> {
        match obj.get(key) {
            Some(v) if !v.is_null() => Some(v),
            _ => {
                self.issue(&join(path, key), "missing required field");
                None
            }
        }
    }

    fn array<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Vec<Value>> {
        let a = v.as_array();
        if a.is_none() {
            self.issue(path, "expected an array");
        }
        a
    }

    fn count(&mut self, v: &Value, path: &str) -> Option<u64> {
        let n = v.as_u64();
        if n.is_none() {
            self.issue(path, "expected a nonnegative integer");
        }
        n
    }

    fn rational(&mut self, v: &Value, path: &str) -> Option<Q> {
        let parsed = match v {
            Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Q::from_integer(i.into())),
                None => Err(format!("{n} is not an integer; write rationals as strings")),
            },
            Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
            _ => Err("expected a number or a rational string".to_string()),
        };
        match parsed {
            Ok(q) => Some(q),
            Err(e) => {
                self.issue(path, e);
                None
            }
        }
    }

    fn vector(&mut self, v: &Value, path: &str, len: usize) -> Option<QVector> {
        let a = self.array(v, path)?;
        if a.len() != len {
            self.issue(path, format!("expected {len} entries, found {}", a.len()));
            return None;
        }
        let entries: Vec<Option<Q>> = a
            .iter()
            .enumerate()
            .map(|(i, x)| self.rational(x, &index(path, i)))
            .collect();
        entries.into_iter().collect::<Option<Vec<_>>>().map(QVector::new)
    }

    fn vectors(&mut self, v: &Value, path: &str, len: usize) -> Option<Vec<QVector>> {
        let a = self.array(v, path)?;
        let out: Vec<Option<QVector>> = a
            .iter()
            .enumerate()
            .map(|(i, x)| self.vector(x, &index(path, i), len))
            .collect();
        out.into_iter().collect()
    }

    /// A matrix given as a list of `rows` rows of length `cols`.
    fn matrix(&mut self, v: &Value, path: &str, rows: usize, cols: usize) -> Option<QMatrix> {
        let a = self.array(v, path)?;
        if a.len() != rows {
            self.issue(path, format!("expected {rows} rows, found {}", a.len()));
            return None;
        }
        let r = self.vectors(v, path, cols)?;
        Some(QMatrix::from_rows(r, cols))
    }

    /// A matrix with `rows` rows and whatever common width the rows share.
    fn matrix_any_width(&mut self, v: &Value, path: &str, rows: usize) -> Option<QMatrix> {
        let cols = v
            .as_array()
            .and_then(|a| a.first())
            .and_then(|r| r.as_array())
            .map_or(0, |r| r.len());
        self.matrix(v, path, rows, cols)
    }

    fn cone(&mut self, v: &Value, path: &str, rank: usize) -> Option<PolyCone> {
        if !v.is_object() {
            self.issue(path, "expected a cone literal with \"rays\" and/or \"ineqs\"");
            return None;
        }
        if v.get("strict_quadratic").is_some() {
            self.issue(
                &join(path, "strict_quadratic"),
                "quadratic conditions are only allowed on the target cone",
            );
        }
        self.polyhedral(v, path, rank)
    }

    fn polyhedral(&mut self, v: &Value, path: &str, rank: usize) -> Option<PolyCone> {
        let rays = v.get("rays").map(|r| self.vectors(r, &join(path, "rays"), rank));
        let ineqs = v.get("ineqs").map(|r| self.vectors(r, &join(path, "ineqs"), rank));
        let built = match (rays, ineqs) {
            (None, None) => {
                self.issue(path, "cone literal needs \"rays\" or \"ineqs\"");
                return None;
            }
            (Some(r), None) => PolyCone::from_rays(rank, &r?),
            (None, Some(i)) => PolyCone::from_inequalities(rank, &i?),
            (Some(r), Some(i)) => PolyCone::from_both(rank, &r?, &i?),
        };
        match built {
            Ok(c) => Some(c),
            Err(e) => {
                self.issue(path, e);
                None
            }
        }
    }

    fn region(&mut self, v: &Value, path: &str, rank: usize) -> Option<AmbientRegion> {
        let cone = self.polyhedral(v, path, rank);
        let mut quads = Vec::new();
        if let Some(q) = v.get("strict_quadratic") {
            let qp = join(path, "strict_quadratic");
            for (i, m) in self.array(q, &qp)?.iter().enumerate() {
                quads.push(self.matrix(m, &index(&qp, i), rank, rank)?);
            }
        }
        let cone = cone?;
        let region = AmbientRegion::new(rank, cone.inequalities().to_vec(), quads);
        match region {
            Ok(r) => Some(r),
            Err(e) => {
                self.issue(path, e);
                None
            }
        }
    }

    fn group(&mut self, v: &Value, path: &str, rank: usize) -> Option<ActionGroup> {
        let (gens_value, gens_path, invariant) = if v.is_array() {
            (v, path.to_string(), None)
        } else {
            let g = self.required(v, path, "gens")?;
            let inv = v
                .get("invariant_cone")
                .map(|c| self.cone(c, &join(path, "invariant_cone"), rank));
            (g, join(path, "gens"), inv)
        };
        let list = self.array(gens_value, &gens_path)?;
        let gens: Vec<Option<QMatrix>> = list
            .iter()
            .enumerate()
            .map(|(i, m)| self.matrix(m, &index(&gens_path, i), rank, rank))
            .collect();
        let gens: Vec<QMatrix> = gens.into_iter().collect::<Option<_>>()?;
        let invariant = match invariant {
            Some(c) => Some(c?),
            None => None,
        };
        match ActionGroup::new(rank, gens, invariant) {
            Ok(g) => Some(g),
            Err(e) => {
                self.issue(path, e);
                None
            }
        }
    }

    fn marking_kind(&mut self, v: &Value, path: &str) -> Option<Option<MarkingKind>> {
        match v.get("kind") {
            None => Some(None),
            Some(k) => match serde_json::from_value::<MarkingKind>(k.clone()) {
                Ok(kind) => Some(Some(kind)),
                Err(_) => {
                    self.issue(&join(path, "kind"), "expected \"SQM\" or \"QBC\"");
                    None
                }
            },
        }
    }

    fn chamber(&mut self, v: &Value, path: &str, rank: usize, allow_tile: bool) -> Option<Chamber> {
        let id = match v.get("id").and_then(|s| s.as_str()) {
            Some(s) => s.to_string(),
            None => {
                self.issue(&join(path, "id"), "missing string id");
                String::new()
            }
        };
        let kind = self.marking_kind(v, path);
        let pullback = self
            .required(v, path, "pullback")
            .and_then(|p| self.matrix_any_width(p, &join(path, "pullback"), rank));
        let exc = match v.get("exc_rays") {
            Some(e) => self.vectors(e, &join(path, "exc_rays"), rank),
            None => Some(Vec::new()),
        };
        let m = pullback.as_ref().map(|p| p.ncols());
        let nef = match (self.required(v, path, "target_nef"), m) {
            (Some(n), Some(m)) => self.cone(n, &join(path, "target_nef"), m),
            _ => None,
        };
        let tile = match v.get("tile") {
            Some(_) if !allow_tile => {
                self.issue(&join(path, "tile"), "faces do not carry tiles");
                None
            }
            Some(t) => Some(self.cone(t, &join(path, "tile"), rank)),
            None => None,
        };
        let marking = match Marking::new(&id, rank, pullback?, exc?, kind?) {
            Ok(m) => m,
            Err(e) => {
                self.issue(path, format!("Marking invariant: {e}"));
                return None;
            }
        };
        let chamber = match Chamber::new(marking, nef?) {
            Ok(c) => c,
            Err(e) => {
                self.issue(path, format!("Chamber invariant: {e}"));
                return None;
            }
        };
        match tile {
            Some(t) => match chamber.with_tile(t?) {
                Ok(c) => Some(c),
                Err(e) => {
                    self.issue(&join(path, "tile"), e);
                    None
                }
            },
            None => Some(chamber),
        }
    }

    fn chambers(&mut self, v: &Value, path: &str, rank: usize, allow_tile: bool) -> Option<Vec<Chamber>> {
        let a = self.array(v, path)?;
        let out: Vec<Option<Chamber>> = a
            .iter()
            .enumerate()
            .map(|(i, c)| self.chamber(c, &index(path, i), rank, allow_tile))
            .collect();
        out.into_iter().collect()
    }

    fn budgets(&mut self, v: Option<&Value>) -> BudgetOverrides {
        let mut b = BudgetOverrides::default();
        let Some(v) = v else { return b };
        if !v.is_object() {
            self.issue("budgets", "expected an object");
            return b;
        }
        let mut get = |key: &str| v.get(key).and_then(|x| self.count(x, &join("budgets", key)));
        b.radius = get("radius").map(|x| x as usize);
        b.fuel = get("fuel").map(|x| x as usize);
        b.samples = get("samples").map(|x| x as usize);
        b.seed = get("seed");
        b.box_bound = get("box").map(|x| x as i64);
        if b.fuel == Some(0) {
            self.issue("budgets.fuel", "fuel must be at least 1");
        }
        if b.box_bound == Some(0) {
            self.issue("budgets.box", "box bound must be at least 1");
        }
        b
    }

    fn product(&mut self, v: &Value, rank: usize) -> Option<ProductData> {
        let path = "product";
        let p1 = self
            .required(v, path, "p1")
            .and_then(|p| self.matrix_any_width(p, "product.p1", rank));
        let p2 = self
            .required(v, path, "p2")
            .and_then(|p| self.matrix_any_width(p, "product.p2", rank));
        let (p1, p2) = (p1?, p2?);
        let mut cone_for = |key: &str, p: &QMatrix| -> Option<PolyCone> {
            let path = join("product", key);
            if p.ncols() == 0 {
                return Some(PolyCone::orthant(1));
            }
            let c = v.get(key);
            match c {
                Some(c) => self.cone(c, &path, p.ncols()),
                None => {
                    self.issue(&path, "missing required field");
                    None
                }
            }
        };
        let eff1 = cone_for("eff1", &p1);
        let eff2 = cone_for("eff2", &p2);
        Some(ProductData {
            eff1: eff1?,
            eff2: eff2?,
            p1,
            p2,
        })
    }

    fn scenario(&mut self, v: &Value, source: &str, text: &str) -> Option<Scenario> {
        if !v.is_object() {
            self.issue("", "a scenario must be a JSON object");
            return None;
        }
        let name = v
            .get("name")
            .and_then(|n| n.as_str())
            .unwrap_or(source)
            .to_string();
        let rank = self.required(v, "", "rank").and_then(|r| self.count(r, "rank"));
        let rank = match rank {
            Some(0) => {
                self.issue("rank", "rank must be positive");
                None
            }
            r => r.map(|r| r as usize),
        };
        let budgets = self.budgets(v.get("budgets"));
        let rank = rank?;

        let group = self.required(v, "", "group").and_then(|g| self.group(g, "group", rank));
        let target = self.required(v, "", "target");
        let kind = target.and_then(|t| match t.get("kind").and_then(|k| k.as_str()) {
            Some("effective") => Some(SystemKind::Effective),
            Some("movable") => Some(SystemKind::Movable),
            _ => {
                self.issue("target.kind", "expected \"effective\" or \"movable\"");
                None
            }
        });
        let region = target
            .and_then(|t| self.required(t, "target", "cone"))
            .and_then(|c| self.region(c, "target.cone", rank));
        let chambers = self
            .required(v, "", "chambers")
            .and_then(|c| self.chambers(c, "chambers", rank, true));
        let tile = v.get("tile").map(|t| self.cone(t, "tile", rank));
        let polytope = v.get("polytope").map(|t| self.cone(t, "polytope", rank));
        let faces = match v.get("faces") {
            Some(f) => self.chambers(f, "faces", rank, false),
            None => Some(Vec::new()),
        };
        let product = v.get("product").map(|p| self.product(p, rank));

        let system = match ChamberSystem::new(group?, chambers?, region?, kind?) {
            Ok(s) => s,
            Err(e) => {
                self.issue("chambers", format!("ChamberSystem invariant: {e}"));
                return None;
            }
        };
        if let Some(Some(t)) = &tile {
            if let Some(r) = t.generators().iter().find(|r| !system.target().closure_contains(r)) {
                self.issue("tile", format!("generator {r} lies outside the target closure"));
            }
        }
        Some(Scenario {
            name,
            source: source.to_string(),
            digest: digest(text),
            system,
            budgets,
            tile: settled(tile)?,
            polytope: settled(polytope)?,
            faces: faces?,
            product: settled(product)?,
        })
    }
}
