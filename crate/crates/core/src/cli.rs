//! Commands over scenarios and the reports they produce.
//!
//! Every command returns a [`Report`] whose JSON form is a pure function of
//! the scenario contents, the command and the resolved budgets. Exit codes:
//! 0 verified on samples, 2 refuted, 3 budget exhausted, 1 input error.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::action::{ActionError, GroupElement};
use crate::chambers::{
    build_effective_certificate, chamber_stabilizer, decompose_polytope_cone,
    extract_nef_certificates, nef_descent, product_effective_cone, validate_system, ChamberError,
    PipelineCertificate,
};
use crate::cone::PolyCone;
use crate::num::QVector;
use crate::scenario::{load_bundled, BudgetOverrides, LoadError, Scenario, BUNDLED};
use crate::tiling::{
    digest, sample_relative_interior, Budgets, Certificate, CertificateKind,
    Parameters, TiledCone, TilingError, Verdict, Witness,
};

pub const INPUT_ERROR_EXIT: i32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    TileCheck,
    FundamentalDomain,
    Decompose,
    Stabilizer,
    Descend,
    PipelineEffective,
    PipelineNef,
    Product,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Validate,
        Command::TileCheck,
        Command::FundamentalDomain,
        Command::Decompose,
        Command::Stabilizer,
        Command::Descend,
        Command::PipelineEffective,
        Command::PipelineNef,
        Command::Product,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::TileCheck => "tile-check",
            Command::FundamentalDomain => "fundamental-domain",
            Command::Decompose => "decompose",
            Command::Stabilizer => "stabilizer",
            Command::Descend => "descend",
            Command::PipelineEffective => "pipeline-effective",
            Command::PipelineNef => "pipeline-nef",
            Command::Product => "product",
        }
    }

    /// Whether the scenario carries the data this command needs.
    pub fn applies_to(self, s: &Scenario) -> bool {
        match self {
            Command::TileCheck | Command::FundamentalDomain | Command::PipelineEffective => {
                s.tiling_tile().is_some()
            }
            Command::Descend => {
                s.tiling_tile().is_some() && (s.system.target().is_polyhedral() || !s.faces.is_empty())
            }
            Command::Decompose | Command::PipelineNef => s.polytope.is_some(),
            Command::Product => s.product.is_some(),
            Command::Validate | Command::Stabilizer => true,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::UnknownCommand(s.to_string()))
    }
}

/// Budget values given on the command line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub radius: Option<usize>,
    pub fuel: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

/// Flag, then file, then default.
pub fn resolve_budgets(file: &BudgetOverrides, flags: &Overrides) -> Budgets {
    let d = Budgets::default();
    Budgets {
        radius: flags.radius.or(file.radius).unwrap_or(d.radius),
        fuel: flags.fuel.or(file.fuel).unwrap_or(d.fuel),
        samples: flags.samples.or(file.samples).unwrap_or(d.samples),
        seed: flags.seed.or(file.seed).unwrap_or(d.seed),
        box_bound: file.box_bound.unwrap_or(d.box_bound),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("unknown demo {0:?}; available: pell, quadrant-swap, dihedral, schoen-toy")]
    UnknownDemo(String),
    #[error("{command} needs {what} in the scenario")]
    Missing { command: Command, what: &'static str },
    #[error("fuel must be at least 1")]
    NoFuel,
    #[error(transparent)]
    Chamber(#[from] ChamberError),
    #[error(transparent)]
    Tiling(#[from] TilingError),
}

impl CliError {
    /// 3 when an orbit ball outgrew the element cap, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let action = match self {
            CliError::Chamber(ChamberError::Action(a)) => Some(a),
            CliError::Chamber(ChamberError::Tiling(TilingError::Action(a))) => Some(a),
            CliError::Tiling(TilingError::Action(a)) => Some(a),
            _ => None,
        };
        match action {
            Some(ActionError::BudgetExceeded { .. }) => Verdict::BudgetExhausted.exit_code(),
            _ => INPUT_ERROR_EXIT,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: Command,
    pub scenario: String,
    pub scenario_digest: String,
    pub budgets: Budgets,
    pub verdict: Verdict,
    pub exit_status: i32,
    pub summary: Vec<String>,
    pub certificates: Vec<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineCertificate>,
    pub data: Value,
}

impl Report {
    fn new(command: Command, s: &Scenario, budgets: Budgets) -> Self {
        Report {
            command,
            scenario: s.name.clone(),
            scenario_digest: s.digest.clone(),
            budgets,
            verdict: Verdict::VerifiedOnSamples,
            exit_status: 0,
            summary: Vec::new(),
            certificates: Vec::new(),
            pipeline: None,
            data: Value::Null,
        }
    }

    fn add(&mut self, cert: Certificate) {
        self.verdict = self.verdict.max(cert.verdict);
        self.certificates.push(cert);
    }

    fn finish(mut self) -> Self {
        if let Some(p) = &self.pipeline {
            self.verdict = self.verdict.max(p.verdict);
        }
        self.exit_status = self.verdict.exit_code();
        self.summary.insert(
            0,
            format!("{} on {}: {}", self.command, self.scenario, verdict_word(self.verdict)),
        );
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Prose rendering for `--human`.
    pub fn human(&self) -> String {
        let mut out = Vec::new();
        out.extend(self.summary.iter().cloned());
        let certs = self
            .certificates
            .iter()
            .chain(self.pipeline.iter().flat_map(|p| p.components.iter().map(|c| &c.certificate)));
        for c in certs {
            out.push(format!("  {:?} [{}]", c.kind, verdict_word(c.verdict)));
            for check in &c.checks {
                out.push(format!("    {}: {} ({})", check.name, verdict_word(check.verdict), check.detail));
            }
            for w in &c.witnesses {
                let mut parts = Vec::new();
                if let Some(p) = &w.point {
                    parts.push(format!("point {p}"));
                }
                if let Some(g) = &w.element {
                    parts.push(format!("element {:?}", g.word()));
                }
                if let Some(k) = &w.cone {
                    parts.push(format!("cone {k:?}"));
                }
                out.push(format!("    witness {}: {}", w.role, parts.join(", ")));
            }
            for n in &c.notes {
                out.push(format!("    note: {n}"));
            }
        }
        out.push(format!("exit status {}", self.exit_status));
        out.join("\n")
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::VerifiedOnSamples => "verified on samples",
        Verdict::BudgetExhausted => "budget exhausted",
        Verdict::Refuted => "refuted",
    }
}

fn cone_json(c: &PolyCone) -> Value {
    serde_json::to_value(c).expect("cones serialize")
}

fn element_json(g: &GroupElement) -> Value {
    serde_json::to_value(g).expect("elements serialize")
}

fn vector_json(v: &QVector) -> Value {
    serde_json::to_value(v).expect("vectors serialize")
}

fn scenario_tiling(s: &Scenario, command: Command) -> Result<TiledCone, CliError> {
    let tile = s.tiling_tile().ok_or(CliError::Missing {
        command,
        what: "a tile (top-level or on a chamber)",
    })?;
    Ok(TiledCone::new(
        s.system.group().clone(),
        tile,
        Some(s.system.target().clone()),
    )?)
}

pub fn run_command(cmd: Command, s: &Scenario, flags: &Overrides) -> Result<Report, CliError> {
    let budgets = resolve_budgets(&s.budgets, flags);
    if budgets.fuel == 0 {
        return Err(CliError::NoFuel);
    }
    let mut r = Report::new(cmd, s, budgets);
    match cmd {
        Command::Validate => {
            let cert = validate_system(&s.system, &budgets)?;
            r.summary.push(format!(
                "{} chambers, group with {} generators",
                s.system.chambers().len(),
                s.system.group().generator_matrices().len()
            ));
            r.add(cert);
            r.data = json!({ "chambers": s.system.chambers().iter().map(|c| c.id()).collect::<Vec<_>>() });
        }
        Command::TileCheck => {
            let t = scenario_tiling(s, cmd)?;
            r.add(t.certify_polyhedral_type(&budgets)?);
            r.data = json!({ "tile": cone_json(t.tile()), "reference": vector_json(t.reference()) });
        }
        Command::FundamentalDomain => {
            let t = scenario_tiling(s, cmd)?;
            let carving = t.carve_fundamental_domain(budgets.radius)?;
            r.add(t.verify_fundamental_domain(&carving.domain, &budgets)?);
            let equal = carving.domain == *t.tile();
            r.summary.push(format!(
                "{} cuts; domain {} the tile",
                carving.cuts.len(),
                if equal { "equals" } else { "differs from" }
            ));
            r.data = json!({
                "domain": cone_json(&carving.domain),
                "domain_equals_tile": equal,
                "reference": vector_json(&carving.reference),
                "cuts": carving.cuts.iter().map(|c| json!({
                    "element": element_json(&c.element),
                    "normal": vector_json(&c.normal),
                })).collect::<Vec<_>>(),
            });
        }
        Command::Decompose => {
            let pi = s.polytope.as_ref().ok_or(CliError::Missing {
                command: cmd,
                what: "a polytope cone",
            })?;
            let d = decompose_polytope_cone(pi, &s.system, &budgets)?;
            r.summary.push(format!("{} pieces", d.pieces.len()));
            r.data = json!({ "pieces": d.pieces });
            r.add(d.certificate);
        }
        Command::Stabilizer => stabilizers(s, &budgets, &mut r)?,
        Command::Descend => descend(s, &budgets, &mut r)?,
        Command::PipelineEffective => {
            let p = build_effective_certificate(&s.system, &budgets)?;
            r.summary.push(p.statement.clone());
            r.data = json!({
                "tile": p.tile.as_ref().map(cone_json),
                "domain": p.domain.as_ref().map(cone_json),
            });
            r.pipeline = Some(p);
        }
        Command::PipelineNef => {
            let pi = s.polytope.as_ref().ok_or(CliError::Missing {
                command: cmd,
                what: "a polytope cone (the effective tile)",
            })?;
            let x = extract_nef_certificates(&s.system, pi, &budgets)?;
            r.summary.push(format!(
                "{} translates, {} target classes",
                x.gammas.len(),
                x.classes.len()
            ));
            r.data = json!({
                "gammas": x.gammas.iter().map(element_json).collect::<Vec<_>>(),
                "sigma": cone_json(&x.sigma),
                "classes": x.classes,
                "pieces": x.decomposition.pieces,
            });
            r.pipeline = Some(x.certificate);
        }
        Command::Product => product(s, &budgets, &mut r)?,
    }
    Ok(r.finish())
}

fn stabilizers(s: &Scenario, budgets: &Budgets, r: &mut Report) -> Result<(), CliError> {
    let mut cert = Certificate::new(
        CertificateKind::Stabilizer,
        s.digest.clone(),
        Parameters {
            radius: Some(budgets.radius),
            ..Parameters::default()
        },
    );
    let mut rows = Vec::new();
    for ch in s.system.chambers() {
        match chamber_stabilizer(&s.system, ch, budgets.radius) {
            Ok(stab) => {
                cert.check(
                    &format!("exceptional-subcone:{}", ch.id()),
                    Verdict::VerifiedOnSamples,
                    format!("{} stabilizing ball elements preserve the exceptional rays", stab.len()),
                );
                rows.push(json!({
                    "chamber": ch.id(),
                    "elements": stab.iter().map(element_json).collect::<Vec<_>>(),
                }));
            }
            Err(ChamberError::ExceptionalViolation { chamber, word }) => {
                let ball = s.system.group().orbit_ball(budgets.radius).map_err(ChamberError::from)?;
                if let Some(g) = ball.into_iter().find(|g| g.word() == word.as_slice()) {
                    cert.witnesses.push(Witness::element("moves-exceptional-rays", g));
                }
                cert.check(
                    &format!("exceptional-subcone:{chamber}"),
                    Verdict::Refuted,
                    format!("element {word:?} stabilizes the chamber but not its exceptional subcone"),
                );
                rows.push(json!({ "chamber": chamber, "violation": word }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    cert.notes.push(format!("stabilizers computed on the radius-{} ball", budgets.radius));
    r.data = json!({ "stabilizers": rows });
    r.add(cert);
    Ok(())
}

fn descend(s: &Scenario, budgets: &Budgets, r: &mut Report) -> Result<(), CliError> {
    let t = scenario_tiling(s, Command::Descend)?;
    let mut faces = Vec::new();
    if s.system.target().is_polyhedral() {
        let closure = s.system.target().closure_cone();
        for f in closure.faces() {
            let d = t.descend_to_face(&f.cone, budgets)?;
            faces.push(json!({
                "face": cone_json(&f.cone),
                "tile": cone_json(&d.tile),
                "stabilizer": d.stabilizer.iter().map(element_json).collect::<Vec<_>>(),
                "unmatched": d.unmatched.len(),
            }));
            r.add(d.certificate);
        }
    } else {
        r.summary.push("target is not polyhedral; only listed face markings are descended".into());
    }
    let mut markings = Vec::new();
    for ch in &s.faces {
        let d = nef_descent(&t, ch, budgets)?;
        markings.push(json!({
            "id": ch.id(),
            "face": cone_json(&d.face),
            "tile": cone_json(&d.descent.tile),
            "stabilizer_window": d.descent.stabilizer.len(),
            "target_tiling": d.tiling,
        }));
        r.add(d.descent.certificate);
    }
    r.summary.push(format!(
        "{} faces of the target closure, {} face markings",
        faces.len(),
        markings.len()
    ));
    r.data = json!({ "faces": faces, "markings": markings });
    Ok(())
}

fn product(s: &Scenario, budgets: &Budgets, r: &mut Report) -> Result<(), CliError> {
    let p = s.product.as_ref().ok_or(CliError::Missing {
        command: Command::Product,
        what: "product data",
    })?;
    let out = product_effective_cone(&p.eff1, &p.eff2, &p.p1, &p.p2)?;
    #[derive(Serialize)]
    struct Inputs<'a> {
        eff1: &'a PolyCone,
        eff2: &'a PolyCone,
        p1: &'a crate::num::QMatrix,
        p2: &'a crate::num::QMatrix,
    }
    let mut cert = Certificate::new(
        CertificateKind::Product,
        digest(&Inputs {
            eff1: &p.eff1,
            eff2: &p.eff2,
            p1: &p.p1,
            p2: &p.p2,
        }),
        Parameters {
            samples: Some(budgets.samples),
            seed: Some(budgets.seed),
            box_bound: Some(budgets.box_bound),
            ..Parameters::default()
        },
    );
    let n = out.cone.rank();
    cert.check(
        "span",
        if out.spans {
            Verdict::VerifiedOnSamples
        } else {
            Verdict::Refuted
        },
        format!("pullbacks span rank {} of {n}", out.span_rank),
    );
    if !out.spans {
        cert.witnesses.push(Witness::cone("sum-cone", out.cone.clone()));
        r.summary.push("warning: pullbacks do not span; the sum cone is still reported".into());
    }
    let points = sample_relative_interior(&out.cone, budgets.samples, budgets.seed, budgets.box_bound);
    let mut failed = 0;
    for x in &points {
        if out.split(x).is_none() {
            failed += 1;
            if cert.witnesses.len() < 5 {
                cert.witnesses.push(Witness::point("unsplit", x.clone()));
            }
        }
    }
    cert.check(
        "split",
        if failed == 0 {
            Verdict::VerifiedOnSamples
        } else {
            Verdict::Refuted
        },
        format!("{} of {} sampled members split into the two images", points.len() - failed, points.len()),
    );
    r.data = json!({
        "cone": cone_json(&out.cone),
        "span_rank": out.span_rank,
        "spans": out.spans,
    });
    r.add(cert);
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub demo: String,
    pub verdict: Verdict,
    pub exit_status: i32,
    pub reports: Vec<Report>,
}

impl DemoReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn human(&self) -> String {
        let mut out = vec![format!("demo {}: {}", self.demo, verdict_word(self.verdict))];
        out.extend(self.reports.iter().map(|r| r.human()));
        out.join("\n\n")
    }
}

/// Runs every command that applies to a bundled scenario.
pub fn run_demo(name: &str, flags: &Overrides) -> Result<DemoReport, CliError> {
    let s = load_bundled(name).ok_or_else(|| CliError::UnknownDemo(name.to_string()))??;
    let mut reports = Vec::new();
    for cmd in Command::ALL.into_iter().filter(|c| c.applies_to(&s)) {
        reports.push(run_command(cmd, &s, flags)?);
    }
    let verdict = reports
        .iter()
        .map(|r| r.verdict)
        .max()
        .unwrap_or(Verdict::VerifiedOnSamples);
    Ok(DemoReport {
        demo: name.to_string(),
        verdict,
        exit_status: verdict.exit_code(),
        reports,
    })
}

pub fn demo_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}
