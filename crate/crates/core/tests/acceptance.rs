//! Acceptance suite. Runs without the libtest harness so that each
//! criterion prints exactly one PASS/FAIL line.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use conetool::chambers::{
    chambers_equivalent, product_effective_cone, validate_system, Chamber, ChamberSystem, Marking, SystemKind,
};
use conetool::cli::{run_command, Command, Overrides, Report};
use conetool::num::{rank, solve_any, QMatrix, QVector, Q};
use conetool::scenario::{load_bundled, Scenario};
use conetool::tiling::{sample_interior, AmbientRegion, Budgets, TiledCone, Verdict};
use conetool::{ActionGroup, PolyCone};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        name: "double-description round trip",
        limit: Duration::from_secs(10),
        run: dd_round_trip,
    },
    Criterion {
        name: "pell tiling",
        limit: Duration::from_secs(5),
        run: pell_tiling,
    },
    Criterion {
        name: "face descent",
        limit: Duration::from_secs(2),
        run: face_descent,
    },
    Criterion {
        name: "gluing",
        limit: Duration::from_secs(2),
        run: gluing,
    },
    Criterion {
        name: "dichotomy validator",
        limit: Duration::from_secs(5),
        run: dichotomy,
    },
    Criterion {
        name: "polytope-cone decomposition",
        limit: Duration::from_secs(2),
        run: decomposition,
    },
    Criterion {
        name: "nef pipeline",
        limit: Duration::from_secs(2),
        run: nef_pipeline,
    },
    Criterion {
        name: "product cone",
        limit: Duration::from_secs(2),
        run: product_cone,
    },
    Criterion {
        name: "determinism",
        limit: Duration::from_secs(30),
        run: determinism,
    },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; too slow")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "{tag} {}: {detail} ({:.2}s, limit {}s)",
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        if outcome.is_err() {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scenario(name: &str) -> Scenario {
    load_bundled(name).expect("bundled").expect("valid")
}

fn run(cmd: Command, s: &Scenario, flags: &Overrides) -> Result<Report, String> {
    run_command(cmd, s, flags).map_err(|e| format!("{cmd}: {e}"))
}

fn cone_from_json(v: &Value) -> PolyCone {
    let n = v["rank"].as_u64().expect("rank") as usize;
    let rays: Vec<QVector> = serde_json::from_value(v["rays"].clone()).expect("rays");
    PolyCone::from_rays(n, &rays).expect("cone")
}

fn matrix_power(g: &QMatrix, k: i64) -> QMatrix {
    let base = if k < 0 { g.inverse().expect("invertible") } else { g.clone() };
    (0..k.unsigned_abs()).fold(QMatrix::identity(g.nrows()), |acc, _| base.mul(&acc))
}

/// Membership in `cone(gens)` by search over bases of generators, without
/// any dual description.
fn in_span_cone(gens: &[QVector], x: &QVector) -> bool {
    let d = rank(gens);
    if d == 0 {
        return x.is_zero();
    }
    fn go(gens: &[QVector], x: &QVector, d: usize, start: usize, chosen: &mut Vec<QVector>) -> bool {
        if chosen.len() == d {
            let m = QMatrix::from_columns(chosen, x.len());
            return match solve_any(&m, x) {
                Some(c) => !c.iter().any(|t| t.is_negative()) && m.mul_vec(&c) == *x,
                None => false,
            };
        }
        for i in start..gens.len() {
            chosen.push(gens[i].clone());
            if rank(chosen) == chosen.len() && go(gens, x, d, i + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    go(gens, x, d, 0, &mut Vec::new())
}

fn dd_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for trial in 0..200 {
        let n = rng.gen_range(1..=5);
        let count = rng.gen_range(1..=n + 3);
        let rays: Vec<QVector> = (0..count)
            .map(|_| QVector::new((0..n).map(|_| Q::from_integer(rng.gen_range(-9..=9).into())).collect()))
            .collect();
        let v = PolyCone::from_rays(n, &rays).map_err(|e| e.to_string())?;
        let h = PolyCone::from_inequalities(n, v.inequalities()).map_err(|e| e.to_string())?;
        let forward = rays.iter().all(|r| h.contains(r).unwrap());
        let backward = h.generators().iter().all(|g| in_span_cone(&rays, g));
        if !(forward && backward && h == v) {
            failures.push(trial);
        }
    }
    ensure(failures.is_empty(), || format!("round trip failed for trials {failures:?}"))?;
    Ok("200 random cones, rank <= 5, entries in [-9,9]; zero failures".into())
}

fn pell_tiling() -> Outcome {
    let s = scenario("pell");
    let flags = Overrides {
        samples: Some(1000),
        fuel: Some(64),
        radius: Some(6),
        ..Overrides::default()
    };
    let tc = run(Command::TileCheck, &s, &flags)?;
    ensure(tc.exit_status == 0, || format!("tile-check exit {}", tc.exit_status))?;
    ensure(
        tc.certificates[0].check_named("covering").map(|c| c.detail.starts_with("1000 of 1000")) == Some(true),
        || "covering did not reduce all 1000 samples".into(),
    )?;

    let fd = run(Command::FundamentalDomain, &s, &flags)?;
    let strict = fd.certificates[0].check_named("strictness").map(|c| c.verdict);
    ensure(strict == Some(Verdict::VerifiedOnSamples), || "strictness not certified".into())?;
    ensure(fd.data["domain_equals_tile"] == Value::Bool(true), || "carving differs from the tile".into())?;

    // Each reduced element must be a power g^k with |k| <= 40.
    let g = QMatrix::from_i64(&[&[3, 4], &[2, 3]]);
    let powers: Vec<(i64, QMatrix)> = (-40..=40).map(|k| (k, matrix_power(&g, k))).collect();
    let tile = PolyCone::from_int_rays(2, &[&[1, 0], &[3, 2]]);
    let t = TiledCone::new(
        ActionGroup::new(2, vec![g.clone()], None).unwrap(),
        tile.clone(),
        Some(s.system.target().clone()),
    )
    .unwrap();
    let b = tc.budgets;
    let points = sample_interior(s.system.target(), b.samples, b.seed, b.box_bound).map_err(|e| e.to_string())?;
    let mut max_k = 0;
    for p in &points {
        let r = t.reduce_point(p, b.fuel).map_err(|e| format!("{p}: {e}"))?;
        let (k, m) = powers
            .iter()
            .find(|(_, m)| *m == *r.element.matrix())
            .ok_or_else(|| format!("{p}: element is not g^k with |k| <= 40"))?;
        ensure(tile.contains(&m.mul_vec(p)).unwrap(), || format!("{p}: g^{k} p not in the tile"))?;
        max_k = max_k.max(k.abs());
    }
    Ok(format!(
        "1000/1000 samples reduced and matched g^k (max |k| = {max_k}); strictness certified; carving returns the tile"
    ))
}

/// Every element of a finite group, by closure under the generators.
fn group_closure(gens: &[QMatrix], n: usize) -> Vec<QMatrix> {
    let mut all = vec![QMatrix::identity(n)];
    let mut frontier = all.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in &frontier {
            for g in gens {
                let m = g.mul(h);
                if !all.contains(&m) {
                    all.push(m.clone());
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    all
}

fn act(m: &QMatrix, c: &PolyCone) -> PolyCone {
    let gens: Vec<QVector> = c.generators().iter().map(|g| m.mul_vec(g)).collect();
    PolyCone::from_rays(c.rank(), &gens).unwrap()
}

/// Dirichlet cell of the face stabilizer around the relative-interior
/// point of the candidate, which must not be fixed by any non-identity
/// stabilizer element.
fn face_oracle(group: &[QMatrix], face: &PolyCone, candidate: &PolyCone) -> Result<PolyCone, String> {
    let n = face.rank();
    if candidate.is_zero() {
        return Ok(PolyCone::zero(n));
    }
    let stab: Vec<&QMatrix> = group.iter().filter(|h| act(h, face) == *face).collect();
    let xi = candidate.relative_interior_point();
    let mut ineqs = face.inequalities().to_vec();
    for h in &stab {
        if face.generators().iter().all(|g| h.mul_vec(g) == *g) {
            continue;
        }
        let normal = xi.sub(&h.transpose().mul_vec(&xi));
        if face.generators().iter().all(|g| normal.dot(g).is_zero()) {
            return Err(format!("center {xi} is fixed by a stabilizer element"));
        }
        ineqs.push(normal);
    }
    Ok(PolyCone::from_inequalities(n, &ineqs).unwrap())
}

fn face_descent() -> Outcome {
    let mut checked = 0;
    let mut details = Vec::new();
    for name in ["quadrant-swap", "dihedral"] {
        let s = scenario(name);
        let r = run(Command::Descend, &s, &Overrides::default())?;
        ensure(r.exit_status == 0, || format!("{name}: descend exit {}", r.exit_status))?;
        let group = group_closure(s.system.group().generator_matrices(), s.rank());
        let faces = r.data["faces"].as_array().unwrap();
        ensure(
            faces.len() == s.system.target().closure_cone().faces().len(),
            || format!("{name}: not every face was descended"),
        )?;
        for f in faces.iter().chain(r.data["markings"].as_array().unwrap()) {
            let face = cone_from_json(&f["face"]);
            let tile = cone_from_json(&f["tile"]);
            let oracle = face_oracle(&group, &face, &tile).map_err(|e| format!("{name} {face:?}: {e}"))?;
            ensure(oracle == tile, || format!("{name}: face {face:?} gave {tile:?}, oracle {oracle:?}"))?;
            checked += 1;
        }
        details.push(format!("{name} {} faces", faces.len()));
        if name == "dihedral" {
            let corner = r.data["markings"]
                .as_array()
                .unwrap()
                .iter()
                .find(|m| m["id"] == "corner")
                .ok_or("dihedral corner marking missing")?;
            ensure(corner["stabilizer_window"] == 2, || "corner stabilizer window is not of order 2".into())?;
        }
    }
    Ok(format!("{checked} face tiles equal the stabilizer Dirichlet cell ({})", details.join(", ")))
}

fn gluing() -> Outcome {
    let s = scenario("quadrant-swap");
    let flags = Overrides {
        samples: Some(500),
        ..Overrides::default()
    };
    let r = run(Command::PipelineEffective, &s, &flags)?;
    ensure(r.exit_status == 0, || format!("exit {}", r.exit_status))?;
    let p = r.pipeline.as_ref().ok_or("no pipeline certificate")?;
    let glue = &p.components.iter().find(|c| c.role == "glue").ok_or("no glue component")?.certificate;
    let covering = glue.check_named("covering").ok_or("no covering check")?;
    ensure(covering.detail.starts_with("500 of 500"), || covering.detail.clone())?;
    let tile = p.tile.clone().ok_or("no glued tile")?;
    let quadrant = PolyCone::orthant(2);
    ensure(quadrant.contains_cone(&tile), || "glued tile leaves the closure".into())?;

    let swap = QMatrix::from_i64(&[&[0, 1], &[1, 0]]);
    let points = sample_interior(s.system.target(), 500, 0, 50).unwrap();
    for x in &points {
        let covered = tile.contains(x).unwrap() || tile.contains(&swap.mul_vec(x)).unwrap();
        ensure(covered, || format!("{x} not in the group translates of the tile"))?;
    }
    Ok(format!("tile {tile:?} inside the quadrant; 500/500 samples covered"))
}

fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> Vec<QVector> {
    loop {
        let vs: Vec<QVector> = (0..n)
            .map(|_| QVector::new((0..n).map(|_| Q::from_integer(rng.gen_range(-5..=5).into())).collect()))
            .collect();
        if rank(&vs) == n {
            return vs;
        }
    }
}

fn chamber(id: &str, rays: &[QVector]) -> Chamber {
    let n = rays[0].len();
    Chamber::new(Marking::identity(id, n), PolyCone::from_rays(n, rays).unwrap()).unwrap()
}

fn dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut detected, mut false_alarms) = (0, 0);
    let budgets = Budgets {
        samples: 20,
        ..Budgets::default()
    };
    for i in 0..100 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let v = random_basis(&mut rng, n);
        let planted = i < 50;
        let other: Vec<QVector> = match (n, planted) {
            (2, true) => vec![v[0].add(&v[1]), v[0].sub(&v[1])],
            (2, false) => vec![v[1].clone(), v[1].scale(&Q::from_integer(2.into())).sub(&v[0])],
            (_, true) => {
                let s = v[0].add(&v[1]);
                vec![s.add(&v[2]), s.sub(&v[2]), v[0].clone()]
            }
            (_, false) => vec![v[0].clone(), v[1].clone(), v[0].add(&v[1]).sub(&v[2])],
        };
        let a = chamber("a", &v);
        let b = chamber("b", &other);
        let pairwise = chambers_equivalent(&a, &b).is_err();
        let target = AmbientRegion::from_cone(&a.cone().sum(b.cone()).unwrap());
        let sys = ChamberSystem::new(ActionGroup::trivial(n), vec![a, b], target, SystemKind::Effective)
            .map_err(|e| format!("fixture {i}: {e}"))?;
        let cert = validate_system(&sys, &budgets).map_err(|e| format!("fixture {i}: {e}"))?;
        let validator = cert.check_named("dichotomy").map(|c| c.verdict) == Some(Verdict::Refuted);
        ensure(pairwise == validator, || format!("fixture {i}: pairwise check and validator disagree"))?;
        let flagged = validator;
        match (planted, flagged) {
            (true, true) => detected += 1,
            (false, true) => false_alarms += 1,
            _ => {}
        }
    }
    ensure(detected == 50 && false_alarms == 0, || {
        format!("detected {detected}/50, false alarms {false_alarms}/50")
    })?;
    Ok("50/50 planted overlaps detected, 0/50 false alarms".into())
}

fn decomposition() -> Outcome {
    let s = scenario("pell");
    let r = run(Command::Decompose, &s, &Overrides::default())?;
    ensure(r.exit_status == 0, || format!("exit {}", r.exit_status))?;
    let g = QMatrix::from_i64(&[&[3, 4], &[2, 3]]);
    let pi0 = PolyCone::from_int_rays(2, &[&[1, 0], &[3, 2]]);
    let pi = s.polytope.clone().unwrap();
    let expected: Vec<i64> = (-10..=10)
        .filter(|&k| act(&matrix_power(&g, k), &pi0).intersect(&pi).unwrap().dim() == 2)
        .collect();
    let pieces = r.data["pieces"].as_array().unwrap();
    let mut got = Vec::new();
    let mut cones = Vec::new();
    for p in pieces {
        let word: Vec<i64> = p["element"]["word"]
            .as_array()
            .unwrap()
            .iter()
            .map(|l| l.as_i64().unwrap())
            .collect();
        ensure(word.iter().all(|l| l.signum() == word.first().map_or(0, |f| f.signum())), || {
            format!("word {word:?} is not a power")
        })?;
        let k: i64 = word.iter().map(|l| l.signum()).sum();
        let cone = cone_from_json(&p["cone"]);
        ensure(cone == act(&matrix_power(&g, k), &pi0).intersect(&pi).unwrap(), || {
            format!("piece for k = {k} is not g^k Π0 ∩ Π")
        })?;
        ensure(cone.generators().iter().all(|v| v.is_integral()), || "non-rational piece".into())?;
        got.push(k);
        cones.push(cone);
    }
    got.sort();
    ensure(got == expected, || format!("pieces {got:?}, brute force {expected:?}"))?;
    for (i, a) in cones.iter().enumerate() {
        for b in &cones[i + 1..] {
            ensure(a.intersect(b).unwrap().dim() < 2, || "pieces overlap".into())?;
        }
    }
    let b = r.budgets;
    for x in conetool::tiling::sample_relative_interior(&pi, b.samples, b.seed + 1, b.box_bound) {
        ensure(cones.iter().any(|c| c.contains(&x).unwrap()), || format!("{x} uncovered"))?;
    }
    Ok(format!("pieces k = {got:?} match brute force over |k| <= 10; disjoint, integral, covering"))
}

fn nef_pipeline() -> Outcome {
    let s = scenario("pell");
    let r = run(Command::PipelineNef, &s, &Overrides::default())?;
    ensure(r.exit_status == 0, || format!("exit {}", r.exit_status))?;
    let gammas = r.data["gammas"].as_array().unwrap();
    ensure(gammas.len() == 2, || format!("{} translates", gammas.len()))?;
    let sigma = cone_from_json(&r.data["sigma"]);
    let pi0 = PolyCone::from_int_rays(2, &[&[1, 0], &[3, 2]]);
    ensure(sigma == pi0, || format!("Σ = {sigma:?}"))?;
    let classes = r.data["classes"].as_array().unwrap();
    ensure(classes.len() == 1, || format!("{} classes", classes.len()))?;
    Ok("2 translates, Σ = Π0, 1 target class".into())
}

fn product_cone() -> Outcome {
    let s = scenario("schoen-toy");
    let r = run(Command::Product, &s, &Overrides::default())?;
    ensure(r.exit_status == 0, || format!("exit {}", r.exit_status))?;
    ensure(r.data["span_rank"] == 3, || "span rank is not 3".into())?;
    let cone = cone_from_json(&r.data["cone"]);
    let data = s.product.as_ref().unwrap();
    let prod = product_effective_cone(&data.eff1, &data.eff2, &data.p1, &data.p2).unwrap();
    ensure(prod.cone == cone, || "report cone differs from the library cone".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let nonneg_preimage = |p: &QMatrix, a: &QVector| match solve_any(p, a) {
        Some(y) => p.mul_vec(&y) == *a && !y.iter().any(|t| t.is_negative()),
        None => false,
    };
    let mut members = 0;
    for _ in 0..1000 {
        let x = QVector::new((0..3).map(|_| Q::from_integer(rng.gen_range(-6..=6).into())).collect());
        let in_octant = !x.iter().any(|t| t.is_negative());
        ensure(cone.contains(&x).unwrap() == in_octant, || format!("membership differs at {x}"))?;
        if in_octant {
            members += 1;
            let (a, b) = prod.split(&x).ok_or_else(|| format!("{x} does not split"))?;
            ensure(a.add(&b) == x, || format!("{x}: parts do not sum"))?;
            ensure(nonneg_preimage(&data.p1, &a) && nonneg_preimage(&data.p2, &b), || {
                format!("{x}: parts are not in the images")
            })?;
        }
    }
    Ok(format!("span rank 3; octant on 1000 lattice points; {members} members split"))
}

fn determinism() -> Outcome {
    let runs: [(&str, Command); 10] = [
        ("pell", Command::TileCheck),
        ("pell", Command::FundamentalDomain),
        ("pell", Command::Decompose),
        ("pell", Command::PipelineNef),
        ("quadrant-swap", Command::Descend),
        ("dihedral", Command::Descend),
        ("quadrant-swap", Command::PipelineEffective),
        ("schoen-toy", Command::Product),
        ("quadrant-swap", Command::Validate),
        ("dihedral", Command::Stabilizer),
    ];
    let flags = Overrides {
        seed: Some(11),
        ..Overrides::default()
    };
    for (name, cmd) in runs {
        let first = run(cmd, &scenario(name), &flags)?.to_json();
        let second = run(cmd, &scenario(name), &flags)?.to_json();
        ensure(first == second, || format!("{cmd} on {name} differs between runs"))?;
    }
    let budgets = Budgets::default();
    ensure(budgets.seed == 0, || "default seed changed".into())?;
    Ok(format!("{} command runs byte-identical across repeats", runs.len()))
}
