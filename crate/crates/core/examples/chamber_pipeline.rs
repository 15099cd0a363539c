//! From chamber tiles to a glued tile and fundamental domain, then down to
//! nef translates and small-modification classes.

use conetool::chambers::{build_effective_certificate, extract_nef_certificates, validate_system};
use conetool::scenario::load_bundled;
use conetool::tiling::Budgets;

fn main() {
    let s = load_bundled("quadrant-swap").unwrap().unwrap();
    let budgets = Budgets {
        radius: 4,
        samples: 200,
        ..Budgets::default()
    };
    let validation = validate_system(&s.system, &budgets).unwrap();
    println!("chamber system: {:?}", validation.verdict);
    let pipeline = build_effective_certificate(&s.system, &budgets).unwrap();
    println!("{}: {:?}", pipeline.statement, pipeline.verdict);
    println!("  glued tile {:?}", pipeline.tile);
    println!("  fundamental domain {:?}", pipeline.domain);
    for c in &pipeline.components {
        println!("  component {}: {:?}", c.role, c.certificate.verdict);
    }

    let pell = load_bundled("pell").unwrap().unwrap();
    let polytope = pell.polytope.clone().unwrap();
    let nef = extract_nef_certificates(&pell.system, &polytope, &Budgets::default()).unwrap();
    let words: Vec<_> = nef.gammas.iter().map(|g| g.word().to_vec()).collect();
    println!("pell: nef translates {words:?}, Σ = {:?}, classes {:?}", nef.sigma, nef.classes);
}
