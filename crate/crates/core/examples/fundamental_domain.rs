//! Dirichlet carving of a tile into a fundamental domain, and its check.

use conetool::num::QMatrix;
use conetool::tiling::{AmbientRegion, Budgets, TiledCone};
use conetool::{ActionGroup, PolyCone};

fn main() {
    let quadrant = PolyCone::orthant(2);
    let swap = QMatrix::from_i64(&[&[0, 1], &[1, 0]]);
    let group = ActionGroup::new(2, vec![swap], Some(quadrant.clone())).unwrap();
    let tiled = TiledCone::new(group, quadrant.clone(), Some(AmbientRegion::from_cone(&quadrant))).unwrap();
    let budgets = Budgets::default();

    // The quadrant itself is a tile but not a fundamental domain.
    let whole = tiled.verify_fundamental_domain(&quadrant, &budgets).unwrap();
    println!("quadrant as a domain: {:?}", whole.verdict);
    for w in &whole.witnesses {
        println!("  witness {}: {:?}", w.role, w);
    }

    let carving = tiled.carve_fundamental_domain(budgets.radius).unwrap();
    println!("reference point {}", carving.reference);
    for cut in &carving.cuts {
        println!("  cut by word {:?}: normal {}", cut.element.word(), cut.normal);
    }
    println!("domain {:?}", carving.domain);
    let cert = tiled.verify_fundamental_domain(&carving.domain, &budgets).unwrap();
    println!("carved domain: {:?}", cert.verdict);
}
