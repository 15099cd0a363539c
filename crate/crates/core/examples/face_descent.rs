//! Descending a tiling to the faces of the cone over a square, under the
//! symmetries of the square.

use conetool::scenario::load_bundled;
use conetool::tiling::{Budgets, TiledCone};

fn main() {
    let s = load_bundled("dihedral").unwrap().unwrap();
    let tile = s.tiling_tile().expect("dihedral bundles a tile");
    let tiled = TiledCone::new(s.system.group().clone(), tile.clone(), Some(s.system.target().clone())).unwrap();
    println!("tile {tile:?}");
    let budgets = Budgets {
        radius: 4,
        ..Budgets::default()
    };
    for face in s.system.target().closure_cone().faces() {
        let d = tiled.descend_to_face(&face.cone, &budgets).unwrap();
        println!(
            "face {:?}\n  stabilizer window {} elements, face tile {:?}, verdict {:?}",
            face.cone,
            d.stabilizer.len(),
            d.tile,
            d.certificate.verdict
        );
    }
}
