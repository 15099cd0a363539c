//! Reduction into a tile and the polyhedral-type certificate for the Pell
//! action on the cone x0^2 > 2 x1^2, x0 > 0.

use conetool::num::{QMatrix, QVector};
use conetool::tiling::{AmbientRegion, Budgets, TiledCone};
use conetool::{ActionGroup, PolyCone};

fn main() {
    let group = ActionGroup::new(2, vec![QMatrix::from_i64(&[&[3, 4], &[2, 3]])], None).unwrap();
    let target = AmbientRegion::new(
        2,
        vec![QVector::from_ints(&[1, 0])],
        vec![QMatrix::from_i64(&[&[1, 0], &[0, -2]])],
    )
    .unwrap();
    let tile = PolyCone::from_int_rays(2, &[&[1, 0], &[3, 2]]);
    let tiled = TiledCone::new(group, tile, Some(target)).unwrap();

    for p in [[17, 12], [99, 70], [3, -2], [10, 1]] {
        let x = QVector::from_ints(&p);
        let r = tiled.reduce_point(&x, 64).unwrap();
        println!("{x} -> {} by word {:?} after {} expansions", r.point, r.element.word(), r.steps);
    }

    let budgets = Budgets {
        samples: 300,
        ..Budgets::default()
    };
    let cert = tiled.certify_polyhedral_type(&budgets).unwrap();
    println!("{}", serde_json::to_string_pretty(&cert).unwrap());
}
