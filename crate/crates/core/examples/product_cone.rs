//! Effective cone of a product from the factors and their pullbacks.

use conetool::chambers::product_effective_cone;
use conetool::num::{QMatrix, QVector};
use conetool::PolyCone;

fn main() {
    let eff1 = PolyCone::orthant(2);
    let eff2 = PolyCone::orthant(1);
    let p1 = QMatrix::from_i64(&[&[1, 0], &[0, 0], &[0, 1]]);
    let p2 = QMatrix::from_i64(&[&[0], &[1], &[0]]);
    let prod = product_effective_cone(&eff1, &eff2, &p1, &p2).unwrap();
    println!("cone {:?}, span rank {}, spans {}", prod.cone, prod.span_rank, prod.spans);
    for p in [[2, 3, 1], [0, 5, 0], [1, 0, 4]] {
        let x = QVector::from_ints(&p);
        let (a, b) = prod.split(&x).unwrap();
        println!("  {x} = {a} + {b}");
    }
}
