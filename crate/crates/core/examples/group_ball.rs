//! Unimodular groups: word balls, actions and stabilizers.

use conetool::num::{QMatrix, QVector};
use conetool::{ActionGroup, PolyCone};

fn main() {
    let pell = ActionGroup::new(2, vec![QMatrix::from_i64(&[&[3, 4], &[2, 3]])], None).unwrap();
    let ball = pell.ball(3).unwrap();
    println!("Pell ball of radius 3 has {} elements (complete: {})", ball.elements.len(), ball.complete);
    let x = QVector::from_ints(&[1, 0]);
    for g in &ball.elements {
        println!("  word {:?}: (1,0) -> {}", g.word(), g.act_vector(&x).unwrap());
    }

    let swap = QMatrix::from_i64(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
    let flip = QMatrix::from_i64(&[&[1, 0, 0], &[0, -1, 0], &[0, 0, 1]]);
    let dihedral = ActionGroup::new(3, vec![swap, flip], None).unwrap();
    let ball = dihedral.ball(8).unwrap();
    println!("dihedral group: {} elements, complete: {}", ball.elements.len(), ball.complete);

    let corner = PolyCone::from_int_rays(3, &[&[1, 1, 1]]);
    let stab = dihedral.stabilizer_in_ball(&corner, 8).unwrap();
    println!("stabilizer of the corner ray:");
    for g in &stab {
        println!("  word {:?}", g.word());
    }
}
