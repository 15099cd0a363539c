//! Exact cones: both descriptions, faces, and the lattice operations.

use conetool::num::QVector;
use conetool::PolyCone;

fn main() {
    // A square pyramid: four rays, four facets.
    let pyramid = PolyCone::from_int_rays(3, &[&[1, 1, 1], &[1, -1, 1], &[-1, 1, 1], &[-1, -1, 1]]);
    println!("pyramid rays:        {:?}", pyramid.generators());
    println!("pyramid inequalities {:?}", pyramid.inequalities());
    println!("dim {}, strictly convex {}", pyramid.dim(), pyramid.is_strictly_convex());

    let again = PolyCone::from_inequalities(3, pyramid.inequalities()).unwrap();
    assert_eq!(again, pyramid);

    let faces = pyramid.faces();
    println!("{} faces:", faces.len());
    for f in &faces {
        println!("  dim {} {:?}", f.cone.dim(), f.cone);
    }

    let octant = PolyCone::orthant(3);
    let meet = pyramid.intersect(&octant).unwrap();
    let sum = pyramid.sum(&octant).unwrap();
    println!("pyramid ∩ octant = {meet:?}");
    println!("pyramid + octant = {sum:?}");

    let x = QVector::from_ints(&[2, 0, 3]);
    println!(
        "{x}: in pyramid {}, in interior {}",
        pyramid.contains(&x).unwrap(),
        pyramid.interior_contains(&x).unwrap()
    );

    // A half-plane keeps its lineality line.
    let half = PolyCone::from_int_rays(2, &[&[1, 0], &[0, 1], &[0, -1]]);
    println!("half-plane: strictly convex {}, {:?}", half.is_strictly_convex(), half);
}
