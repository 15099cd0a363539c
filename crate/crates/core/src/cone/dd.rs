//! Double description conversion for `{x : A x >= 0}`.
//!
//! The lineality space is split off first (kernel of `A`); what remains is a
//! pointed cone inside the row space of `A`, whose extreme rays are found by
//! incremental insertion of constraints starting from a simplicial cone.
//! New rays are only formed from pairs that pass the algebraic adjacency
//! test: the common active constraints have rank `d - 2`.

use num_traits::Zero;

use crate::num::{nullspace, rank, rref, sign, QMatrix, QVector};

pub(crate) struct Conversion {
    pub lineality: Vec<QVector>,
    pub rays: Vec<QVector>,
}

/// Extreme rays and lineality basis of `{x in R^n : <a, x> >= 0 for a in rows}`.
pub(crate) fn convert(rows: &[QVector], n: usize) -> Conversion {
    let rows: Vec<QVector> = rows.iter().filter(|r| !r.is_zero()).cloned().collect();
    let lineality = nullspace(&rows, n);
    let (basis, _) = rref(&rows);
    if basis.is_empty() {
        return Conversion {
            lineality,
            rays: Vec::new(),
        };
    }
    let d = basis.len();
    // Coordinates y in the row space: x = sum_j y_j basis_j.
    let reduced: Vec<QVector> = rows
        .iter()
        .map(|a| QVector::new(basis.iter().map(|b| a.dot(b)).collect()))
        .collect();
    let mut rays: Vec<QVector> = pointed_extreme_rays(&reduced, d)
        .into_iter()
        .map(|y| {
            basis
                .iter()
                .zip(y.iter())
                .fold(QVector::zeros(n), |acc, (b, c)| acc.add(&b.scale(c)))
                .primitive()
        })
        .collect();
    rays.sort();
    rays.dedup();
    Conversion { lineality, rays }
}

struct Ray {
    v: QVector,
    zeros: Vec<bool>,
}

/// `rows` has full column rank `d`, so the cone is pointed.
fn pointed_extreme_rays(rows: &[QVector], d: usize) -> Vec<QVector> {
    let k = rows.len();
    let mut initial = Vec::with_capacity(d);
    let mut chosen: Vec<QVector> = Vec::with_capacity(d);
    for (i, r) in rows.iter().enumerate() {
        chosen.push(r.clone());
        if rank(&chosen) == chosen.len() {
            initial.push(i);
            if initial.len() == d {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    debug_assert_eq!(initial.len(), d);
    let basis = QMatrix::from_rows(chosen, d);
    let inv = basis
        .inverse()
        .expect("independent rows form an invertible matrix");

    let mut processed = vec![false; k];
    for &i in &initial {
        processed[i] = true;
    }
    let zero_set = |v: &QVector, processed: &[bool]| -> Vec<bool> {
        (0..k)
            .map(|j| processed[j] && rows[j].dot(v).is_zero())
            .collect()
    };
    let mut rays: Vec<Ray> = inv
        .columns()
        .into_iter()
        .map(|c| {
            let v = c.primitive();
            let zeros = zero_set(&v, &processed);
            Ray { v, zeros }
        })
        .collect();

    for i in 0..k {
        if processed[i] {
            continue;
        }
        let a = &rows[i];
        let values: Vec<_> = rays.iter().map(|r| a.dot(&r.v)).collect();
        let signs: Vec<i8> = values.iter().map(sign).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (idx, r) in rays.iter().enumerate() {
            if signs[idx] >= 0 {
                let mut zeros = r.zeros.clone();
                zeros[i] = signs[idx] == 0;
                next.push(Ray {
                    v: r.v.clone(),
                    zeros,
                });
            }
        }
        for p in (0..rays.len()).filter(|&p| signs[p] > 0) {
            for m in (0..rays.len()).filter(|&m| signs[m] < 0) {
                let common: Vec<usize> = (0..k)
                    .filter(|&j| rays[p].zeros[j] && rays[m].zeros[j])
                    .collect();
                if common.len() + 2 < d {
                    continue;
                }
                // Cheap combinatorial filter before the rank test.
                let dominated = rays.iter().enumerate().any(|(o, r)| {
                    o != p && o != m && common.iter().all(|&j| r.zeros[j])
                });
                if dominated {
                    continue;
                }
                let active: Vec<QVector> = common.iter().map(|&j| rows[j].clone()).collect();
                if d >= 2 && rank(&active) != d - 2 {
                    continue;
                }
                let v = rays[m]
                    .v
                    .scale(&values[p])
                    .sub(&rays[p].v.scale(&values[m]))
                    .primitive();
                let mut zeros = vec![false; k];
                for &j in &common {
                    zeros[j] = true;
                }
                zeros[i] = true;
                next.push(Ray { v, zeros });
            }
        }
        processed[i] = true;
        rays = next;
    }
    rays.into_iter().map(|r| r.v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrant_from_inequalities() {
        let c = convert(
            &[QVector::from_ints(&[1, 0]), QVector::from_ints(&[0, 1])],
            2,
        );
        assert!(c.lineality.is_empty());
        assert_eq!(
            c.rays,
            vec![QVector::from_ints(&[0, 1]), QVector::from_ints(&[1, 0])]
        );
    }

    #[test]
    fn half_plane_has_lineality() {
        let c = convert(&[QVector::from_ints(&[0, 1])], 2);
        assert_eq!(c.lineality.len(), 1);
        assert_eq!(c.rays, vec![QVector::from_ints(&[0, 1])]);
    }

    #[test]
    fn contradictory_constraints_give_origin() {
        let c = convert(
            &[QVector::from_ints(&[1, 0]), QVector::from_ints(&[-1, 0])],
            1 + 1,
        );
        assert_eq!(c.lineality, vec![QVector::from_ints(&[0, 1])]);
        assert!(c.rays.is_empty());
    }

    #[test]
    fn square_pyramid() {
        // |x| <= z, |y| <= z
        let rows = [
            QVector::from_ints(&[-1, 0, 1]),
            QVector::from_ints(&[1, 0, 1]),
            QVector::from_ints(&[0, -1, 1]),
            QVector::from_ints(&[0, 1, 1]),
        ];
        let c = convert(&rows, 3);
        assert_eq!(c.rays.len(), 4);
        for r in &c.rays {
            assert_eq!(r[2], crate::num::q(1));
        }
    }
}
