use std::cmp::Ordering;

use super::PointCloud;
use crate::geom::{lex_cmp, Vec3};

/// Repeatedly replaces the closest pair nearer than `threshold` by its
/// midpoint until every pair is at least `threshold` apart.
///
/// Ties on distance go to the pair whose points come first lexicographically.
/// The midpoint takes the position of the earlier point in the list.
pub fn merge_close_points(cloud: &PointCloud, threshold: f64) -> PointCloud {
    let mut pts: Vec<Vec3> = cloud.points().to_vec();
    while let Some((i, j)) = closest_pair_below(&pts, threshold) {
        pts[i] = (pts[i] + pts[j]) * 0.5;
        pts.remove(j);
    }
    PointCloud::new(pts)
}

fn ordered(a: &Vec3, b: &Vec3) -> (Vec3, Vec3) {
    if lex_cmp(a, b).is_le() {
        (*a, *b)
    } else {
        (*b, *a)
    }
}

fn closest_pair_below(pts: &[Vec3], threshold: f64) -> Option<(usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i] - pts[j]).norm();
            if d >= threshold {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bi, bj)) => match d.total_cmp(&bd) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        let (a0, a1) = ordered(&pts[i], &pts[j]);
                        let (b0, b1) = ordered(&pts[bi], &pts[bj]);
                        lex_cmp(&a0, &b0).then(lex_cmp(&a1, &b1)).is_lt()
                    }
                },
            };
            if better {
                best = Some((d, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}
