use nalgebra::{Matrix3, SymmetricEigen};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PlaneModel, PointCloud};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Best-consensus plane over `max_iters` random three-point hypotheses,
/// refit by PCA on its inliers.
///
/// The normal is oriented with a non-negative z component; callers that know
/// the camera position re-orient with [`PlaneModel::oriented_towards`].
pub fn ransac_plane(cloud: &PointCloud, inlier_tol: f64, max_iters: usize, seed: u64) -> Result<PlaneModel> {
    let pts = cloud.points();
    if pts.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "plane fit needs three points, got {}",
            pts.len()
        )));
    }
    let scale = pts
        .iter()
        .map(|p| (p - pts[0]).norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, PlaneModel)> = None;
    for _ in 0..max_iters.max(1) {
        let idx = sample(&mut rng, pts.len(), 3);
        let (a, b, c) = (pts[idx.index(0)], pts[idx.index(1)], pts[idx.index(2)]);
        let n = (b - a).cross(&(c - a));
        if n.norm() <= 1e-12 * scale * scale {
            continue;
        }
        let plane = PlaneModel::from_point_normal(&a, &n);
        let count = count_inliers(pts, &plane, inlier_tol);
        if best.as_ref().is_none_or(|(bc, _)| count > *bc) {
            best = Some((count, plane));
        }
    }
    let (_, hypothesis) = best.ok_or_else(|| {
        Error::DegenerateGeometry("every sampled triple was collinear".into())
    })?;

    let inliers: Vec<Vec3> = pts
        .iter()
        .filter(|p| hypothesis.signed_distance(p).abs() < inlier_tol)
        .copied()
        .collect();
    let mut plane = pca_plane(&inliers).unwrap_or(hypothesis);
    plane.inlier_count = count_inliers(pts, &plane, inlier_tol);
    if plane.normal.z < 0.0 || (plane.normal.z == 0.0 && crate::geom::lex_cmp(&plane.normal, &Vec3::zeros()).is_lt()) {
        plane.normal = -plane.normal;
        plane.coefficients = plane.coefficients.map(|v| -v);
    }
    Ok(plane)
}

fn count_inliers(pts: &[Vec3], plane: &PlaneModel, tol: f64) -> usize {
    pts.iter().filter(|p| plane.signed_distance(p).abs() < tol).count()
}

/// Least-squares plane: centroid and the eigenvector of the smallest
/// covariance eigenvalue.
fn pca_plane(pts: &[Vec3]) -> Option<PlaneModel> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let centroid = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let mut cov = Matrix3::zeros();
    for p in pts {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov / n);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let normal: Vec3 = eig.eigenvectors.column(imin).into_owned();
    if !normal.iter().all(|v| v.is_finite()) || normal.norm() < 0.5 {
        return None;
    }
    Some(PlaneModel::from_point_normal(&centroid, &normal))
}
