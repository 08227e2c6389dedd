//! Point-cloud conditioning: plane fit, voxel downsampling, near-point
//! merging and projection onto the support plane.

pub mod io;
mod merge;
mod ransac;
mod voxel;

pub use merge::merge_close_points;
pub use ransac::ransac_plane;
pub use voxel::{voxel_downsample, voxel_index};

use serde::{Deserialize, Serialize};

use crate::geom::{plane_basis, Vec3};

/// Ordered list of base-frame points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        debug_assert!(points.iter().all(|p| p.iter().all(|v| v.is_finite())));
        Self { points }
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Vec3) {
        self.points.push(p);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec3> {
        self.points.iter()
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
        Some(sum / self.points.len() as f64)
    }

    /// Smallest distance between two distinct entries (infinite below two points).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.min((p - q).norm());
            }
        }
        best
    }
}

impl FromIterator<Vec3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Vec3>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Plane `a·x + b·y + c·z + d = 0` with `‖(a, b, c)‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneModel {
    pub coefficients: [f64; 4],
    pub normal: Vec3,
    pub inlier_count: usize,
}

impl PlaneModel {
    pub fn from_point_normal(point: &Vec3, normal: &Vec3) -> Self {
        let n = normal.normalize();
        let d = -n.dot(point);
        Self {
            coefficients: [n.x, n.y, n.z, d],
            normal: n,
            inlier_count: 0,
        }
    }

    pub fn offset(&self) -> f64 {
        self.coefficients[3]
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) + self.offset()
    }

    pub fn project(&self, p: &Vec3) -> Vec3 {
        p - self.normal * self.signed_distance(p)
    }

    /// Closest point of the plane to the origin.
    pub fn origin(&self) -> Vec3 {
        -self.normal * self.offset()
    }

    /// Flips the normal, if needed, so that it points at `viewpoint`.
    pub fn oriented_towards(mut self, viewpoint: &Vec3) -> Self {
        if self.signed_distance(viewpoint) < 0.0 {
            self.normal = -self.normal;
            self.coefficients = self.coefficients.map(|v| -v);
        }
        self
    }

    /// In-plane basis `(e1, e2)`, right-handed with the normal.
    pub fn basis(&self) -> (Vec3, Vec3) {
        plane_basis(&self.normal)
    }

    /// 2-D coordinates of the projection of `p` in the plane basis.
    pub fn to_plane_coords(&self, p: &Vec3) -> [f64; 2] {
        let (e1, e2) = self.basis();
        let q = p - self.origin();
        [q.dot(&e1), q.dot(&e2)]
    }
}

/// Orthogonal projection of every point onto the plane.
pub fn project_to_plane(cloud: &PointCloud, plane: &PlaneModel) -> PointCloud {
    cloud.iter().map(|p| plane.project(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z_plane(h: f64) -> PlaneModel {
        PlaneModel::from_point_normal(&Vec3::new(0.0, 0.0, h), &Vec3::z())
    }

    #[test]
    fn points_on_plane_are_fixed() {
        let c = PointCloud::new(vec![Vec3::new(0.3, -1.0, 0.0)]);
        assert_eq!(project_to_plane(&c, &z_plane(0.0)), c);
    }

    #[test]
    fn axis_aligned_projections() {
        let c = PointCloud::new(vec![Vec3::new(0.0, 0.0, 1.0)]);
        assert_eq!(project_to_plane(&c, &z_plane(0.0)).points()[0], Vec3::zeros());
        let c = PointCloud::new(vec![Vec3::new(1.0, 2.0, 3.0)]);
        assert_eq!(project_to_plane(&c, &z_plane(1.0)).points()[0], Vec3::new(1.0, 2.0, 1.0));
    }

    #[test]
    fn orientation_faces_viewpoint() {
        let p = z_plane(0.0).oriented_towards(&Vec3::new(0.0, 0.0, -5.0));
        assert_eq!(p.normal, -Vec3::z());
        assert!(p.signed_distance(&Vec3::new(0.0, 0.0, -5.0)) > 0.0);
    }

    fn point() -> impl Strategy<Value = Vec3> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_contracting(
            pts in prop::collection::vec(point(), 2..20),
            n in point(),
            o in point(),
        ) {
            prop_assume!(n.norm() > 1e-3);
            let plane = PlaneModel::from_point_normal(&o, &n);
            let cloud = PointCloud::new(pts);
            let once = project_to_plane(&cloud, &plane);
            let twice = project_to_plane(&once, &plane);
            for (a, b) in once.iter().zip(twice.iter()) {
                prop_assert!((a - b).norm() < 1e-12);
                prop_assert!(plane.signed_distance(a).abs() < 1e-9);
            }
            for i in 0..cloud.len() {
                for j in 0..cloud.len() {
                    let before = (cloud.points()[i] - cloud.points()[j]).norm();
                    let after = (once.points()[i] - once.points()[j]).norm();
                    prop_assert!(after <= before + 1e-12);
                }
            }
        }
    }
}
