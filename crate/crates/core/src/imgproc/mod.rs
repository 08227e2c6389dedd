//! From segmentation masks to per-cable skeleton clouds.

mod cluster;
mod color;
mod grid;
pub mod io;
mod morph;
mod thin;

pub use cluster::{
    cluster_pixels, core_distances, mst_cut_labels, pixel_features, Feature, PixelCluster,
    PixelClusterSet,
};
pub use color::srgb_to_lab;
pub use grid::{CameraIntrinsics, ImageGrid, Pixel};
pub use morph::blur_and_clean;
pub use thin::skeletonize;

use crate::cloudproc::PointCloud;
use crate::error::{Error, Result};

/// Back-projects pixels through their depth readings into the base frame.
///
/// Pixels without depth are skipped; fewer than half with depth is an error.
pub fn pixels_to_cloud(pixels: &[Pixel], depth: &ImageGrid, intr: &CameraIntrinsics) -> Result<PointCloud> {
    if depth.channels() != 1 || depth.width() != intr.width || depth.height() != intr.height {
        return Err(Error::Dimension("depth image does not match the camera".into()));
    }
    let mut points = Vec::with_capacity(pixels.len());
    for &(r, c) in pixels {
        let z = depth.get(r, c, 0) as f64;
        if z > 0.0 {
            points.push(intr.back_project(r as f64, c as f64, z));
        }
    }
    if pixels.is_empty() || 2 * points.len() < pixels.len() {
        return Err(Error::InsufficientDepth {
            valid: points.len(),
            total: pixels.len(),
        });
    }
    Ok(PointCloud::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Pose, Vec3};

    fn camera() -> CameraIntrinsics {
        CameraIntrinsics {
            width: 64,
            height: 48,
            fx: 50.0,
            fy: 50.0,
            cx: 32.0,
            cy: 24.0,
            pose: Pose::identity(),
        }
    }

    #[test]
    fn principal_point_maps_to_optical_axis() {
        let mut depth = ImageGrid::new(64, 48, 1);
        depth.set(24, 32, 0, 1.0);
        let cloud = pixels_to_cloud(&[(24, 32)], &depth, &camera()).unwrap();
        assert!((cloud.points()[0] - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn one_focal_length_right_is_unit_tangent() {
        // (cy, cx + fx) is column 82, so widen the image
        let cam = CameraIntrinsics {
            width: 100,
            ..camera()
        };
        let mut depth = ImageGrid::new(100, 48, 1);
        depth.set(24, 82, 0, 2.0);
        let cloud = pixels_to_cloud(&[(24, 82)], &depth, &cam).unwrap();
        assert!((cloud.points()[0] - Vec3::new(2.0, 0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn holes_are_skipped_until_half_are_missing() {
        let mut depth = ImageGrid::new(64, 48, 1);
        depth.set(0, 0, 0, 1.0);
        let ok = pixels_to_cloud(&[(0, 0), (0, 1)], &depth, &camera()).unwrap();
        assert_eq!(ok.len(), 1);
        let err = pixels_to_cloud(&[(0, 0), (0, 1), (0, 2)], &depth, &camera()).unwrap_err();
        assert!(matches!(err, Error::InsufficientDepth { valid: 1, total: 3 }));
    }
}
