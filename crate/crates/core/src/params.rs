//! Reconstruction parameters and their defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Parameters of the reconstruction and exploration algorithms.
///
/// Lengths are meters, angles degrees. `t_h` is a dimensionless threshold on
/// the tactile indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconParams {
    /// Exploration stops once a new tactile point is this close to an endpoint.
    pub d_min: f64,
    /// Voxel edge length of the downsampling grid.
    pub d_m: f64,
    /// Points closer than this are replaced by their midpoint.
    pub t_p: f64,
    /// Indicator threshold separating cable contacts from flat contacts.
    pub t_h: f64,
    /// Advance along the cable per exploration step.
    pub delta_y: f64,
    /// Descent increment along the plane normal.
    pub delta_z: f64,
    /// Rotation increment about the plane normal when no cable is found.
    pub theta: f64,
    /// Neighbour search radius of the sorting walk.
    pub r_search: f64,
    /// Largest direction change accepted by the sorting walk.
    pub alpha_max: f64,
    pub max_rotation_attempts: u32,
    /// Pressure above which a taxel counts as touched.
    pub eps_contact: f64,
    pub voxel_origin: [f64; 3],
}

impl Default for ReconParams {
    fn default() -> Self {
        Self {
            d_min: 0.0150,
            d_m: 0.0200,
            t_p: 0.0080,
            t_h: 0.0011,
            delta_y: 0.0100,
            delta_z: 0.0015,
            theta: 15.0,
            r_search: 0.05,
            alpha_max: 75.0,
            max_rotation_attempts: 24,
            eps_contact: 0.05,
            voxel_origin: [0.0; 3],
        }
    }
}

impl ReconParams {
    pub fn voxel_origin(&self) -> Vec3 {
        Vec3::from(self.voxel_origin)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_min", self.d_min),
            ("d_m", self.d_m),
            ("t_p", self.t_p),
            ("t_h", self.t_h),
            ("delta_y", self.delta_y),
            ("delta_z", self.delta_z),
            ("theta", self.theta),
            ("r_search", self.r_search),
            ("alpha_max", self.alpha_max),
            ("eps_contact", self.eps_contact),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_rotation_attempts == 0 {
            return Err(Error::Config("max_rotation_attempts must be positive".into()));
        }
        if self.voxel_origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("voxel_origin must be finite".into()));
        }
        let turns = self.theta * self.max_rotation_attempts as f64;
        if (turns - 360.0).abs() < 1e-9 {
            return Ok(());
        }
        if turns > 360.0 + 1e-9 {
            return Err(Error::Config(format!(
                "{} rotations of {} deg exceed a full turn",
                self.max_rotation_attempts, self.theta
            )));
        }
        Ok(())
    }
}

/// Density-clustering settings for separating cables in the image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    pub min_cluster_size: usize,
    /// Feature units per pixel of image distance (CIELAB units are 1:1).
    pub spatial_weight: f64,
    /// Spanning-tree edges longer than this split clusters.
    pub cut_distance: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            min_cluster_size: 30,
            spatial_weight: 0.5,
            cut_distance: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacParams {
    pub inlier_tol: f64,
    pub max_iters: usize,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            inlier_tol: 0.003,
            max_iters: 500,
        }
    }
}

/// Exploration settings that have no counterpart in the reconstruction table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreParams {
    /// Height above the plane where each descent starts.
    pub hover_height: f64,
    /// Hard limit on probes per cable.
    pub probe_budget: usize,
    /// Contacts this close to the visual polyline or to earlier tactile
    /// points are treated as already known.
    pub revisit_radius: f64,
    /// Accepted points after which a single walk is closed.
    pub max_walk_points: usize,
}

impl Default for ExploreParams {
    fn default() -> Self {
        Self {
            hover_height: 0.02,
            probe_budget: 10_000,
            revisit_radius: 0.005,
            max_walk_points: 200,
        }
    }
}

/// Everything a pipeline run needs besides the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub recon: ReconParams,
    pub cluster: ClusterParams,
    pub ransac: RansacParams,
    pub explore: ExploreParams,
    /// Stride used when turning support-surface pixels into a cloud.
    pub plane_pixel_stride: usize,
    /// Samples taken on each fitted spline.
    pub interpolated_samples: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            recon: ReconParams::default(),
            cluster: ClusterParams::default(),
            ransac: RansacParams::default(),
            explore: ExploreParams::default(),
            plane_pixel_stride: 4,
            interpolated_samples: 200,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.recon.validate()?;
        if self.plane_pixel_stride == 0 || self.interpolated_samples < 2 {
            return Err(Error::Config(
                "plane_pixel_stride must be >= 1 and interpolated_samples >= 2".into(),
            ));
        }
        if self.cluster.min_cluster_size == 0 {
            return Err(Error::Config("min_cluster_size must be positive".into()));
        }
        Ok(())
    }
}
