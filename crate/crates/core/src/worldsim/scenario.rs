//! Scenario files: the TOML description a [`WorldScene`] is built from.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Aabb, GroundTruthCable, TactilePad, WorldScene};
use crate::cloudproc::PlaneModel;
use crate::error::{Error, Result};
use crate::fitting::BSplineCurve;
use crate::geom::{Pose, Rotation3, Vec3};
use crate::imgproc::CameraIntrinsics;
use crate::params::PipelineParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub plane: PlaneSpec,
    pub camera: CameraSpec,
    #[serde(default)]
    pub render: RenderSpec,
    #[serde(default)]
    pub tactile: TactilePad,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PipelineParams>,
    #[serde(default)]
    pub cables: Vec<CableSpec>,
    #[serde(default)]
    pub occluders: Vec<BoxSpec>,
}

/// Support plane through `point`, given by an explicit normal or by a tilt
/// about the base x axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneSpec {
    pub point: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt_deg: Option<f64>,
}

impl PlaneSpec {
    pub fn model(&self) -> Result<PlaneModel> {
        let n = match (self.normal, self.tilt_deg) {
            (Some(n), None) => Vec3::from(n),
            (None, Some(t)) => {
                let (s, c) = t.to_radians().sin_cos();
                Vec3::new(0.0, -s, c)
            }
            (None, None) => Vec3::z(),
            (Some(_), Some(_)) => {
                return Err(Error::Config("plane takes either normal or tilt_deg, not both".into()))
            }
        };
        if !(n.norm() > 0.0) {
            return Err(Error::Config("plane normal must be nonzero".into()));
        }
        Ok(PlaneModel::from_point_normal(&Vec3::from(self.point), &n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub position: [f64; 3],
    /// Camera-to-base rotation, row by row.
    pub rotation: [[f64; 3]; 3],
}

impl CameraSpec {
    /// 640×480 camera `height` meters above the origin, looking straight down.
    pub fn looking_down(height: f64) -> Self {
        Self {
            width: 640,
            height: 480,
            fx: 600.0,
            fy: 600.0,
            cx: 319.5,
            cy: 239.5,
            position: [0.0, 0.0, height],
            rotation: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
        }
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        let r = self.rotation;
        let m = nalgebra::Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        );
        let rotation = Rotation3::from_matrix(m)?;
        let cam = CameraIntrinsics {
            width: self.width,
            height: self.height,
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            pose: Pose::new(rotation, Vec3::from(self.position)),
        };
        cam.validate()?;
        Ok(cam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSpec {
    /// Standard deviation of additive depth noise, meters.
    pub depth_noise: f64,
    /// Standard deviation of additive color noise, 0–255 scale.
    pub color_noise: f64,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            depth_noise: 0.0005,
            color_noise: 2.0,
        }
    }
}

/// Cable whose control points are given in plane coordinates and lifted by
/// the radius along the plane normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableSpec {
    pub radius: f64,
    pub color: [u8; 3],
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
    pub control_points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                s.schema_version
            )));
        }
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    /// Parameters declared by the scenario, or the defaults.
    pub fn pipeline_params(&self) -> PipelineParams {
        self.params.clone().unwrap_or_default()
    }

    pub fn build(&self) -> Result<WorldScene> {
        let plane = self.plane.model()?;
        let origin = Vec3::from(self.plane.point);
        let (e1, e2) = plane.basis();
        let mut cables = Vec::with_capacity(self.cables.len());
        for c in &self.cables {
            let ctrl: Vec<Vec3> = c
                .control_points
                .iter()
                .map(|[u, v]| origin + e1 * *u + e2 * *v + plane.normal * c.radius)
                .collect();
            let curve = match &c.knots {
                Some(k) => BSplineCurve::new(c.degree, k.clone(), ctrl)?,
                None => BSplineCurve::clamped_uniform(c.degree, ctrl)?,
            };
            cables.push(GroundTruthCable::new(curve, c.radius, c.color, &plane)?);
        }
        let occluders = self
            .occluders
            .iter()
            .map(|b| {
                let (lo, hi) = (Vec3::from(b.min), Vec3::from(b.max));
                if (0..3).any(|k| lo[k] > hi[k]) {
                    return Err(Error::Config("occluder min corner exceeds max corner".into()));
                }
                Ok(Aabb { min: lo, max: hi })
            })
            .collect::<Result<Vec<_>>>()?;
        if !(self.tactile.pitch > 0.0 && self.tactile.k_p > 0.0) {
            return Err(Error::Config("tactile pitch and stiffness must be positive".into()));
        }
        Ok(WorldScene {
            support_plane: plane,
            cables,
            occluders,
            camera: self.camera.intrinsics()?,
            pad: self.tactile,
            render: self.render,
            seed: self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Scenario {
        Scenario {
            schema_version: SCHEMA_VERSION,
            name: "t".into(),
            seed: 1,
            plane: PlaneSpec {
                point: [0.0; 3],
                normal: None,
                tilt_deg: Some(15.0),
            },
            camera: CameraSpec::looking_down(0.6),
            render: RenderSpec::default(),
            tactile: TactilePad::default(),
            params: None,
            cables: vec![CableSpec {
                radius: 0.003,
                color: [20, 20, 20],
                degree: 3,
                knots: None,
                control_points: vec![[-0.1, 0.0], [0.0, 0.05], [0.1, 0.0], [0.2, 0.02]],
            }],
            occluders: vec![],
        }
    }

    #[test]
    fn toml_round_trip() {
        let s = minimal();
        let text = s.to_toml();
        assert!(text.contains("schema_version = 1"));
        assert_eq!(Scenario::from_toml(&text).unwrap(), s);
    }

    #[test]
    fn cables_rest_on_the_plane() {
        let scene = minimal().build().unwrap();
        let c = &scene.cables[0];
        for i in 0..=50 {
            let p = c.centerline.evaluate(i as f64 / 50.0);
            assert!((scene.support_plane.signed_distance(&p) - c.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_files() {
        let text = minimal().to_toml().replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(Scenario::from_toml(&text), Err(Error::Config(_))));
        let text = format!("bogus = 3\n{}", minimal().to_toml());
        assert!(Scenario::from_toml(&text).is_err());
    }
}
