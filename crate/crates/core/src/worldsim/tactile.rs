//! Rigid, quasi-static contact model of a 6×2 taxel pad.
//!
//! Taxel `(i, j)` sits at `((i − 2.5)·pitch, (j − 0.5)·pitch, 0)` in the pad
//! frame: six taxels along the pad x axis, two along y. The pad presses along
//! its −z axis, which exploration keeps aligned with the plane normal. The
//! face sits on a compliant mount and levels itself parallel to the support
//! plane at the height of the pad origin, so a small tilt of the commanded
//! pose does not load one edge first. A taxel reads
//! `k_p · max(0, surface height − face height)`, heights measured from the
//! support plane, where the surface is the plane or a cable top.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::WorldScene;
use crate::cloudproc::PlaneModel;
use crate::error::{Error, Result};
use crate::geom::{Pose, Vec3};

pub const PAD_ROWS: usize = 6;
pub const PAD_COLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TactilePad {
    /// Taxel spacing, meters.
    pub pitch: f64,
    /// Pressure per meter of penetration.
    pub k_p: f64,
    /// Standard deviation of additive pressure noise (0 disables it).
    pub pressure_noise: f64,
}

impl Default for TactilePad {
    fn default() -> Self {
        Self {
            pitch: 0.005,
            k_p: 1000.0,
            pressure_noise: 0.0,
        }
    }
}

impl TactilePad {
    pub fn taxel_offset(&self, i: usize, j: usize) -> Vec3 {
        Vec3::new(
            (i as f64 - 2.5) * self.pitch,
            (j as f64 - 0.5) * self.pitch,
            0.0,
        )
    }

    pub fn taxel_position(&self, pose: &Pose, i: usize, j: usize) -> Vec3 {
        pose.transform_point(&self.taxel_offset(i, j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TactileMap {
    /// `pressures[i][j]`, `i` along the pad x axis.
    pub pressures: [[f64; PAD_COLS]; PAD_ROWS],
    pub pose: Pose,
    pub pitch: f64,
}

impl TactileMap {
    pub fn taxel_position(&self, i: usize, j: usize) -> Vec3 {
        let pad = TactilePad {
            pitch: self.pitch,
            ..TactilePad::default()
        };
        pad.taxel_position(&self.pose, i, j)
    }

    pub fn max_pressure(&self) -> f64 {
        self.pressures.iter().flatten().copied().fold(0.0, f64::max)
    }
}

fn pose_hash(seed: u64, pose: &Pose) -> u64 {
    // FNV-1a over the pose bits; stable across platforms and releases
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for v in pose.to_array12() {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Tactile reading at `pose`; `touched` when any taxel exceeds `eps_contact`.
/// Occluders are not touchable.
pub fn probe(scene: &WorldScene, pose: &Pose, pad: &TactilePad, eps_contact: f64) -> (bool, TactileMap) {
    let face = scene.support_plane.signed_distance(&pose.translation);
    let mut pressures = [[0.0; PAD_COLS]; PAD_ROWS];
    let mut noise = (pad.pressure_noise > 0.0).then(|| {
        (
            ChaCha8Rng::seed_from_u64(pose_hash(scene.seed, pose)),
            Normal::new(0.0, pad.pressure_noise).expect("positive sigma"),
        )
    });
    for (i, row) in pressures.iter_mut().enumerate() {
        for (j, p) in row.iter_mut().enumerate() {
            let c = pad.taxel_position(pose, i, j);
            let penetration = scene.surface_height(&c) - face;
            let mut v = pad.k_p * penetration.max(0.0);
            if let Some((rng, n)) = noise.as_mut() {
                v = (v + n.sample(rng)).max(0.0);
            }
            *p = v;
        }
    }
    let touched = pressures.iter().flatten().any(|&v| v > eps_contact);
    (
        touched,
        TactileMap {
            pressures,
            pose: *pose,
            pitch: pad.pitch,
        },
    )
}

/// Pressure-weighted mean of the taxel positions, projected onto `plane`.
pub fn map_centroid(map: &TactileMap, plane: &PlaneModel) -> Result<Vec3> {
    let mut sum = Vec3::zeros();
    let mut weight = 0.0;
    for i in 0..PAD_ROWS {
        for j in 0..PAD_COLS {
            let w = map.pressures[i][j];
            if w > 0.0 {
                sum += map.taxel_position(i, j) * w;
                weight += w;
            }
        }
    }
    if !(weight > 0.0) {
        return Err(Error::EmptyContact);
    }
    Ok(plane.project(&(sum / weight)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::BSplineCurve;
    use crate::geom::Rotation3;
    use crate::worldsim::{GroundTruthCable, RenderSpec};

    fn scene_with(cables: Vec<GroundTruthCable>) -> WorldScene {
        let plane = PlaneModel::from_point_normal(&Vec3::zeros(), &Vec3::z());
        WorldScene {
            support_plane: plane,
            cables,
            occluders: vec![],
            camera: crate::worldsim::CameraSpec::looking_down(0.6).intrinsics().unwrap(),
            pad: TactilePad::default(),
            render: RenderSpec::default(),
            seed: 0,
        }
    }

    /// Straight cable along the base y axis at `x = x0`.
    fn cable_along_y(x0: f64) -> GroundTruthCable {
        let plane = PlaneModel::from_point_normal(&Vec3::zeros(), &Vec3::z());
        let line = BSplineCurve::clamped_uniform(
            1,
            vec![Vec3::new(x0, -0.1, 0.003), Vec3::new(x0, 0.1, 0.003)],
        )
        .unwrap();
        GroundTruthCable::new(line, 0.003, [0, 0, 0], &plane).unwrap()
    }

    fn at_height(h: f64) -> Pose {
        Pose::new(Rotation3::identity(), Vec3::new(0.0, 0.0, h))
    }

    #[test]
    fn no_contact_far_above() {
        let scene = scene_with(vec![cable_along_y(0.0)]);
        let (touched, map) = probe(&scene, &at_height(0.1), &TactilePad::default(), 0.05);
        assert!(!touched);
        assert_eq!(map.max_pressure(), 0.0);
    }

    #[test]
    fn flat_press_is_uniform() {
        let scene = scene_with(vec![]);
        let (touched, map) = probe(&scene, &at_height(-0.0005), &TactilePad::default(), 0.05);
        assert!(touched);
        for v in map.pressures.iter().flatten() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn cable_crest_matches_circle_heights() {
        // cable under the middle gap: taxels at x = ±2.5 mm are 2.5 mm off axis
        let scene = scene_with(vec![cable_along_y(0.0)]);
        let pad = TactilePad::default();
        let face = 0.004;
        let (touched, map) = probe(&scene, &at_height(face), &pad, 0.05);
        assert!(touched);
        let r: f64 = 0.003;
        for i in 0..PAD_ROWS {
            let x: f64 = (i as f64 - 2.5) * pad.pitch;
            let expect = if x.abs() < r {
                pad.k_p * (r + (r * r - x * x).sqrt() - face).max(0.0)
            } else {
                0.0
            };
            for j in 0..PAD_COLS {
                assert!((map.pressures[i][j] - expect).abs() < 1e-9, "{i} {j}");
            }
        }
        // cable under a taxel column
        let scene = scene_with(vec![cable_along_y(0.0025)]);
        let (_, map) = probe(&scene, &at_height(face), &pad, 0.05);
        assert!((map.pressures[3][0] - pad.k_p * (0.006 - face)).abs() < 1e-9);
        assert_eq!(map.max_pressure(), map.pressures[3][1]);
        let c = map_centroid(&map, &scene.support_plane).unwrap();
        assert!((c.x - 0.0025).abs() < pad.pitch / 2.0);
    }

    #[test]
    fn mirrored_pose_mirrors_map() {
        let scene = scene_with(vec![cable_along_y(0.0)]);
        let pad = TactilePad::default();
        let a = Pose::new(Rotation3::identity(), Vec3::new(0.0011, 0.0, 0.005));
        let b = Pose::new(Rotation3::identity(), Vec3::new(-0.0011, 0.0, 0.005));
        let (_, ma) = probe(&scene, &a, &pad, 0.05);
        let (_, mb) = probe(&scene, &b, &pad, 0.05);
        for i in 0..PAD_ROWS {
            for j in 0..PAD_COLS {
                assert!((ma.pressures[i][j] - mb.pressures[PAD_ROWS - 1 - i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tilted_pose_reads_a_flat_press_uniformly() {
        let scene = scene_with(vec![]);
        let tilt = crate::geom::rotation_about_axis(&Vec3::x(), 0.01).unwrap();
        let pose = Pose::new(tilt, Vec3::new(0.0, 0.0, -0.001));
        let (_, map) = probe(&scene, &pose, &TactilePad::default(), 0.05);
        for v in map.pressures.iter().flatten() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_cases() {
        let plane = PlaneModel::from_point_normal(&Vec3::zeros(), &Vec3::z());
        let mut map = TactileMap {
            pressures: [[0.0; PAD_COLS]; PAD_ROWS],
            pose: at_height(0.01),
            pitch: 0.005,
        };
        assert!(matches!(map_centroid(&map, &plane), Err(Error::EmptyContact)));
        map.pressures[0][0] = 1.0;
        let c = map_centroid(&map, &plane).unwrap();
        assert!((c - Vec3::new(-0.0125, -0.0025, 0.0)).norm() < 1e-15);
        map.pressures[5][0] = 1.0;
        let c = map_centroid(&map, &plane).unwrap();
        assert!((c - Vec3::new(0.0, -0.0025, 0.0)).norm() < 1e-15);
        assert!(plane.signed_distance(&c).abs() < 1e-9);
    }

    #[test]
    fn probe_is_bit_deterministic() {
        let mut scene = scene_with(vec![cable_along_y(0.001)]);
        scene.seed = 11;
        let pad = TactilePad {
            pressure_noise: 0.01,
            ..TactilePad::default()
        };
        let pose = at_height(0.004);
        assert_eq!(probe(&scene, &pose, &pad, 0.05), probe(&scene, &pose, &pad, 0.05));
    }
}
