//! Simulated world: support plane, cables, occluders, camera and tactile pad.

mod render;
mod scenario;
mod tactile;
pub mod templates;

pub use render::{render, render_with, RenderOptions, RenderOutput, OCCLUDER_RGB, SHELF_RGB};
pub use scenario::{BoxSpec, CableSpec, CameraSpec, PlaneSpec, RenderSpec, Scenario, SCHEMA_VERSION};
pub use tactile::{map_centroid, probe, TactileMap, TactilePad, PAD_COLS, PAD_ROWS};

use std::collections::HashMap;

use crate::cloudproc::PlaneModel;
use crate::error::{Error, Result};
use crate::fitting::BSplineCurve;
use crate::geom::Vec3;
use crate::imgproc::CameraIntrinsics;

/// Axis-aligned box in the base frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Entry parameter of the ray `o + t·d`, if it hits the box at `t > 0`.
    pub fn ray_entry(&self, o: &Vec3, d: &Vec3) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            if d[k] == 0.0 {
                if o[k] < self.min[k] || o[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let a = (self.min[k] - o[k]) / d[k];
            let b = (self.max[k] - o[k]) / d[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

const INDEX_CELL: f64 = 0.004;
const SAMPLE_SPACING: f64 = 0.0005;

/// In-plane distance queries against a cable centerline.
#[derive(Debug, Clone)]
struct CableIndex {
    samples: Vec<[f64; 2]>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl CableIndex {
    fn build(curve: &BSplineCurve, plane: &PlaneModel) -> Self {
        let coarse: Vec<Vec3> = (0..=1000).map(|i| curve.evaluate(i as f64 / 1000.0)).collect();
        let length: f64 = coarse.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let n = ((length / SAMPLE_SPACING).ceil() as usize).max(1000);
        let (a, b) = curve.domain();
        let samples: Vec<[f64; 2]> = (0..=n)
            .map(|i| plane.to_plane_coords(&curve.evaluate(a + (b - a) * i as f64 / n as f64)))
            .collect();
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for k in 0..samples.len().saturating_sub(1) {
            let (p, q) = (samples[k], samples[k + 1]);
            let lo = cell_of([p[0].min(q[0]), p[1].min(q[1])]);
            let hi = cell_of([p[0].max(q[0]), p[1].max(q[1])]);
            for i in lo.0..=hi.0 {
                for j in lo.1..=hi.1 {
                    cells.entry((i, j)).or_default().push(k);
                }
            }
        }
        Self { samples, cells }
    }

    /// Distance to the nearest centerline segment, or `None` beyond one cell.
    fn distance(&self, q: [f64; 2]) -> Option<f64> {
        let (ci, cj) = cell_of(q);
        let mut best: Option<f64> = None;
        for i in ci - 1..=ci + 1 {
            for j in cj - 1..=cj + 1 {
                if let Some(segs) = self.cells.get(&(i, j)) {
                    for &k in segs {
                        let d = segment_distance(q, self.samples[k], self.samples[k + 1]);
                        best = Some(best.map_or(d, |b: f64| b.min(d)));
                    }
                }
            }
        }
        best.filter(|d| *d <= INDEX_CELL)
    }
}

fn cell_of(q: [f64; 2]) -> (i64, i64) {
    ((q[0] / INDEX_CELL).floor() as i64, (q[1] / INDEX_CELL).floor() as i64)
}

fn segment_distance(q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let aq = [q[0] - a[0], q[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((aq[0] * ab[0] + aq[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (aq[0] - t * ab[0]).hypot(aq[1] - t * ab[1])
}

/// A cable of constant radius resting on the support plane.
#[derive(Debug, Clone)]
pub struct GroundTruthCable {
    pub centerline: BSplineCurve,
    pub radius: f64,
    pub color: [u8; 3],
    index: CableIndex,
}

impl GroundTruthCable {
    pub fn new(centerline: BSplineCurve, radius: f64, color: [u8; 3], plane: &PlaneModel) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("cable radius must be positive, got {radius}")));
        }
        let index = CableIndex::build(&centerline, plane);
        Ok(Self {
            centerline,
            radius,
            color,
            index,
        })
    }

    /// Distance, within the support plane, from the projection of `p` to the
    /// projected centerline; `None` when farther than a few radii.
    pub fn in_plane_distance(&self, plane: &PlaneModel, p: &Vec3) -> Option<f64> {
        self.index.distance(plane.to_plane_coords(p))
    }

    /// Height of the cable surface above the plane at the projection of `p`.
    pub fn surface_height(&self, plane: &PlaneModel, p: &Vec3) -> Option<f64> {
        let rho = self.in_plane_distance(plane, p)?;
        (rho < self.radius).then(|| self.radius + (self.radius * self.radius - rho * rho).sqrt())
    }

    /// Centerline shifted down onto the support plane.
    pub fn footprint(&self, plane: &PlaneModel) -> BSplineCurve {
        let shift = -plane.normal * self.radius;
        BSplineCurve::new(
            self.centerline.degree(),
            self.centerline.knots().to_vec(),
            self.centerline.control_points().iter().map(|p| p + shift).collect(),
        )
        .expect("shifted curve keeps a valid knot vector")
    }
}

/// Immutable simulated scene.
#[derive(Debug, Clone)]
pub struct WorldScene {
    pub support_plane: PlaneModel,
    pub cables: Vec<GroundTruthCable>,
    pub occluders: Vec<Aabb>,
    pub camera: CameraIntrinsics,
    pub pad: TactilePad,
    pub render: RenderSpec,
    pub seed: u64,
}

impl WorldScene {
    /// Height of the contact surface (plane or cable) above the plane at the
    /// projection of `p`. Occluders are not touchable.
    pub fn surface_height(&self, p: &Vec3) -> f64 {
        self.cables
            .iter()
            .filter_map(|c| c.surface_height(&self.support_plane, p))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_box_entry() {
        let b = Aabb {
            min: Vec3::new(-1.0, -1.0, 1.0),
            max: Vec3::new(1.0, 1.0, 2.0),
        };
        let o = Vec3::new(0.0, 0.0, 5.0);
        assert_eq!(b.ray_entry(&o, &Vec3::new(0.0, 0.0, -1.0)), Some(3.0));
        assert_eq!(b.ray_entry(&o, &Vec3::new(0.0, 0.0, 1.0)), None);
        assert_eq!(b.ray_entry(&Vec3::new(3.0, 0.0, 5.0), &Vec3::new(0.0, 0.0, -1.0)), None);
    }

    #[test]
    fn straight_cable_distance_and_height() {
        let plane = PlaneModel::from_point_normal(&Vec3::zeros(), &Vec3::z());
        let line = BSplineCurve::clamped_uniform(
            1,
            vec![Vec3::new(-0.1, 0.0, 0.003), Vec3::new(0.1, 0.0, 0.003)],
        )
        .unwrap();
        let cable = GroundTruthCable::new(line, 0.003, [0, 0, 0], &plane).unwrap();
        let d = cable.in_plane_distance(&plane, &Vec3::new(0.02, 0.002, 0.5)).unwrap();
        assert!((d - 0.002).abs() < 1e-12);
        let h = cable.surface_height(&plane, &Vec3::new(0.0, 0.0, 0.0)).unwrap();
        assert!((h - 0.006).abs() < 1e-12);
        assert!(cable.surface_height(&plane, &Vec3::new(0.0, 0.0031, 0.0)).is_none());
        assert!(cable.in_plane_distance(&plane, &Vec3::new(0.0, 0.05, 0.0)).is_none());
        let f = cable.footprint(&plane);
        assert!(f.evaluate(0.5).z.abs() < 1e-15);
    }
}
