//! Built-in scenarios.
//!
//! `cs1_*`: one black cable forming a loop whose straight legs cross, on a
//! plane tilted 15° about x. `cs2_*`: a black and a blue cable side by side on
//! a horizontal plane. The `_occluded` variants add boxes between the camera
//! and the cables. Seeds jitter the shapes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoxSpec, CableSpec, CameraSpec, PlaneSpec, RenderSpec, Scenario, TactilePad, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::fitting::interpolate;
use crate::geom::Vec3;

pub const TEMPLATES: [&str; 4] = ["cs1_plain", "cs1_occluded", "cs2_plain", "cs2_occluded"];

pub const CABLE_RADIUS: f64 = 0.003;
pub const BLACK: [u8; 3] = [20, 20, 20];
pub const BLUE: [u8; 3] = [20, 60, 230];
const CAMERA_HEIGHT: f64 = 0.6;
const WAYPOINT_SPACING: f64 = 0.015;

pub fn template(name: &str, seed: u64) -> Result<Scenario> {
    match name {
        "cs1_plain" => Ok(crossing_loop(name, seed, 90.0, false)),
        "cs1_occluded" => Ok(crossing_loop(name, seed, 90.0, true)),
        "cs2_plain" => Ok(two_cables(name, seed, false)),
        "cs2_occluded" => Ok(two_cables(name, seed, true)),
        _ => Err(Error::Config(format!(
            "unknown template '{name}'; valid templates: {}",
            TEMPLATES.join(", ")
        ))),
    }
}

fn base(name: &str, seed: u64, plane: PlaneSpec) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        seed,
        plane,
        camera: CameraSpec::looking_down(CAMERA_HEIGHT),
        render: RenderSpec::default(),
        tactile: TactilePad::default(),
        params: None,
        cables: Vec::new(),
        occluders: Vec::new(),
    }
}

/// Interpolating cubic through 2-D waypoints, stored as control points.
fn cable_through(waypoints: &[[f64; 2]], color: [u8; 3]) -> CableSpec {
    let pts: Vec<Vec3> = waypoints.iter().map(|[u, v]| Vec3::new(*u, *v, 0.0)).collect();
    let (curve, _) = interpolate(&pts).expect("template waypoints are distinct");
    CableSpec {
        radius: CABLE_RADIUS,
        color,
        degree: curve.degree(),
        knots: Some(curve.knots().to_vec()),
        control_points: curve.control_points().iter().map(|p| [p.x, p.y]).collect(),
    }
}

/// Resamples a piecewise path (lines and arcs given as dense points) at a
/// fixed arc-length spacing.
fn resample(path: &[[f64; 2]], spacing: f64) -> Vec<[f64; 2]> {
    let mut out = vec![path[0]];
    let mut carried = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let mut s = spacing - carried;
        while s <= len {
            let t = s / len;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            s += spacing;
        }
        carried = len - (s - spacing);
    }
    let last = *path.last().unwrap();
    let tail = out.last().unwrap();
    if (last[0] - tail[0]).hypot(last[1] - tail[1]) > spacing / 3.0 {
        out.push(last);
    } else {
        *out.last_mut().unwrap() = last;
    }
    out
}

/// Geometry of the crossing loop before placement: straight legs through the
/// origin at `±half` from the u axis, closed by an arc of radius `r` tangent
/// to both.
pub struct LoopShape {
    pub half_angle_deg: f64,
    pub radius: f64,
    pub leg_in: f64,
    pub leg_out: f64,
}

impl LoopShape {
    pub fn path(&self) -> Vec<[f64; 2]> {
        let a = self.half_angle_deg.to_radians();
        let (sa, ca) = a.sin_cos();
        let l = self.radius * a.tan();
        let center = [0.0, self.radius / ca];
        let mut path = vec![[-self.leg_in * ca, -self.leg_in * sa], [l * ca, l * sa]];
        let start = a - PI / 2.0;
        let sweep = 2.0 * PI - 2.0 * a;
        let n = 720;
        for k in 1..n {
            let t = start + sweep * k as f64 / n as f64;
            path.push([center[0] + self.radius * t.cos(), center[1] + self.radius * t.sin()]);
        }
        path.push([-l * ca, l * sa]);
        path.push([self.leg_out * ca, -self.leg_out * sa]);
        path
    }
}

/// Loop cable whose legs cross at `crossing_deg`; the occluded variant puts a
/// box over the crossing.
pub fn crossing_loop(name: &str, seed: u64, crossing_deg: f64, occluded: bool) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = LoopShape {
        half_angle_deg: crossing_deg / 2.0,
        radius: 0.06 * rng.random_range(0.92..1.08),
        leg_in: 0.15 * rng.random_range(0.9..1.1),
        leg_out: 0.15 * rng.random_range(0.9..1.1),
    };
    let rot = rng.random_range(-10.0f64..10.0).to_radians();
    let shift = [rng.random_range(-0.02..0.02), rng.random_range(-0.05..-0.02)];
    let (s, c) = rot.sin_cos();
    let place = |p: [f64; 2]| [c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1]];
    let waypoints: Vec<[f64; 2]> = resample(&shape.path(), WAYPOINT_SPACING)
        .into_iter()
        .map(place)
        .collect();

    let plane = PlaneSpec {
        point: [0.0; 3],
        normal: None,
        tilt_deg: Some(15.0),
    };
    let mut sc = base(name, seed, plane.clone());
    sc.cables.push(cable_through(&waypoints, BLACK));
    if occluded {
        let model = plane.model().expect("valid plane");
        let (e1, e2) = model.basis();
        let x = Vec3::from(plane.point) + e1 * shift[0] + e2 * shift[1];
        let half = 0.035;
        sc.occluders.push(BoxSpec {
            min: [x.x - half, x.y - half, x.z + 0.02],
            max: [x.x + half, x.y + half, x.z + 0.05],
        });
    }
    sc
}

fn two_cables(name: &str, seed: u64, occluded: bool) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plane = PlaneSpec {
        point: [0.0; 3],
        normal: Some([0.0, 0.0, 1.0]),
        tilt_deg: None,
    };
    let mut sc = base(name, seed, plane);
    let mut lines = Vec::new();
    for (offset, color, phase) in [(0.1, BLACK, 0.0), (-0.1, BLUE, 1.3)] {
        let amp = rng.random_range(0.015..0.03);
        let off = offset + rng.random_range(-0.01..0.01);
        let tilt = rng.random_range(-0.08f64..0.08);
        let wave = move |u: f64| off + tilt * u + amp * (PI * u / 0.2 + phase).sin();
        let dense: Vec<[f64; 2]> = (0..=400)
            .map(|k| {
                let u = -0.2 + 0.4 * k as f64 / 400.0;
                [u, wave(u)]
            })
            .collect();
        let wps = resample(&dense, WAYPOINT_SPACING);
        sc.cables.push(cable_through(&wps, color));
        lines.push(wave);
    }
    if occluded {
        // one box over each cable, away from the ends
        for (k, u0) in [(0usize, -0.05), (1, 0.08)] {
            let v0 = lines[k](u0);
            sc.occluders.push(BoxSpec {
                min: [u0 - 0.025, v0 - 0.03, 0.02],
                max: [u0 + 0.025, v0 + 0.03, 0.05],
            });
        }
    }
    sc
}
