//! Tactile exploration from cable endpoints.
//!
//! Each walk starts at an endpoint, advances `Δy` along the pad y axis, and
//! descends in `Δz` steps from a hover height until the pad touches. A touch
//! whose indicator exceeds `t_H` yields a new cable point at the pressure
//! centroid; anything else turns the pad by `θ` about the plane normal and
//! retries from the last accepted point. A walk ends when it comes within
//! `d_min` of another endpoint, or when a full turn finds no cable.
//!
//! A cable contact within `revisit_radius` of the cluster's visual segments or
//! of the walk's own earlier points counts as a non-cable contact, so the walk
//! cannot turn back along the cable it came from.

use std::fmt::Write as _;

use crate::cloudproc::io::fmt_f64;
use crate::cloudproc::{PlaneModel, PointCloud};
use crate::error::{Error, Result};
use crate::geom::{frame_from_y_z, rotation_about_axis, Pose, Rotation3, Vec3};
use crate::params::{ExploreParams, ReconParams};
use crate::topology::{previous_point, SortedPolyline};
use crate::worldsim::{map_centroid, probe, TactileMap, WorldScene, PAD_COLS, PAD_ROWS};

/// Deepest allowed pad face position below the plane.
pub const DESCENT_LIMIT: f64 = 0.006;

/// Frobenius norm of the per-taxel Hessian norms of a tactile map.
///
/// The map is padded by edge replication to 8×4; each original cell gets
/// second central differences and the mixed difference with step `pitch`.
pub fn indicator(map: &TactileMap) -> f64 {
    const R: usize = PAD_ROWS + 2;
    const C: usize = PAD_COLS + 2;
    let mut p = [[0.0; C]; R];
    for (i, row) in p.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let si = i.saturating_sub(1).min(PAD_ROWS - 1);
            let sj = j.saturating_sub(1).min(PAD_COLS - 1);
            *v = map.pressures[si][sj];
        }
    }
    let h2 = map.pitch * map.pitch;
    let mut total = 0.0;
    for i in 1..=PAD_ROWS {
        for j in 1..=PAD_COLS {
            let fxx = (p[i + 1][j] - 2.0 * p[i][j] + p[i - 1][j]) / h2;
            let fyy = (p[i][j + 1] - 2.0 * p[i][j] + p[i][j - 1]) / h2;
            let fxy = (p[i + 1][j + 1] - p[i + 1][j - 1] - p[i - 1][j + 1] + p[i - 1][j - 1]) / (4.0 * h2);
            total += fxx * fxx + fyy * fyy + 2.0 * fxy * fxy;
        }
    }
    total.sqrt()
}

/// Probe access with a hard budget.
pub struct ProbeSession<'a> {
    scene: &'a WorldScene,
    eps_contact: f64,
    budget: usize,
    used: usize,
}

impl<'a> ProbeSession<'a> {
    pub fn new(scene: &'a WorldScene, eps_contact: f64, budget: usize) -> Self {
        Self {
            scene,
            eps_contact,
            budget,
            used: 0,
        }
    }

    pub fn probe(&mut self, pose: &Pose) -> Result<(bool, TactileMap)> {
        if self.used >= self.budget {
            return Err(Error::ProbeBudgetExhausted(self.budget));
        }
        self.used += 1;
        Ok(probe(self.scene, pose, &self.scene.pad, self.eps_contact))
    }

    pub fn used(&self) -> usize {
        self.used
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkEnd {
    /// Came within `d_min` of the endpoint with this index.
    Reached(usize),
    /// A full turn found no new cable.
    DeadEnd,
    /// Per-walk point cap hit.
    Capped,
    /// The endpoint's segment has a single point, so no direction.
    NoDirection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkSummary {
    pub endpoint: usize,
    pub accepted: usize,
    pub end: WalkEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub endpoint: usize,
    pub pose: Pose,
    pub touched: bool,
    pub indicator: Option<f64>,
    pub accepted: bool,
    pub p_new: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub tactile: PointCloud,
    pub walks: Vec<WalkSummary>,
    pub trace: Vec<TraceRow>,
    pub probes: usize,
}

impl Exploration {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from(
            "step,endpoint_id,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz,touched,indicator,accepted,px,py,pz\n",
        );
        for row in &self.trace {
            let _ = write!(s, "{},{}", row.step, row.endpoint);
            for v in row.pose.to_array12() {
                let _ = write!(s, ",{}", fmt_f64(v));
            }
            let _ = write!(
                s,
                ",{},{},{}",
                row.touched as u8,
                row.indicator.map(fmt_f64).unwrap_or_default(),
                row.accepted as u8
            );
            match row.p_new {
                Some(p) => {
                    let _ = writeln!(s, ",{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
                }
                None => s.push_str(",,,\n"),
            }
        }
        s
    }
}

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

fn near_polyline(poly: &SortedPolyline, p: &Vec3, radius: f64) -> bool {
    poly.segments.iter().any(|seg| {
        if seg.len() == 1 {
            return (poly.points[seg[0]] - p).norm() < radius;
        }
        seg.windows(2)
            .any(|w| segment_distance(p, &poly.points[w[0]], &poly.points[w[1]]) < radius)
    })
}

struct Walk<'p, 's, 'a> {
    poly: &'p SortedPolyline,
    plane: &'p PlaneModel,
    recon: &'p ReconParams,
    explore: &'p ExploreParams,
    session: &'s mut ProbeSession<'a>,
    trace: &'s mut Vec<TraceRow>,
    turn: Rotation3,
}

enum Contact {
    Cable(Vec3),
    Other,
}

impl Walk<'_, '_, '_> {
    /// Descends at `target` until touch, logging every probe.
    fn descend(&mut self, endpoint: usize, rotation: Rotation3, target: &Vec3) -> Result<Contact> {
        let n = self.plane.normal;
        let mut h = self.explore.hover_height;
        loop {
            let pose = Pose::new(rotation, target + n * h);
            let (touched, map) = self.session.probe(&pose)?;
            if touched {
                let ind = indicator(&map);
                let cable = ind > self.recon.t_h;
                let p_new = if cable { Some(map_centroid(&map, self.plane)?) } else { None };
                self.trace.push(TraceRow {
                    step: self.trace.len(),
                    endpoint,
                    pose,
                    touched,
                    indicator: Some(ind),
                    accepted: false,
                    p_new,
                });
                return Ok(match p_new {
                    Some(p) => Contact::Cable(p),
                    None => Contact::Other,
                });
            }
            self.trace.push(TraceRow {
                step: self.trace.len(),
                endpoint,
                pose,
                touched,
                indicator: None,
                accepted: false,
                p_new: None,
            });
            h -= self.recon.delta_z;
            if h < -DESCENT_LIMIT {
                return Err(Error::DescentOverrun { depth: -h });
            }
        }
    }

    fn run(&mut self, eid: usize, visited: &mut [bool], tactile: &mut Vec<Vec3>) -> Result<WalkSummary> {
        let endpoints = self.poly.endpoints();
        let e = endpoints[eid];
        let summary = |accepted, end| WalkSummary {
            endpoint: eid,
            accepted,
            end,
        };
        let prev = match previous_point(self.poly, &e) {
            Ok(p) => p,
            Err(Error::NoDirection) => return Ok(summary(0, WalkEnd::NoDirection)),
            Err(err) => return Err(err),
        };
        let n = self.plane.normal;
        let mut rotation = match frame_from_y_z(&(e.position - prev), &n) {
            Ok(r) => r,
            Err(_) => return Ok(summary(0, WalkEnd::NoDirection)),
        };
        let mut last = self.plane.project(&e.position);
        let mut own: Vec<Vec3> = Vec::new();
        let mut failures = 0u32;
        loop {
            let target = last + rotation.y_axis() * self.recon.delta_y;
            let contact = self.descend(eid, rotation, &target)?;
            let accepted = match contact {
                Contact::Cable(p) => {
                    let reached = endpoints
                        .iter()
                        .enumerate()
                        .filter(|(k, ep)| *k != eid && (p - ep.position).norm() < self.recon.d_min)
                        .min_by(|a, b| {
                            (p - a.1.position).norm().total_cmp(&(p - b.1.position).norm())
                        })
                        .map(|(k, _)| k);
                    if let Some(k) = reached {
                        self.trace.last_mut().unwrap().accepted = true;
                        tactile.push(p);
                        visited[k] = true;
                        return Ok(summary(own.len() + 1, WalkEnd::Reached(k)));
                    }
                    let revisit = near_polyline(self.poly, &p, self.explore.revisit_radius)
                        || own.iter().any(|q| (q - p).norm() < self.explore.revisit_radius);
                    (!revisit).then_some(p)
                }
                Contact::Other => None,
            };
            match accepted {
                Some(p) => {
                    self.trace.last_mut().unwrap().accepted = true;
                    tactile.push(p);
                    own.push(p);
                    if let Ok(r) = frame_from_y_z(&(p - last), &n) {
                        rotation = r;
                    }
                    last = p;
                    failures = 0;
                    if own.len() >= self.explore.max_walk_points {
                        return Ok(summary(own.len(), WalkEnd::Capped));
                    }
                }
                None => {
                    failures += 1;
                    if failures >= self.recon.max_rotation_attempts {
                        return Ok(summary(own.len(), WalkEnd::DeadEnd));
                    }
                    rotation = rotation * self.turn;
                }
            }
        }
    }
}

/// Walks from every endpoint that has not been reached by an earlier walk.
pub fn explore_from_endpoints(
    poly: &SortedPolyline,
    plane: &PlaneModel,
    session: &mut ProbeSession<'_>,
    recon: &ReconParams,
    explore: &ExploreParams,
) -> Result<Exploration> {
    if poly.segments.is_empty() {
        return Err(Error::EmptyInput("no segments to explore from".into()));
    }
    let turn = rotation_about_axis(&Vec3::z(), recon.theta)?;
    let n_end = poly.endpoint_count();
    let mut visited = vec![false; n_end];
    let mut tactile = Vec::new();
    let mut trace = Vec::new();
    let mut walks = Vec::new();
    for eid in 0..n_end {
        if visited[eid] {
            continue;
        }
        visited[eid] = true;
        let mut walk = Walk {
            poly,
            plane,
            recon,
            explore,
            session: &mut *session,
            trace: &mut trace,
            turn,
        };
        walks.push(walk.run(eid, &mut visited, &mut tactile)?);
    }
    Ok(Exploration {
        tactile: PointCloud::new(tactile),
        walks,
        trace,
        probes: session.used(),
    })
}

/// Union of the visual and tactile clouds, dropping exact duplicates.
pub fn merge_clouds(visual: &PointCloud, tactile: &PointCloud) -> PointCloud {
    let mut out: Vec<Vec3> = Vec::with_capacity(visual.len() + tactile.len());
    for p in visual.iter().chain(tactile.iter()) {
        if !out.iter().any(|q| (q - p).norm() < 1e-9) {
            out.push(*p);
        }
    }
    PointCloud::new(out)
}
