//! Direction-following sort of a planar cable cloud into ordered segments.
//!
//! The walk works in 2-D plane coordinates. Each segment starts at the
//! unvisited point farthest from the centroid of the unvisited points, takes
//! its nearest neighbour as the first step, and then repeatedly picks the
//! candidate within `r_search` that minimises
//!
//! ```text
//! cost = angular deviation [rad] + 2 · dist / r_search
//! ```
//!
//! rejecting candidates that turn by more than `alpha_max`. The distance term
//! keeps the walk from skipping over a nearby point in favour of a slightly
//! straighter distant one, which otherwise leaves orphan single-point
//! segments on noisy data. When the forward walk stops, the segment is
//! extended backwards from its seed by the same rule.
//!
//! [`join_supported_gaps`] later bridges two segment ends when tactile
//! contacts lie along the chord between them.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use crate::cloudproc::io::fmt_f64;
use crate::cloudproc::{PlaneModel, PointCloud};
use crate::error::{Error, Result};
use crate::geom::{lex_cmp, Vec3};

/// Weight of the normalised step length in the walk cost.
pub const DISTANCE_WEIGHT: f64 = 2.0;
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndSide {
    First,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub segment: usize,
    pub side: EndSide,
    pub position: Vec3,
}

/// Ordered segments over a source cloud. Segment entries index `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedPolyline {
    pub points: Vec<Vec3>,
    pub segments: Vec<Vec<usize>>,
}

impl SortedPolyline {
    pub fn segment_points(&self, segment: usize) -> Vec<Vec3> {
        self.segments[segment].iter().map(|&i| self.points[i]).collect()
    }

    /// First and last point of every segment, in segment order. A single
    /// point segment contributes two endpoints at the same position.
    pub fn endpoints(&self) -> Vec<Endpoint> {
        let mut out = Vec::with_capacity(2 * self.segments.len());
        for (s, seg) in self.segments.iter().enumerate() {
            out.push(Endpoint {
                segment: s,
                side: EndSide::First,
                position: self.points[seg[0]],
            });
            out.push(Endpoint {
                segment: s,
                side: EndSide::Last,
                position: self.points[*seg.last().expect("segments are nonempty")],
            });
        }
        out
    }

    pub fn endpoint_count(&self) -> usize {
        2 * self.segments.len()
    }

    /// All points concatenated in walk order.
    pub fn to_cloud(&self) -> PointCloud {
        self.segments
            .iter()
            .flatten()
            .map(|&i| self.points[i])
            .collect()
    }

    pub fn csv_string(&self) -> String {
        let mut s = String::from("segment_id,order_index,x,y,z\n");
        for (sid, seg) in self.segments.iter().enumerate() {
            for (k, &i) in seg.iter().enumerate() {
                let p = self.points[i];
                let _ = writeln!(s, "{sid},{k},{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
            }
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.csv_string())?;
        Ok(())
    }

    /// Rebuilds a polyline from its CSV export.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Format {
            format: "polyline csv",
            msg: format!("line {line}: {msg}"),
        };
        let mut points = Vec::new();
        let mut segments: Vec<Vec<usize>> = Vec::new();
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(err(n + 1, "expected 5 fields".into()));
            }
            let sid: usize = f[0].parse().map_err(|e| err(n + 1, format!("{e}")))?;
            let mut xyz = [0.0; 3];
            for (k, v) in xyz.iter_mut().enumerate() {
                *v = f[2 + k].parse().map_err(|e| err(n + 1, format!("{e}")))?;
            }
            if sid == segments.len() {
                segments.push(Vec::new());
            } else if sid + 1 != segments.len() {
                return Err(err(n + 1, "segment ids must be contiguous".into()));
            }
            segments[sid].push(points.len());
            points.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
        }
        Ok(Self { points, segments })
    }
}

/// Neighbour of an endpoint inside its segment.
pub fn previous_point(poly: &SortedPolyline, endpoint: &Endpoint) -> Result<Vec3> {
    let seg = &poly.segments[endpoint.segment];
    if seg.len() < 2 {
        return Err(Error::NoDirection);
    }
    let i = match endpoint.side {
        EndSide::First => seg[1],
        EndSide::Last => seg[seg.len() - 2],
    };
    Ok(poly.points[i])
}

type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

struct Walker<'a> {
    q: &'a [P2],
    visited: Vec<bool>,
    r_search: f64,
    cos_max: f64,
}

impl Walker<'_> {
    fn step(&self, cur: usize, prev: Option<usize>) -> Option<usize> {
        let dir = prev.map(|p| {
            let d = sub(self.q[cur], self.q[p]);
            let n = norm(d);
            [d[0] / n, d[1] / n]
        });
        // canonical order is lexicographic, so the first strict minimum wins ties
        let mut best: Option<(f64, f64, usize)> = None;
        for (j, qj) in self.q.iter().enumerate() {
            if self.visited[j] {
                continue;
            }
            let v = sub(*qj, self.q[cur]);
            let d = norm(v);
            if d > self.r_search {
                continue;
            }
            let cost = match dir {
                None => d,
                Some(u) => {
                    if d == 0.0 {
                        0.0
                    } else {
                        let c = ((u[0] * v[0] + u[1] * v[1]) / d).clamp(-1.0, 1.0);
                        if c < self.cos_max {
                            continue;
                        }
                        c.acos() + DISTANCE_WEIGHT * d / self.r_search
                    }
                }
            };
            let better = match best {
                None => true,
                Some((bc, bd, _)) => {
                    if cost < bc - TIE_EPS {
                        true
                    } else if cost > bc + TIE_EPS {
                        false
                    } else {
                        d < bd
                    }
                }
            };
            if better {
                best = Some((cost, d, j));
            }
        }
        best.map(|(_, _, j)| j)
    }

    fn extend(&mut self, seg: &mut Vec<usize>) {
        loop {
            let cur = *seg.last().unwrap();
            let prev = (seg.len() >= 2).then(|| seg[seg.len() - 2]);
            match self.step(cur, prev) {
                Some(j) => {
                    self.visited[j] = true;
                    seg.push(j);
                }
                None => return,
            }
        }
    }

    fn seed(&self) -> Option<usize> {
        let open: Vec<usize> = (0..self.q.len()).filter(|&i| !self.visited[i]).collect();
        if open.is_empty() {
            return None;
        }
        let n = open.len() as f64;
        let c = open
            .iter()
            .fold([0.0, 0.0], |a, &i| [a[0] + self.q[i][0], a[1] + self.q[i][1]]);
        let c = [c[0] / n, c[1] / n];
        let mut best = open[0];
        let mut best_d = norm(sub(self.q[best], c));
        for &i in &open[1..] {
            let d = norm(sub(self.q[i], c));
            if d > best_d {
                best = i;
                best_d = d;
            }
        }
        Some(best)
    }
}

/// Sorts a projected cloud into segments and reports their endpoints.
pub fn sort_and_find_endpoints(
    cloud: &PointCloud,
    plane: &PlaneModel,
    r_search: f64,
    alpha_max_deg: f64,
) -> Result<SortedPolyline> {
    if cloud.is_empty() {
        return Err(Error::EmptyInput("cannot sort an empty cloud".into()));
    }
    if !(r_search > 0.0) {
        return Err(Error::ContractViolation("r_search must be positive".into()));
    }
    let pts = cloud.points();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&pts[a], &pts[b]).then(a.cmp(&b)));
    let q: Vec<P2> = order.iter().map(|&i| plane.to_plane_coords(&pts[i])).collect();

    let mut walker = Walker {
        q: &q,
        visited: vec![false; q.len()],
        r_search,
        cos_max: alpha_max_deg.to_radians().cos(),
    };
    let mut segments = Vec::new();
    while let Some(seed) = walker.seed() {
        walker.visited[seed] = true;
        let mut fwd = vec![seed];
        walker.extend(&mut fwd);
        if fwd.len() >= 2 {
            let mut back: Vec<usize> = vec![fwd[1], seed];
            walker.extend(&mut back);
            let mut seg: Vec<usize> = back[2..].iter().rev().copied().collect();
            seg.extend(fwd);
            fwd = seg;
        }
        segments.push(fwd.into_iter().map(|k| order[k]).collect());
    }
    Ok(SortedPolyline {
        points: pts.to_vec(),
        segments,
    })
}

/// Settings of [`join_supported_gaps`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapJoin {
    /// Longest gap between two segment ends that may be joined.
    pub max_gap: f64,
    /// Largest turn, at either end, onto the joining chord.
    pub alpha_max_deg: f64,
    /// Support points farther than this from the chord are ignored.
    pub support_radius: f64,
    /// Largest uncovered stretch of the chord.
    pub max_spacing: f64,
}

/// Unit outward direction at a segment end, in plane coordinates.
fn outward(q: &[P2], seg: &[usize], side: EndSide) -> Option<P2> {
    if seg.len() < 2 {
        return None;
    }
    let (end, prev) = match side {
        EndSide::First => (seg[0], seg[1]),
        EndSide::Last => (seg[seg.len() - 1], seg[seg.len() - 2]),
    };
    let d = [q[end][0] - q[prev][0], q[end][1] - q[prev][1]];
    let n = d[0].hypot(d[1]);
    (n > 0.0).then(|| [d[0] / n, d[1] / n])
}

/// Whether points of `support` cover the chord `a → b` with no stretch
/// longer than `max_spacing` left open.
fn chord_covered(a: P2, b: P2, support: &[P2], radius: f64, max_spacing: f64) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len = d[0].hypot(d[1]);
    if len <= max_spacing {
        return true;
    }
    let u = [d[0] / len, d[1] / len];
    let mut ts: Vec<f64> = support
        .iter()
        .filter_map(|p| {
            let r = [p[0] - a[0], p[1] - a[1]];
            let t = r[0] * u[0] + r[1] * u[1];
            let off = (r[0] * u[1] - r[1] * u[0]).abs();
            (off <= radius && t > 0.0 && t < len).then_some(t)
        })
        .collect();
    ts.push(0.0);
    ts.push(len);
    ts.sort_by(f64::total_cmp);
    ts.windows(2).all(|w| w[1] - w[0] <= max_spacing)
}

/// Joins segment ends across gaps that `support` (tactile contacts) shows to
/// be cable.
///
/// A pair of ends from different segments qualifies when the gap is at most
/// `max_gap`, the chord between them turns by at most `alpha_max` from each
/// end's outward direction, and support points cover the chord. The shortest
/// qualifying gap is joined first, until none is left. Point indices are kept,
/// so the result still partitions the input.
pub fn join_supported_gaps(
    poly: &SortedPolyline,
    plane: &PlaneModel,
    support: &PointCloud,
    join: &GapJoin,
) -> SortedPolyline {
    let q: Vec<P2> = poly.points.iter().map(|p| plane.to_plane_coords(p)).collect();
    let sup: Vec<P2> = support.iter().map(|p| plane.to_plane_coords(p)).collect();
    let cos_max = join.alpha_max_deg.to_radians().cos();
    let mut segments = poly.segments.clone();
    loop {
        let mut best: Option<(f64, usize, EndSide, usize, EndSide)> = None;
        for (i, si) in segments.iter().enumerate() {
            for (j, sj) in segments.iter().enumerate().skip(i + 1) {
                for ea in [EndSide::First, EndSide::Last] {
                    for eb in [EndSide::First, EndSide::Last] {
                        let pa = q[if ea == EndSide::First { si[0] } else { si[si.len() - 1] }];
                        let pb = q[if eb == EndSide::First { sj[0] } else { sj[sj.len() - 1] }];
                        let d = [pb[0] - pa[0], pb[1] - pa[1]];
                        let gap = d[0].hypot(d[1]);
                        if gap > join.max_gap || best.is_some_and(|b| b.0 <= gap) {
                            continue;
                        }
                        let turn_ok = |dir: Option<P2>, sign: f64| {
                            dir.is_none_or(|o| gap == 0.0 || sign * (o[0] * d[0] + o[1] * d[1]) / gap >= cos_max)
                        };
                        if turn_ok(outward(&q, si, ea), 1.0)
                            && turn_ok(outward(&q, sj, eb), -1.0)
                            && chord_covered(pa, pb, &sup, join.support_radius, join.max_spacing)
                        {
                            best = Some((gap, i, ea, j, eb));
                        }
                    }
                }
            }
        }
        let Some((_, i, ea, j, eb)) = best else { break };
        let mut b = segments.remove(j);
        let mut a = std::mem::take(&mut segments[i]);
        if ea == EndSide::First {
            a.reverse();
        }
        if eb == EndSide::Last {
            b.reverse();
        }
        a.extend(b);
        segments[i] = a;
    }
    SortedPolyline {
        points: poly.points.clone(),
        segments,
    }
}

/// Compares two polylines by segment geometry, ignoring source indices.
pub fn same_geometry(a: &SortedPolyline, b: &SortedPolyline) -> bool {
    a.segments.len() == b.segments.len()
        && a.segments.iter().zip(&b.segments).all(|(sa, sb)| {
            sa.len() == sb.len()
                && sa
                    .iter()
                    .zip(sb)
                    .all(|(&i, &j)| lex_cmp(&a.points[i], &b.points[j]) == Ordering::Equal)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn join_params() -> GapJoin {
        GapJoin {
            max_gap: 0.1,
            alpha_max_deg: 75.0,
            support_radius: 0.008,
            max_spacing: 0.02,
        }
    }

    #[test]
    fn supported_gap_is_joined() {
        let mut pts: Vec<Vec3> = (0..4).map(|k| Vec3::new(0.02 * k as f64, 0.0, 0.0)).collect();
        pts.extend((0..4).map(|k| Vec3::new(0.13 + 0.02 * k as f64, 0.0, 0.0)));
        let poly = sort(pts);
        assert_eq!(poly.segments.len(), 2);
        let none = join_supported_gaps(&poly, &ground(), &PointCloud::default(), &join_params());
        assert_eq!(none.segments.len(), 2);
        let support: PointCloud = (0..7).map(|k| Vec3::new(0.07 + 0.01 * k as f64, 0.001, 0.0)).collect();
        let joined = join_supported_gaps(&poly, &ground(), &support, &join_params());
        assert_eq!(joined.segments.len(), 1);
        let xs: Vec<f64> = joined.segment_points(0).iter().map(|p| p.x).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]) || xs.windows(2).all(|w| w[1] < w[0]));
        let mut all: Vec<usize> = joined.segments.concat();
        all.sort();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn sharp_turn_or_side_support_is_not_joined() {
        // parallel runs side by side: the chord between their ends turns 90°
        let mut pts: Vec<Vec3> = (0..4).map(|k| Vec3::new(0.02 * k as f64, 0.0, 0.0)).collect();
        pts.extend((0..4).map(|k| Vec3::new(0.02 * k as f64, 0.06, 0.0)));
        let poly = sort(pts);
        let support: PointCloud = (0..7).map(|k| Vec3::new(0.06, 0.01 * k as f64, 0.0)).collect();
        assert_eq!(join_supported_gaps(&poly, &ground(), &support, &join_params()).segments.len(), 2);
        // collinear runs whose gap is only half covered
        let mut pts: Vec<Vec3> = (0..4).map(|k| Vec3::new(0.02 * k as f64, 0.0, 0.0)).collect();
        pts.extend((0..4).map(|k| Vec3::new(0.13 + 0.02 * k as f64, 0.0, 0.0)));
        let poly = sort(pts);
        let support: PointCloud = (0..2).map(|k| Vec3::new(0.07 + 0.01 * k as f64, 0.0, 0.0)).collect();
        assert_eq!(join_supported_gaps(&poly, &ground(), &support, &join_params()).segments.len(), 2);
    }

    fn ground() -> PlaneModel {
        PlaneModel::from_point_normal(&Vec3::zeros(), &Vec3::z())
    }

    fn sort(pts: Vec<Vec3>) -> SortedPolyline {
        sort_and_find_endpoints(&PointCloud::new(pts), &ground(), 0.05, 75.0).unwrap()
    }

    #[test]
    fn shuffled_collinear_points() {
        let xs = [0.03, 0.0, 0.04, 0.01, 0.02];
        let poly = sort(xs.iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect());
        assert_eq!(poly.segments.len(), 1);
        let got: Vec<f64> = poly.segment_points(0).iter().map(|p| p.x).collect();
        let asc = [0.0, 0.01, 0.02, 0.03, 0.04];
        let desc: Vec<f64> = asc.iter().rev().copied().collect();
        assert!(got == asc || got == desc, "{got:?}");
        let ends: Vec<f64> = poly.endpoints().iter().map(|e| e.position.x).collect();
        assert!(ends.contains(&0.0) && ends.contains(&0.04));
    }

    #[test]
    fn parallel_runs_far_apart() {
        let mut pts = Vec::new();
        for i in 0..10 {
            pts.push(Vec3::new(i as f64 * 0.02, 0.0, 0.0));
            pts.push(Vec3::new(i as f64 * 0.02, 0.5, 0.0));
        }
        let poly = sort(pts);
        assert_eq!(poly.segments.len(), 2);
        assert_eq!(poly.endpoints().len(), 4);
    }

    #[test]
    fn circle_with_gap_is_one_open_segment() {
        // radius 0.2, spacing 0.02, gap of 0.15 (three search radii)
        let r = 0.2;
        let step = 0.02 / r;
        let gap = 0.15 / r;
        let n = ((std::f64::consts::TAU - gap) / step).floor() as usize;
        let pts: Vec<Vec3> = (0..=n)
            .map(|k| {
                let t = k as f64 * step;
                Vec3::new(r * t.cos(), r * t.sin(), 0.0)
            })
            .collect();
        let poly = sort(pts.clone());
        assert_eq!(poly.segments.len(), 1);
        let order = &poly.segments[0];
        let fwd: Vec<usize> = (0..=n).collect();
        let rev: Vec<usize> = (0..=n).rev().collect();
        assert!(*order == fwd || *order == rev);
    }

    #[test]
    fn previous_point_cases() {
        let poly = sort(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.01, 0.0, 0.0),
            Vec3::new(0.02, 0.0, 0.0),
        ]);
        let ends = poly.endpoints();
        for e in &ends {
            assert_eq!(previous_point(&poly, e).unwrap(), Vec3::new(0.01, 0.0, 0.0));
        }
        let single = sort(vec![Vec3::zeros()]);
        let e = single.endpoints()[0];
        assert!(matches!(previous_point(&single, &e), Err(Error::NoDirection)));
    }

    #[test]
    fn empty_cloud_is_rejected() {
        let err = sort_and_find_endpoints(&PointCloud::default(), &ground(), 0.05, 75.0).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)));
    }

    #[test]
    fn csv_round_trip() {
        let poly = sort(vec![Vec3::zeros(), Vec3::new(0.01, 0.0, 0.0), Vec3::new(0.5, 0.5, 0.0)]);
        let back = SortedPolyline::parse_csv(&poly.csv_string()).unwrap();
        assert!(same_geometry(&poly, &back));
    }

    fn planar_cloud() -> impl Strategy<Value = Vec<Vec3>> {
        prop::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 1..40)
            .prop_map(|v| v.into_iter().map(|(x, y)| Vec3::new(x, y, 0.0)).collect())
    }

    proptest! {
        #[test]
        fn segments_partition_input(pts in planar_cloud()) {
            let poly = sort(pts.clone());
            let mut seen: Vec<usize> = poly.segments.iter().flatten().copied().collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..pts.len()).collect::<Vec<_>>());
            prop_assert_eq!(poly.endpoints().len(), 2 * poly.segments.len());
            prop_assert!(poly.segments.iter().all(|s| !s.is_empty()));
        }

        #[test]
        fn permutation_invariant(pts in planar_cloud(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = pts.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(same_geometry(&sort(pts), &sort(shuffled)));
        }
    }
}
