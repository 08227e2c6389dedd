//! `plot`: one SVG per intermediate of each cluster, drawn in plane
//! coordinates. Points are gray dots, endpoints red circles with class
//! `endpoint`, sorted segments and splines polylines.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dlo_core::cloudproc::io::parse_ply;
use dlo_core::cloudproc::PlaneModel;
use dlo_core::fitting::{sample_curve, BSplineCurve, SplineDoc};
use dlo_core::geom::Vec3;
use dlo_core::topology::SortedPolyline;

use crate::rundir::*;
use crate::run::plane_from_doc;

/// Intermediates drawn per cluster.
pub const PLOTTED: [&str; 7] = [
    "P_skeleton",
    "P_down",
    "P_proj",
    "P_sorted",
    "P_tactile",
    "P_merged",
    "P_interpolated",
];
pub const SPLINE_SAMPLES: usize = 200;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"];

#[derive(Debug, Default)]
struct Layer {
    points: Vec<[f64; 2]>,
    lines: Vec<Vec<[f64; 2]>>,
    endpoints: Vec<[f64; 2]>,
}

struct Frame {
    min: [f64; 2],
    scale: f64,
}

impl Frame {
    fn fit(all: &[[f64; 2]]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in all {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if !lo[0].is_finite() {
            lo = [-0.1, -0.1];
            hi = [0.1, 0.1];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3) * 1.05;
        let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        Self {
            min: [mid[0] - span / 2.0, mid[1] - span / 2.0],
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.min[0]) * self.scale,
            SIZE - MARGIN - (p[1] - self.min[1]) * self.scale,
        )
    }

    fn span(&self) -> f64 {
        (SIZE - 2.0 * MARGIN) / self.scale
    }
}

fn svg(title: &str, frame: &Frame, layer: &Layer) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{title}</text>"#, SIZE / 2.0);

    // axes with five ticks each, labelled in meters
    let (x0, y0, x1, y1) = (MARGIN, SIZE - MARGIN, SIZE - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (tx, ty) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<line x1="{tx}" y1="{y0}" x2="{tx}" y2="{}"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<line x1="{x0}" y1="{ty}" x2="{}" y2="{ty}"/>"#, x0 - 5.0);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="labels" font-size="11">"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let u = frame.min[0] + f * frame.span();
        let v = frame.min[1] + f * frame.span();
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{u:.3}</text>"#, x0 + f * (x1 - x0), y0 + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v:.3}</text>"#, x0 - 8.0, y0 + f * (y1 - y0) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">u [m]</text>"#, SIZE / 2.0, SIZE - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">v [m]</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(s, "</g>");

    for (k, line) in layer.lines.iter().enumerate() {
        let pts: Vec<String> = line
            .iter()
            .map(|p| {
                let (x, y) = frame.px(*p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="segment" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            pts.join(" ")
        );
    }
    for p in &layer.points {
        let (x, y) = frame.px(*p);
        let _ = writeln!(s, r##"<circle class="point" cx="{x:.2}" cy="{y:.2}" r="1.6" fill="#444"/>"##);
    }
    for p in &layer.endpoints {
        let (x, y) = frame.px(*p);
        let _ = writeln!(s, r#"<circle class="endpoint" cx="{x:.2}" cy="{y:.2}" r="5" fill="red"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

fn flat(plane: &PlaneModel, pts: impl IntoIterator<Item = Vec3>) -> Vec<[f64; 2]> {
    pts.into_iter().map(|p| plane.to_plane_coords(&p)).collect()
}

fn polyline_layer(plane: &PlaneModel, poly: &SortedPolyline) -> Layer {
    Layer {
        points: flat(plane, poly.points.iter().copied()),
        lines: (0..poly.segments.len())
            .map(|s| flat(plane, poly.segment_points(s)))
            .collect(),
        endpoints: flat(plane, poly.endpoints().into_iter().map(|e| e.position)),
    }
}

fn cluster_layers(run: &Path, plane: &PlaneModel, index: usize, segments: usize) -> Result<Vec<(&'static str, Layer)>> {
    let dir = cluster_dir(index);
    let cloud = |name: &str| -> Result<Layer> {
        let rel = format!("{dir}/{name}.ply");
        let c = parse_ply(&read_artifact(run, &rel)?).with_context(|| format!("parsing {rel}"))?;
        Ok(Layer {
            points: flat(plane, c.iter().copied()),
            ..Layer::default()
        })
    };
    let sorted = SortedPolyline::parse_csv(&read_artifact(run, &format!("{dir}/{SORTED}"))?)?;
    let final_sorted = SortedPolyline::parse_csv(&read_artifact(run, &format!("{dir}/{SORTED_FINAL}"))?)?;
    let mut out = Vec::new();
    for name in PLOTTED {
        let layer = match name {
            "P_sorted" => polyline_layer(plane, &sorted),
            "P_interpolated" => {
                let mut lines = Vec::new();
                for s in 0..segments {
                    let rel = format!("{dir}/{}", spline_file(s));
                    let doc: SplineDoc =
                        toml::from_str(&read_artifact(run, &rel)?).with_context(|| format!("parsing {rel}"))?;
                    let curve = BSplineCurve::from_doc(&doc)?;
                    lines.push(flat(plane, sample_curve(&curve, SPLINE_SAMPLES)?.iter().copied()));
                }
                Layer {
                    points: Vec::new(),
                    lines,
                    endpoints: flat(plane, final_sorted.endpoints().into_iter().map(|e| e.position)),
                }
            }
            _ => cloud(name)?,
        };
        out.push((name, layer));
    }
    Ok(out)
}

/// Writes the SVGs of every cluster of `run` into `out` (default
/// `<run>/plots`) and returns their paths.
pub fn cmd_plot(run: &Path, out: Option<&Path>) -> Result<Vec<PathBuf>> {
    if !run.is_dir() {
        bail!("run directory {} does not exist", run.display());
    }
    let summary = RunSummary::read(run)?;
    let doc: PlaneDoc = toml::from_str(&read_artifact(run, PLANE)?).context("parsing plane.toml")?;
    let plane = plane_from_doc(&doc);
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| run.join("plots"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    for c in &summary.clusters {
        let layers = cluster_layers(run, &plane, c.index, c.segments)?;
        let all: Vec<[f64; 2]> = layers
            .iter()
            .flat_map(|(_, l)| l.points.iter().chain(l.lines.iter().flatten()).copied())
            .collect();
        let frame = Frame::fit(&all);
        for (name, layer) in &layers {
            let title = format!("{} {name}", cluster_dir(c.index));
            let path = out.join(format!("{}_{name}.svg", cluster_dir(c.index)));
            std::fs::write(&path, svg(&title, &frame, layer)).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }
    Ok(written)
}
