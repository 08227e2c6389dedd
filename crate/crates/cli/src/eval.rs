//! `eval`: ICP against a dense unoccluded reference and spline accuracy
//! against the ground-truth cables.
//!
//! The source cloud of each cable is its `P_interpolated`; the target is the
//! `P_dense` of the reference cluster with the closest mean color. A
//! reference given as a scenario file is run in memory with its occluders
//! removed and tactile exploration off. A run compared with its own
//! directory uses `P_interpolated` on both sides, which checks the plumbing
//! (the RMSE is 0).

use std::path::Path;

use anyhow::{bail, Context, Result};
use dlo_core::cloudproc::io::parse_ply;
use dlo_core::cloudproc::PointCloud;
use dlo_core::eval::{curve_error, icp};
use dlo_core::fitting::{BSplineCurve, SplineDoc};
use dlo_core::pipeline::{run_pipeline, RunOptions};
use dlo_core::topology::SortedPolyline;
use dlo_core::worldsim::Scenario;
use serde::{Deserialize, Serialize};

use crate::rundir::*;
use crate::run::recorded_runtime;

pub const EVAL_REPORT: &str = "eval.toml";
pub const ICP_MAX_ITERS: usize = 100;
pub const ICP_TOL: f64 = 1e-10;
/// Samples per spline segment for the curve error.
pub const CURVE_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CableEval {
    pub cluster: usize,
    pub mean_rgb: [f64; 3],
    pub reference_cluster: usize,
    pub truth_cable: usize,
    pub rmse: f64,
    pub icp_iterations: usize,
    pub icp_converged: bool,
    pub curve_mean: f64,
    pub curve_max: f64,
    pub segments: usize,
    pub endpoints: usize,
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run: String,
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
    pub cables: Vec<CableEval>,
}

/// Dense cloud and mean color per reference cluster.
struct Reference {
    clusters: Vec<([f64; 3], PointCloud)>,
}

fn read_cloud(dir: &Path, rel: &str) -> Result<PointCloud> {
    let text = read_artifact(dir, rel)?;
    parse_ply(&text).with_context(|| format!("parsing {}", dir.join(rel).display()))
}

fn same_dir(a: &Path, b: &Path) -> bool {
    matches!((a.canonicalize(), b.canonicalize()), (Ok(x), Ok(y)) if x == y)
}

fn load_reference(run: &Path, path: &Path) -> Result<Reference> {
    if path.is_dir() {
        let cloud = if same_dir(run, path) { "P_interpolated" } else { "P_dense" };
        let summary = RunSummary::read(path)?;
        let clusters = summary
            .clusters
            .iter()
            .map(|c| Ok((c.mean_rgb, read_cloud(path, &format!("{}/{cloud}.ply", cluster_dir(c.index)))?)))
            .collect::<Result<_>>()?;
        return Ok(Reference { clusters });
    }
    let mut scenario = Scenario::read(path).with_context(|| format!("reading reference {}", path.display()))?;
    scenario.occluders.clear();
    let scene = scenario.build()?;
    let run = run_pipeline(&scene, &scenario.pipeline_params(), RunOptions { tactile: false })
        .map_err(|e| anyhow::anyhow!("reference run failed at {e}"))?;
    Ok(Reference {
        clusters: run.clusters.into_iter().map(|c| (c.mean_rgb, c.dense)).collect(),
    })
}

fn color_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn closest<T>(items: &[T], rgb: [f64; 3], color: impl Fn(&T) -> [f64; 3]) -> usize {
    (0..items.len())
        .min_by(|&a, &b| color_distance(color(&items[a]), rgb).total_cmp(&color_distance(color(&items[b]), rgb)))
        .expect("nonempty")
}

fn read_spline(dir: &Path, rel: &str) -> Result<BSplineCurve> {
    let text = read_artifact(dir, rel)?;
    let doc: SplineDoc = toml::from_str(&text).with_context(|| format!("parsing {}", dir.join(rel).display()))?;
    Ok(BSplineCurve::from_doc(&doc)?)
}

/// Evaluates the run directory `run` against `reference` (a run directory or
/// a scenario file) and writes `eval.toml` into `out`, or into `run`.
pub fn cmd_eval(run: &Path, reference: &Path, out: Option<&Path>) -> Result<EvalReport> {
    if !run.is_dir() {
        bail!("run directory {} does not exist", run.display());
    }
    if !reference.exists() {
        bail!("reference {} does not exist", reference.display());
    }
    let summary = RunSummary::read(run)?;
    let scenario = Scenario::from_toml(&read_artifact(run, SCENARIO)?)?;
    let scene = scenario.build()?;
    if scene.cables.is_empty() {
        bail!("scenario of {} has no cables", run.display());
    }
    let reference_clouds = load_reference(run, reference)?;
    if reference_clouds.clusters.is_empty() {
        bail!("reference {} has no clusters", reference.display());
    }

    let mut cables = Vec::new();
    for c in &summary.clusters {
        let dir = cluster_dir(c.index);
        let source = read_cloud(run, &format!("{dir}/P_interpolated.ply"))?;
        let r = closest(&reference_clouds.clusters, c.mean_rgb, |(rgb, _)| *rgb);
        let reg = icp(&source, &reference_clouds.clusters[r].1, ICP_MAX_ITERS, ICP_TOL)
            .with_context(|| format!("ICP for {dir}"))?;

        let truth = closest(&scene.cables, c.mean_rgb, |cable| cable.color.map(f64::from));
        let footprint = scene.cables[truth].footprint(&scene.support_plane);
        let sorted = SortedPolyline::parse_csv(&read_artifact(run, &format!("{dir}/{SORTED_FINAL}"))?)?;
        let (mut sum, mut max) = (0.0, 0.0f64);
        for s in 0..c.segments {
            let spline = read_spline(run, &format!("{dir}/{}", spline_file(s)))?;
            let (m, x) = curve_error(&spline, &footprint, CURVE_SAMPLES)?;
            sum += m;
            max = max.max(x);
        }
        cables.push(CableEval {
            cluster: c.index,
            mean_rgb: c.mean_rgb,
            reference_cluster: r,
            truth_cable: truth,
            rmse: reg.rmse,
            icp_iterations: reg.iterations,
            icp_converged: reg.converged,
            curve_mean: sum / c.segments.max(1) as f64,
            curve_max: max,
            segments: sorted.segments.len(),
            endpoints: sorted.endpoint_count(),
            probes: c.probes,
        });
    }
    let report = EvalReport {
        run: run.display().to_string(),
        reference: reference.display().to_string(),
        runtime_s: recorded_runtime(run),
        cables,
    };
    let out = out.unwrap_or(run);
    std::fs::create_dir_all(out)?;
    let path = out.join(EVAL_REPORT);
    std::fs::write(&path, toml::to_string(&report)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(report)
}
