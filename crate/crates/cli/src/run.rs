//! `gen-scene` and `run`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dlo_core::cloudproc::io::{fmt_f64, ply_string};
use dlo_core::cloudproc::PlaneModel;
use dlo_core::geom::Vec3;
use dlo_core::imgproc::io::{write_depth, write_pgm, write_ppm};
use dlo_core::params::PipelineParams;
use dlo_core::pipeline::{run_pipeline, ClusterRun, PipelineRun, RunOptions};
use dlo_core::worldsim::templates::{template, TEMPLATES};
use dlo_core::worldsim::Scenario;

use crate::rundir::*;

/// Writes a scenario built from a template name, or from an existing scenario
/// file, with `seed` applied. Returns the written path.
pub fn cmd_gen_scene(source: &str, seed: u64, out: Option<&Path>) -> Result<PathBuf> {
    let mut scenario = if TEMPLATES.contains(&source) || !Path::new(source).exists() {
        template(source, seed)?
    } else {
        let sc = Scenario::read(Path::new(source)).with_context(|| format!("reading scenario config {source}"))?;
        sc.build().with_context(|| format!("invalid scenario config {source}"))?;
        sc
    };
    scenario.seed = seed;
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(format!("{}_seed{seed}.toml", scenario.name)),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    scenario.write(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub scenario: PathBuf,
    pub params: Option<PathBuf>,
    /// Replaces the scenario seed when given.
    pub seed: Option<u64>,
    pub tactile: bool,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub run: Option<PipelineRun>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code
    }
}

pub fn read_params(path: &Path) -> Result<PipelineParams> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading params {}", path.display()))?;
    let params: PipelineParams =
        toml::from_str(&text).with_context(|| format!("parsing params {}", path.display()))?;
    params.validate().with_context(|| format!("invalid params {}", path.display()))?;
    Ok(params)
}

pub fn plane_doc(plane: &PlaneModel) -> PlaneDoc {
    PlaneDoc {
        coefficients: plane.coefficients,
        inlier_count: plane.inlier_count,
    }
}

pub fn plane_from_doc(doc: &PlaneDoc) -> PlaneModel {
    let [a, b, c, _] = doc.coefficients;
    PlaneModel {
        coefficients: doc.coefficients,
        normal: Vec3::new(a, b, c),
        inlier_count: doc.inlier_count,
    }
}

fn summarize(c: &ClusterRun) -> ClusterSummary {
    ClusterSummary {
        index: c.index,
        mean_rgb: c.mean_rgb,
        pixels: c.pixels,
        dense_points: c.dense.len(),
        skeleton_points: c.skeleton.len(),
        down_points: c.down.len(),
        first_segments: c.sorted.segments.len(),
        first_endpoints: c.sorted.endpoint_count(),
        tactile_points: c.tactile.len(),
        probes: c.probes(),
        merged_points: c.merged.len(),
        merged_endpoints: c.merged_endpoints,
        refined_points: c.refined.len(),
        resorted_segments: c.resorted_segments,
        segments: c.final_sorted.segments.len(),
        endpoints: c.final_sorted.endpoint_count(),
        complete: c.complete(),
    }
}

fn image_bytes(f: impl FnOnce(&mut Vec<u8>) -> dlo_core::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn write_cluster(w: &mut RunWriter, c: &ClusterRun, samples: usize) -> Result<()> {
    let dir = cluster_dir(c.index);
    let clouds = [
        &c.dense,
        &c.skeleton,
        &c.down,
        &c.projected,
        &c.tactile,
        &c.merged,
        &c.refined,
        &c.interpolated,
    ];
    for (name, cloud) in CLOUDS.iter().zip(clouds) {
        w.write(&format!("{dir}/{name}.ply"), ply_string(cloud))?;
    }
    w.write(&format!("{dir}/{SORTED}"), c.sorted.csv_string())?;
    w.write(&format!("{dir}/{SORTED_FINAL}"), c.final_sorted.csv_string())?;
    for (s, spline) in c.splines.iter().enumerate() {
        w.write(&format!("{dir}/{}", spline_file(s)), spline.to_toml(samples))?;
    }
    if let Some(e) = &c.exploration {
        w.write(&format!("{dir}/{TRACE}"), e.trace_csv())?;
    }
    Ok(())
}

fn timing_toml(run: &PipelineRun) -> String {
    let mut s = String::from("[pipeline]\n");
    let mut total = 0.0;
    for (name, d) in &run.timing {
        total += d.as_secs_f64();
        let _ = writeln!(s, "{name} = {}", fmt_f64(d.as_secs_f64()));
    }
    let _ = writeln!(s, "total = {}", fmt_f64(total));
    for c in &run.clusters {
        let _ = writeln!(s, "\n[{}]", cluster_dir(c.index));
        for (name, d) in &c.timing {
            let _ = writeln!(s, "{name} = {}", fmt_f64(d.as_secs_f64()));
        }
    }
    s
}

/// Total wall-clock seconds recorded in a run's timing file, if present.
pub fn recorded_runtime(dir: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join(TIMING)).ok()?;
    let doc: toml::Table = toml::from_str(&text).ok()?;
    doc.get("pipeline")?.get("total")?.as_float()
}

/// Runs the pipeline on a scenario file and writes the run directory.
///
/// Stage errors are returned, except probe-budget exhaustion, which is
/// recorded in the manifest with exit code 3.
pub fn cmd_run(args: &RunArgs) -> Result<RunOutcome> {
    let scenario_text = std::fs::read_to_string(&args.scenario)
        .with_context(|| format!("reading scenario {}", args.scenario.display()))?;
    let mut scenario = Scenario::from_toml(&scenario_text)
        .with_context(|| format!("parsing scenario {}", args.scenario.display()))?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let params = match &args.params {
        Some(p) => read_params(p)?,
        None => scenario.pipeline_params(),
    };
    let scene = scenario.build().context("building scene")?;

    let mut w = RunWriter::create(&args.out)?;
    w.write(SCENARIO, scenario.to_toml())?;
    w.write_toml(PARAMS, &params)?;
    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        scenario: args.scenario.display().to_string(),
        params: args.params.as_ref().map(|p| p.display().to_string()),
        seed: scenario.seed,
        output_dir: args.out.display().to_string(),
        tactile: args.tactile,
        status: RunStatus::Partial,
        exit_code: RunStatus::Partial.exit_code(),
        error: None,
        checksums: Default::default(),
    };

    let run = match run_pipeline(&scene, &params, RunOptions { tactile: args.tactile }) {
        Ok(run) => run,
        Err(e) if e.budget_exhausted() => {
            manifest.status = RunStatus::BudgetExhausted;
            manifest.exit_code = RunStatus::BudgetExhausted.exit_code();
            manifest.error = Some(e.to_string());
            return Ok(RunOutcome {
                manifest: w.finish(manifest)?,
                run: None,
            });
        }
        Err(e) => bail!("pipeline failed at {e}"),
    };

    w.write("render/color.ppm", image_bytes(|b| write_ppm(&run.render.color, b))?)?;
    w.write("render/depth.bin", image_bytes(|b| write_depth(&run.render.depth, b))?)?;
    w.write("render/mask.pgm", image_bytes(|b| write_pgm(&run.render.cable_mask, b))?)?;
    w.write("render/cleaned.pgm", image_bytes(|b| write_pgm(&run.cleaned, b))?)?;
    w.write_toml(PLANE, &plane_doc(&run.plane))?;
    for c in &run.clusters {
        write_cluster(&mut w, c, params.interpolated_samples)?;
    }
    let status = if run.complete() {
        RunStatus::Complete
    } else {
        RunStatus::Partial
    };
    w.write_toml(
        SUMMARY,
        &RunSummary {
            status,
            clusters: run.clusters.iter().map(summarize).collect(),
        },
    )?;
    w.write_unchecked(TIMING, timing_toml(&run))?;
    manifest.status = status;
    manifest.exit_code = status.exit_code();
    Ok(RunOutcome {
        manifest: w.finish(manifest)?,
        run: Some(run),
    })
}
