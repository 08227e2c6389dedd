//! Full reconstruction of every cable in a simulated scene.
//!
//! The scene is rendered once; the support plane comes from RANSAC on the
//! shelf pixels and the cable pixels are split into clusters by color. Each
//! cluster then runs on its own: skeleton, downsampling, projection, sorting,
//! tactile exploration from the endpoints, merge, second downsampling,
//! re-sort, joining of gaps covered by tactile contacts, and one
//! interpolating spline per segment.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cloudproc::{
    merge_close_points, project_to_plane, ransac_plane, voxel_downsample, PlaneModel, PointCloud,
};
use crate::error::Error;
use crate::explore::{explore_from_endpoints, merge_clouds, Exploration, ProbeSession};
use crate::fitting::{fit_bspline, refine_merged, sample_curve, BSplineCurve};
use crate::imgproc::{
    blur_and_clean, cluster_pixels, pixels_to_cloud, skeletonize, ImageGrid, Pixel, PixelCluster,
};
use crate::params::PipelineParams;
use crate::topology::{join_supported_gaps, sort_and_find_endpoints, GapJoin, SortedPolyline};
use crate::worldsim::{render, RenderOutput, WorldScene};

/// A pipeline error tagged with the stage, and cluster if any, that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage}{}: {source}", cluster.map(|c| format!(" (cluster {c})")).unwrap_or_default())]
pub struct StageError {
    pub stage: &'static str,
    pub cluster: Option<usize>,
    #[source]
    pub source: Error,
}

impl StageError {
    pub fn budget_exhausted(&self) -> bool {
        matches!(self.source, Error::ProbeBudgetExhausted(_))
    }
}

type StageResult<T> = std::result::Result<T, StageError>;

trait Stage<T> {
    fn stage(self, stage: &'static str, cluster: Option<usize>) -> StageResult<T>;
}

impl<T> Stage<T> for crate::error::Result<T> {
    fn stage(self, stage: &'static str, cluster: Option<usize>) -> StageResult<T> {
        self.map_err(|source| StageError {
            stage,
            cluster,
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub tactile: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tactile: true }
    }
}

/// Every intermediate of one cluster.
#[derive(Debug, Clone)]
pub struct ClusterRun {
    pub index: usize,
    pub mean_rgb: [f64; 3],
    pub pixels: usize,
    /// Cleaned-mask pixels of the cluster, back-projected.
    pub dense: PointCloud,
    pub skeleton: PointCloud,
    pub down: PointCloud,
    pub projected: PointCloud,
    pub sorted: SortedPolyline,
    pub exploration: Option<Exploration>,
    pub tactile: PointCloud,
    pub merged: PointCloud,
    /// Endpoints found by sorting the merged cloud before the second pass.
    pub merged_endpoints: Option<usize>,
    pub refined: PointCloud,
    /// Segments of the re-sort before tactile-supported joining.
    pub resorted_segments: usize,
    pub final_sorted: SortedPolyline,
    pub splines: Vec<BSplineCurve>,
    pub interpolated: PointCloud,
    pub timing: Vec<(&'static str, Duration)>,
}

impl ClusterRun {
    pub fn complete(&self) -> bool {
        self.final_sorted.segments.len() == 1
    }

    pub fn probes(&self) -> usize {
        self.exploration.as_ref().map_or(0, |e| e.probes)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub render: RenderOutput,
    pub cleaned: ImageGrid,
    pub plane: PlaneModel,
    pub clusters: Vec<ClusterRun>,
    pub timing: Vec<(&'static str, Duration)>,
}

impl PipelineRun {
    /// Every cluster ended as a single segment.
    pub fn complete(&self) -> bool {
        !self.clusters.is_empty() && self.clusters.iter().all(ClusterRun::complete)
    }
}

fn timed<T>(timing: &mut Vec<(&'static str, Duration)>, name: &'static str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timing.push((name, start.elapsed()));
    out
}

fn support_plane(scene: &WorldScene, out: &RenderOutput, params: &PipelineParams) -> crate::error::Result<PlaneModel> {
    let stride = params.plane_pixel_stride;
    let pixels: Vec<Pixel> = out
        .shelf_mask
        .foreground()
        .into_iter()
        .filter(|(r, c)| r % stride == 0 && c % stride == 0)
        .collect();
    let cloud = pixels_to_cloud(&pixels, &out.depth, &scene.camera)?;
    let plane = ransac_plane(&cloud, params.ransac.inlier_tol, params.ransac.max_iters, scene.seed)?;
    Ok(plane.oriented_towards(&scene.camera.position()))
}

pub fn run_pipeline(scene: &WorldScene, params: &PipelineParams, opts: RunOptions) -> StageResult<PipelineRun> {
    params.validate().stage("params", None)?;
    let mut timing = Vec::new();
    let out = timed(&mut timing, "render", || render(scene)).stage("render", None)?;
    let cleaned = timed(&mut timing, "blur_and_clean", || blur_and_clean(&out.cable_mask, &out.color))
        .stage("blur_and_clean", None)?;
    let plane = timed(&mut timing, "plane", || support_plane(scene, &out, params)).stage("plane", None)?;
    let set = timed(&mut timing, "cluster_pixels", || {
        cluster_pixels(&cleaned, &out.color, &params.cluster)
    })
    .stage("cluster_pixels", None)?;

    let clusters = timed(&mut timing, "clusters", || {
        set.clusters
            .par_iter()
            .enumerate()
            .map(|(k, c)| run_cluster(scene, &out, &plane, params, opts, k, c))
            .collect::<StageResult<Vec<_>>>()
    })?;
    Ok(PipelineRun {
        render: out,
        cleaned,
        plane,
        clusters,
        timing,
    })
}

fn run_cluster(
    scene: &WorldScene,
    out: &RenderOutput,
    plane: &PlaneModel,
    params: &PipelineParams,
    opts: RunOptions,
    index: usize,
    cluster: &PixelCluster,
) -> StageResult<ClusterRun> {
    let recon = &params.recon;
    let at = Some(index);
    let mut t = Vec::new();
    let cam = &scene.camera;
    let (w, h) = (out.depth.width(), out.depth.height());

    let dense = pixels_to_cloud(&cluster.pixels, &out.depth, cam).stage("dense_cloud", at)?;
    let skel_px = timed(&mut t, "skeletonize", || {
        skeletonize(&ImageGrid::mask_from_pixels(w, h, &cluster.pixels)).foreground()
    });
    let skeleton = pixels_to_cloud(&skel_px, &out.depth, cam).stage("pixels_to_cloud", at)?;
    let down = timed(&mut t, "voxel_downsample", || {
        voxel_downsample(&skeleton, recon.d_m, &recon.voxel_origin()).map(|d| merge_close_points(&d, recon.t_p))
    })
    .stage("voxel_downsample", at)?;
    let projected = project_to_plane(&down, plane);
    let sorted = timed(&mut t, "sort", || {
        sort_and_find_endpoints(&projected, plane, recon.r_search, recon.alpha_max)
    })
    .stage("sort_and_find_endpoints", at)?;

    let exploration = if opts.tactile {
        let mut session = ProbeSession::new(scene, recon.eps_contact, params.explore.probe_budget);
        Some(
            timed(&mut t, "explore", || {
                explore_from_endpoints(&sorted, plane, &mut session, recon, &params.explore)
            })
            .stage("explore", at)?,
        )
    } else {
        None
    };
    let tactile = exploration.as_ref().map(|e| e.tactile.clone()).unwrap_or_default();
    let merged = merge_clouds(&projected, &tactile);
    let merged_endpoints = sort_and_find_endpoints(&merged, plane, recon.r_search, recon.alpha_max)
        .ok()
        .map(|p| p.endpoint_count());
    let refined = timed(&mut t, "refine_merged", || refine_merged(&merged, recon)).stage("refine_merged", at)?;
    let refined = project_to_plane(&refined, plane);
    let resorted = sort_and_find_endpoints(&refined, plane, recon.r_search, recon.alpha_max)
        .stage("resort", at)?;
    let join = GapJoin {
        max_gap: 2.0 * recon.r_search,
        alpha_max_deg: recon.alpha_max,
        support_radius: recon.t_p,
        max_spacing: 2.0 * recon.delta_y,
    };
    let final_sorted = join_supported_gaps(&resorted, plane, &tactile, &join);
    let splines = timed(&mut t, "fit_bspline", || {
        (0..final_sorted.segments.len())
            .map(|s| fit_bspline(&final_sorted, s))
            .collect::<crate::error::Result<Vec<_>>>()
    })
    .stage("fit_bspline", at)?;
    let mut interpolated = PointCloud::default();
    for s in &splines {
        for p in sample_curve(s, params.interpolated_samples).stage("sample_curve", at)?.iter() {
            interpolated.push(*p);
        }
    }
    Ok(ClusterRun {
        index,
        mean_rgb: cluster.mean_rgb,
        pixels: cluster.pixels.len(),
        dense,
        skeleton,
        down,
        projected,
        sorted,
        exploration,
        tactile,
        merged,
        merged_endpoints,
        refined,
        resorted_segments: resorted.segments.len(),
        final_sorted,
        splines,
        interpolated,
        timing: t,
    })
}
