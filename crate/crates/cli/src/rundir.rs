//! Run directory layout, the checksumming writer and the manifest.
//!
//! ```text
//! <out>/manifest.toml      seed, inputs, status, sha256 of every artifact
//! <out>/scenario.toml      scenario as run (seed applied)
//! <out>/params.toml        effective parameters
//! <out>/plane.toml         estimated support plane
//! <out>/summary.toml       per-cluster counts
//! <out>/timing.toml        wall-clock timings (not checksummed)
//! <out>/render/            color.ppm, depth.bin, mask.pgm, cleaned.pgm
//! <out>/cluster_NN/        P_*.ply, P_sorted.csv, sorted_final.csv,
//!                          spline_SS.toml, trace.csv
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.toml";
pub const SCENARIO: &str = "scenario.toml";
pub const PARAMS: &str = "params.toml";
pub const PLANE: &str = "plane.toml";
pub const SUMMARY: &str = "summary.toml";
pub const TIMING: &str = "timing.toml";
pub const MANIFEST_SCHEMA: u32 = 1;

/// Clouds written per cluster as PLY, in pipeline order.
pub const CLOUDS: [&str; 8] = [
    "P_dense",
    "P_skeleton",
    "P_down",
    "P_proj",
    "P_tactile",
    "P_merged",
    "P_refined",
    "P_interpolated",
];

/// Ordered polylines written per cluster as CSV.
pub const SORTED: &str = "P_sorted.csv";
pub const SORTED_FINAL: &str = "sorted_final.csv";
pub const TRACE: &str = "trace.csv";

pub fn cluster_dir(index: usize) -> String {
    format!("cluster_{index:02}")
}

pub fn spline_file(segment: usize) -> String {
    format!("spline_{segment:02}.toml")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Partial,
    BudgetExhausted,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Complete => 0,
            RunStatus::Partial => 2,
            RunStatus::BudgetExhausted => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    /// Scenario path as given on the command line.
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<String>,
    pub seed: u64,
    pub output_dir: String,
    pub tactile: bool,
    pub status: RunStatus,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// sha256 of every artifact except the manifest and the timings, keyed by
    /// path relative to the run directory.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let text = read_artifact(dir, MANIFEST)?;
        toml::from_str(&text).with_context(|| format!("parsing {}", dir.join(MANIFEST).display()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Every file of a run goes through one writer so the manifest checksums
/// always describe exactly what is on disk.
#[derive(Debug)]
pub struct RunWriter {
    root: PathBuf,
    checksums: BTreeMap<String, String>,
}

impl RunWriter {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            checksums: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn put(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes a checksummed artifact.
    pub fn write(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let bytes = bytes.as_ref();
        self.put(rel, bytes)?;
        self.checksums.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Writes a file that is left out of the checksums (wall-clock data).
    pub fn write_unchecked(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        self.put(rel, bytes.as_ref())
    }

    pub fn write_toml<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let text = toml::to_string(value).with_context(|| format!("serializing {rel}"))?;
        self.write(rel, text)
    }

    /// Writes the manifest with the collected checksums and consumes the writer.
    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest> {
        manifest.checksums = self.checksums.clone();
        let text = toml::to_string(&manifest).context("serializing manifest")?;
        self.put(MANIFEST, text.as_bytes())?;
        Ok(manifest)
    }
}

/// Reads an artifact, failing with the file name when it is missing.
pub fn read_artifact(dir: &Path, rel: &str) -> Result<String> {
    let path = dir.join(rel);
    fs::read_to_string(&path).with_context(|| format!("missing or unreadable artifact {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneDoc {
    /// `a·x + b·y + c·z + d = 0` with a unit normal.
    pub coefficients: [f64; 4],
    pub inlier_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub index: usize,
    pub mean_rgb: [f64; 3],
    pub pixels: usize,
    pub dense_points: usize,
    pub skeleton_points: usize,
    pub down_points: usize,
    /// Segments and endpoints of the first, vision-only sort.
    pub first_segments: usize,
    pub first_endpoints: usize,
    pub tactile_points: usize,
    pub probes: usize,
    pub merged_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merged_endpoints: Option<usize>,
    pub refined_points: usize,
    pub resorted_segments: usize,
    pub segments: usize,
    pub endpoints: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub clusters: Vec<ClusterSummary>,
}

impl RunSummary {
    pub fn read(dir: &Path) -> Result<Self> {
        let text = read_artifact(dir, SUMMARY)?;
        toml::from_str(&text).with_context(|| format!("parsing {}", dir.join(SUMMARY).display()))
    }
}
