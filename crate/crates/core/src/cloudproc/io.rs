//! ASCII PLY and CSV point files.
//!
//! Coordinates are written with nine significant digits in scientific
//! notation, which makes the output byte-stable across runs.

use std::fmt::Write as _;
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::geom::Vec3;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn ply_string(cloud: &PointCloud) -> String {
    let mut s = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        cloud.len()
    );
    for p in cloud.iter() {
        let _ = writeln!(s, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    s
}

pub fn csv_string(cloud: &PointCloud) -> String {
    let mut s = String::from("x,y,z\n");
    for p in cloud.iter() {
        let _ = writeln!(s, "{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    s
}

pub fn write_ply(path: &Path, cloud: &PointCloud) -> Result<()> {
    std::fs::write(path, ply_string(cloud))?;
    Ok(())
}

pub fn write_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    std::fs::write(path, csv_string(cloud))?;
    Ok(())
}

fn parse_xyz<'a>(mut fields: impl Iterator<Item = &'a str>, format: &'static str, line: usize) -> Result<Vec3> {
    let mut v = [0.0; 3];
    for slot in &mut v {
        let f = fields.next().ok_or_else(|| Error::Format {
            format,
            msg: format!("line {line}: expected three coordinates"),
        })?;
        *slot = f.trim().parse().map_err(|e| Error::Format {
            format,
            msg: format!("line {line}: {e}"),
        })?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let err = |msg: String| Error::Format { format: "ply", msg };
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, l)| l.trim()) != Some("ply") {
        return Err(err("missing ply magic".into()));
    }
    let mut count = None;
    for (_, line) in lines.by_ref() {
        let line = line.trim();
        if line == "end_header" {
            break;
        }
        if line.starts_with("format") && line != "format ascii 1.0" {
            return Err(err(format!("unsupported {line}")));
        }
        if let Some(n) = line.strip_prefix("element vertex ") {
            count = Some(n.trim().parse::<usize>().map_err(|e| err(e.to_string()))?);
        }
    }
    let count = count.ok_or_else(|| err("no vertex element".into()))?;
    let mut pts = Vec::with_capacity(count);
    for (i, line) in lines.take(count) {
        pts.push(parse_xyz(line.split_whitespace(), "ply", i + 1)?);
    }
    if pts.len() != count {
        return Err(err(format!("expected {count} vertices, found {}", pts.len())));
    }
    Ok(PointCloud::new(pts))
}

pub fn parse_csv(text: &str) -> Result<PointCloud> {
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        pts.push(parse_xyz(line.split(','), "csv", i + 1)?);
    }
    Ok(PointCloud::new(pts))
}

pub fn read_ply(path: &Path) -> Result<PointCloud> {
    parse_ply(&std::fs::read_to_string(path)?)
}

pub fn read_csv(path: &Path) -> Result<PointCloud> {
    parse_csv(&std::fs::read_to_string(path)?)
}
