use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Pose, Vec3};

/// `(row, col)` pixel coordinates.
pub type Pixel = (usize, usize);

/// Row-major raster with one (mask, depth) or three (color) channels.
///
/// Masks hold 0/1, colors 0–255, depth meters with 0 marking a hole.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Dimension(format!("unsupported channel count {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::Dimension(format!(
                "{} samples for a {width}x{height}x{channels} grid",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Binary mask with the listed pixels set.
    pub fn mask_from_pixels(width: usize, height: usize, pixels: &[Pixel]) -> Self {
        let mut m = Self::new(width, height, 1);
        for &(r, c) in pixels {
            m.set(r, c, 0, 1.0);
        }
        m
    }

    /// Mask from rows of `'#'`/`'1'` (on) and anything else (off).
    pub fn mask_from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut m = Self::new(width, height, 1);
        for (r, line) in rows.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                if ch == '#' || ch == '1' {
                    m.set(r, c, 0, 1.0);
                }
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn same_size(&self, other: &ImageGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f32 {
        self.data[(row * self.width + col) * self.channels + ch]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, v: f32) {
        self.data[(row * self.width + col) * self.channels + ch] = v;
    }

    /// Mask lookup treating out-of-bounds as background.
    #[inline]
    pub fn is_on(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.get(row as usize, col as usize, 0) > 0.5
    }

    pub fn rgb(&self, row: usize, col: usize) -> [f32; 3] {
        [self.get(row, col, 0), self.get(row, col, 1), self.get(row, col, 2)]
    }

    /// Foreground pixels of a mask in row-major order.
    pub fn foreground(&self) -> Vec<Pixel> {
        let mut out = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c, 0) > 0.5 {
                    out.push((r, c));
                }
            }
        }
        out
    }

    pub fn count_foreground(&self) -> usize {
        self.data
            .iter()
            .step_by(self.channels)
            .filter(|v| **v > 0.5)
            .count()
    }

    pub fn is_binary(&self) -> bool {
        self.channels == 1 && self.data.iter().all(|v| *v == 0.0 || *v == 1.0)
    }
}

/// Pinhole intrinsics plus the camera-to-base pose.
///
/// Camera axes: x right, y down, z along the optical axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub pose: Pose,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::Config("focal lengths must be positive".into()));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return Err(Error::Config("principal point outside the image".into()));
        }
        Ok(())
    }

    pub fn position(&self) -> Vec3 {
        self.pose.translation
    }

    /// Ray through a pixel center in the base frame, scaled so one unit of
    /// ray parameter equals one meter of depth along the optical axis.
    pub fn ray(&self, row: f64, col: f64) -> Vec3 {
        let d = Vec3::new((col - self.cx) / self.fx, (row - self.cy) / self.fy, 1.0);
        self.pose.rotation.apply(&d)
    }

    pub fn back_project(&self, row: f64, col: f64, depth: f64) -> Vec3 {
        let p_cam = Vec3::new(
            depth * (col - self.cx) / self.fx,
            depth * (row - self.cy) / self.fy,
            depth,
        );
        self.pose.transform_point(&p_cam)
    }

    /// `(row, col, depth)` of a base-frame point; `None` behind the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64, f64)> {
        let q = self.pose.inverse().transform_point(p);
        if q.z <= 0.0 {
            return None;
        }
        Some((self.fy * q.y / q.z + self.cy, self.fx * q.x / q.z + self.cx, q.z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_data_checks_length() {
        assert!(ImageGrid::from_data(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(ImageGrid::from_data(2, 2, 3, vec![0.0; 12]).is_ok());
    }

    #[test]
    fn ascii_masks() {
        let m = ImageGrid::mask_from_ascii(&["#..", ".#."]);
        assert_eq!(m.foreground(), vec![(0, 0), (1, 1)]);
        assert!(m.is_on(1, 1));
        assert!(!m.is_on(-1, 0));
    }
}
