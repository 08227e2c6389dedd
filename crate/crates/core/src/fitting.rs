//! Clamped B-spline curves and global interpolation of sorted cable points.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cloudproc::{merge_close_points, voxel_downsample, PointCloud};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::params::ReconParams;
use crate::topology::SortedPolyline;

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineCurve {
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Vec3>,
}

/// On-disk form of a spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineDoc {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<[f64; 3]>,
    pub samples: usize,
}

impl BSplineCurve {
    pub fn new(degree: usize, knots: Vec<f64>, control_points: Vec<Vec3>) -> Result<Self> {
        let n = control_points.len();
        if n == 0 || degree >= n {
            return Err(Error::ContractViolation(format!(
                "degree {degree} needs more than {n} control points"
            )));
        }
        if knots.len() != n + degree + 1 {
            return Err(Error::ContractViolation(format!(
                "expected {} knots, got {}",
                n + degree + 1,
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::ContractViolation("knots must be nondecreasing".into()));
        }
        let (a, b) = (knots[0], knots[knots.len() - 1]);
        if knots[..=degree].iter().any(|&k| k != a) || knots[n..].iter().any(|&k| k != b) || a >= b {
            return Err(Error::ContractViolation("knot vector must be clamped".into()));
        }
        Ok(Self {
            degree,
            knots,
            control_points,
        })
    }

    /// Clamped curve with uniformly spaced interior knots on `[0, 1]`.
    pub fn clamped_uniform(degree: usize, control_points: Vec<Vec3>) -> Result<Self> {
        let n = control_points.len();
        if degree >= n {
            return Err(Error::ContractViolation(format!(
                "degree {degree} needs more than {n} control points"
            )));
        }
        let inner = n - degree;
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..inner).map(|i| i as f64 / inner as f64));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(degree, knots, control_points)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn control_points(&self) -> &[Vec3] {
        &self.control_points
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Index `s` with `knots[s] <= u < knots[s + 1]`, clamped to the last
    /// nonempty span at the right end.
    fn span(&self, u: f64) -> usize {
        let n = self.control_points.len();
        let p = self.degree;
        if u >= self.knots[n] {
            let mut s = n - 1;
            while s > p && self.knots[s] == self.knots[s + 1] {
                s -= 1;
            }
            return s;
        }
        if u <= self.knots[p] {
            let mut s = p;
            while self.knots[s + 1] <= u && s < n - 1 {
                s += 1;
            }
            return s;
        }
        // knots[p] < u < knots[n]
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Nonzero basis functions `N_{s-p..=s}` at `u`.
    fn basis(&self, s: usize, u: f64) -> Vec<f64> {
        let p = self.degree;
        let k = &self.knots;
        let mut n = vec![0.0; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        n[0] = 1.0;
        for j in 1..=p {
            left[j] = u - k[s + 1 - j];
            right[j] = k[s + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let den = right[r + 1] + left[j - r];
                let tmp = if den == 0.0 { 0.0 } else { n[r] / den };
                n[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            n[j] = saved;
        }
        n
    }

    pub fn evaluate(&self, u: f64) -> Vec3 {
        let (a, b) = self.domain();
        let u = u.clamp(a, b);
        let s = self.span(u);
        let p = self.degree;
        self.basis(s, u)
            .iter()
            .enumerate()
            .fold(Vec3::zeros(), |acc, (i, w)| acc + self.control_points[s - p + i] * *w)
    }

    /// Hodograph; a degree-0 curve differentiates to the zero constant.
    pub fn derivative(&self) -> BSplineCurve {
        let p = self.degree;
        if p == 0 {
            return Self {
                degree: 0,
                knots: vec![self.knots[0], self.knots[self.knots.len() - 1]],
                control_points: vec![Vec3::zeros()],
            };
        }
        let k = &self.knots;
        let q = self
            .control_points
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let den = k[i + p + 1] - k[i + 1];
                if den == 0.0 {
                    Vec3::zeros()
                } else {
                    (w[1] - w[0]) * (p as f64 / den)
                }
            })
            .collect();
        Self {
            degree: p - 1,
            knots: k[1..k.len() - 1].to_vec(),
            control_points: q,
        }
    }

    pub fn to_doc(&self, samples: usize) -> SplineDoc {
        SplineDoc {
            degree: self.degree,
            knots: self.knots.clone(),
            control_points: self.control_points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            samples,
        }
    }

    pub fn from_doc(doc: &SplineDoc) -> Result<Self> {
        Self::new(
            doc.degree,
            doc.knots.clone(),
            doc.control_points.iter().map(|c| Vec3::new(c[0], c[1], c[2])).collect(),
        )
    }

    pub fn to_toml(&self, samples: usize) -> String {
        toml::to_string(&self.to_doc(samples)).expect("spline document serializes")
    }

    pub fn write_toml(&self, path: &Path, samples: usize) -> Result<()> {
        std::fs::write(path, self.to_toml(samples))?;
        Ok(())
    }

    pub fn read_toml(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let doc: SplineDoc = toml::from_str(&text).map_err(|e| Error::Format {
            format: "spline toml",
            msg: e.to_string(),
        })?;
        Self::from_doc(&doc)
    }
}

/// Normalised cumulative chord lengths, or `None` when all points coincide.
pub fn chord_parameters(points: &[Vec3]) -> Option<Vec<f64>> {
    let mut acc = vec![0.0];
    for w in points.windows(2) {
        acc.push(acc.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *acc.last().unwrap();
    if !(total > 0.0) {
        return None;
    }
    let last = acc.len() - 1;
    for (i, v) in acc.iter_mut().enumerate() {
        *v = if i == last { 1.0 } else { *v / total };
    }
    Some(acc)
}

fn polyline(points: &[Vec3], params: &[f64]) -> Result<BSplineCurve> {
    let mut knots = vec![0.0];
    knots.extend_from_slice(params);
    knots.push(1.0);
    BSplineCurve::new(1, knots, points.to_vec())
}

/// Interpolating spline through `points` in order, with its data parameters.
///
/// Degree is `min(3, len − 1)`. Repeated consecutive points make the system
/// singular; the fit then falls back to the linear polyline.
pub fn interpolate(points: &[Vec3]) -> Result<(BSplineCurve, Vec<f64>)> {
    match points.len() {
        0 => return Err(Error::EmptyInput("cannot fit an empty segment".into())),
        1 => {
            let c = BSplineCurve::new(0, vec![0.0, 1.0], points.to_vec())?;
            return Ok((c, vec![0.0]));
        }
        _ => {}
    }
    let Some(params) = chord_parameters(points) else {
        let n = points.len() - 1;
        let params: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        return Ok((polyline(points, &params)?, params));
    };
    if params.windows(2).any(|w| w[1] <= w[0]) {
        return Ok((polyline(points, &params)?, params));
    }
    let n = points.len() - 1;
    let p = n.min(3);
    if p == 1 {
        return Ok((polyline(points, &params)?, params));
    }
    let mut knots = vec![0.0; p + 1];
    for j in 1..=n - p {
        knots.push(params[j..j + p].iter().sum::<f64>() / p as f64);
    }
    knots.extend(std::iter::repeat_n(1.0, p + 1));

    let shell = BSplineCurve {
        degree: p,
        knots,
        control_points: vec![Vec3::zeros(); n + 1],
    };
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    for (k, &u) in params.iter().enumerate() {
        let s = shell.span(u);
        for (i, w) in shell.basis(s, u).into_iter().enumerate() {
            a[(k, s - p + i)] = w;
        }
    }
    let lu = a.lu();
    let mut ctrl = vec![Vec3::zeros(); n + 1];
    for dim in 0..3 {
        let rhs = DVector::from_iterator(n + 1, points.iter().map(|q| q[dim]));
        match lu.solve(&rhs) {
            Some(x) if x.iter().all(|v| v.is_finite()) => {
                for (c, v) in ctrl.iter_mut().zip(x.iter()) {
                    c[dim] = *v;
                }
            }
            _ => return Ok((polyline(points, &params)?, params)),
        }
    }
    let curve = BSplineCurve {
        control_points: ctrl,
        ..shell
    };
    Ok((curve, params))
}

/// Interpolating spline through one sorted segment.
pub fn fit_bspline(poly: &SortedPolyline, segment: usize) -> Result<BSplineCurve> {
    interpolate(&poly.segment_points(segment)).map(|(c, _)| c)
}

/// `n` points at uniform parameter steps, both ends included.
pub fn sample_curve(curve: &BSplineCurve, n: usize) -> Result<PointCloud> {
    if n < 2 {
        return Err(Error::ContractViolation(format!("need at least 2 samples, got {n}")));
    }
    let (a, b) = curve.domain();
    Ok((0..n)
        .map(|i| {
            let u = if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            };
            curve.evaluate(u)
        })
        .collect())
}

/// Second downsampling pass on a merged cloud.
pub fn refine_merged(cloud: &PointCloud, params: &ReconParams) -> Result<PointCloud> {
    let down = voxel_downsample(cloud, params.d_m, &params.voxel_origin())?;
    Ok(merge_close_points(&down, params.t_p))
}
