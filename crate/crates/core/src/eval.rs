//! Registration and curve accuracy metrics.

use rstar::primitives::GeomWithData;
use rstar::RTree;
use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::cloudproc::PointCloud;
use crate::error::{Error, Result};
use crate::fitting::BSplineCurve;
use crate::geom::{Rotation3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    /// Maps source points onto the target: `p ↦ R·p + t`.
    pub rotation: Rotation3,
    pub translation: Vec3,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// RMSE before the first update, then after each iteration.
    pub history: Vec<f64>,
}

impl RegistrationResult {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation.apply(p) + self.translation
    }
}

fn as_array(p: &Vec3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

type Indexed = GeomWithData<[f64; 3], usize>;

fn index(pts: impl Iterator<Item = [f64; 3]>) -> RTree<Indexed> {
    RTree::bulk_load(pts.enumerate().map(|(i, p)| Indexed::new(p, i)).collect())
}

/// Index of the nearest indexed point, with its squared distance.
fn nearest(tree: &RTree<Indexed>, p: &Vec3) -> (usize, f64) {
    let q = as_array(p);
    let nn = tree.nearest_neighbor(&q).expect("nonempty tree");
    let g = nn.geom();
    let d2 = (g[0] - q[0]).powi(2) + (g[1] - q[1]).powi(2) + (g[2] - q[2]).powi(2);
    (nn.data, d2)
}

/// Nearest target index and squared distance for every source point.
fn correspondences(tree: &RTree<Indexed>, pts: &[Vec3]) -> Vec<(usize, f64)> {
    pts.par_iter().map(|p| nearest(tree, p)).collect()
}

fn rmse_of(pairs: &[(usize, f64)]) -> f64 {
    (pairs.iter().map(|(_, d)| d).sum::<f64>() / pairs.len() as f64).sqrt()
}

/// Least-squares rigid transform taking `src[k]` to `dst[k]`, with the
/// reflection case folded back to a proper rotation.
pub fn best_rigid_transform(src: &[Vec3], dst: &[Vec3]) -> (Matrix3<f64>, Vec3) {
    let n = src.len() as f64;
    let cs = src.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let cd = dst.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let mut h = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s - cs) * (d - cd).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut r = v_t.transpose() * u.transpose();
    if r.determinant() < 0.0 {
        let mut fix = Matrix3::identity();
        fix[(2, 2)] = -1.0;
        r = v_t.transpose() * fix * u.transpose();
    }
    (r, cd - r * cs)
}

/// Point-to-point ICP from `source` onto `target`.
///
/// Stops when the RMSE improves by less than `tol` or after `max_iters`.
pub fn icp(source: &PointCloud, target: &PointCloud, max_iters: usize, tol: f64) -> Result<RegistrationResult> {
    if source.len() < 3 || target.len() < 3 {
        return Err(Error::ContractViolation("ICP needs at least three points per cloud".into()));
    }
    let centroid = source.centroid().expect("nonempty");
    let spread = source.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
    if !(spread > 1e-12) {
        return Err(Error::DegenerateInput("all source points coincide".into()));
    }
    let tree = index(target.iter().map(as_array));
    let tpts = target.points();

    let mut current: Vec<Vec3> = source.points().to_vec();
    let mut rot = Matrix3::identity();
    let mut trans = Vec3::zeros();
    let mut pairs = correspondences(&tree, &current);
    let mut history = vec![rmse_of(&pairs)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let dst: Vec<Vec3> = pairs.iter().map(|(i, _)| tpts[*i]).collect();
        let (r, t) = best_rigid_transform(&current, &dst);
        for p in current.iter_mut() {
            *p = r * *p + t;
        }
        rot = r * rot;
        trans = r * trans + t;
        pairs = correspondences(&tree, &current);
        let rmse = rmse_of(&pairs);
        let prev = *history.last().unwrap();
        history.push(rmse);
        if (prev - rmse).abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(RegistrationResult {
        rotation: Rotation3::from_matrix_unchecked(rot),
        translation: trans,
        rmse: *history.last().unwrap(),
        iterations,
        converged,
        history,
    })
}

const DENSE_SAMPLES: usize = 4000;

/// Closest-point distance from `n` uniform samples of `curve` to `truth`:
/// `(mean, max)`.
///
/// Each distance is found by a dense parameter search on `truth`, refined by
/// golden-section search between the neighbouring samples.
pub fn curve_error(curve: &BSplineCurve, truth: &BSplineCurve, n: usize) -> Result<(f64, f64)> {
    if n < 10 {
        return Err(Error::ContractViolation(format!("need at least 10 samples, got {n}")));
    }
    let (ta, tb) = truth.domain();
    let param = |k: usize| ta + (tb - ta) * k as f64 / DENSE_SAMPLES as f64;
    let tree = index((0..=DENSE_SAMPLES).map(|k| as_array(&truth.evaluate(param(k)))));
    let (ca, cb) = curve.domain();
    let dists: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = curve.evaluate(ca + (cb - ca) * i as f64 / (n - 1) as f64);
            let (k, _) = nearest(&tree, &p);
            let lo = param(k.saturating_sub(1));
            let hi = param((k + 1).min(DENSE_SAMPLES));
            golden_min(|u| (truth.evaluate(u) - p).norm(), lo, hi)
        })
        .collect();
    let mean = dists.iter().sum::<f64>() / n as f64;
    let max = dists.iter().copied().fold(0.0, f64::max);
    Ok((mean, max))
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(a)).min(f(b))
}
