//! Density clustering of foreground pixels by position and color.
//!
//! Each pixel becomes a feature `(s·row, s·col, L*, a*, b*)`. Core distances
//! are taken to the k-th nearest other pixel, edges are weighted by mutual
//! reachability, and the minimum spanning tree is cut at a fixed length.
//! Components below the minimum size are reported as noise.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::color::srgb_to_lab;
use super::grid::{ImageGrid, Pixel};
use crate::error::{Error, Result};
use crate::params::ClusterParams;

pub type Feature = [f64; 5];

#[derive(Debug, Clone, PartialEq)]
pub struct PixelCluster {
    pub pixels: Vec<Pixel>,
    /// Mean sRGB color, 0–255.
    pub mean_rgb: [f64; 3],
    pub mean_lab: [f64; 3],
}

impl PixelCluster {
    /// Mean `(row, col)`.
    pub fn centroid(&self) -> (f64, f64) {
        let n = self.pixels.len() as f64;
        let (sr, sc) = self
            .pixels
            .iter()
            .fold((0.0, 0.0), |(a, b), (r, c)| (a + *r as f64, b + *c as f64));
        (sr / n, sc / n)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PixelClusterSet {
    /// Ordered by mean CIELAB color, then centroid.
    pub clusters: Vec<PixelCluster>,
    pub noise: Vec<Pixel>,
}

pub fn pixel_features(pixels: &[Pixel], color: &ImageGrid, spatial_weight: f64) -> Vec<Feature> {
    pixels
        .iter()
        .map(|&(r, c)| {
            let [l, a, b] = srgb_to_lab(color.rgb(r, c).map(f64::from));
            [
                spatial_weight * r as f64,
                spatial_weight * c as f64,
                l,
                a,
                b,
            ]
        })
        .collect()
}

#[inline]
fn dist(a: &Feature, b: &Feature) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distance to the `k`-th nearest other feature. With fewer than `k` others
/// the farthest one is used; a lone feature has core distance 0.
pub fn core_distances(features: &[Feature], k: usize) -> Vec<f64> {
    let n = features.len();
    if n <= 1 {
        return vec![0.0; n];
    }
    let k = k.clamp(1, n - 1);
    features
        .par_iter()
        .enumerate()
        .map(|(i, fi)| {
            let mut d: Vec<f64> = features
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, fj)| dist(fi, fj))
                .collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
            *kth
        })
        .collect()
}

/// Cluster label per feature (`None` = noise), labels in first-seen order.
pub fn mst_cut_labels(
    features: &[Feature],
    k: usize,
    cut_distance: f64,
    min_cluster_size: usize,
) -> Vec<Option<usize>> {
    let n = features.len();
    if n == 0 {
        return Vec::new();
    }
    let core = core_distances(features, k);
    let mreach = |i: usize, j: usize| dist(&features[i], &features[j]).max(core[i]).max(core[j]);

    // Prim on the complete mutual-reachability graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if !in_tree[j] {
                let w = mreach(current, j);
                if w < best[j] {
                    best[j] = w;
                    parent[j] = current;
                }
            }
        }
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, best[next]));
        current = next;
    }

    let mut uf = UnionFind::new(n);
    for (a, b, w) in edges {
        if w <= cut_distance {
            uf.union(a, b);
        }
    }
    let mut sizes = vec![0usize; n];
    for i in 0..n {
        sizes[uf.find(i)] += 1;
    }
    let mut label_of_root = vec![None; n];
    let mut next_label = 0;
    (0..n)
        .map(|i| {
            let root = uf.find(i);
            if sizes[root] < min_cluster_size {
                return None;
            }
            Some(*label_of_root[root].get_or_insert_with(|| {
                next_label += 1;
                next_label - 1
            }))
        })
        .collect()
}

/// Splits the foreground of `mask` into clusters of similar color.
pub fn cluster_pixels(
    mask: &ImageGrid,
    color: &ImageGrid,
    params: &ClusterParams,
) -> Result<PixelClusterSet> {
    if !mask.same_size(color) || color.channels() != 3 {
        return Err(Error::Dimension("mask and color image must match".into()));
    }
    let pixels = mask.foreground();
    if pixels.is_empty() {
        return Err(Error::EmptyInput("mask has no foreground pixels".into()));
    }
    let features = pixel_features(&pixels, color, params.spatial_weight);
    let labels = mst_cut_labels(
        &features,
        params.min_cluster_size,
        params.cut_distance,
        params.min_cluster_size,
    );

    let n_labels = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
    let mut noise = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        match label {
            Some(l) => members[*l].push(i),
            None => noise.push(pixels[i]),
        }
    }

    let mut clusters: Vec<PixelCluster> = members
        .into_iter()
        .map(|idx| {
            let n = idx.len() as f64;
            let mut rgb = [0.0; 3];
            for &i in &idx {
                let (r, c) = pixels[i];
                for (acc, v) in rgb.iter_mut().zip(color.rgb(r, c)) {
                    *acc += v as f64;
                }
            }
            let mean_rgb = rgb.map(|v| v / n);
            PixelCluster {
                pixels: idx.iter().map(|&i| pixels[i]).collect(),
                mean_rgb,
                mean_lab: srgb_to_lab(mean_rgb),
            }
        })
        .collect();

    clusters.sort_by(|a, b| {
        let by_color = a
            .mean_lab
            .iter()
            .zip(&b.mean_lab)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
        by_color.then_with(|| {
            let (ar, ac) = a.centroid();
            let (br, bc) = b.centroid();
            ar.total_cmp(&br).then(ac.total_cmp(&bc))
        })
    });
    Ok(PixelClusterSet { clusters, noise })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paint(mask: &ImageGrid, rgb: [f32; 3]) -> ImageGrid {
        let mut c = ImageGrid::new(mask.width(), mask.height(), 3);
        for (r, col) in mask.foreground() {
            for ch in 0..3 {
                c.set(r, col, ch, rgb[ch]);
            }
        }
        c
    }

    #[test]
    fn contiguous_uniform_strip_is_one_cluster() {
        let mut m = ImageGrid::new(60, 10, 1);
        for r in 3..7 {
            for c in 5..55 {
                m.set(r, c, 0, 1.0);
            }
        }
        let color = paint(&m, [20.0, 20.0, 20.0]);
        let set = cluster_pixels(&m, &color, &ClusterParams::default()).unwrap();
        assert_eq!(set.clusters.len(), 1);
        assert!(set.noise.is_empty());
    }

    #[test]
    fn black_and_blue_strips_separate() {
        let mut m = ImageGrid::new(80, 40, 1);
        let mut color = ImageGrid::new(80, 40, 3);
        for c in 5..75 {
            for r in 5..9 {
                m.set(r, c, 0, 1.0);
                for (ch, v) in [20.0, 20.0, 20.0].into_iter().enumerate() {
                    color.set(r, c, ch, v);
                }
            }
            for r in 30..34 {
                m.set(r, c, 0, 1.0);
                for (ch, v) in [25.0, 60.0, 220.0].into_iter().enumerate() {
                    color.set(r, c, ch, v);
                }
            }
        }
        let set = cluster_pixels(&m, &color, &ClusterParams::default()).unwrap();
        assert_eq!(set.clusters.len(), 2);
        // darker cluster first
        assert!(set.clusters[0].mean_lab[0] < set.clusters[1].mean_lab[0]);
        assert!(set.clusters[0].pixels.iter().all(|(r, _)| *r < 10));
    }

    #[test]
    fn isolated_pixels_are_noise() {
        // three pixels: every component is below the size threshold
        let m = ImageGrid::mask_from_pixels(30, 30, &[(2, 3), (15, 20), (27, 5)]);
        let color = paint(&m, [0.0, 0.0, 0.0]);
        let params = ClusterParams {
            min_cluster_size: 10,
            ..ClusterParams::default()
        };
        let set = cluster_pixels(&m, &color, &params).unwrap();
        assert!(set.clusters.is_empty());
        assert_eq!(set.noise.len(), 3);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let m = ImageGrid::new(4, 4, 1);
        let err = cluster_pixels(&m, &ImageGrid::new(4, 4, 3), &ClusterParams::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)));
    }

    #[test]
    fn core_distance_of_small_sets() {
        let f = vec![[0.0; 5], [3.0, 4.0, 0.0, 0.0, 0.0]];
        assert_eq!(core_distances(&f, 10), vec![5.0, 5.0]);
        assert_eq!(core_distances(&f[..1], 3), vec![0.0]);
    }
}
