use std::collections::BTreeMap;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Integer voxel of `p` for cubes of edge `size` anchored at `origin`.
pub fn voxel_index(p: &Vec3, size: f64, origin: &Vec3) -> [i64; 3] {
    let q = (p - origin) / size;
    [q.x.floor() as i64, q.y.floor() as i64, q.z.floor() as i64]
}

/// Replaces the points of every occupied voxel by their centroid.
///
/// Output is ordered by voxel index, so it does not depend on input order
/// beyond floating-point summation.
pub fn voxel_downsample(cloud: &PointCloud, size: f64, origin: &Vec3) -> Result<PointCloud> {
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::ContractViolation(format!("voxel size must be positive, got {size}")));
    }
    let mut cells: BTreeMap<[i64; 3], (Vec3, usize)> = BTreeMap::new();
    for p in cloud.iter() {
        let e = cells.entry(voxel_index(p, size, origin)).or_insert((Vec3::zeros(), 0));
        e.0 += p;
        e.1 += 1;
    }
    Ok(cells.into_values().map(|(s, n)| s / n as f64).collect())
}
