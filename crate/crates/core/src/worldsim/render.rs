//! Ray-cast rendering of cable masks, color and depth.
//!
//! A pixel ray is intersected with the plane holding the cable centerlines;
//! if the in-plane distance `ρ` to a centerline is below the radius, the ray
//! is taken to hit the cable top at height `r + √(r² − ρ²)`. Occluders are
//! tested exactly with a slab test.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::WorldScene;
use crate::error::{Error, Result};
use crate::imgproc::ImageGrid;

pub const SHELF_RGB: [f32; 3] = [196.0, 178.0, 150.0];
pub const OCCLUDER_RGB: [f32; 3] = [120.0, 120.0, 124.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub occluders: bool,
    pub noise: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            occluders: true,
            noise: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    /// Union of the visible cable pixels.
    pub cable_mask: ImageGrid,
    /// Visible pixels per cable, in scene order.
    pub cable_masks: Vec<ImageGrid>,
    pub color: ImageGrid,
    /// Depth along the optical axis, 0 where nothing is hit.
    pub depth: ImageGrid,
    pub shelf_mask: ImageGrid,
}

#[derive(Clone, Copy)]
enum Hit {
    Nothing,
    Shelf(f64),
    Cable(usize, f64),
    Occluder(f64),
}

pub fn render(scene: &WorldScene) -> Result<RenderOutput> {
    render_with(scene, RenderOptions::default())
}

pub fn render_with(scene: &WorldScene, opts: RenderOptions) -> Result<RenderOutput> {
    let cam = &scene.camera;
    let plane = &scene.support_plane;
    let o = cam.position();
    let height = plane.signed_distance(&o);
    let axis = cam.pose.rotation.z_axis();
    if height <= 0.0 || axis.dot(&plane.normal) >= 0.0 {
        return Err(Error::InvalidView(
            "camera must be above the support plane and face it".into(),
        ));
    }
    let (w, h) = (cam.width, cam.height);
    let hits: Vec<Hit> = (0..h)
        .into_par_iter()
        .flat_map_iter(|row| (0..w).map(move |col| (row, col)))
        .map(|(row, col)| {
            let d = cam.ray(row as f64, col as f64);
            let denom = plane.normal.dot(&d);
            if denom >= 0.0 {
                return Hit::Nothing;
            }
            // ray parameter at which the ray is `lift` above the plane
            let t_at = |lift: f64| (lift - height) / denom;
            let mut hit = Hit::Shelf(t_at(0.0));
            let mut best_t = t_at(0.0);
            for (k, cable) in scene.cables.iter().enumerate() {
                let x = o + d * t_at(cable.radius);
                if let Some(top) = cable.surface_height(plane, &x) {
                    let t = t_at(top);
                    if t < best_t {
                        best_t = t;
                        hit = Hit::Cable(k, t);
                    }
                }
            }
            if opts.occluders {
                for b in &scene.occluders {
                    if let Some(t) = b.ray_entry(&o, &d) {
                        if t < best_t {
                            best_t = t;
                            hit = Hit::Occluder(t);
                        }
                    }
                }
            }
            hit
        })
        .collect();

    let mut cable_mask = ImageGrid::new(w, h, 1);
    let mut cable_masks = vec![ImageGrid::new(w, h, 1); scene.cables.len()];
    let mut color = ImageGrid::new(w, h, 3);
    let mut depth = ImageGrid::new(w, h, 1);
    let mut shelf_mask = ImageGrid::new(w, h, 1);
    for (i, hit) in hits.iter().enumerate() {
        let (row, col) = (i / w, i % w);
        let (t, rgb) = match *hit {
            Hit::Nothing => continue,
            Hit::Shelf(t) => {
                shelf_mask.set(row, col, 0, 1.0);
                (t, SHELF_RGB)
            }
            Hit::Cable(k, t) => {
                cable_mask.set(row, col, 0, 1.0);
                cable_masks[k].set(row, col, 0, 1.0);
                (t, scene.cables[k].color.map(f32::from))
            }
            Hit::Occluder(t) => (t, OCCLUDER_RGB),
        };
        depth.set(row, col, 0, t as f32);
        for (ch, v) in rgb.into_iter().enumerate() {
            color.set(row, col, ch, v);
        }
    }

    if opts.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed ^ 0x5eed_0fd3);
        let spec = scene.render;
        let dn = Normal::new(0.0, spec.depth_noise.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
        let cn = Normal::new(0.0, spec.color_noise.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
        for row in 0..h {
            for col in 0..w {
                if let Hit::Nothing = hits[row * w + col] {
                    continue;
                }
                let z = depth.get(row, col, 0) as f64 + dn.sample(&mut rng);
                depth.set(row, col, 0, z.max(0.0) as f32);
                for ch in 0..3 {
                    let v = color.get(row, col, ch) as f64 + cn.sample(&mut rng);
                    color.set(row, col, ch, v.clamp(0.0, 255.0) as f32);
                }
            }
        }
    }

    Ok(RenderOutput {
        cable_mask,
        cable_masks,
        color,
        depth,
        shelf_mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::worldsim::{Aabb, BoxSpec, CableSpec, CameraSpec, PlaneSpec, RenderSpec, Scenario, TactilePad};

    fn scenario(cables: Vec<CableSpec>, occluders: Vec<BoxSpec>) -> Scenario {
        Scenario {
            schema_version: 1,
            name: "render".into(),
            seed: 3,
            plane: PlaneSpec {
                point: [0.0; 3],
                normal: Some([0.0, 0.0, 1.0]),
                tilt_deg: None,
            },
            camera: CameraSpec::looking_down(0.6),
            render: RenderSpec::default(),
            tactile: TactilePad::default(),
            params: None,
            cables,
            occluders,
        }
    }

    fn straight() -> CableSpec {
        CableSpec {
            radius: 0.003,
            color: [20, 20, 20],
            degree: 1,
            knots: None,
            control_points: vec![[-0.15, 0.0], [0.15, 0.0]],
        }
    }

    fn center_box() -> BoxSpec {
        BoxSpec {
            min: [-0.03, -0.03, 0.02],
            max: [0.03, 0.03, 0.05],
        }
    }

    #[test]
    fn empty_scene_is_all_shelf() {
        let out = render(&scenario(vec![], vec![]).build().unwrap()).unwrap();
        assert_eq!(out.cable_mask.count_foreground(), 0);
        assert_eq!(out.shelf_mask.count_foreground(), 640 * 480);
    }

    #[test]
    fn straight_cable_width_and_depth() {
        let out = render_with(&scenario(vec![straight()], vec![]).build().unwrap(), RenderOptions {
            occluders: true,
            noise: false,
        })
        .unwrap();
        // 6 mm wide at ~1 mm per pixel
        let col = 320;
        let rows: Vec<usize> = (0..480).filter(|&r| out.cable_mask.is_on(r as isize, col)).collect();
        assert!((5..=7).contains(&rows.len()), "{rows:?}");
        let crest = out.depth.get(240, 320, 0) as f64;
        assert!((crest - 0.594).abs() < 5e-4);
        assert_eq!(out.cable_masks[0], out.cable_mask);
    }

    #[test]
    fn occluder_cuts_a_hole_where_it_projects() {
        let s = scenario(vec![straight()], vec![center_box()]);
        let scene = s.build().unwrap();
        let opts = RenderOptions {
            occluders: true,
            noise: false,
        };
        let with = render_with(&scene, opts).unwrap();
        let without = render_with(&scene, RenderOptions { occluders: false, ..opts }).unwrap();
        assert_eq!(scenario(vec![straight()], vec![]).build().map(|s| render_with(&s, opts).unwrap().cable_mask).unwrap(), without.cable_mask);
        let b = Aabb {
            min: Vec3::new(-0.03, -0.03, 0.02),
            max: Vec3::new(0.03, 0.03, 0.05),
        };
        let o = scene.camera.position();
        for (r, c) in without.cable_mask.foreground() {
            let blocked = b.ray_entry(&o, &scene.camera.ray(r as f64, c as f64)).is_some();
            assert_eq!(with.cable_mask.is_on(r as isize, c as isize), !blocked);
        }
        assert!(with.cable_mask.count_foreground() < without.cable_mask.count_foreground());
    }

    #[test]
    fn camera_below_plane_is_invalid() {
        let mut s = scenario(vec![], vec![]);
        s.camera.position = [0.0, 0.0, -0.6];
        assert!(matches!(render(&s.build().unwrap()), Err(Error::InvalidView(_))));
    }

    #[test]
    fn noise_is_seeded() {
        let scene = scenario(vec![straight()], vec![]).build().unwrap();
        assert_eq!(render(&scene).unwrap(), render(&scene).unwrap());
    }
}
