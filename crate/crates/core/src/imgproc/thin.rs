//! Zhang–Suen thinning.
//!
//! Each sub-iteration collects candidates against the frozen image, as in the
//! textbook algorithm, then re-checks every candidate against the current image
//! before removing it. Without the re-check a 2×2 block is erased in one pass;
//! with it, removing a pixel never disconnects its neighbours, so the number of
//! 8-connected components is preserved.

use super::grid::ImageGrid;

// P2..P9, clockwise from north.
const RING: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

fn ring(img: &ImageGrid, r: isize, c: isize) -> [bool; 8] {
    RING.map(|(dr, dc)| img.is_on(r + dr, c + dc))
}

fn deletable(n: &[bool; 8], first_pass: bool) -> bool {
    let b = n.iter().filter(|v| **v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let [p2, _, p4, _, p6, _, p8, _] = *n;
    if first_pass {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}

/// Thins a binary mask to a one-pixel-wide skeleton, iterating to convergence.
pub fn skeletonize(img: &ImageGrid) -> ImageGrid {
    let mut out = ImageGrid::new(img.width(), img.height(), 1);
    for (r, c) in img.foreground() {
        out.set(r, c, 0, 1.0);
    }
    loop {
        let mut changed = false;
        for first_pass in [true, false] {
            let candidates: Vec<(usize, usize)> = out
                .foreground()
                .into_iter()
                .filter(|&(r, c)| deletable(&ring(&out, r as isize, c as isize), first_pass))
                .collect();
            for (r, c) in candidates {
                if deletable(&ring(&out, r as isize, c as isize), first_pass) {
                    out.set(r, c, 0, 0.0);
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}
