use super::grid::ImageGrid;
use crate::error::{Error, Result};

/// Smooths a cable mask and strips its one-pixel contour.
///
/// A 3×3 box blur (zero outside the image) is re-thresholded at 0.5, then the
/// result is eroded with a 3×3 cross. The color image only has to match the
/// mask's size.
pub fn blur_and_clean(mask: &ImageGrid, color: &ImageGrid) -> Result<ImageGrid> {
    if !mask.same_size(color) {
        return Err(Error::Dimension(format!(
            "mask is {}x{}, color image is {}x{}",
            mask.width(),
            mask.height(),
            color.width(),
            color.height()
        )));
    }
    if mask.channels() != 1 {
        return Err(Error::Dimension("mask must have one channel".into()));
    }
    let (w, h) = (mask.width(), mask.height());

    let mut blurred = ImageGrid::new(w, h, 1);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let mut on = 0u32;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    if mask.is_on(r + dr, c + dc) {
                        on += 1;
                    }
                }
            }
            if on as f32 / 9.0 > 0.5 {
                blurred.set(r as usize, c as usize, 0, 1.0);
            }
        }
    }

    let mut out = ImageGrid::new(w, h, 1);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let keep = blurred.is_on(r, c)
                && blurred.is_on(r - 1, c)
                && blurred.is_on(r + 1, c)
                && blurred.is_on(r, c - 1)
                && blurred.is_on(r, c + 1);
            if keep {
                out.set(r as usize, c as usize, 0, 1.0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize, size: usize, at: usize) -> ImageGrid {
        let mut m = ImageGrid::new(n, n, 1);
        for r in at..at + size {
            for c in at..at + size {
                m.set(r, c, 0, 1.0);
            }
        }
        m
    }

    #[test]
    fn empty_mask_stays_empty() {
        let m = ImageGrid::new(12, 9, 1);
        let c = ImageGrid::new(12, 9, 3);
        assert_eq!(blur_and_clean(&m, &c).unwrap().count_foreground(), 0);
    }

    #[test]
    fn square_loses_its_border() {
        let m = square(20, 10, 5);
        let c = ImageGrid::new(20, 20, 3);
        let out = blur_and_clean(&m, &c).unwrap();
        assert_eq!(out, square(20, 8, 6));
    }

    #[test]
    fn speck_is_removed() {
        let mut m = ImageGrid::new(7, 7, 1);
        m.set(3, 3, 0, 1.0);
        // blur leaves 1/9 < 0.5 at the speck and nothing around it
        let out = blur_and_clean(&m, &ImageGrid::new(7, 7, 3)).unwrap();
        assert_eq!(out.count_foreground(), 0);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let err = blur_and_clean(&ImageGrid::new(4, 4, 1), &ImageGrid::new(5, 4, 3)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }
}
