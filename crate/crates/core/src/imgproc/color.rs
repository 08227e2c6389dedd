/// sRGB (0–255 per channel) to CIELAB under D65.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    fn linear(c: f64) -> f64 {
        let c = (c / 255.0).clamp(0.0, 1.0);
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    }
    fn f(t: f64) -> f64 {
        const D: f64 = 6.0 / 29.0;
        if t > D * D * D {
            t.cbrt()
        } else {
            t / (3.0 * D * D) + 4.0 / 29.0
        }
    }
    let [r, g, b] = rgb.map(linear);
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    let (fx, fy, fz) = (f(x / 0.95047), f(y), f(z / 1.08883));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_colors() {
        let white = srgb_to_lab([255.0; 3]);
        assert!((white[0] - 100.0).abs() < 1e-3 && white[1].abs() < 1e-2 && white[2].abs() < 1e-2);
        let black = srgb_to_lab([0.0; 3]);
        assert!(black.iter().all(|v| v.abs() < 1e-9));
        // pure sRGB blue is L* 32.30, a* 79.19, b* -107.86
        let blue = srgb_to_lab([0.0, 0.0, 255.0]);
        assert!((blue[0] - 32.30).abs() < 0.05);
        assert!((blue[1] - 79.19).abs() < 0.1);
        assert!((blue[2] + 107.86).abs() < 0.1);
    }
}
