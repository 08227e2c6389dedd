//! Raster file formats.
//!
//! * masks: binary PGM (`P5`, maxval 255), 0 = background, 255 = foreground
//! * color: binary PPM (`P6`, maxval 255)
//! * depth: 8-byte magic `DLODEPTH`, width and height as little-endian `u32`,
//!   then `width * height` little-endian `f32` meters, row-major

use std::io::{Read, Write};

use super::grid::ImageGrid;
use crate::error::{Error, Result};

pub const DEPTH_MAGIC: &[u8; 8] = b"DLODEPTH";

fn fmt_err(format: &'static str, msg: impl Into<String>) -> Error {
    Error::Format {
        format,
        msg: msg.into(),
    }
}

pub fn write_pgm<W: Write>(mask: &ImageGrid, mut w: W) -> Result<()> {
    if mask.channels() != 1 {
        return Err(Error::Dimension("PGM needs a single-channel grid".into()));
    }
    write!(w, "P5\n{} {}\n255\n", mask.width(), mask.height())?;
    let bytes: Vec<u8> = mask
        .data()
        .iter()
        .map(|v| if *v > 0.5 { 255 } else { 0 })
        .collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn write_ppm<W: Write>(color: &ImageGrid, mut w: W) -> Result<()> {
    if color.channels() != 3 {
        return Err(Error::Dimension("PPM needs a three-channel grid".into()));
    }
    write!(w, "P6\n{} {}\n255\n", color.width(), color.height())?;
    let bytes: Vec<u8> = color
        .data()
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    w.write_all(&bytes)?;
    Ok(())
}

/// Reads a PGM as a binary mask (any nonzero sample is foreground).
pub fn read_pgm<R: Read>(r: R) -> Result<ImageGrid> {
    let (w, h, bytes) = read_netpbm(r, b"P5", 1, "PGM")?;
    let data = bytes.iter().map(|b| if *b > 0 { 1.0 } else { 0.0 }).collect();
    ImageGrid::from_data(w, h, 1, data)
}

pub fn read_ppm<R: Read>(r: R) -> Result<ImageGrid> {
    let (w, h, bytes) = read_netpbm(r, b"P6", 3, "PPM")?;
    ImageGrid::from_data(w, h, 3, bytes.iter().map(|b| *b as f32).collect())
}

fn read_netpbm<R: Read>(
    mut r: R,
    magic: &[u8; 2],
    channels: usize,
    format: &'static str,
) -> Result<(usize, usize, Vec<u8>)> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 2 || &buf[..2] != magic {
        return Err(fmt_err(format, "bad magic number"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match buf.get(pos) {
                Some(b'#') => {
                    while pos < buf.len() && buf[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(fmt_err(format, "truncated header")),
            }
        }
        let start = pos;
        while pos < buf.len() && buf[pos].is_ascii_digit() {
            pos += 1;
        }
        *field = std::str::from_utf8(&buf[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fmt_err(format, "bad header field"))?;
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(fmt_err(format, format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte before the raster
    pos += 1;
    let n = w * h * channels;
    if buf.len() < pos + n {
        return Err(fmt_err(format, "truncated raster"));
    }
    Ok((w, h, buf[pos..pos + n].to_vec()))
}

pub fn write_depth<W: Write>(depth: &ImageGrid, mut w: W) -> Result<()> {
    if depth.channels() != 1 {
        return Err(Error::Dimension("depth needs a single-channel grid".into()));
    }
    w.write_all(DEPTH_MAGIC)?;
    w.write_all(&(depth.width() as u32).to_le_bytes())?;
    w.write_all(&(depth.height() as u32).to_le_bytes())?;
    let mut bytes = Vec::with_capacity(depth.data().len() * 4);
    for v in depth.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_depth<R: Read>(mut r: R) -> Result<ImageGrid> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| fmt_err("depth", "truncated header"))?;
    if &header[..8] != DEPTH_MAGIC {
        return Err(fmt_err("depth", "bad magic number"));
    }
    let w = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != w * h * 4 {
        return Err(fmt_err("depth", "raster size does not match header"));
    }
    let data: Vec<f32> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if data.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(fmt_err("depth", "negative or non-finite depth"));
    }
    ImageGrid::from_data(w, h, 1, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_and_comments() {
        let m = ImageGrid::mask_from_ascii(&["#.#", ".#."]);
        let mut buf = Vec::new();
        write_pgm(&m, &mut buf).unwrap();
        assert_eq!(&buf[..11], b"P5\n3 2\n255\n");
        assert_eq!(read_pgm(&buf[..]).unwrap(), m);

        let commented = b"P5\n# made by hand\n2 1\n255\n\x00\xff";
        let m2 = read_pgm(&commented[..]).unwrap();
        assert_eq!(m2.foreground(), vec![(0, 1)]);
    }

    #[test]
    fn ppm_round_trip() {
        let c = ImageGrid::from_data(2, 1, 3, vec![0.0, 10.0, 255.0, 1.0, 2.0, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_ppm(&c, &mut buf).unwrap();
        assert_eq!(read_ppm(&buf[..]).unwrap(), c);
    }

    #[test]
    fn depth_header_is_sixteen_bytes() {
        let d = ImageGrid::from_data(2, 2, 1, vec![0.0, 0.5, 1.25, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_depth(&d, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16);
        assert_eq!(&buf[..8], DEPTH_MAGIC);
        assert_eq!(read_depth(&buf[..]).unwrap(), d);
        buf[0] = b'X';
        assert!(read_depth(&buf[..]).is_err());
    }
}
