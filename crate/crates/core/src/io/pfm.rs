use std::path::Path;

use super::{read_file, write_atomic};
use crate::error::{Error, Result};
use crate::image::DepthMap;

/// Greyscale PFM, little-endian, rows stored bottom-to-top as the format
/// prescribes. Depths are narrowed to float32.
pub fn encode_pfm(depth: &DepthMap) -> Result<Vec<u8>> {
    let (w, h) = depth.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for v in (0..h).rev() {
        for u in 0..w {
            let d = depth.get(u, v);
            let f = d as f32;
            if d > 0.0 && !(f.is_finite() && f > 0.0) {
                return Err(Error::invalid(format!(
                    "depth {d} at pixel ({u}, {v}) is not representable as float32"
                )));
            }
            out.extend_from_slice(&f.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn save_depth(depth: &DepthMap, path: &Path) -> Result<()> {
    write_atomic(path, &encode_pfm(depth)?)
}

pub fn load_depth(path: &Path) -> Result<DepthMap> {
    decode_pfm(&read_file(path)?)
}

fn parse_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        format: "PFM",
        offset,
        reason: reason.into(),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    /// Next whitespace-delimited token and its starting offset.
    fn token(&mut self, what: &str) -> Result<(usize, &'a str)> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, format!("unexpected end of header, expected {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| parse_err(start, format!("non-ASCII {what}")))?;
        Ok((start, text))
    }

    fn dimension(&mut self, what: &str) -> Result<usize> {
        let (at, text) = self.token(what)?;
        match text.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(parse_err(at, format!("invalid {what} {text:?}"))),
        }
    }
}

/// Parses a single-channel PFM. A positive scale means big-endian samples.
pub fn decode_pfm(bytes: &[u8]) -> Result<DepthMap> {
    let mut header = Header { bytes, pos: 0 };
    let (at, magic) = header.token("magic")?;
    match magic {
        "Pf" => {}
        "PF" => {
            return Err(parse_err(
                at,
                "three-channel PFM (PF); depth maps must be single-channel (Pf)",
            ));
        }
        other => return Err(parse_err(at, format!("bad magic {other:?}, expected \"Pf\""))),
    }
    let width = header.dimension("width")?;
    let height = header.dimension("height")?;
    let (at, scale_text) = header.token("scale")?;
    let scale: f32 = scale_text
        .parse()
        .ok()
        .filter(|s: &f32| s.is_finite() && *s != 0.0)
        .ok_or_else(|| parse_err(at, format!("invalid scale {scale_text:?}")))?;
    let big_endian = scale > 0.0;
    // exactly one whitespace byte separates the header from the samples
    if header.pos >= bytes.len() {
        return Err(parse_err(header.pos, "missing newline after scale"));
    }
    let data_start = header.pos + 1;

    let count = width
        .checked_mul(height)
        .filter(|n| n.checked_mul(4).is_some())
        .ok_or_else(|| parse_err(0, "image dimensions overflow"))?;
    let available = bytes.len() - data_start;
    if available < count * 4 {
        let offset = data_start + available - available % 4;
        return Err(parse_err(
            offset,
            format!(
                "truncated: {width}x{height} needs {} sample bytes, found {available}",
                count * 4
            ),
        ));
    }

    let mut values = vec![0.0f64; count];
    for (i, chunk) in bytes[data_start..data_start + count * 4].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let f = if big_endian {
            f32::from_be_bytes(raw)
        } else {
            f32::from_le_bytes(raw)
        };
        if !(f == 0.0 || (f.is_finite() && f > 0.0)) {
            return Err(parse_err(
                data_start + 4 * i,
                format!("depth sample {f} is neither 0 nor positive"),
            ));
        }
        let (row_from_bottom, u) = (i / width, i % width);
        values[(height - 1 - row_from_bottom) * width + u] = f as f64;
    }
    DepthMap::from_vec(width, height, values)
}
