use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use super::png::to_u8;
use super::{read_file, write_atomic};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

const PROPERTIES: &str = "property float x\nproperty float y\nproperty float z\n\
property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";

/// Serializes positions as float32 and colours as 8-bit (round half up).
pub fn encode_ply(cloud: &PointCloud, format: PlyFormat) -> Result<Vec<u8>> {
    cloud.validate()?;
    let name = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    let mut out = format!("ply\nformat {name} 1.0\nelement vertex {}\n{PROPERTIES}", cloud.len()).into_bytes();
    match format {
        PlyFormat::Ascii => {
            let mut line = String::new();
            for (p, c) in cloud.points.iter().zip(&cloud.colors) {
                line.clear();
                let _ = writeln!(
                    line,
                    "{} {} {} {} {} {}",
                    p.x as f32,
                    p.y as f32,
                    p.z as f32,
                    to_u8(c[0]),
                    to_u8(c[1]),
                    to_u8(c[2])
                );
                out.extend_from_slice(line.as_bytes());
            }
        }
        PlyFormat::BinaryLittleEndian => {
            out.reserve(cloud.len() * 15);
            for (p, c) in cloud.points.iter().zip(&cloud.colors) {
                for x in [p.x, p.y, p.z] {
                    out.extend_from_slice(&(x as f32).to_le_bytes());
                }
                out.extend(c.iter().map(|&v| to_u8(v)));
            }
        }
    }
    Ok(out)
}

pub fn save_ply(cloud: &PointCloud, path: &Path, format: PlyFormat) -> Result<()> {
    write_atomic(path, &encode_ply(cloud, format)?)
}

pub fn load_ply(path: &Path) -> Result<PointCloud> {
    decode_ply(&read_file(path)?)
}

fn parse_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        format: "PLY",
        offset,
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Self::F32 | Self::F64)
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Cursor over the body; ascii tokens or little-endian binary.
struct Body<'a> {
    bytes: &'a [u8],
    pos: usize,
    ascii: bool,
}

impl Body<'_> {
    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        if self.ascii {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let start = self.pos;
            while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(parse_err(start, "unexpected end of vertex data"));
            }
            let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("");
            // float32 values must round exactly as their binary encoding would
            let parsed = if ty == Scalar::F32 {
                text.parse::<f32>().ok().map(f64::from)
            } else {
                text.parse::<f64>().ok()
            };
            parsed
                .filter(|v| !ty.is_integer() || v.fract() == 0.0)
                .ok_or_else(|| parse_err(start, format!("invalid {ty:?} value {text:?}")))
        } else {
            let n = ty.size();
            if self.pos + n > self.bytes.len() {
                return Err(parse_err(self.pos, "unexpected end of vertex data"));
            }
            let v = ty.read_le(&self.bytes[self.pos..self.pos + n]);
            self.pos += n;
            Ok(v)
        }
    }
}

/// Reads ascii or binary-little-endian PLY. Vertex positions come from
/// `x y z`; colours from `red green blue` (uchar scaled by 1/255, float taken
/// as-is, white when absent). Other properties and elements are skipped.
pub fn decode_ply(bytes: &[u8]) -> Result<PointCloud> {
    let marker = b"end_header";
    let header_end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| parse_err(bytes.len(), "missing end_header"))?;
    let mut body_start = header_end + marker.len();
    if bytes.get(body_start) == Some(&b'\r') {
        body_start += 1;
    }
    if bytes.get(body_start) != Some(&b'\n') {
        return Err(parse_err(body_start, "end_header must end its line"));
    }
    body_start += 1;

    let header =
        std::str::from_utf8(&bytes[..header_end]).map_err(|e| parse_err(e.valid_up_to(), "non-UTF-8 header"))?;
    let mut offset = 0;
    let mut lines = header.split('\n').map(|l| {
        let at = offset;
        offset += l.len() + 1;
        (at, l.trim_end_matches('\r'))
    });
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(0, "missing \"ply\" magic")),
    }
    let mut ascii = None;
    let mut elements: Vec<Element> = Vec::new();
    for (at, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", kind, "1.0"] => {
                ascii = Some(match *kind {
                    "ascii" => true,
                    "binary_little_endian" => false,
                    other => return Err(parse_err(at, format!("unsupported PLY format {other}"))),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| parse_err(at, format!("invalid element count {count:?}")))?,
                properties: Vec::new(),
            }),
            ["property", "list", count, item, _] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(at, "property before any element"))?;
                let (Some(count), Some(item)) = (Scalar::parse(count), Scalar::parse(item)) else {
                    return Err(parse_err(at, format!("unknown list types in {line:?}")));
                };
                element.properties.push(Property::List { count, item });
            }
            ["property", ty, name] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(at, "property before any element"))?;
                let ty = Scalar::parse(ty).ok_or_else(|| parse_err(at, format!("unknown property type {ty:?}")))?;
                element.properties.push(Property::Scalar(name.to_string(), ty));
            }
            _ => return Err(parse_err(at, format!("unrecognised header line {line:?}"))),
        }
    }
    let ascii = ascii.ok_or_else(|| parse_err(0, "missing format line"))?;

    let mut body = Body {
        bytes,
        pos: body_start,
        ascii,
    };
    let mut cloud = PointCloud::default();
    let mut found_vertex = false;
    for element in &elements {
        let is_vertex = element.name == "vertex";
        let index = |name: &str| {
            element
                .properties
                .iter()
                .position(|p| matches!(p, Property::Scalar(n, _) if n == name))
        };
        let (xyz, rgb) = if is_vertex {
            found_vertex = true;
            let xyz = [index("x"), index("y"), index("z")];
            if xyz.iter().any(Option::is_none) {
                return Err(parse_err(0, "vertex element lacks x, y or z"));
            }
            (xyz.map(Option::unwrap), [index("red"), index("green"), index("blue")])
        } else {
            ([0; 3], [None; 3])
        };
        let color_scale = element.properties.iter().find_map(|p| match p {
            Property::Scalar(n, ty) if n == "red" => Some(if ty.is_integer() { 1.0 / 255.0 } else { 1.0 }),
            _ => None,
        });
        if is_vertex {
            cloud.points.reserve(element.count);
            cloud.colors.reserve(element.count);
        }
        let mut row = vec![0.0f64; element.properties.len()];
        for _ in 0..element.count {
            for (slot, prop) in row.iter_mut().zip(&element.properties) {
                match prop {
                    Property::Scalar(_, ty) => *slot = body.scalar(*ty)?,
                    Property::List { count, item } => {
                        let at = body.pos;
                        let n = body.scalar(*count)?;
                        if n < 0.0 {
                            return Err(parse_err(at, "negative list length"));
                        }
                        for _ in 0..n as usize {
                            body.scalar(*item)?;
                        }
                    }
                }
            }
            if is_vertex {
                cloud.points.push(Point3::new(row[xyz[0]], row[xyz[1]], row[xyz[2]]));
                let color = match (rgb, color_scale) {
                    ([Some(r), Some(g), Some(b)], Some(s)) => {
                        [(row[r] * s) as f32, (row[g] * s) as f32, (row[b] * s) as f32]
                    }
                    _ => [1.0; 3],
                };
                cloud.colors.push(color);
            }
        }
        if is_vertex {
            break;
        }
    }
    if !found_vertex {
        return Err(parse_err(0, "no vertex element"));
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n\
property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n1 2 3 255 255 255\n";

    fn cloud() -> PointCloud {
        let points = (0..20)
            .map(|i| Point3::new(i as f64 * 0.1 - 1.0, (i * i) as f64 * 0.013, 2.0 + i as f64 / 7.0))
            .collect();
        let colors = (0..20).map(|i| [i as f32 / 19.0, 0.5, 1.0 - i as f32 / 19.0]).collect();
        PointCloud::new(points, colors).unwrap()
    }

    #[test]
    fn golden_single_white_point() {
        let c = PointCloud::new(vec![Point3::new(1.0, 2.0, 3.0)], vec![[1.0; 3]]).unwrap();
        assert_eq!(
            String::from_utf8(encode_ply(&c, PlyFormat::Ascii).unwrap()).unwrap(),
            GOLDEN
        );
        let back = decode_ply(GOLDEN.as_bytes()).unwrap();
        assert_eq!(back.points, c.points);
        assert_eq!(back.colors, c.colors);
    }

    #[test]
    fn empty_cloud() {
        for f in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let bytes = encode_ply(&PointCloud::default(), f).unwrap();
            assert!(String::from_utf8_lossy(&bytes).contains("element vertex 0\n"));
            assert!(decode_ply(&bytes).unwrap().is_empty());
        }
    }

    #[test]
    fn ascii_and_binary_agree() {
        let c = cloud();
        let a = decode_ply(&encode_ply(&c, PlyFormat::Ascii).unwrap()).unwrap();
        let b = decode_ply(&encode_ply(&c, PlyFormat::BinaryLittleEndian).unwrap()).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.colors, b.colors);
        for (p, q) in c.points.iter().zip(&a.points) {
            assert_eq!(p.map(|x| x as f32 as f64), *q);
        }
        // re-encoding the reloaded cloud reproduces the file
        for f in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            assert_eq!(encode_ply(&a, f).unwrap(), encode_ply(&c, f).unwrap());
        }
    }

    #[test]
    fn skips_foreign_properties_and_elements() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\ncomment test\nelement vertex 1\n\
property double x\nproperty double y\nproperty double z\nproperty float nx\nelement face 1\n\
property list uchar int vertex_indices\nend_header\n"
            .to_vec();
        for v in [1.0f64, -2.0, 0.5] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&0.0f32.to_le_bytes());
        bytes.push(3);
        let c = decode_ply(&bytes).unwrap();
        assert_eq!(c.points, vec![Point3::new(1.0, -2.0, 0.5)]);
        assert_eq!(c.colors, vec![[1.0; 3]]);
    }

    #[test]
    fn malformed() {
        assert!(decode_ply(b"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n").is_err());
        assert!(decode_ply(b"ply\nformat binary_big_endian 1.0\nend_header\n").is_err());
        assert!(decode_ply(b"not a ply").is_err());
        assert!(decode_ply(b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n1\n").is_err());
    }
}
