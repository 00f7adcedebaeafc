//! PLY point clouds, ASCII and binary little-endian.
//!
//! Written files use exactly this header (N = point count):
//!
//! ```text
//! ply
//! format ascii 1.0            (or: format binary_little_endian 1.0)
//! element vertex N
//! property float x
//! property float y
//! property float z
//! property uchar red
//! property uchar green
//! property uchar blue
//! end_header
//! ```
//!
//! Ids are not stored; reading assigns ids `0..N` in file order.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::FormatError;
use crate::model::{Point, PointCloud};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlyFormat {
    Ascii,
    #[default]
    BinaryLittleEndian,
}

impl std::str::FromStr for PlyFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(Self::Ascii),
            "binary" | "binary_le" | "binary_little_endian" => Ok(Self::BinaryLittleEndian),
            other => Err(format!("unknown PLY format {other:?} (expected ascii or binary)")),
        }
    }
}

const WHITE: [u8; 3] = [255, 255, 255];

#[derive(Debug, Clone, Copy, PartialEq)]
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
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum PropKind {
    Scalar(Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: PropKind,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Encoding {
    Ascii,
    BinaryLe,
}

struct Header {
    encoding: Encoding,
    elements: Vec<Element>,
    /// Byte offset of the body.
    body_start: usize,
    /// Number of header lines, for error line numbers in ASCII bodies.
    lines: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, FormatError> {
    let mut offset = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let rest = &bytes[offset..];
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            return Err(FormatError::parse(line_no + 1, "header is not terminated by end_header"));
        };
        line_no += 1;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| FormatError::parse(line_no, "header is not valid UTF-8"))?
            .trim_end_matches('\r')
            .trim();
        offset += nl + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if line_no == 1 {
            if line != "ply" {
                return Err(FormatError::parse(1, "missing 'ply' magic"));
            }
            continue;
        }
        match tokens.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                encoding = Some(match *fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLe,
                    "binary_big_endian" => {
                        return Err(FormatError::UnsupportedFormat(
                            "binary_big_endian PLY is not supported".into(),
                        ))
                    }
                    other => {
                        return Err(FormatError::parse(line_no, format!("unknown format {other:?}")))
                    }
                });
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| FormatError::parse(line_no, format!("bad element count {count:?}")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count, item, name] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| FormatError::parse(line_no, "property before any element"))?;
                let (Some(count), Some(item)) = (Scalar::parse(count), Scalar::parse(item)) else {
                    return Err(FormatError::parse(line_no, "unknown list property type"));
                };
                element.properties.push(Property {
                    name: name.to_string(),
                    kind: PropKind::List { count, item },
                });
            }
            ["property", ty, name] => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| FormatError::parse(line_no, "property before any element"))?;
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| FormatError::parse(line_no, format!("unknown property type {ty:?}")))?;
                element.properties.push(Property {
                    name: name.to_string(),
                    kind: PropKind::Scalar(ty),
                });
            }
            ["end_header"] => break,
            _ => return Err(FormatError::parse(line_no, format!("unrecognized header line {line:?}"))),
        }
    }
    let encoding = encoding.ok_or_else(|| FormatError::parse(line_no, "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body_start: offset,
        lines: line_no,
    })
}

/// Where x/y/z/red/green/blue live among a vertex record's scalar slots.
struct VertexLayout {
    xyz: [usize; 3],
    rgb: Option<[usize; 3]>,
}

impl VertexLayout {
    fn new(element: &Element) -> Result<Self, FormatError> {
        let find = |name: &str| {
            element
                .properties
                .iter()
                .position(|p| p.name == name && matches!(p.kind, PropKind::Scalar(_)))
        };
        let (Some(x), Some(y), Some(z)) = (find("x"), find("y"), find("z")) else {
            return Err(FormatError::UnsupportedFormat(
                "vertex element lacks x/y/z properties".into(),
            ));
        };
        let rgb = match (find("red"), find("green"), find("blue")) {
            (Some(r), Some(g), Some(b)) => Some([r, g, b]),
            _ => None,
        };
        Ok(Self { xyz: [x, y, z], rgb })
    }

    fn point(&self, id: usize, values: &[f64], line: usize) -> Result<Point, FormatError> {
        let pos = Vec3::new(values[self.xyz[0]], values[self.xyz[1]], values[self.xyz[2]]);
        if !pos.iter().all(|c| c.is_finite()) {
            return Err(FormatError::parse(line, format!("vertex {id} has a non-finite position")));
        }
        let color = match self.rgb {
            Some(idx) => idx.map(|i| values[i].clamp(0.0, 255.0) as u8),
            None => WHITE,
        };
        Ok(Point::new(id as u64, pos, color))
    }
}

fn parse_ascii(header: &Header, text: &str) -> Result<PointCloud, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1 + header.lines, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut points = Vec::new();
    for element in &header.elements {
        let layout = if element.name == "vertex" {
            Some(VertexLayout::new(element)?)
        } else {
            None
        };
        for record in 0..element.count {
            let (line_no, line) = lines.next().ok_or_else(|| {
                FormatError::parse(header.lines, format!("body ends inside element {}", element.name))
            })?;
            let mut tokens = line.split_whitespace();
            let mut next = |what: &str, ty: Scalar| -> Result<f64, FormatError> {
                let tok = tokens
                    .next()
                    .ok_or_else(|| FormatError::parse(line_no, format!("missing {what}")))?;
                // float properties carry single precision whatever the text says
                let v = match ty {
                    Scalar::F32 => tok.parse::<f32>().map(f64::from),
                    _ => tok.parse::<f64>(),
                };
                v.map_err(|_| FormatError::parse(line_no, format!("bad number {tok:?}")))
            };
            let mut values = Vec::with_capacity(element.properties.len());
            for prop in &element.properties {
                match prop.kind {
                    PropKind::Scalar(ty) => values.push(next(&prop.name, ty)?),
                    PropKind::List { count, item } => {
                        let n = next(&prop.name, count)? as usize;
                        for _ in 0..n {
                            next(&prop.name, item)?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if let Some(layout) = &layout {
                points.push(layout.point(record, &values, line_no)?);
            }
        }
        if layout.is_some() {
            break;
        }
    }
    PointCloud::new(points).map_err(|e| FormatError::parse(0, e.to_string()))
}

fn parse_binary(header: &Header, body: &[u8]) -> Result<PointCloud, FormatError> {
    let mut pos = 0;
    let truncated = || FormatError::parse(header.lines, "binary body is truncated");
    let mut take = |n: usize| -> Result<&[u8], FormatError> {
        let s = body.get(pos..pos + n).ok_or_else(truncated)?;
        pos += n;
        Ok(s)
    };
    let mut points = Vec::new();
    for element in &header.elements {
        let layout = if element.name == "vertex" {
            Some(VertexLayout::new(element)?)
        } else {
            None
        };
        let mut values = Vec::with_capacity(element.properties.len());
        for record in 0..element.count {
            values.clear();
            for prop in &element.properties {
                match prop.kind {
                    PropKind::Scalar(ty) => values.push(ty.read_le(take(ty.size())?)),
                    PropKind::List { count, item } => {
                        let n = count.read_le(take(count.size())?) as usize;
                        take(n * item.size())?;
                        values.push(f64::NAN);
                    }
                }
            }
            if let Some(layout) = &layout {
                points.push(layout.point(record, &values, header.lines)?);
            }
        }
        if layout.is_some() {
            break;
        }
    }
    PointCloud::new(points).map_err(|e| FormatError::parse(0, e.to_string()))
}

/// Parses a PLY file held in memory.
pub fn read_ply_from(bytes: &[u8]) -> Result<PointCloud, FormatError> {
    let header = parse_header(bytes)?;
    if !header.elements.iter().any(|e| e.name == "vertex") {
        return Err(FormatError::UnsupportedFormat("no vertex element".into()));
    }
    let body = &bytes[header.body_start..];
    match header.encoding {
        Encoding::Ascii => {
            let text = std::str::from_utf8(body)
                .map_err(|_| FormatError::parse(header.lines + 1, "ASCII body is not valid UTF-8"))?;
            parse_ascii(&header, text)
        }
        Encoding::BinaryLe => parse_binary(&header, body),
    }
}

pub fn read_ply(path: impl AsRef<Path>) -> Result<PointCloud, FormatError> {
    read_ply_from(&fs::read(path)?)
}

pub fn write_ply_to<W: Write>(cloud: &PointCloud, mut w: W, format: PlyFormat) -> std::io::Result<()> {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        w,
        "ply\nformat {fmt} 1.0\nelement vertex {}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
        cloud.len()
    )?;
    for p in cloud {
        let [x, y, z] = [p.position.x as f32, p.position.y as f32, p.position.z as f32];
        match format {
            PlyFormat::Ascii => {
                writeln!(w, "{x} {y} {z} {} {} {}", p.color[0], p.color[1], p.color[2])?
            }
            PlyFormat::BinaryLittleEndian => {
                for c in [x, y, z] {
                    w.write_all(&c.to_le_bytes())?;
                }
                w.write_all(&p.color)?;
            }
        }
    }
    w.flush()
}

/// Writes float32 positions and uchar colors.
pub fn write_ply(cloud: &PointCloud, path: impl AsRef<Path>, format: PlyFormat) -> Result<(), FormatError> {
    let file = fs::File::create(path)?;
    write_ply_to(cloud, BufWriter::new(file), format)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes_of(cloud: &PointCloud, format: PlyFormat) -> Vec<u8> {
        let mut buf = Vec::new();
        write_ply_to(cloud, &mut buf, format).unwrap();
        buf
    }

    #[test]
    fn ascii_single_red_vertex() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n\
                    property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n\
                    end_header\n0 0 0 255 0 0\n";
        let c = read_ply_from(text.as_bytes()).unwrap();
        assert_eq!(c.points(), &[Point::new(0, Vec3::zeros(), [255, 0, 0])]);
    }

    #[test]
    fn missing_colors_default_to_white() {
        let text = "ply\r\nformat ascii 1.0\r\ncomment made by hand\r\nelement vertex 2\r\n\
                    property double x\r\nproperty double y\r\nproperty double z\r\nend_header\r\n\
                    1 2 3\r\n4 5 6\r\n";
        let c = read_ply_from(text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|p| p.color == WHITE));
        assert_eq!(c.points()[1].position, Vec3::new(4.0, 5.0, 6.0));
    }

    #[test]
    fn empty_cloud_writes_valid_file() {
        for f in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let b = bytes_of(&PointCloud::empty(), f);
            assert!(String::from_utf8_lossy(&b).contains("element vertex 0\n"));
            assert!(read_ply_from(&b).unwrap().is_empty());
        }
    }

    #[test]
    fn three_points_both_flavors_agree() {
        let c = PointCloud::new(vec![
            Point::new(0, Vec3::new(0.1, -2.5, 3.25), [1, 2, 3]),
            Point::new(1, Vec3::new(1e-7, 12345.678, -0.0001), [255, 128, 0]),
            Point::new(2, Vec3::new(-1.0, 0.0, 1.0), [0, 0, 0]),
        ])
        .unwrap();
        let a = read_ply_from(&bytes_of(&c, PlyFormat::Ascii)).unwrap();
        let b = read_ply_from(&bytes_of(&c, PlyFormat::BinaryLittleEndian)).unwrap();
        assert_eq!(a, b);
        for (orig, got) in c.iter().zip(a.iter()) {
            assert_eq!(got.position, orig.position.map(|v| v as f32 as f64));
            assert_eq!(got.color, orig.color);
        }
    }

    #[test]
    fn deterministic_bytes() {
        let c = PointCloud::from_positions(&[Vec3::new(0.3, 0.2, 0.1)], [7, 8, 9]).unwrap();
        assert_eq!(bytes_of(&c, PlyFormat::Ascii), bytes_of(&c, PlyFormat::Ascii));
        assert_eq!(
            bytes_of(&c, PlyFormat::BinaryLittleEndian),
            bytes_of(&c, PlyFormat::BinaryLittleEndian)
        );
    }

    #[test]
    fn faces_after_vertices_are_ignored_and_before_are_skipped() {
        let mut body = Vec::new();
        body.extend_from_slice(
            b"ply\nformat binary_little_endian 1.0\nelement face 1\nproperty list uchar int vertex_indices\n\
              element vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        );
        body.push(3);
        for i in [0i32, 1, 2] {
            body.extend_from_slice(&i.to_le_bytes());
        }
        for v in [1.0f32, 2.0, 3.0] {
            body.extend_from_slice(&v.to_le_bytes());
        }
        let c = read_ply_from(&body).unwrap();
        assert_eq!(c.points()[0].position, Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn error_paths() {
        let be = b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nproperty float x\nend_header\n";
        assert!(matches!(read_ply_from(be), Err(FormatError::UnsupportedFormat(_))));
        let no_xyz = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n1\n";
        assert!(matches!(read_ply_from(no_xyz), Err(FormatError::UnsupportedFormat(_))));
        let short = b"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n\
                      property float z\nend_header\n1 2 3\n";
        assert!(matches!(read_ply_from(short), Err(FormatError::Parse { .. })));
        let bad = b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n\
                    property float z\nend_header\n1 two 3\n";
        assert!(matches!(read_ply_from(bad), Err(FormatError::Parse { line: 8, .. })));
        assert!(matches!(read_ply_from(b"hello\n"), Err(FormatError::Parse { .. })));
        let trunc = b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\n\
                      property float y\nproperty float z\nend_header\n\x00\x00";
        assert!(matches!(read_ply_from(trunc), Err(FormatError::Parse { .. })));
    }
}
