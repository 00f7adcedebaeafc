//! Wire format: every message is a frame of a little-endian u32 length
//! followed by that many bytes. Requests and responses are JSON; point
//! payloads travel in binary chunk frames right after the response that
//! announces them. See `docs/protocol.md`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use workcell_core::{Point, PointId, Vec3};

/// Most points carried by one chunk frame.
pub const MAX_CHUNK_POINTS: usize = 65_536;
/// id u64, 3 × f32 position, 3 color bytes.
pub const POINT_RECORD_BYTES: usize = 8 + 12 + 3;
/// Frames larger than this are refused rather than allocated.
pub const MAX_FRAME_BYTES: u32 = 256 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub id: u64,
    pub verb: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    BadRequest,
    BadId,
    NoSession,
    NoPending,
    NothingToUndo,
    PendingExists,
    ToolError,
    IoError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    /// `None` only when the request could not be parsed far enough to read it.
    pub id: Option<u64>,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl Response {
    pub fn ok(id: u64, payload: Value) -> Self {
        Self {
            id: Some(id),
            ok: true,
            payload: Some(payload),
            error: None,
        }
    }

    pub fn err(id: Option<u64>, code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            id,
            ok: false,
            payload: None,
            error: Some(ErrorBody {
                code,
                message: message.into(),
            }),
        }
    }

    pub fn error_code(&self) -> Option<ErrorCode> {
        self.error.as_ref().map(|e| e.code)
    }
}

pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(payload)
}

/// Next frame, or `None` on a clean end of stream before a length prefix.
pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_le_bytes(len);
    if len > MAX_FRAME_BYTES {
        return Err(io::Error::new(io::ErrorKind::InvalidData, format!("frame of {len} bytes")));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn encode_points(points: &[Point]) -> Vec<u8> {
    let mut out = Vec::with_capacity(points.len() * POINT_RECORD_BYTES);
    for p in points {
        out.extend_from_slice(&p.id.to_le_bytes());
        for c in p.position.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        out.extend_from_slice(&p.color);
    }
    out
}

pub fn decode_points(bytes: &[u8]) -> io::Result<Vec<Point>> {
    if !bytes.len().is_multiple_of(POINT_RECORD_BYTES) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("chunk of {} bytes is not a whole number of points", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(POINT_RECORD_BYTES)
        .map(|r| {
            let id = PointId::from_le_bytes(r[..8].try_into().unwrap());
            let f = |i: usize| f64::from(f32::from_le_bytes(r[8 + 4 * i..12 + 4 * i].try_into().unwrap()));
            Point::new(id, Vec3::new(f(0), f(1), f(2)), [r[20], r[21], r[22]])
        })
        .collect())
}

/// Splits `points` into encoded chunk payloads of at most
/// [`MAX_CHUNK_POINTS`] points each.
pub fn chunk_points(points: &[Point]) -> Vec<Vec<u8>> {
    points.chunks(MAX_CHUNK_POINTS).map(encode_points).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_round_trip() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"hello").unwrap();
        write_frame(&mut buf, b"").unwrap();
        assert_eq!(&buf[..4], &5u32.to_le_bytes());
        let mut r = &buf[..];
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"hello");
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"");
        assert!(read_frame(&mut r).unwrap().is_none());
    }

    #[test]
    fn truncated_frame_is_an_error() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"hello").unwrap();
        buf.truncate(6);
        assert!(read_frame(&mut &buf[..]).is_err());
    }

    #[test]
    fn point_records_are_23_bytes() {
        let pts = vec![
            Point::new(7, Vec3::new(1.5, -2.0, 0.25), [1, 2, 3]),
            Point::new(u64::MAX, Vec3::new(0.1, 0.2, 0.3), [255, 0, 9]),
        ];
        let bytes = encode_points(&pts);
        assert_eq!(bytes.len(), 46);
        assert_eq!(&bytes[..8], &7u64.to_le_bytes());
        let back = decode_points(&bytes).unwrap();
        assert_eq!(back[0], pts[0]);
        assert_eq!(back[1].position, pts[1].position.map(|v| v as f32 as f64));
        assert!(decode_points(&bytes[..45]).is_err());
    }

    #[test]
    fn chunking_respects_the_cap() {
        let pts: Vec<Point> = (0..MAX_CHUNK_POINTS as u64 * 2 + 5)
            .map(|i| Point::new(i, Vec3::zeros(), [0; 3]))
            .collect();
        let chunks = chunk_points(&pts);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[2].len(), 5 * POINT_RECORD_BYTES);
        assert!(chunk_points(&[]).is_empty());
    }

    #[test]
    fn error_codes_serialize_screaming() {
        let r = Response::err(Some(3), ErrorCode::NoPending, "nothing");
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["error"]["code"], "NO_PENDING");
        assert!(v.get("payload").is_none());
    }
}
