use std::path::PathBuf;

use serde::Deserialize;
use serde_json::{json, Value};

use workcell_core::io::{read_ply, write_ply, FormatError, PlyFormat};
use workcell_core::toolbox::{EditSession, ToolError, ToolInvocation};
use workcell_core::PointCloud;

use crate::protocol::{chunk_points, ErrorCode, Request, Response};

/// A response plus the binary chunk frames that follow it on the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct Reply {
    pub response: Response,
    pub chunks: Vec<Vec<u8>>,
}

impl From<Response> for Reply {
    fn from(response: Response) -> Self {
        Self {
            response,
            chunks: Vec::new(),
        }
    }
}

/// One editing session driven by requests, processed strictly one at a
/// time.
#[derive(Debug, Default)]
pub struct Service {
    session: Option<EditSession>,
    last_id: Option<u64>,
}

type Handled = Result<(Value, Vec<Vec<u8>>), (ErrorCode, String)>;

fn tool_error(e: ToolError) -> (ErrorCode, String) {
    let code = match &e {
        ToolError::NoPendingEdit => ErrorCode::NoPending,
        ToolError::NothingToUndo => ErrorCode::NothingToUndo,
        ToolError::PendingEditExists => ErrorCode::PendingExists,
        ToolError::InvalidParams(_) => ErrorCode::BadRequest,
        _ => ErrorCode::ToolError,
    };
    (code, e.to_string())
}

fn io_error(e: FormatError) -> (ErrorCode, String) {
    (ErrorCode::IoError, e.to_string())
}

fn params<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T, (ErrorCode, String)> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| (ErrorCode::BadRequest, format!("bad params: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathParams {
    path: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExportParams {
    path: PathBuf,
    #[serde(default)]
    format: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

pub const VERBS: [&str; 9] = [
    "load",
    "get_cloud",
    "tool",
    "preview_diff",
    "commit",
    "discard",
    "undo",
    "export",
    "stats",
];

impl Service {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cloud(cloud: PointCloud) -> Self {
        Self {
            session: Some(EditSession::new(cloud)),
            last_id: None,
        }
    }

    pub fn session(&self) -> Option<&EditSession> {
        self.session.as_ref()
    }

    /// Handles one raw request frame.
    pub fn handle_bytes(&mut self, frame: &[u8]) -> Reply {
        let value: Value = match serde_json::from_slice(frame) {
            Ok(v) => v,
            Err(e) => return Response::err(None, ErrorCode::BadRequest, format!("malformed JSON: {e}")).into(),
        };
        let id = value.get("id").and_then(Value::as_u64);
        match serde_json::from_value::<Request>(value) {
            Ok(req) => self.handle(&req),
            Err(e) => Response::err(id, ErrorCode::BadRequest, format!("malformed request: {e}")).into(),
        }
    }

    pub fn handle(&mut self, req: &Request) -> Reply {
        if self.last_id.is_some_and(|last| req.id <= last) {
            return Response::err(
                Some(req.id),
                ErrorCode::BadId,
                format!("request id {} is not greater than {}", req.id, self.last_id.unwrap()),
            )
            .into();
        }
        self.last_id = Some(req.id);
        match self.dispatch(req) {
            Ok((payload, chunks)) => Reply {
                response: Response::ok(req.id, payload),
                chunks,
            },
            Err((code, message)) => Response::err(Some(req.id), code, message).into(),
        }
    }

    fn session_mut(&mut self) -> Result<&mut EditSession, (ErrorCode, String)> {
        self.session
            .as_mut()
            .ok_or((ErrorCode::NoSession, "no cloud loaded".to_string()))
    }

    fn dispatch(&mut self, req: &Request) -> Handled {
        match req.verb.as_str() {
            "load" => {
                let p: PathParams = params(&req.params)?;
                let cloud = read_ply(&p.path).map_err(io_error)?;
                let count = cloud.len();
                self.session = Some(EditSession::new(cloud));
                Ok((json!({ "count": count }), Vec::new()))
            }
            "get_cloud" => {
                let _: NoParams = params(&req.params)?;
                let cloud = self.session_mut()?.snapshot();
                let chunks = chunk_points(cloud.points());
                Ok((json!({ "count": cloud.len(), "chunks": chunks.len() }), chunks))
            }
            "tool" => {
                let tool: ToolInvocation = params(&req.params)?;
                let edit = self.session_mut()?.preview(tool).map_err(tool_error)?;
                Ok((
                    json!({
                        "tool": edit.tool.name(),
                        "added": edit.added.len(),
                        "removed": edit.removed.len(),
                    }),
                    Vec::new(),
                ))
            }
            "preview_diff" => {
                let _: NoParams = params(&req.params)?;
                let edit = self
                    .session_mut()?
                    .pending()
                    .ok_or((ErrorCode::NoPending, "no pending edit".to_string()))?;
                let chunks = chunk_points(&edit.added);
                Ok((
                    json!({
                        "tool": edit.tool.name(),
                        "added": edit.added.len(),
                        "removed": edit.removed,
                        "chunks": chunks.len(),
                    }),
                    chunks,
                ))
            }
            "commit" => {
                let _: NoParams = params(&req.params)?;
                let s = self.session_mut()?;
                s.commit().map_err(tool_error)?;
                Ok((json!({ "count": s.committed().len() }), Vec::new()))
            }
            "discard" => {
                let _: NoParams = params(&req.params)?;
                let s = self.session_mut()?;
                let edit = s.discard().map_err(tool_error)?;
                Ok((
                    json!({ "count": s.committed().len(), "tool": edit.tool.name() }),
                    Vec::new(),
                ))
            }
            "undo" => {
                let _: NoParams = params(&req.params)?;
                let s = self.session_mut()?;
                s.undo().map_err(tool_error)?;
                Ok((json!({ "count": s.committed().len() }), Vec::new()))
            }
            "export" => {
                let p: ExportParams = params(&req.params)?;
                let format = match p.format.as_deref() {
                    None => PlyFormat::default(),
                    Some(f) => f.parse().map_err(|e| (ErrorCode::BadRequest, e))?,
                };
                let s = self.session_mut()?;
                write_ply(s.committed(), &p.path, format).map_err(io_error)?;
                Ok((
                    json!({ "count": s.committed().len(), "path": p.path }),
                    Vec::new(),
                ))
            }
            "stats" => {
                let _: NoParams = params(&req.params)?;
                let s = self.session_mut()?;
                let bounds = s.committed().bounds().map(|b| {
                    json!({ "min": [b.min.x, b.min.y, b.min.z], "max": [b.max.x, b.max.y, b.max.z] })
                });
                Ok((
                    json!({
                        "count": s.committed().len(),
                        "pending": s.pending().map(|p| p.tool.name()),
                        "history": s.history_len(),
                        "bounds": bounds,
                    }),
                    Vec::new(),
                ))
            }
            other => Err((
                ErrorCode::BadRequest,
                format!("unknown verb {other:?}; expected one of {}", VERBS.join(", ")),
            )),
        }
    }
}
