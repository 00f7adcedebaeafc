//! Session scripts: one JSON tool record per line.
//!
//! ```text
//! {"tool":"crop","bounds":{"min":[-0.3,-0.3,0.01],"max":[0.3,0.3,0.6]}}
//! {"tool":"remove_outliers","strength":"medium"}
//! {"tool":"downsample","strength":"weak"}
//! {"tool":"create_primitive","primitive":{"pose":{"translation":[0,0,0.05],"rotation":[1,0,0,0]},"dimensions":[0.2,0.1,0.1]}}
//! {"tool":"erase_sponge","stroke":[{"translation":[0,0,0],"rotation":[1,0,0,0]}],"size":"big"}
//! {"tool":"erase_spray","strokes":[{"ray_origin":[0,0,2],"ray_dir":[0,0,-1],"size":"medium","depth":"deep"}]}
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fs;
use std::path::Path;

use serde_json::Value;

use super::FormatError;
use crate::toolbox::{SessionScript, ToolError, ToolInvocation};

fn parse_record(content: &str, line: usize) -> Result<ToolInvocation, FormatError> {
    let value: Value = serde_json::from_str(content)
        .map_err(|e| FormatError::parse(line, format!("not a JSON object: {e}")))?;
    let name = value
        .get("tool")
        .and_then(Value::as_str)
        .ok_or_else(|| FormatError::parse(line, "record has no \"tool\" string"))?;
    if !ToolInvocation::TOOL_NAMES.contains(&name) {
        return Err(FormatError::UnknownTool {
            line,
            name: name.to_string(),
        });
    }
    let record: ToolInvocation =
        serde_json::from_value(value).map_err(|e| FormatError::InvalidParams {
            line,
            message: e.to_string(),
        })?;
    record.validate().map_err(|e| FormatError::InvalidParams {
        line,
        message: match e {
            ToolError::InvalidParams(m) => m,
            other => other.to_string(),
        },
    })?;
    Ok(record)
}

pub fn parse_script(text: &str) -> Result<SessionScript, FormatError> {
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        records.push(parse_record(content, i + 1)?);
    }
    Ok(SessionScript::new(records))
}

pub fn format_script(script: &SessionScript) -> String {
    let mut out = String::new();
    for record in &script.records {
        out.push_str(&serde_json::to_string(record).expect("tool records always serialize"));
        out.push('\n');
    }
    out
}

pub fn read_script(path: impl AsRef<Path>) -> Result<SessionScript, FormatError> {
    parse_script(&fs::read_to_string(path)?)
}

pub fn write_script(script: &SessionScript, path: impl AsRef<Path>) -> Result<(), FormatError> {
    fs::write(path, format_script(script))?;
    Ok(())
}
