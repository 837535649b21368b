use std::path::Path;

use serde_json::{json, Value as Json};

use super::TaskInstance;
use crate::grid::{Grid, MAX_TASK_DIM, NUM_COLORS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct FormatError {
    /// JSON path of the offending value, e.g. `$.train[0].input[2][1]`.
    pub path: String,
    pub message: String,
}

fn err(path: &str, message: impl Into<String>) -> FormatError {
    FormatError { path: path.to_string(), message: message.into() }
}

fn parse_grid(v: &Json, path: &str) -> Result<Grid, FormatError> {
    let rows = v.as_array().ok_or_else(|| err(path, "expected an array of rows"))?;
    if rows.is_empty() || rows.len() > MAX_TASK_DIM {
        return Err(err(path, format!("height {} outside 1..={MAX_TASK_DIM}", rows.len())));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (y, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{y}]");
        let cells = row.as_array().ok_or_else(|| err(&rp, "expected an array of cells"))?;
        if cells.is_empty() || cells.len() > MAX_TASK_DIM {
            return Err(err(&rp, format!("width {} outside 1..={MAX_TASK_DIM}", cells.len())));
        }
        if y > 0 && cells.len() != out.first().map_or(0, Vec::len) {
            return Err(err(&rp, "ragged row"));
        }
        let mut r = Vec::with_capacity(cells.len());
        for (x, c) in cells.iter().enumerate() {
            match c.as_u64() {
                Some(k) if k < NUM_COLORS as u64 => r.push(k as u8),
                _ => return Err(err(&format!("{rp}[{x}]"), format!("color {c} outside 0..=9"))),
            }
        }
        out.push(r);
    }
    Grid::from_rows(&out).map_err(|e| err(path, e.to_string()))
}

fn parse_pairs(doc: &Json, key: &str) -> Result<Vec<(Grid, Grid)>, FormatError> {
    let path = format!("$.{key}");
    let list = doc.get(key).and_then(Json::as_array).ok_or_else(|| err(&path, "missing array"))?;
    list.iter()
        .enumerate()
        .map(|(i, pair)| {
            let pp = format!("{path}[{i}]");
            let field = |name: &str| {
                let fp = format!("{pp}.{name}");
                pair.get(name).ok_or_else(|| err(&fp, "missing")).and_then(|g| parse_grid(g, &fp))
            };
            Ok((field("input")?, field("output")?))
        })
        .collect()
}

pub fn parse_arc_task(text: &str) -> Result<TaskInstance, FormatError> {
    let doc: Json = serde_json::from_str(text).map_err(|e| err("$", e.to_string()))?;
    let demos = parse_pairs(&doc, "train")?;
    if demos.is_empty() {
        return Err(err("$.train", "no demonstration pairs"));
    }
    let test = parse_pairs(&doc, "test")?;
    Ok(TaskInstance { demos, test })
}

pub fn load_arc_task(path: impl AsRef<Path>) -> Result<TaskInstance, FormatError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| err("$", format!("{}: {e}", path.as_ref().display())))?;
    parse_arc_task(&text)
}

pub fn write_arc_task(task: &TaskInstance) -> String {
    let pairs = |ps: &[(Grid, Grid)]| -> Json {
        ps.iter().map(|(i, o)| json!({"input": i.to_rows(), "output": o.to_rows()})).collect()
    };
    json!({"train": pairs(&task.demos), "test": pairs(&task.test)}).to_string()
}
