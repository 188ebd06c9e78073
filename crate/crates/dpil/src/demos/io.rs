//! Demo set serialization.
//!
//! The on-disk format is line-delimited JSON: a header record
//! `{version, state_dim, action_dim, source_label, generator_meta}` followed
//! by one record per transition
//! `{episode_id, step_index, state, action, reward}`. Floats round-trip
//! losslessly. A flat CSV export (`s0..s{n}, a0..a{m}` columns) is provided
//! for plotting.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::types::{DemoSet, GeneratorMeta, Transition};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    state_dim: usize,
    action_dim: usize,
    source_label: String,
    generator_meta: GeneratorMeta,
}

#[derive(Serialize, Deserialize)]
struct Record {
    episode_id: u64,
    step_index: u64,
    state: Vec<f64>,
    action: Vec<f64>,
    reward: Option<f64>,
}

pub fn save_demos(demos: &DemoSet, path: &Path) -> Result<()> {
    demos.validate()?;
    let mut out = String::new();
    let header = Header {
        version: FORMAT_VERSION,
        state_dim: demos.state_dim,
        action_dim: demos.action_dim,
        source_label: demos.source_label.clone(),
        generator_meta: demos.generator_meta.clone(),
    };
    out.push_str(&serde_json::to_string(&header)?);
    out.push('\n');
    for t in &demos.transitions {
        let record = Record {
            episode_id: t.episode_id,
            step_index: t.step_index,
            state: t.state.clone(),
            action: t.action.clone(),
            reward: t.reward,
        };
        out.push_str(&serde_json::to_string(&record)?);
        out.push('\n');
    }
    crate::harness::report::write_atomic(path, out.as_bytes())
}

/// Loads a demo file. Any malformed line fails the whole load; no partial
/// data is ever returned. Record dimensions are checked against the header.
pub fn load_demos(path: &Path) -> Result<DemoSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| Error::Parse {
            record: 1,
            msg: "empty demo file".into(),
        })?;
    let header: Header = serde_json::from_str(header_line).map_err(|e| Error::Parse {
        record: 1,
        msg: format!("bad header: {e}"),
    })?;
    if header.version != FORMAT_VERSION {
        return Err(Error::Parse {
            record: 1,
            msg: format!("unsupported format version {}", header.version),
        });
    }
    let mut set = DemoSet::new(
        header.state_dim,
        header.action_dim,
        header.source_label,
        header.generator_meta,
    );
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
            record: idx + 1,
            msg: e.to_string(),
        })?;
        if record.state.len() != set.state_dim {
            return Err(Error::dim(
                format!("record {} state", idx + 1),
                set.state_dim,
                record.state.len(),
            ));
        }
        if record.action.len() != set.action_dim {
            return Err(Error::dim(
                format!("record {} action", idx + 1),
                set.action_dim,
                record.action.len(),
            ));
        }
        set.transitions.push(Transition {
            episode_id: record.episode_id,
            step_index: record.step_index,
            state: record.state,
            action: record.action,
            reward: record.reward,
        });
    }
    set.validate()?;
    Ok(set)
}

/// Flat CSV with columns `s0..s{n-1}, a0..a{m-1}`, one row per transition.
pub fn export_csv(demos: &DemoSet, path: &Path) -> Result<()> {
    let mut out = String::new();
    let cols: Vec<String> = (0..demos.state_dim)
        .map(|d| format!("s{d}"))
        .chain((0..demos.action_dim).map(|d| format!("a{d}")))
        .collect();
    out.push_str(&cols.join(","));
    out.push('\n');
    for t in &demos.transitions {
        let row: Vec<String> = t
            .state
            .iter()
            .chain(&t.action)
            .map(|v| format!("{v}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    crate::harness::report::write_atomic(path, out.as_bytes())
}
