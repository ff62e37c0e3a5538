//! Report envelope, stable hashing and atomic file output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::graph::WeightedGraph;

/// FNV-1a over bytes; stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Identifying stamp of a graph: family, size and canonical-JSON hash.
#[derive(Debug, Clone, Serialize)]
pub struct GraphStamp {
    pub family: String,
    pub n: usize,
    pub edges: usize,
    pub hash: String,
}

impl GraphStamp {
    pub fn of(g: &WeightedGraph) -> Result<Self> {
        let json = g.to_json_string()?;
        Ok(GraphStamp {
            family: g.meta().family.clone(),
            n: g.n(),
            edges: g.edges().len(),
            hash: format!("{:016x}", fnv1a64(json.as_bytes())),
        })
    }
}

/// Stable JSON schema shared by every experiment command:
/// `{"experiment", "config", "graph", "grid", "constants", "pass", "excluded", "notes"}`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: serde_json::Value,
    pub graph: Option<GraphStamp>,
    pub grid: Vec<serde_json::Value>,
    pub constants: BTreeMap<String, f64>,
    pub pass: bool,
    pub excluded: usize,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            config: serde_json::Value::Null,
            graph: None,
            grid: Vec::new(),
            constants: BTreeMap::new(),
            pass: true,
            excluded: 0,
            notes: Vec::new(),
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().map(|f| f.to_string_lossy()).unwrap_or_default(),
            std::process::id()
        )),
        None => std::path::PathBuf::from(format!(".heatlab.tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// 17 significant digits, enough for a bit-exact f64 round trip in CSV.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
