use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use politeness_core::corpus::Quartile;
use serde::Serialize;

use crate::provenance::Provenance;

/// Fails unless `path` names an existing file.
pub fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{what} {} does not exist or is not a file", path.display());
    }
    Ok(())
}

pub fn require_dir(path: &Path, what: &str) -> Result<()> {
    if !path.is_dir() {
        bail!("{what} {} does not exist or is not a directory", path.display());
    }
    Ok(())
}

/// Fails unless the directory that will hold `path` exists.
pub fn require_output(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(parent) = parent {
        if !parent.is_dir() {
            bail!("output directory {} does not exist", parent.display());
        }
    }
    if path.is_dir() {
        bail!("output {} is a directory", path.display());
    }
    Ok(())
}

/// One scored request as read back from a scores file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreLine {
    pub score: f64,
    pub quartile: Option<Quartile>,
}

/// Reads `{id, politeness | score, quartile?}` lines, skipping the
/// provenance record. Duplicate ids are an error.
pub fn read_scores(path: &Path) -> Result<BTreeMap<String, ScoreLine>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut scores = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("{}:{line_no}", path.display());
        let value: serde_json::Value =
            serde_json::from_str(&line).with_context(|| format!("{}: invalid JSON", at()))?;
        if value.get("provenance").is_some() {
            continue;
        }
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| anyhow!("{}: missing string field \"id\"", at()))?;
        let score = value
            .get("politeness")
            .or_else(|| value.get("score"))
            .and_then(|v| v.as_f64())
            .ok_or_else(|| anyhow!("{}: missing numeric field \"politeness\" or \"score\"", at()))?;
        let quartile = match value.get("quartile") {
            None | Some(serde_json::Value::Null) => None,
            Some(q) => Some(
                serde_json::from_value(q.clone())
                    .with_context(|| format!("{}: invalid quartile", at()))?,
            ),
        };
        if scores
            .insert(id.to_string(), ScoreLine { score, quartile })
            .is_some()
        {
            bail!("{}: duplicate id {id:?}", at());
        }
    }
    Ok(scores)
}

/// Writes a JSONL artifact whose first line is the provenance record.
pub struct JsonlWriter {
    out: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: &Path, provenance: &Provenance) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = JsonlWriter {
            out: BufWriter::new(file),
        };
        w.write(&serde_json::json!({ "provenance": provenance }))?;
        Ok(w)
    }

    pub fn write<S: Serialize>(&mut self, record: &S) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Writes a JSON document with the provenance under the `provenance` key
/// next to the fields of `body` (which must serialize to an object).
pub fn write_json<S: Serialize>(path: &Path, provenance: &Provenance, body: &S) -> Result<()> {
    let mut value = serde_json::to_value(body)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| anyhow!("report body is not a JSON object"))?;
    obj.insert("provenance".into(), provenance.to_value());
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes CSV text preceded by a `# provenance: {...}` comment line.
pub fn write_csv(path: &Path, provenance: &Provenance, csv: &str) -> Result<()> {
    let header = serde_json::to_string(provenance)?;
    let text = format!("# provenance: {header}\n{csv}");
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
