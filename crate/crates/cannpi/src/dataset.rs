//! JSON-lines datasets: a header object, then one labelled sequence per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use cannpi_core::cann::CannParams;
use cannpi_core::trajgen::{DatasetPlan, LabeledSequence, Split};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;

pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub format_version: u32,
    pub spec: DatasetPlan,
    pub cann_params: CannParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub sequences: Vec<LabeledSequence>,
}

impl Dataset {
    pub fn new(spec: DatasetPlan, cann_params: CannParams, sequences: Vec<LabeledSequence>) -> Self {
        Self {
            header: DatasetHeader {
                format_version: DATASET_VERSION,
                spec,
                cann_params,
            },
            sequences,
        }
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &LabeledSequence> {
        self.sequences.iter().filter(move |s| s.split == split)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        let enc = |e: serde_json::Error| Error::format(path, e.to_string());
        writeln!(w, "{}", json::to_line(&self.header).map_err(enc)?).map_err(io)?;
        for seq in &self.sequences {
            writeln!(w, "{}", json::to_line(seq).map_err(enc)?).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let line_err = |line: usize, message: String| Error::Line {
            path: path.to_path_buf(),
            line,
            message,
        };
        let first = lines
            .next()
            .ok_or_else(|| Error::format(path, "empty dataset file"))?
            .map_err(|e| Error::io(path, e))?;
        let header: DatasetHeader = serde_json::from_str(&first).map_err(|e| line_err(1, e.to_string()))?;
        if header.format_version != DATASET_VERSION {
            return Err(line_err(
                1,
                format!("format_version {} (expected {DATASET_VERSION})", header.format_version),
            ));
        }
        let dims = header.spec.dims;
        let mut sequences = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let seq: LabeledSequence = serde_json::from_str(&line).map_err(|e| line_err(n, e.to_string()))?;
            if seq.inputs.len() != seq.labels.len() {
                return Err(line_err(n, "inputs and labels differ in length".into()));
            }
            let bad_row = seq.inputs.iter().any(|r| r.len() != dims)
                || seq.labels.iter().any(|r| r.len() != 2 * dims);
            if bad_row {
                return Err(line_err(n, format!("rows do not match dims = {dims}")));
            }
            sequences.push(seq);
        }
        Ok(Self { header, sequences })
    }
}
