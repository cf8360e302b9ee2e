use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError};
use crate::learners::{ExhaustionReason, Hypothesis, HypothesisKind, TextItem};
use crate::qarith::{Rational, Representation};

pub const TRACE_VERSION: u32 = 1;

/// A text datum or window entry: one vector, or a pair of vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Datum {
    Vector(Representation),
    Pair(Representation, Representation),
}

fn trim(v: &Representation) -> Representation {
    Representation::new(v.entries()[..v.support_len()].to_vec())
}

impl Datum {
    pub fn vector(v: &Representation) -> Self {
        Datum::Vector(trim(v))
    }

    pub fn pair(a: &Representation, b: &Representation) -> Self {
        Datum::Pair(trim(a), trim(b))
    }
}

/// A text item in a trace; pauses are `null`.
pub fn vector_item(item: &TextItem<Representation>) -> Option<Datum> {
    item.datum().map(Datum::vector)
}

pub fn pair_item(item: &TextItem<(Representation, Representation)>) -> Option<Datum> {
    item.datum().map(|(a, b)| Datum::pair(a, b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub i: usize,
    pub old: Rational,
    pub new: Rational,
}

/// A conjecture with `q`, `m` lifted out when it denotes a subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<String>,
    pub handle: String,
    pub denotes: HypothesisKind,
}

impl From<&Hypothesis> for HypothesisRecord {
    fn from(h: &Hypothesis) -> Self {
        Self {
            q: h.spec().map(|s| s.q().to_string()),
            m: h.spec().map(|s| s.m().to_string()),
            handle: h.handle.clone(),
            denotes: h.kind.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    Header {
        version: u32,
        config: ExperimentConfig,
    },
    /// One builder stage.
    Stage {
        stage: usize,
        beta: Vec<Rational>,
        replaced: Vec<Replacement>,
        /// Relation pairs or members of the small census window first found at this stage.
        window_added: Vec<Datum>,
    },
    /// One learner step.
    Learn {
        n: usize,
        datum: Option<Datum>,
        hypothesis: HypothesisRecord,
        mind_change: bool,
    },
    Witness {
        steps: usize,
        gamma: Vec<Option<Datum>>,
        delta: Vec<Option<Datum>>,
        before: HypothesisRecord,
        after: HypothesisRecord,
    },
    Falsification {
        stage: usize,
        sigma: Representation,
        tau: Representation,
        text_len: usize,
        beta_len: usize,
    },
    Exhausted {
        steps: usize,
        reason: ExhaustionReason,
        detail: String,
    },
    Summary {
        stages: usize,
        beta_len: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mind_changes: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        converged: Option<bool>,
    },
}

/// One JSON object per line, newline-terminated.
pub fn to_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<TraceRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| HarnessError::Trace { line: i + 1, source: e }))
        .collect()
}

pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<(), HarnessError> {
    let mut f = fs::File::create(path)?;
    f.write_all(to_jsonl(records).as_bytes())?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>, HarnessError> {
    parse_jsonl(&fs::read_to_string(path)?)
}
