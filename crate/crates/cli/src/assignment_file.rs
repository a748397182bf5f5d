//! Text and JSON forms of a cell assignment.
//!
//! ```text
//! # cell assignment
//! machine M1 2
//! part P4 3
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cellform_core::{Assignment, AssignmentError, Instance};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A line of an assignment file that could not be read.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("assignment line {line}: {reason}")]
pub struct MalformedAssignment {
    pub line: usize,
    pub reason: String,
}

/// Labeled pairs as read from a file, before checking against an instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledAssignment {
    pub machines: Vec<(String, usize)>,
    pub parts: Vec<(String, usize)>,
}

impl LabeledAssignment {
    pub fn resolve(&self, inst: &Instance) -> Result<Assignment, AssignmentError> {
        Assignment::from_labeled(inst, &self.machines, &self.parts)
    }

    pub fn from_assignment(inst: &Instance, a: &Assignment) -> Self {
        Self {
            machines: a.labeled_machines(inst).map(|(l, c)| (l.to_owned(), c)).collect(),
            parts: a.labeled_parts(inst).map(|(l, c)| (l.to_owned(), c)).collect(),
        }
    }
}

pub fn parse_assignment(text: &str) -> Result<LabeledAssignment, MalformedAssignment> {
    let mut out = LabeledAssignment::default();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |reason: String| MalformedAssignment { line: line_no, reason };
        let [kind, label, index] = fields[..] else {
            return Err(bad(format!("expected `machine|part <label> <index>`, found {line:?}")));
        };
        let index: usize = index
            .parse()
            .map_err(|_| bad(format!("invalid cell index {index:?}")))?;
        match kind {
            "machine" => out.machines.push((label.to_owned(), index)),
            "part" => out.parts.push((label.to_owned(), index)),
            other => return Err(bad(format!("unknown entry kind {other:?}"))),
        }
    }
    Ok(out)
}

pub fn serialize_assignment(inst: &Instance, a: &Assignment) -> String {
    let mut out = String::from("# machine <label> <cell>, part <label> <family>\n");
    for (label, cell) in a.labeled_machines(inst) {
        let _ = writeln!(out, "machine {label} {cell}");
    }
    for (label, family) in a.labeled_parts(inst) {
        let _ = writeln!(out, "part {label} {family}");
    }
    out
}

/// JSON body of `POST /api/score`: label → 1-based cell index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentBody {
    #[serde(default)]
    pub machines: BTreeMap<String, usize>,
    #[serde(default)]
    pub parts: BTreeMap<String, usize>,
}

impl From<&AssignmentBody> for LabeledAssignment {
    fn from(body: &AssignmentBody) -> Self {
        Self {
            machines: body.machines.iter().map(|(l, &c)| (l.clone(), c)).collect(),
            parts: body.parts.iter().map(|(l, &c)| (l.clone(), c)).collect(),
        }
    }
}

impl From<&LabeledAssignment> for AssignmentBody {
    fn from(a: &LabeledAssignment) -> Self {
        Self {
            machines: a.machines.iter().cloned().collect(),
            parts: a.parts.iter().cloned().collect(),
        }
    }
}
