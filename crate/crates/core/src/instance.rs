//! Machine-part incidence matrices: validation, the `.cfm` text format, and
//! the embedded reference instances.
//!
//! In memory an [`Instance`] is always stored part-rows: row `i` is a part,
//! column `j` is a machine, and entry `(i, j)` is set iff part `i` visits
//! machine `j`. Files may declare either orientation; machine-rows bodies are
//! transposed on load.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: malformed label list: {reason}")]
    MalformedLabels { line: usize, reason: String },
    #[error("line {line}: expected {expected} entries in row, found {found}")]
    RowLength { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: non-binary character {found:?}")]
    NonBinary { line: usize, column: usize, found: char },
    #[error("expected {expected} matrix rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("{kind} label list has {found} entries, expected {expected}")]
    LabelCount {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{kind} label at position {position} is empty")]
    EmptyLabel { kind: &'static str, position: usize },
    #[error("duplicate {kind} label {label:?} at position {position}")]
    DuplicateLabel {
        kind: &'static str,
        label: String,
        position: usize,
    },
    #[error("need at least 2 machines and 2 parts, got {machines} machines and {parts} parts")]
    TooSmall { machines: usize, parts: usize },
    #[error("part has no operations: {label} (row {row})")]
    EmptyPart { label: String, row: usize },
    #[error("machine is used by no part: {label} (column {column})")]
    UnusedMachine { label: String, column: usize },
    #[error("machine is used by every part: {label} (column {column})")]
    SaturatedMachine { label: String, column: usize },
}

/// Layout of the matrix body in an instance file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    PartRows,
    MachineRows,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::PartRows => "part-rows",
            Orientation::MachineRows => "machine-rows",
        }
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "part-rows" => Ok(Orientation::PartRows),
            "machine-rows" => Ok(Orientation::MachineRows),
            other => Err(format!("unknown orientation {other:?}")),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated binary machine-part incidence matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    machine_labels: Vec<String>,
    part_labels: Vec<String>,
    incidence: Matrix<bool>,
}

impl Instance {
    /// Builds an instance from part-rows data, checking every invariant.
    pub fn new(
        machine_labels: Vec<String>,
        part_labels: Vec<String>,
        rows: &[Vec<bool>],
    ) -> Result<Self, InstanceError> {
        let m = machine_labels.len();
        let p = part_labels.len();
        if rows.len() != p {
            return Err(InstanceError::RowCount {
                expected: p,
                found: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(InstanceError::RowLength {
                    line: i + 1,
                    expected: m,
                    found: row.len(),
                });
            }
        }
        let incidence = Matrix::from_fn(p, m, |i, j| rows[i][j]);
        Self::from_parts(machine_labels, part_labels, incidence)
    }

    /// Builds an instance with the default `M1..Mm` / `P1..Pp` labels.
    pub fn with_default_labels(rows: &[Vec<bool>]) -> Result<Self, InstanceError> {
        let m = rows.first().map_or(0, Vec::len);
        Self::new(default_labels('M', m), default_labels('P', rows.len()), rows)
    }

    fn from_parts(
        machine_labels: Vec<String>,
        part_labels: Vec<String>,
        incidence: Matrix<bool>,
    ) -> Result<Self, InstanceError> {
        let m = machine_labels.len();
        let p = part_labels.len();
        if m < 2 || p < 2 {
            return Err(InstanceError::TooSmall { machines: m, parts: p });
        }
        check_labels("machine", &machine_labels)?;
        check_labels("part", &part_labels)?;

        for (i, label) in part_labels.iter().enumerate() {
            if !incidence.row(i).iter().any(|&a| a) {
                return Err(InstanceError::EmptyPart {
                    label: label.clone(),
                    row: i + 1,
                });
            }
        }
        for (j, label) in machine_labels.iter().enumerate() {
            let used = incidence.column(j).filter(|&a| a).count();
            if used == 0 {
                return Err(InstanceError::UnusedMachine {
                    label: label.clone(),
                    column: j + 1,
                });
            }
            if used == p {
                return Err(InstanceError::SaturatedMachine {
                    label: label.clone(),
                    column: j + 1,
                });
            }
        }
        Ok(Self {
            machine_labels,
            part_labels,
            incidence,
        })
    }

    pub fn machine_count(&self) -> usize {
        self.machine_labels.len()
    }

    pub fn part_count(&self) -> usize {
        self.part_labels.len()
    }

    pub fn machine_labels(&self) -> &[String] {
        &self.machine_labels
    }

    pub fn part_labels(&self) -> &[String] {
        &self.part_labels
    }

    /// Whether `part` requires `machine` (both zero-based).
    #[inline]
    pub fn requires(&self, part: usize, machine: usize) -> bool {
        self.incidence.get(part, machine)
    }

    pub fn incidence(&self) -> &Matrix<bool> {
        &self.incidence
    }

    /// Machines (zero-based) visited by `part`, in index order.
    pub fn machines_of(&self, part: usize) -> impl Iterator<Item = usize> + '_ {
        self.incidence
            .row(part)
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| a.then_some(j))
    }

    /// Number of parts visiting `machine`.
    pub fn machine_load(&self, machine: usize) -> usize {
        self.incidence.column(machine).filter(|&a| a).count()
    }

    /// Total number of 1-entries (UE).
    pub fn unity_count(&self) -> usize {
        (0..self.part_count())
            .map(|i| self.incidence.row(i).iter().filter(|&&a| a).count())
            .sum()
    }

    pub fn machine_index(&self, label: &str) -> Option<usize> {
        self.machine_labels.iter().position(|l| l == label)
    }

    pub fn part_index(&self, label: &str) -> Option<usize> {
        self.part_labels.iter().position(|l| l == label)
    }

    /// Reorders machine columns: new column `k` is old column `order[k]`.
    pub fn permute_machines(&self, order: &[usize]) -> Result<Self, InstanceError> {
        assert_eq!(order.len(), self.machine_count(), "permutation length");
        let labels = order.iter().map(|&j| self.machine_labels[j].clone()).collect();
        let incidence = Matrix::from_fn(self.part_count(), order.len(), |i, k| self.incidence.get(i, order[k]));
        Self::from_parts(labels, self.part_labels.clone(), incidence)
    }

    /// Reorders part rows: new row `k` is old row `order[k]`.
    pub fn permute_parts(&self, order: &[usize]) -> Result<Self, InstanceError> {
        assert_eq!(order.len(), self.part_count(), "permutation length");
        let labels = order.iter().map(|&i| self.part_labels[i].clone()).collect();
        let incidence = Matrix::from_fn(order.len(), self.machine_count(), |k, j| {
            self.incidence.get(order[k], j)
        });
        Self::from_parts(self.machine_labels.clone(), labels, incidence)
    }
}

fn default_labels(prefix: char, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

fn check_labels(kind: &'static str, labels: &[String]) -> Result<(), InstanceError> {
    let mut seen = HashSet::with_capacity(labels.len());
    for (k, label) in labels.iter().enumerate() {
        if label.is_empty() {
            return Err(InstanceError::EmptyLabel { kind, position: k + 1 });
        }
        if !seen.insert(label.as_str()) {
            return Err(InstanceError::DuplicateLabel {
                kind,
                label: label.clone(),
                position: k + 1,
            });
        }
    }
    Ok(())
}

struct Header {
    machines: usize,
    parts: usize,
    orientation: Orientation,
}

fn parse_header(line_no: usize, line: &str) -> Result<Header, InstanceError> {
    let bad = |reason: String| InstanceError::MalformedHeader { line: line_no, reason };
    let mut machines = None;
    let mut parts = None;
    let mut orientation = None;
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, found {token:?}")))?;
        match key {
            "machines" => {
                machines = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| bad(format!("invalid machine count {value:?}")))?,
                )
            }
            "parts" => {
                parts = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| bad(format!("invalid part count {value:?}")))?,
                )
            }
            "orientation" => orientation = Some(value.parse::<Orientation>().map_err(bad)?),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    Ok(Header {
        machines: machines.ok_or_else(|| bad("missing machines=<m>".into()))?,
        parts: parts.ok_or_else(|| bad("missing parts=<p>".into()))?,
        orientation: orientation.unwrap_or(Orientation::PartRows),
    })
}

fn parse_label_list(
    line_no: usize,
    value: &str,
    kind: &'static str,
    expected: usize,
) -> Result<Vec<String>, InstanceError> {
    let labels: Vec<String> = value.split(',').map(|s| s.trim().to_owned()).collect();
    if labels.len() != expected {
        return Err(InstanceError::MalformedLabels {
            line: line_no,
            reason: format!("{} {kind} labels, expected {expected}", labels.len()),
        });
    }
    Ok(labels)
}

fn parse_row(line_no: usize, line: &str, expected: usize) -> Result<Vec<bool>, InstanceError> {
    let mut bits = Vec::with_capacity(expected);
    for (col, ch) in line.chars().enumerate() {
        match ch {
            '0' => bits.push(false),
            '1' => bits.push(true),
            ' ' | '\t' => {}
            other => {
                return Err(InstanceError::NonBinary {
                    line: line_no,
                    column: col + 1,
                    found: other,
                })
            }
        }
    }
    if bits.len() != expected {
        return Err(InstanceError::RowLength {
            line: line_no,
            expected,
            found: bits.len(),
        });
    }
    Ok(bits)
}

/// Parses the `.cfm` instance format.
///
/// ```text
/// machines=3 parts=2 orientation=part-rows
/// machine-labels=A,B,C
/// 1 1 0
/// 0 1 1
/// ```
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end_matches('\r').trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header_text) = lines.next().ok_or(InstanceError::MalformedHeader {
        line: 1,
        reason: "empty input".into(),
    })?;
    let header = parse_header(header_line, header_text)?;
    let (m, p) = (header.machines, header.parts);
    let (row_count, row_len) = match header.orientation {
        Orientation::PartRows => (p, m),
        Orientation::MachineRows => (m, p),
    };

    let mut machine_labels = None;
    let mut part_labels = None;
    let mut body = Vec::with_capacity(row_count);
    for (line_no, line) in lines {
        if let Some(value) = line.strip_prefix("machine-labels=") {
            if !body.is_empty() || machine_labels.is_some() {
                return Err(InstanceError::MalformedLabels {
                    line: line_no,
                    reason: "machine labels must precede the matrix and appear once".into(),
                });
            }
            machine_labels = Some(parse_label_list(line_no, value, "machine", m)?);
        } else if let Some(value) = line.strip_prefix("part-labels=") {
            if !body.is_empty() || part_labels.is_some() {
                return Err(InstanceError::MalformedLabels {
                    line: line_no,
                    reason: "part labels must precede the matrix and appear once".into(),
                });
            }
            part_labels = Some(parse_label_list(line_no, value, "part", p)?);
        } else {
            if body.len() == row_count {
                return Err(InstanceError::RowCount {
                    expected: row_count,
                    found: row_count + 1,
                });
            }
            body.push(parse_row(line_no, line, row_len)?);
        }
    }
    if body.len() != row_count {
        return Err(InstanceError::RowCount {
            expected: row_count,
            found: body.len(),
        });
    }

    let incidence = match header.orientation {
        Orientation::PartRows => Matrix::from_fn(p, m, |i, j| body[i][j]),
        Orientation::MachineRows => Matrix::from_fn(p, m, |i, j| body[j][i]),
    };
    Instance::from_parts(
        machine_labels.unwrap_or_else(|| default_labels('M', m)),
        part_labels.unwrap_or_else(|| default_labels('P', p)),
        incidence,
    )
}

/// Writes `inst` in the `.cfm` format, part-rows, with explicit labels.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "machines={} parts={} orientation={}",
        inst.machine_count(),
        inst.part_count(),
        Orientation::PartRows
    );
    let _ = writeln!(out, "machine-labels={}", inst.machine_labels.join(","));
    let _ = writeln!(out, "part-labels={}", inst.part_labels.join(","));
    for i in 0..inst.part_count() {
        let row: Vec<&str> = inst
            .incidence
            .row(i)
            .iter()
            .map(|&a| if a { "1" } else { "0" })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

const BOCTOR_7X11: [[u8; 7]; 11] = [
    [1, 1, 0, 0, 0, 0, 0],
    [0, 1, 1, 0, 0, 0, 0],
    [1, 0, 0, 0, 1, 1, 0],
    [0, 0, 0, 1, 0, 1, 0],
    [0, 0, 0, 1, 0, 0, 1],
    [0, 1, 1, 0, 0, 0, 0],
    [1, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 1],
    [0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 1],
    [1, 0, 0, 0, 0, 1, 0],
];

/// Name of the embedded 7-machine, 11-part reference instance.
pub const BOCTOR_7X11_NAME: &str = "boctor-7x11";

/// Embedded instances, keyed by stable names.
pub fn builtin_instances() -> Vec<(&'static str, Instance)> {
    let rows: Vec<Vec<bool>> = BOCTOR_7X11
        .iter()
        .map(|r| r.iter().map(|&a| a == 1).collect())
        .collect();
    let boctor = Instance::with_default_labels(&rows).expect("embedded instance is valid");
    vec![(BOCTOR_7X11_NAME, boctor)]
}

pub fn builtin_instance(name: &str) -> Option<Instance> {
    builtin_instances()
        .into_iter()
        .find_map(|(n, inst)| (n == name).then_some(inst))
}
