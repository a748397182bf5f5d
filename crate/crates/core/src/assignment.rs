//! Machine→cell and part→family maps, independent of how they were produced.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("unknown machine label(s): {}", .0.join(", "))]
    UnknownMachines(Vec<String>),
    #[error("unknown part label(s): {}", .0.join(", "))]
    UnknownParts(Vec<String>),
    #[error("unassigned element(s): {}", .0.join(", "))]
    Unassigned(Vec<String>),
    #[error("{kind} {label} assigned more than once")]
    Duplicate { kind: &'static str, label: String },
    #[error("{kind} {label}: cell index must be at least 1")]
    ZeroIndex { kind: &'static str, label: String },
    #[error("assignment covers {machines} machines and {parts} parts, instance has {expected_machines} and {expected_parts}")]
    Shape {
        machines: usize,
        parts: usize,
        expected_machines: usize,
        expected_parts: usize,
    },
}

/// Cell indices are 1-based; family `k` belongs to cell `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub n_cells: usize,
    pub machine_cell: Vec<usize>,
    pub part_family: Vec<usize>,
}

impl Assignment {
    /// `n_cells` is the largest index mentioned by any machine or part.
    pub fn new(machine_cell: Vec<usize>, part_family: Vec<usize>) -> Self {
        let n_cells = machine_cell.iter().chain(&part_family).copied().max().unwrap_or(0);
        Self {
            n_cells,
            machine_cell,
            part_family,
        }
    }

    /// Everything in cell 1.
    pub fn single_cell(inst: &Instance) -> Self {
        Self::new(vec![1; inst.machine_count()], vec![1; inst.part_count()])
    }

    pub fn check_shape(&self, inst: &Instance) -> Result<(), AssignmentError> {
        if self.machine_cell.len() != inst.machine_count() || self.part_family.len() != inst.part_count() {
            return Err(AssignmentError::Shape {
                machines: self.machine_cell.len(),
                parts: self.part_family.len(),
                expected_machines: inst.machine_count(),
                expected_parts: inst.part_count(),
            });
        }
        Ok(())
    }

    /// Builds from `(label, index)` pairs, rejecting unknown, repeated, or
    /// missing labels and zero indices.
    pub fn from_labeled(
        inst: &Instance,
        machines: &[(String, usize)],
        parts: &[(String, usize)],
    ) -> Result<Self, AssignmentError> {
        let machine_cell =
            resolve("machine", inst.machine_labels(), machines, |l| inst.machine_index(l)).map_err(|e| match e {
                Resolve::Unknown(v) => AssignmentError::UnknownMachines(v),
                Resolve::Other(e) => e,
            });
        let part_family = resolve("part", inst.part_labels(), parts, |l| inst.part_index(l)).map_err(|e| match e {
            Resolve::Unknown(v) => AssignmentError::UnknownParts(v),
            Resolve::Other(e) => e,
        });
        let machine_cell = machine_cell?;
        let part_family = part_family?;

        let mut missing: Vec<String> = Vec::new();
        for (k, slot) in machine_cell.iter().enumerate() {
            if slot.is_none() {
                missing.push(format!("machine {}", inst.machine_labels()[k]));
            }
        }
        for (k, slot) in part_family.iter().enumerate() {
            if slot.is_none() {
                missing.push(format!("part {}", inst.part_labels()[k]));
            }
        }
        if !missing.is_empty() {
            return Err(AssignmentError::Unassigned(missing));
        }
        Ok(Self::new(
            machine_cell.into_iter().flatten().collect(),
            part_family.into_iter().flatten().collect(),
        ))
    }

    /// Labeled pairs in instance order.
    pub fn labeled_machines<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = (&'a str, usize)> {
        inst.machine_labels()
            .iter()
            .map(String::as_str)
            .zip(self.machine_cell.iter().copied())
    }

    pub fn labeled_parts<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = (&'a str, usize)> {
        inst.part_labels()
            .iter()
            .map(String::as_str)
            .zip(self.part_family.iter().copied())
    }

    /// The machine partition as a set of sets, ignoring cell numbering.
    pub fn machine_partition(&self, labels: &[String]) -> BTreeSet<BTreeSet<String>> {
        group(labels, &self.machine_cell)
    }

    pub fn part_partition(&self, labels: &[String]) -> BTreeSet<BTreeSet<String>> {
        group(labels, &self.part_family)
    }

    /// Parts whose machines lie in two or more cells, zero-based.
    pub fn spanning_parts(&self, inst: &Instance) -> Vec<usize> {
        (0..inst.part_count())
            .filter(|&i| {
                let cells: BTreeSet<usize> = inst.machines_of(i).map(|j| self.machine_cell[j]).collect();
                cells.len() >= 2
            })
            .collect()
    }
}

fn group(labels: &[String], index: &[usize]) -> BTreeSet<BTreeSet<String>> {
    let n = index.iter().copied().max().unwrap_or(0);
    (1..=n)
        .map(|c| {
            labels
                .iter()
                .zip(index)
                .filter(|(_, &k)| k == c)
                .map(|(l, _)| l.clone())
                .collect::<BTreeSet<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

enum Resolve {
    Unknown(Vec<String>),
    Other(AssignmentError),
}

fn resolve(
    kind: &'static str,
    labels: &[String],
    pairs: &[(String, usize)],
    index_of: impl Fn(&str) -> Option<usize>,
) -> Result<Vec<Option<usize>>, Resolve> {
    let mut slots = vec![None; labels.len()];
    let mut unknown = Vec::new();
    for (label, cell) in pairs {
        let Some(k) = index_of(label) else {
            unknown.push(label.clone());
            continue;
        };
        if *cell == 0 {
            return Err(Resolve::Other(AssignmentError::ZeroIndex {
                kind,
                label: label.clone(),
            }));
        }
        if slots[k].replace(*cell).is_some() {
            return Err(Resolve::Other(AssignmentError::Duplicate {
                kind,
                label: label.clone(),
            }));
        }
    }
    if !unknown.is_empty() {
        return Err(Resolve::Unknown(unknown));
    }
    Ok(slots)
}
