//! Grouping-quality criteria and the block-diagonal view of a solution.

mod oracle;

pub use oracle::{
    oracle_best_partition, set_partitions, Objective, OracleError, OracleOutcome, SetPartitions, ORACLE_MAX_MACHINES,
};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::assignment::{Assignment, AssignmentError};
use crate::instance::Instance;
use crate::scalar::Scalar;

/// Exceptional elements, voids, and the three derived percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<T = f64> {
    pub ue: usize,
    pub ee: usize,
    pub ve: usize,
    /// `Σ_k m_k · p_k`.
    pub denominator_mu: usize,
    pub pe: T,
    pub mu: T,
    pub ge: T,
    pub warnings: Vec<String>,
}

impl<T: Scalar> MetricsReport<T> {
    /// `PE / MU / GE` rounded to two decimals.
    pub fn summary(&self) -> String {
        format!(
            "PE {:.2}% | MU {:.2}% | GE {:.2}%",
            crate::scalar::round_half_away(self.pe, 2),
            crate::scalar::round_half_away(self.mu, 2),
            crate::scalar::round_half_away(self.ge, 2)
        )
    }

    fn from_counts(ue: usize, ee: usize, ve: usize, denominator_mu: usize, warnings: Vec<String>) -> Self {
        let hundred = T::lit(100.0);
        let inside = T::from_count(ue - ee);
        let ratio = |num: T, den: usize| {
            if den == 0 {
                T::zero()
            } else {
                hundred * num / T::from_count(den)
            }
        };
        Self {
            ue,
            ee,
            ve,
            denominator_mu,
            pe: ratio(T::from_count(ee), ue),
            mu: ratio(inside, denominator_mu),
            ge: ratio(inside, ue + ve),
            warnings,
        }
    }
}

/// Counts every (part, machine) pair against the diagonal blocks.
pub fn score<T: Scalar>(inst: &Instance, sol: &Assignment) -> Result<MetricsReport<T>, AssignmentError> {
    sol.check_shape(inst)?;
    let mut ee = 0;
    let mut ve = 0;
    let mut ue = 0;
    let mut in_block_cells = 0;
    for i in 0..inst.part_count() {
        let family = sol.part_family[i];
        for j in 0..inst.machine_count() {
            let inside = sol.machine_cell[j] == family;
            match (inst.requires(i, j), inside) {
                (true, true) => ue += 1,
                (true, false) => {
                    ue += 1;
                    ee += 1;
                }
                (false, true) => ve += 1,
                (false, false) => {}
            }
            if inside {
                in_block_cells += 1;
            }
        }
    }

    let mut warnings = Vec::new();
    for c in 1..=sol.n_cells {
        let has_machine = sol.machine_cell.contains(&c);
        let has_part = sol.part_family.contains(&c);
        if has_machine && !has_part {
            warnings.push(format!("family {c} is empty; MU overstates utilization"));
        }
        if has_part && !has_machine {
            warnings.push(format!("cell {c} has no machines; its parts are all exceptional"));
        }
    }
    Ok(MetricsReport::from_counts(ue, ee, ve, in_block_cells, warnings))
}

/// One entry of the reordered matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    InBlock,
    Exceptional,
    Void,
    Outside,
}

impl Mark {
    pub fn glyph(self) -> char {
        match self {
            Mark::InBlock => '1',
            Mark::Exceptional => '*',
            Mark::Void => '·',
            Mark::Outside => ' ',
        }
    }
}

/// Incidence matrix with machines and parts regrouped by cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockView {
    /// Zero-based machine indices, column order.
    pub machine_order: Vec<usize>,
    /// Zero-based part indices, row order.
    pub part_order: Vec<usize>,
    pub machine_labels: Vec<String>,
    pub part_labels: Vec<String>,
    /// Cell of each displayed column.
    pub column_cells: Vec<usize>,
    /// Family of each displayed row.
    pub row_families: Vec<usize>,
    pub marks: Vec<Vec<Mark>>,
}

impl BlockView {
    pub fn count(&self, mark: Mark) -> usize {
        self.marks.iter().flatten().filter(|&&m| m == mark).count()
    }

    /// Fixed-width text with `|` between cells and a rule between families.
    pub fn render(&self) -> String {
        let label_w = self.part_labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
        let col_w = self
            .machine_labels
            .iter()
            .map(|l| l.chars().count())
            .max()
            .unwrap_or(1)
            .max(1);
        let boundary = |k: usize| k > 0 && self.column_cells[k] != self.column_cells[k - 1];

        let mut header = format!("{:label_w$}", "");
        for (k, label) in self.machine_labels.iter().enumerate() {
            header.push_str(if boundary(k) { " | " } else { " " });
            let _ = write!(header, "{label:>col_w$}");
        }
        let width = header.chars().count();

        let mut out = String::new();
        out.push_str(header.trim_end());
        out.push('\n');
        for (r, label) in self.part_labels.iter().enumerate() {
            if r > 0 && self.row_families[r] != self.row_families[r - 1] {
                out.push_str(&"-".repeat(width));
                out.push('\n');
            }
            let mut line = format!("{label:<label_w$}");
            for (k, mark) in self.marks[r].iter().enumerate() {
                line.push_str(if boundary(k) { " | " } else { " " });
                let _ = write!(line, "{:>col_w$}", mark.glyph());
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

pub fn block_view(inst: &Instance, sol: &Assignment) -> Result<BlockView, AssignmentError> {
    sol.check_shape(inst)?;
    let mut machine_order: Vec<usize> = (0..inst.machine_count()).collect();
    machine_order.sort_by_key(|&j| (sol.machine_cell[j], j));
    let mut part_order: Vec<usize> = (0..inst.part_count()).collect();
    part_order.sort_by_key(|&i| (sol.part_family[i], i));

    let marks = part_order
        .iter()
        .map(|&i| {
            machine_order
                .iter()
                .map(|&j| {
                    let inside = sol.machine_cell[j] == sol.part_family[i];
                    match (inst.requires(i, j), inside) {
                        (true, true) => Mark::InBlock,
                        (true, false) => Mark::Exceptional,
                        (false, true) => Mark::Void,
                        (false, false) => Mark::Outside,
                    }
                })
                .collect()
        })
        .collect();
    Ok(BlockView {
        machine_labels: machine_order
            .iter()
            .map(|&j| inst.machine_labels()[j].clone())
            .collect(),
        part_labels: part_order.iter().map(|&i| inst.part_labels()[i].clone()).collect(),
        column_cells: machine_order.iter().map(|&j| sol.machine_cell[j]).collect(),
        row_families: part_order.iter().map(|&i| sol.part_family[i]).collect(),
        machine_order,
        part_order,
        marks,
    })
}
