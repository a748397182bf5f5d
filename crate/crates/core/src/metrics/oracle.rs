//! Exhaustive search over machine partitions, used to bound the solver.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{score, MetricsReport};
use crate::assignment::Assignment;
use crate::cellform::CellSolution;
use crate::instance::Instance;
use crate::scalar::Scalar;

/// Largest machine count the oracle will enumerate.
pub const ORACLE_MAX_MACHINES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle enumerates at most {ORACLE_MAX_MACHINES} machines, instance has {0}")]
    TooManyMachines(usize),
    #[error("cell count must be in 1..={machines}, got {requested}")]
    BadCellCount { requested: usize, machines: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Pe,
    Mu,
    Ge,
}

impl Objective {
    fn value<T: Scalar>(self, r: &MetricsReport<T>) -> T {
        match self {
            Objective::Pe => r.pe,
            Objective::Mu => r.mu,
            Objective::Ge => r.ge,
        }
    }

    fn better<T: Scalar>(self, a: T, b: T) -> bool {
        match self {
            Objective::Pe => a < b,
            Objective::Mu | Objective::Ge => a > b,
        }
    }
}

/// Set partitions of `0..n` into exactly `k` non-empty blocks, as restricted
/// growth strings in lexicographic order.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    current: Option<Vec<usize>>,
    k: usize,
}

pub fn set_partitions(n: usize, k: usize) -> SetPartitions {
    let current = (k >= 1 && k <= n).then(|| {
        let mut a = vec![0; n - k + 1];
        a.extend(1..k);
        a
    });
    SetPartitions { current, k }
}

impl SetPartitions {
    fn advance(a: &mut [usize], k: usize) -> bool {
        let n = a.len();
        for i in (1..n).rev() {
            let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] + 1 > prefix_max + 1 || a[i] + 1 >= k {
                continue;
            }
            let head_max = prefix_max.max(a[i] + 1);
            let need = k - 1 - head_max;
            let room = n - i - 1;
            if need > room {
                continue;
            }
            a[i] += 1;
            for slot in &mut a[i + 1..n - need] {
                *slot = 0;
            }
            for (t, slot) in a[n - need..].iter_mut().enumerate() {
                *slot = head_max + 1 + t;
            }
            return true;
        }
        false
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        self.current = Self::advance(&mut next, self.k).then_some(next);
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome<T = f64> {
    pub solution: CellSolution,
    pub report: MetricsReport<T>,
    pub partitions_evaluated: usize,
    /// Lowest and highest objective value over every enumerated partition
    /// and every placement of the parts.
    pub objective_range: (T, T),
}

/// Per-part numerator and denominator terms of an objective written as
/// `(n0 + Σ n_i) / (d0 + Σ d_i)`, for a fixed machine partition.
struct RatioTerms {
    n0: i64,
    d0: i64,
    /// `terms[i][c]` is `(n_i, d_i)` when part `i` joins cell `c + 1`.
    terms: Vec<Vec<(i64, i64)>>,
}

impl RatioTerms {
    fn new(inst: &Instance, machine_cell: &[usize], n_cells: usize, objective: Objective) -> Self {
        let mut size = vec![0i64; n_cells];
        for &c in machine_cell {
            size[c - 1] += 1;
        }
        let ue = inst.unity_count() as i64;
        let terms = (0..inst.part_count())
            .map(|i| {
                let mut ones = vec![0i64; n_cells];
                for j in inst.machines_of(i) {
                    ones[machine_cell[j] - 1] += 1;
                }
                (0..n_cells)
                    .map(|c| match objective {
                        Objective::Pe => (-ones[c], 0),
                        Objective::Mu => (ones[c], size[c]),
                        Objective::Ge => (ones[c], size[c] - ones[c]),
                    })
                    .collect()
            })
            .collect();
        let (n0, d0) = match objective {
            Objective::Pe => (ue, ue),
            Objective::Mu => (0, 0),
            Objective::Ge => (0, ue),
        };
        Self { n0, d0, terms }
    }

    fn ratio(&self, choice: &[usize]) -> (i64, i64) {
        choice
            .iter()
            .zip(&self.terms)
            .fold((self.n0, self.d0), |(n, d), (&c, t)| (n + t[c].0, d + t[c].1))
    }

    /// Dinkelbach iteration in exact integer arithmetic: the part choice
    /// that maximizes (or, with `maximize == false`, minimizes) the ratio.
    /// Per-part ties go to the lowest cell.
    fn optimize(&self, maximize: bool) -> Vec<usize> {
        let sign = if maximize { 1 } else { -1 };
        let mut choice = vec![0usize; self.terms.len()];
        let (mut a, mut b) = self.ratio(&choice);
        loop {
            let next: Vec<usize> = self
                .terms
                .iter()
                .map(|t| {
                    let key = |c: usize| sign * (t[c].0 * b - a * t[c].1);
                    (1..t.len()).fold(0, |best, c| if key(c) > key(best) { c } else { best })
                })
                .collect();
            let (na, nb) = self.ratio(&next);
            // Compare na/nb against a/b; both denominators are positive.
            if sign * (na * b - a * nb) <= 0 {
                return choice;
            }
            choice = next;
            (a, b) = (na, nb);
        }
    }
}

fn families(choice: &[usize]) -> Vec<usize> {
    choice.iter().map(|&c| c + 1).collect()
}

/// Enumerates every partition of the machines into exactly `n_cells`
/// cells and, for each, the exactly optimal part families.
///
/// `objective_range` spans the worst and best objective value over all
/// assignments whose machines form exactly `n_cells` cells, with parts
/// placed freely.
pub fn oracle_best_partition<T: Scalar>(
    inst: &Instance,
    n_cells: usize,
    objective: Objective,
) -> Result<OracleOutcome<T>, OracleError> {
    let m = inst.machine_count();
    if m > ORACLE_MAX_MACHINES {
        return Err(OracleError::TooManyMachines(m));
    }
    if n_cells == 0 || n_cells > m {
        return Err(OracleError::BadCellCount {
            requested: n_cells,
            machines: m,
        });
    }

    let maximize = !matches!(objective, Objective::Pe);
    let mut best: Option<(Assignment, MetricsReport<T>)> = None;
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut evaluated = 0;
    for rgs in set_partitions(m, n_cells) {
        let machine_cell: Vec<usize> = rgs.iter().map(|&b| b + 1).collect();
        let terms = RatioTerms::new(inst, &machine_cell, n_cells, objective);
        let best_choice = terms.optimize(maximize);
        let worst_choice = terms.optimize(!maximize);
        let assignment = Assignment {
            n_cells,
            machine_cell,
            part_family: families(&best_choice),
        };
        let worst = Assignment {
            part_family: families(&worst_choice),
            ..assignment.clone()
        };
        let report = score::<T>(inst, &assignment).expect("shapes agree by construction");
        let worst_report = score::<T>(inst, &worst).expect("shapes agree by construction");
        let v = objective.value(&report);
        let w = objective.value(&worst_report);
        lo = lo.min(v).min(w);
        hi = hi.max(v).max(w);
        evaluated += 1;
        let replace = match &best {
            None => true,
            Some((_, r)) => objective.better(v, objective.value(r)),
        };
        if replace {
            best = Some((assignment, report));
        }
    }
    let (assignment, report) = best.expect("at least one partition exists");
    let exceptional_parts = assignment
        .spanning_parts(inst)
        .into_iter()
        .map(|i| inst.part_labels()[i].clone())
        .collect();
    Ok(OracleOutcome {
        solution: CellSolution {
            warnings: report.warnings.clone(),
            assignment,
            exceptional_machines: Vec::new(),
            exceptional_parts,
        },
        report,
        partitions_evaluated: evaluated,
        objective_range: (lo, hi),
    })
}
