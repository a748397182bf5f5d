//! The `cellform/1` solution document consumed by the designer UI.

use cellform_core::cellform::direction_deg;
use cellform_core::scalar::round_half_away;
use cellform_core::{
    score, Analysis, Assignment, AssignmentError, ClusterConfig, Instance, InstanceError, MetricsReport,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "cellform/1";

fn six(x: f64) -> f64 {
    round_half_away(x, 6)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceEcho {
    pub name: String,
    pub machines: usize,
    pub parts: usize,
    pub machine_labels: Vec<String>,
    pub part_labels: Vec<String>,
    /// Part rows as `0`/`1` strings, one character per machine.
    pub incidence: Vec<String>,
}

impl InstanceEcho {
    pub fn new(name: &str, inst: &Instance) -> Self {
        Self {
            name: name.to_owned(),
            machines: inst.machine_count(),
            parts: inst.part_count(),
            machine_labels: inst.machine_labels().to_vec(),
            part_labels: inst.part_labels().to_vec(),
            incidence: (0..inst.part_count())
                .map(|i| {
                    (0..inst.machine_count())
                        .map(|j| if inst.requires(i, j) { '1' } else { '0' })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance, InstanceError> {
        let rows: Vec<Vec<bool>> = self
            .incidence
            .iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect();
        Instance::new(self.machine_labels.clone(), self.part_labels.clone(), &rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachinePoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub angle_deg: f64,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub angle_deg: f64,
    pub family: usize,
    /// Machines this part visits.
    pub machines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionExport {
    pub schema: String,
    pub instance: InstanceEcho,
    pub config: ClusterConfig,
    /// Full square matrix, rows and columns in machine-label order.
    pub similarity: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_variance: f64,
    pub degenerate_plane: bool,
    pub machine_loadings: Vec<MachinePoint>,
    pub part_scores: Vec<PartPoint>,
    pub n_cells: usize,
    pub machine_cell: Vec<usize>,
    pub part_family: Vec<usize>,
    pub exceptional_machines: Vec<String>,
    pub exceptional_parts: Vec<String>,
    pub metrics: MetricsReport,
    pub warnings: Vec<String>,
}

impl SolutionExport {
    pub fn build(name: &str, inst: &Instance, analysis: &Analysis) -> Result<Self, AssignmentError> {
        let sol = &analysis.solution;
        let metrics = score::<f64>(inst, &sol.assignment)?;
        let m = inst.machine_count();
        let similarity = (0..m)
            .map(|i| (0..m).map(|j| six(analysis.similarity.get(i, j))).collect())
            .collect();
        let machine_loadings = analysis
            .plane
            .machine_loadings
            .iter()
            .enumerate()
            .map(|(j, &[x, y])| MachinePoint {
                label: inst.machine_labels()[j].clone(),
                x: six(x),
                y: six(y),
                angle_deg: six(analysis.angles[j]),
                cell: sol.machine_cell()[j],
            })
            .collect();
        let part_scores = analysis
            .plane
            .part_scores
            .iter()
            .enumerate()
            .map(|(i, &[x, y])| PartPoint {
                label: inst.part_labels()[i].clone(),
                x: six(x),
                y: six(y),
                angle_deg: six(direction_deg(x, y)),
                family: sol.part_family()[i],
                machines: inst.machines_of(i).map(|j| inst.machine_labels()[j].clone()).collect(),
            })
            .collect();
        let mut warnings = sol.warnings.clone();
        for w in &metrics.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
        Ok(Self {
            schema: SCHEMA.to_owned(),
            instance: InstanceEcho::new(name, inst),
            config: analysis.config.clone(),
            similarity,
            eigenvalues: analysis.eigen.eigenvalues.iter().map(|&l| six(l)).collect(),
            explained_variance: six(analysis.plane.explained_variance),
            degenerate_plane: analysis.plane.degenerate,
            machine_loadings,
            part_scores,
            n_cells: sol.n_cells(),
            machine_cell: sol.machine_cell().to_vec(),
            part_family: sol.part_family().to_vec(),
            exceptional_machines: sol.exceptional_machines.clone(),
            exceptional_parts: sol.exceptional_parts.clone(),
            metrics,
            warnings,
        })
    }

    /// The cell assignment embedded in the document.
    pub fn assignment(&self) -> Assignment {
        Assignment {
            n_cells: self.n_cells,
            machine_cell: self.machine_cell.clone(),
            part_family: self.part_family.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("export serializes")
    }
}
