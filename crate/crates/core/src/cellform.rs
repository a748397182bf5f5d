//! Angular clustering on the principal plane.
//!
//! Machines are sorted by the direction of their loading vectors and cut into
//! contiguous circular arcs at the widest gaps. Each part then joins the cell
//! of the machine line it sits closest to, among the machines it actually
//! visits.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::Assignment;
use crate::instance::Instance;
use crate::scalar::Scalar;
use crate::similarity::{
    correlation_matrix, machine_stats, standardize, MachineStats, SimilarityMatrix, StandardizedMatrix,
};
use crate::spectral::{eigendecompose, principal_plane, EigenSystem, PrincipalPlane, SpectralError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("invalid cluster configuration: {0}")]
    InvalidConfig(String),
    #[error("requested {requested} cells but there are only {machines} machines")]
    TooManyCells { requested: usize, machines: usize },
    #[error("requested {requested} cells but machine directions only separate into {separable}")]
    NotSeparable { requested: usize, separable: usize },
    #[error("machine {machine} has a zero loading; its direction is undefined")]
    ZeroLoading { machine: String },
    #[error("need at least 2 machines, got {0}")]
    TooFewMachines(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Tolerance, in degrees, under which two part-to-line distances count as tied.
const TIE_DEG: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig<T = f64> {
    /// Form exactly this many cells; `None` lets the gap threshold decide.
    pub n_cells: Option<usize>,
    pub gap_threshold_deg: T,
    /// Intra-cell spread above which an end machine is considered exceptional.
    pub independence_deg: T,
}

impl<T: Scalar> Default for ClusterConfig<T> {
    fn default() -> Self {
        Self {
            n_cells: None,
            gap_threshold_deg: T::lit(60.0),
            independence_deg: T::lit(90.0),
        }
    }
}

impl<T: Scalar> ClusterConfig<T> {
    pub fn with_cells(n_cells: usize) -> Self {
        Self {
            n_cells: Some(n_cells),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        let zero = T::zero();
        let half = T::lit(180.0);
        if !(self.gap_threshold_deg > zero && self.gap_threshold_deg < half) {
            return Err(ClusterError::InvalidConfig(format!(
                "gap threshold must lie in (0, 180) degrees, got {}",
                self.gap_threshold_deg
            )));
        }
        if !(self.independence_deg > zero && self.independence_deg <= half) {
            return Err(ClusterError::InvalidConfig(format!(
                "independence angle must lie in (0, 180] degrees, got {}",
                self.independence_deg
            )));
        }
        if self.n_cells == Some(0) {
            return Err(ClusterError::InvalidConfig("cell count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of the angular machine clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineClusters {
    pub n_cells: usize,
    /// 1-based cell per machine.
    pub machine_cell: Vec<usize>,
    /// Zero-based machines moved out of their arc.
    pub exceptional: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartFamilies {
    /// 1-based family per part.
    pub part_family: Vec<usize>,
    /// Zero-based parts visiting more than one cell.
    pub exceptional: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSolution {
    #[serde(flatten)]
    pub assignment: Assignment,
    pub exceptional_machines: Vec<String>,
    pub exceptional_parts: Vec<String>,
    pub warnings: Vec<String>,
}

impl CellSolution {
    pub fn n_cells(&self) -> usize {
        self.assignment.n_cells
    }

    pub fn machine_cell(&self) -> &[usize] {
        &self.assignment.machine_cell
    }

    pub fn part_family(&self) -> &[usize] {
        &self.assignment.part_family
    }
}

/// Angle in `[0, 360)` of `(x, y)` measured counterclockwise from +x.
pub fn direction_deg<T: Scalar>(x: T, y: T) -> T {
    let full = T::lit(360.0);
    let mut a = y.atan2(x).to_degrees();
    if a < T::zero() {
        a += full;
    }
    if a >= full {
        a = T::zero();
    }
    // Folds -0.0 into +0.0.
    a + T::zero()
}

/// Unsigned angle between two directions, in `[0, 180]`.
pub fn circular_distance<T: Scalar>(a: T, b: T) -> T {
    let full = T::lit(360.0);
    let d = (a - b).abs() % full;
    d.min(full - d)
}

/// Distance between a direction and an undirected line, in `[0, 90]`.
pub fn line_distance<T: Scalar>(direction: T, line: T) -> T {
    let theta = circular_distance(direction, line);
    theta.min(T::lit(180.0) - theta)
}

fn circular_mean<T: Scalar>(angles: impl Iterator<Item = T>) -> T {
    let (mut s, mut c) = (T::zero(), T::zero());
    for a in angles {
        let r = a.to_radians();
        s += r.sin();
        c += r.cos();
    }
    direction_deg(c, s)
}

/// Width of the smallest arc covering every angle in `members`.
fn spread<T: Scalar>(angles: &[T], members: &[usize]) -> T {
    if members.len() < 2 {
        return T::zero();
    }
    let mut sorted: Vec<T> = members.iter().map(|&j| angles[j]).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let largest = largest_circular_gap(&sorted);
    T::lit(360.0) - largest
}

fn largest_circular_gap<T: Scalar>(sorted: &[T]) -> T {
    let n = sorted.len();
    let mut largest = sorted[0] + T::lit(360.0) - sorted[n - 1];
    for w in sorted.windows(2) {
        largest = largest.max(w[1] - w[0]);
    }
    largest
}

fn max_pairwise<T: Scalar>(angles: &[T], members: &[usize]) -> T {
    let mut best = T::zero();
    for (k, &a) in members.iter().enumerate() {
        for &b in &members[k + 1..] {
            best = best.max(circular_distance(angles[a], angles[b]));
        }
    }
    best
}

/// Members of `members` at the two ends of their covering arc.
fn arc_endpoints<T: Scalar>(angles: &[T], members: &[usize]) -> (usize, usize) {
    let mut sorted = members.to_vec();
    sorted.sort_by(|&a, &b| {
        angles[a]
            .partial_cmp(&angles[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let n = sorted.len();
    // The covering arc starts right after the widest gap.
    let mut start = 0;
    let mut widest = angles[sorted[0]] + T::lit(360.0) - angles[sorted[n - 1]];
    for k in 1..n {
        let g = angles[sorted[k]] - angles[sorted[k - 1]];
        if g > widest {
            widest = g;
            start = k;
        }
    }
    (sorted[start], sorted[(start + n - 1) % n])
}

pub fn machine_angles<T: Scalar>(plane: &PrincipalPlane<T>, labels: &[String]) -> Result<Vec<T>, ClusterError> {
    plane
        .machine_loadings
        .iter()
        .enumerate()
        .map(|(j, &[x, y])| {
            if x.hypot(y) < T::zero_norm() {
                Err(ClusterError::ZeroLoading {
                    machine: labels.get(j).cloned().unwrap_or_else(|| format!("#{}", j + 1)),
                })
            } else {
                Ok(direction_deg(x, y))
            }
        })
        .collect()
}

/// Cuts the circle of machine directions into contiguous arcs.
pub fn cluster_machines<T: Scalar>(angles: &[T], cfg: &ClusterConfig<T>) -> Result<MachineClusters, ClusterError> {
    cfg.validate()?;
    let m = angles.len();
    if m < 2 {
        return Err(ClusterError::TooFewMachines(m));
    }
    if let Some(n) = cfg.n_cells {
        if n > m {
            return Err(ClusterError::TooManyCells {
                requested: n,
                machines: m,
            });
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        angles[a]
            .partial_cmp(&angles[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    // gaps[k] separates sorted positions k and k + 1 (wrapping).
    let gaps: Vec<T> = (0..m)
        .map(|k| {
            if k + 1 < m {
                angles[order[k + 1]] - angles[order[k]]
            } else {
                angles[order[0]] + T::lit(360.0) - angles[order[m - 1]]
            }
        })
        .collect();
    // Widest first, earliest position on ties.
    let mut by_width: Vec<usize> = (0..m).collect();
    by_width.sort_by(|&a, &b| {
        gaps[b]
            .partial_cmp(&gaps[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut splits: Vec<usize> = match cfg.n_cells {
        Some(n) => {
            let separable = gaps.iter().filter(|&&g| g > T::zero()).count();
            if separable < n {
                return Err(ClusterError::NotSeparable {
                    requested: n,
                    separable,
                });
            }
            by_width[..n].to_vec()
        }
        None => {
            let wide: Vec<usize> = (0..m).filter(|&k| gaps[k] > cfg.gap_threshold_deg).collect();
            if wide.is_empty() {
                vec![by_width[0]]
            } else {
                wide
            }
        }
    };
    splits.sort_unstable();

    let mut arcs: Vec<Vec<usize>> = splits
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            let end = splits[(t + 1) % splits.len()];
            let len = (end + m - s - 1) % m + 1;
            (1..=len).map(|d| order[(s + d) % m]).collect()
        })
        .collect();

    if cfg.n_cells.is_none() {
        refine_opposed(angles, &mut arcs, T::lit(180.0) - cfg.gap_threshold_deg);
    }

    let exceptional = reassign_exceptional(angles, &mut arcs, cfg);

    let mut warnings = Vec::new();
    arcs.sort_by_key(|a| a.iter().copied().min());
    let mut machine_cell = vec![0; m];
    for (c, arc) in arcs.iter().enumerate() {
        for &j in arc {
            machine_cell[j] = c + 1;
        }
        let width = spread(angles, arc);
        if width >= cfg.independence_deg {
            warnings.push(format!(
                "cell {}: intra-cell angular spread {:.2} deg reaches the independence angle {:.2} deg",
                c + 1,
                width,
                cfg.independence_deg
            ));
        }
    }
    Ok(MachineClusters {
        n_cells: arcs.len(),
        machine_cell,
        exceptional,
        warnings,
    })
}

/// Splits any arc holding two machines more than `limit` degrees apart at its
/// widest internal gap, until none remain.
fn refine_opposed<T: Scalar>(angles: &[T], arcs: &mut Vec<Vec<usize>>, limit: T) {
    let mut t = 0;
    while t < arcs.len() {
        let arc = &arcs[t];
        if arc.len() < 2 || max_pairwise(angles, arc) <= limit {
            t += 1;
            continue;
        }
        let mut cut = 0;
        let mut widest = T::zero();
        for k in 1..arc.len() {
            let g = (angles[arc[k]] - angles[arc[k - 1]] + T::lit(360.0)) % T::lit(360.0);
            if cut == 0 || g > widest {
                widest = g;
                cut = k;
            }
        }
        let tail = arcs[t].split_off(cut);
        arcs.insert(t + 1, tail);
    }
}

/// Moves an end machine to a neighboring arc when dropping it brings an
/// over-wide arc back under the independence angle.
fn reassign_exceptional<T: Scalar>(angles: &[T], arcs: &mut [Vec<usize>], cfg: &ClusterConfig<T>) -> Vec<usize> {
    let n = arcs.len();
    let mut exceptional = Vec::new();
    if n < 2 {
        return exceptional;
    }
    let opposed_limit = cfg.n_cells.is_none().then(|| T::lit(180.0) - cfg.gap_threshold_deg);
    for t in 0..n {
        if arcs[t].len() < 2 || spread(angles, &arcs[t]) <= cfg.independence_deg {
            continue;
        }
        let (first, last) = arc_endpoints(angles, &arcs[t]);
        let without = |e: usize| -> Vec<usize> { arcs[t].iter().copied().filter(|&j| j != e).collect() };
        let mut candidates: Vec<(T, usize)> = [first, last]
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|e| (spread(angles, &without(e)), e))
            .filter(|&(w, _)| w < cfg.independence_deg)
            .collect();
        candidates.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        let Some(&(_, machine)) = candidates.first() else {
            continue;
        };

        let neighbors: BTreeSet<usize> = [(t + n - 1) % n, (t + 1) % n].into_iter().collect();
        let mut best: Option<(T, usize, usize)> = None;
        for target in neighbors {
            if let Some(limit) = opposed_limit {
                let mut joined = arcs[target].clone();
                joined.push(machine);
                if max_pairwise(angles, &joined) > limit {
                    continue;
                }
            }
            let mean = circular_mean(arcs[target].iter().map(|&j| angles[j]));
            let d = circular_distance(angles[machine], mean);
            let key = arcs[target].iter().copied().min().unwrap_or(usize::MAX);
            let better = match best {
                None => true,
                Some((bd, bkey, _)) => d < bd || (d == bd && key < bkey),
            };
            if better {
                best = Some((d, key, target));
            }
        }
        if let Some((_, _, target)) = best {
            arcs[t].retain(|&j| j != machine);
            arcs[target].push(machine);
            exceptional.push(machine);
        }
    }
    exceptional.sort_unstable();
    exceptional
}

/// Places each part with the cell of the nearest machine line it visits.
pub fn assign_parts<T: Scalar>(
    inst: &Instance,
    plane: &PrincipalPlane<T>,
    machine_cell: &[usize],
) -> Result<PartFamilies, ClusterError> {
    let angles = machine_angles(plane, inst.machine_labels())?;
    let n_cells = machine_cell.iter().copied().max().unwrap_or(0);
    let tie = T::lit(TIE_DEG);

    let mut part_family = Vec::with_capacity(inst.part_count());
    let mut exceptional = Vec::new();
    for (i, &[x, y]) in plane.part_scores.iter().enumerate() {
        let used: Vec<usize> = inst.machines_of(i).collect();
        let mut ops = vec![0usize; n_cells + 1];
        for &j in &used {
            ops[machine_cell[j]] += 1;
        }
        if ops.iter().filter(|&&c| c > 0).count() >= 2 {
            exceptional.push(i);
        }
        // Most operations first, then lowest cell index.
        let pick = |cells: &mut dyn Iterator<Item = usize>| -> usize {
            let mut best = 0;
            for c in cells {
                if best == 0 || ops[c] > ops[best] || (ops[c] == ops[best] && c < best) {
                    best = c;
                }
            }
            best
        };

        let family = if x.hypot(y) < T::zero_norm() {
            pick(&mut used.iter().map(|&j| machine_cell[j]))
        } else {
            let dir = direction_deg(x, y);
            let dist: Vec<T> = used.iter().map(|&j| line_distance(dir, angles[j])).collect();
            let nearest = dist.iter().copied().fold(T::infinity(), T::min);
            pick(
                &mut used
                    .iter()
                    .zip(&dist)
                    .filter(|(_, &d)| d <= nearest + tie)
                    .map(|(&j, _)| machine_cell[j]),
            )
        };
        part_family.push(family);
    }

    let mut warnings = Vec::new();
    for c in 1..=n_cells {
        if !part_family.contains(&c) {
            warnings.push(format!(
                "family {c} is empty: no part is nearest to a machine of cell {c}"
            ));
        }
    }
    Ok(PartFamilies {
        part_family,
        exceptional,
        warnings,
    })
}

/// Every intermediate of a solve, for export and inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis<T = f64> {
    pub config: ClusterConfig<T>,
    pub stats: MachineStats<T>,
    pub standardized: StandardizedMatrix<T>,
    pub similarity: SimilarityMatrix<T>,
    pub eigen: EigenSystem<T>,
    pub plane: PrincipalPlane<T>,
    pub angles: Vec<T>,
    pub solution: CellSolution,
}

pub fn analyze<T: Scalar>(inst: &Instance, cfg: &ClusterConfig<T>) -> Result<Analysis<T>, ClusterError> {
    cfg.validate()?;
    let stats = machine_stats(inst);
    let standardized = standardize(inst, &stats);
    let similarity = correlation_matrix(&standardized, inst.machine_labels());
    let eigen = eigendecompose(&similarity)?;
    let plane = principal_plane(&standardized, &eigen)?;
    let angles = machine_angles(&plane, inst.machine_labels())?;
    let machines = cluster_machines(&angles, cfg)?;
    let parts = assign_parts(inst, &plane, &machines.machine_cell)?;

    let mut warnings = Vec::new();
    if plane.degenerate {
        warnings.push(format!(
            "degenerate principal plane: second eigenvalue {:.3e}; angular clustering is unreliable",
            eigen.eigenvalues[1].to_f64().unwrap_or(f64::NAN)
        ));
    }
    warnings.extend(machines.warnings);
    warnings.extend(parts.warnings);
    let solution = CellSolution {
        assignment: Assignment {
            n_cells: machines.n_cells,
            machine_cell: machines.machine_cell,
            part_family: parts.part_family,
        },
        exceptional_machines: machines
            .exceptional
            .iter()
            .map(|&j| inst.machine_labels()[j].clone())
            .collect(),
        exceptional_parts: parts
            .exceptional
            .iter()
            .map(|&i| inst.part_labels()[i].clone())
            .collect(),
        warnings,
    };
    Ok(Analysis {
        config: cfg.clone(),
        stats,
        standardized,
        similarity,
        eigen,
        plane,
        angles,
        solution,
    })
}

pub fn solve<T: Scalar>(inst: &Instance, cfg: &ClusterConfig<T>) -> Result<CellSolution, ClusterError> {
    analyze(inst, cfg).map(|a| a.solution)
}
