//! Column standardization and the machine-machine correlation matrix.

use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Per-machine mean and population standard deviation of the incidence columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineStats<T = f64> {
    pub mean: Vec<T>,
    pub sigma: Vec<T>,
}

/// Standardized incidence values, `p × m`, part rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedMatrix<T = f64> {
    pub values: Matrix<T>,
}

/// Symmetric `m × m` correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix<T = f64> {
    pub labels: Vec<String>,
    pub entries: Matrix<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries.get(i, j)
    }

    /// Entry by machine labels.
    pub fn between(&self, a: &str, b: &str) -> Option<T> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.get(i, j))
    }

    /// Full square matrix as CSV: header of labels, six decimals per value.
    pub fn to_csv(&self) -> String {
        let mut out = self.labels.join(",");
        out.push('\n');
        for i in 0..self.size() {
            let row: Vec<String> = (0..self.size()).map(|j| format!("{:.6}", self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn machine_stats<T: Scalar>(inst: &Instance) -> MachineStats<T> {
    let p = T::from_count(inst.part_count());
    let mut mean = Vec::with_capacity(inst.machine_count());
    let mut sigma = Vec::with_capacity(inst.machine_count());
    for j in 0..inst.machine_count() {
        let e = T::from_count(inst.machine_load(j)) / p;
        let var = inst
            .incidence()
            .column(j)
            .map(|a| {
                let d = bit::<T>(a) - e;
                d * d
            })
            .fold(T::zero(), |acc, x| acc + x)
            / p;
        mean.push(e);
        sigma.push(var.sqrt());
    }
    MachineStats { mean, sigma }
}

pub fn standardize<T: Scalar>(inst: &Instance, stats: &MachineStats<T>) -> StandardizedMatrix<T> {
    let values = Matrix::from_fn(inst.part_count(), inst.machine_count(), |i, j| {
        (bit::<T>(inst.requires(i, j)) - stats.mean[j]) / stats.sigma[j]
    });
    StandardizedMatrix { values }
}

/// `S_ij = (1/p) Σ_k b_ki b_kj` on the upper triangle, mirrored, unit diagonal.
///
/// Off-diagonal entries are clamped to `[-1, 1]`, so identical or
/// complementary columns give exactly `±1` despite rounding.
pub fn correlation_matrix<T: Scalar>(b: &StandardizedMatrix<T>, labels: &[String]) -> SimilarityMatrix<T> {
    let p = b.values.rows();
    let m = b.values.cols();
    assert_eq!(labels.len(), m, "one label per machine column");
    let inv_p = T::one() / T::from_count(p);
    let mut entries = Matrix::filled(m, m, T::zero());
    for i in 0..m {
        entries.set(i, i, T::one());
        for j in i + 1..m {
            let mut acc = T::zero();
            for k in 0..p {
                acc += b.values.get(k, i) * b.values.get(k, j);
            }
            let s = (acc * inv_p).max(-T::one()).min(T::one());
            entries.set(i, j, s);
            entries.set(j, i, s);
        }
    }
    SimilarityMatrix {
        labels: labels.to_vec(),
        entries,
    }
}

/// Convenience: stats, standardization and correlation in one call.
pub fn similarity_of<T: Scalar>(inst: &Instance) -> SimilarityMatrix<T> {
    let stats = machine_stats(inst);
    let b = standardize(inst, &stats);
    correlation_matrix(&b, inst.machine_labels())
}

#[inline]
fn bit<T: Scalar>(a: bool) -> T {
    if a {
        T::one()
    } else {
        T::zero()
    }
}
