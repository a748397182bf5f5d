//! Symmetric eigendecomposition by cyclic Jacobi rotations, and the
//! two-component principal plane built from it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::similarity::{SimilarityMatrix, StandardizedMatrix};

/// Jacobi sweep cap.
pub const MAX_SWEEPS: usize = 100;

/// Second eigenvalue below which the principal plane is flagged degenerate.
pub const DEGENERATE_LAMBDA2: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Full spectrum sorted by descending eigenvalue.
///
/// `eigenvectors[k]` pairs with `eigenvalues[k]`. Each vector's entry of
/// largest magnitude is positive; on exact magnitude ties the lowest machine
/// index decides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem<T = f64> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<Vec<T>>,
    pub sweeps: usize,
}

impl<T: Scalar> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ λ_k v_k v_kᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| {
            self.eigenvalues
                .iter()
                .zip(&self.eigenvectors)
                .fold(T::zero(), |acc, (&l, v)| acc + l * v[i] * v[j])
        })
    }
}

fn off_diagonal_norm<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a.get(i, j) * a.get(i, j);
            }
        }
    }
    acc.sqrt()
}

pub fn eigendecompose<T: Scalar>(s: &SimilarityMatrix<T>) -> Result<EigenSystem<T>, SpectralError> {
    jacobi_eigen(&s.entries)
}

/// Cyclic Jacobi on a symmetric matrix.
pub fn jacobi_eigen<T: Scalar>(input: &Matrix<T>) -> Result<EigenSystem<T>, SpectralError> {
    let n = input.rows();
    if input.cols() != n {
        return Err(SpectralError::Dimension(format!(
            "matrix is {}x{}, expected square",
            input.rows(),
            input.cols()
        )));
    }
    let mut a = input.clone();
    let mut v = Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() });
    let tol = T::jacobi_tolerance();
    let two = T::lit(2.0);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off < tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(SpectralError::NonConvergence {
                sweeps,
                off_norm: off.to_f64().unwrap_or(f64::NAN),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (two * apq);
                let t = if theta >= T::zero() {
                    T::one() / (theta + (theta * theta + T::one()).sqrt())
                } else {
                    -T::one() / (-theta + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal eigenvalues keep their diagonal order.
    order.sort_by(|&x, &y| {
        a.get(y, y)
            .partial_cmp(&a.get(x, x))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&k| a.get(k, k)).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut vec: Vec<T> = v.column(k).collect();
            orient(&mut vec);
            vec
        })
        .collect();
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// Flips `vec` so its largest-magnitude entry is positive.
fn orient<T: Scalar>(vec: &mut [T]) {
    let mut pivot = 0;
    for (k, x) in vec.iter().enumerate() {
        if x.abs() > vec[pivot].abs() {
            pivot = k;
        }
    }
    if vec[pivot] < T::zero() {
        for x in vec.iter_mut() {
            *x = -*x;
        }
    }
}

/// Machine loadings and part scores on the first two components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalPlane<T = f64> {
    pub machine_loadings: Vec<[T; 2]>,
    pub part_scores: Vec<[T; 2]>,
    pub explained_variance: T,
    /// λ2 below [`DEGENERATE_LAMBDA2`]: angles cannot be trusted.
    pub degenerate: bool,
}

pub fn principal_plane<T: Scalar>(
    b: &StandardizedMatrix<T>,
    es: &EigenSystem<T>,
) -> Result<PrincipalPlane<T>, SpectralError> {
    let m = b.values.cols();
    if es.dim() != m || m < 2 {
        return Err(SpectralError::Dimension(format!(
            "standardized matrix has {m} machine columns, eigensystem has dimension {}",
            es.dim()
        )));
    }
    let (v1, v2) = (&es.eigenvectors[0], &es.eigenvectors[1]);
    let machine_loadings = (0..m).map(|j| [v1[j], v2[j]]).collect();
    let part_scores = (0..b.values.rows())
        .map(|i| {
            let row = b.values.row(i);
            let dot = |v: &[T]| row.iter().zip(v).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            [dot(v1), dot(v2)]
        })
        .collect();
    let explained_variance = (es.eigenvalues[0] + es.eigenvalues[1]) / T::from_count(m);
    Ok(PrincipalPlane {
        machine_loadings,
        part_scores,
        explained_variance,
        degenerate: es.eigenvalues[1] < T::lit(DEGENERATE_LAMBDA2),
    })
}
