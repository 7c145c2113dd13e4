//! Central finite differences and tensor comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{Shape, Tensor, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
}

/// Step size and relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    step: f64,
    tolerance: f64,
}

impl FdConfig {
    pub const DEFAULT_STEP: f64 = 1e-4;
    /// For comparisons where the function is quadratic, so the stencil is
    /// exact up to roundoff.
    pub const QUADRATIC_TOLERANCE: f64 = 1e-6;
    pub const GENERAL_TOLERANCE: f64 = 1e-4;

    pub fn new(step: f64, tolerance: f64) -> Result<Self, FdError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(FdError::Step(step));
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(FdError::Tolerance(tolerance));
        }
        Ok(FdConfig { step, tolerance })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: Self::DEFAULT_STEP,
            tolerance: Self::QUADRATIC_TOLERANCE,
        }
    }
}

fn shifted(point: &[f64], shifts: &[(usize, f64)]) -> Vec<f64> {
    let mut p = point.to_vec();
    for &(axis, delta) in shifts {
        p[axis] += delta;
    }
    p
}

/// `(f(p + h e_j) - f(p - h e_j)) / 2h` for each coordinate `j`.
pub fn fd_gradient<F>(f: F, point: &[f64], cfg: &FdConfig) -> Tensor<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let h = cfg.step;
    let data = (0..point.len())
        .map(|j| (f(&shifted(point, &[(j, h)])) - f(&shifted(point, &[(j, -h)]))) / (2.0 * h))
        .collect();
    vector(data)
}

/// Four-point central stencil for every `(i, j)`, divided by `4h²`, then
/// averaged with its transpose.
pub fn fd_hessian<F>(f: F, point: &[f64], cfg: &FdConfig) -> Tensor<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let h = cfg.step;
    let m = point.len();
    if m == 0 {
        return Tensor::scalar(0.0);
    }
    let mut raw = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let pp = f(&shifted(point, &[(i, h), (j, h)]));
            let pm = f(&shifted(point, &[(i, h), (j, -h)]));
            let mp = f(&shifted(point, &[(i, -h), (j, h)]));
            let mm = f(&shifted(point, &[(i, -h), (j, -h)]));
            raw[i * m + j] = (pp - pm - mp + mm) / (4.0 * h * h);
        }
    }
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            data[i * m + j] = 0.5 * (raw[i * m + j] + raw[j * m + i]);
        }
    }
    Tensor::from_vec(&[m, m], data).expect("m * m entries")
}

fn vector(data: Vec<f64>) -> Tensor<f64> {
    if data.is_empty() {
        return Tensor::new(Shape::scalar(), vec![0.0]).expect("scalar");
    }
    let n = data.len();
    Tensor::from_vec(&[n], data).expect("n entries")
}

/// Error of one entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryError {
    pub index: Vec<usize>,
    pub abs_err: f64,
    pub rel_err: f64,
}

/// Outcome of [`compare_tensors`]. Serializes as
/// `{"max_abs_err", "max_rel_err", "worst_index", "pass"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub worst_index: Vec<usize>,
    pub pass: bool,
    #[serde(skip)]
    pub tolerance: f64,
    #[serde(skip)]
    pub entries: Vec<EntryError>,
}

impl ComparisonReport {
    /// Entries whose relative error exceeds the tolerance.
    pub fn failures(&self) -> impl Iterator<Item = &EntryError> {
        let tol = self.tolerance;
        self.entries.iter().filter(move |e| e.rel_err > tol)
    }
}

/// Compares entrywise. The relative error of an entry is
/// `|a - b| / max(|a|, |b|, 1)`; the comparison passes when every relative
/// error is within `tolerance`. NaN entries never pass.
pub fn compare_tensors(
    a: &Tensor<f64>,
    b: &Tensor<f64>,
    tolerance: f64,
) -> Result<ComparisonReport, TensorError> {
    if a.shape() != b.shape() {
        return Err(TensorError::ShapeMismatch(format!(
            "comparing {} with {}",
            a.shape(),
            b.shape()
        )));
    }
    let entries: Vec<EntryError> = a
        .shape()
        .indices()
        .zip(a.data().iter().zip(b.data()))
        .map(|(index, (&x, &y))| {
            let abs_err = (x - y).abs();
            let rel_err = abs_err / x.abs().max(y.abs()).max(1.0);
            EntryError {
                index,
                abs_err: if abs_err.is_nan() {
                    f64::INFINITY
                } else {
                    abs_err
                },
                rel_err: if rel_err.is_nan() {
                    f64::INFINITY
                } else {
                    rel_err
                },
            }
        })
        .collect();
    let worst = entries
        .iter()
        .reduce(|w, e| if e.rel_err > w.rel_err { e } else { w })
        .expect("tensors have at least one element");
    let max_abs_err = entries.iter().map(|e| e.abs_err).fold(0.0, f64::max);
    Ok(ComparisonReport {
        max_abs_err,
        max_rel_err: worst.rel_err,
        worst_index: worst.index.clone(),
        pass: worst.rel_err <= tolerance,
        tolerance,
        entries,
    })
}
