//! Dense vectors, the box-shaped feasible set and projection onto it.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense real vector of fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(values: Vec<f64>) -> Self {
        Vector(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Vector(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&v| f(v)).collect())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(values: Vec<f64>) -> Self {
        Vector(values)
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Axis-aligned box `lower ≤ x ≤ upper`.
///
/// Degenerate coordinates (`lower_i == upper_i`) are allowed and pin that
/// coordinate under projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBox {
    lower: Vector,
    upper: Vector,
    diameter: f64,
}

impl FeasibleBox {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::contract(format!(
                "box bounds have dimensions {} and {}",
                lower.dim(),
                upper.dim()
            )));
        }
        if lower.dim() == 0 {
            return Err(Error::contract("box dimension must be at least 1"));
        }
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::contract("box bounds must be finite"));
        }
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::contract(format!(
                "box lower bound exceeds upper bound at coordinate {i}"
            )));
        }
        let diameter = lower
            .iter()
            .zip(upper.iter())
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max);
        Ok(FeasibleBox {
            lower,
            upper,
            diameter,
        })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Vector::filled(dim, lo), Vector::filled(dim, hi))
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    /// ℓ∞ diameter D∞ = max_i (upper_i − lower_i).
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn center(&self) -> Vector {
        Vector(
            self.lower
                .iter()
                .zip(self.upper.iter())
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect(),
        )
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.dim() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }
}

/// Projection onto the box under any diagonal positive definite weighting.
///
/// For diagonal weights the weighted least-squares problem separates per
/// coordinate and each coordinate's minimizer is the clamp, whatever the
/// weight.
pub fn project_box(y: &Vector, feasible: &FeasibleBox) -> Result<Vector> {
    if y.dim() != feasible.dim() {
        return Err(Error::contract(format!(
            "cannot project a {}-vector onto a {}-dimensional box",
            y.dim(),
            feasible.dim()
        )));
    }
    Ok(Vector(
        y.iter()
            .zip(feasible.lower.iter().zip(feasible.upper.iter()))
            .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
            .collect(),
    ))
}

pub fn linf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// ‖g_{1:T,i}‖₂: the ℓ₂ norm of coordinate `i` across a gradient history.
pub fn l2_norm_column(history: &[Vector], i: usize) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::contract("gradient history is empty"));
    }
    if let Some(t) = history.iter().position(|g| i >= g.dim()) {
        return Err(Error::contract(format!(
            "coordinate {i} out of range for history entry {t}"
        )));
    }
    Ok(history.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt())
}
