//! Quadrature models of the base probability space.

use crate::error::{param, Result};

/// Weighted sample of the base space `I`.
///
/// Nodes are implicit indices `0..len()`. When the base is the unit interval
/// with Lebesgue measure each node also carries its coordinate in `[0, 1)`,
/// which enables base characters `e^{2πi n x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberGrid {
    id: String,
    weights: Vec<f64>,
    circle: Option<Vec<f64>>,
}

/// Kahan-Babuska summation.
fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

impl FiberGrid {
    pub fn new(id: impl Into<String>, weights: Vec<f64>, circle: Option<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() {
            return param("grid needs at least one node");
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return param("grid weights must be finite and nonnegative");
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > 1e-12 {
            return param(format!("grid weights sum to {total}, expected 1"));
        }
        if let Some(c) = &circle {
            if c.len() != weights.len() {
                return param("circle coordinates and weights differ in length");
            }
            if c.iter().any(|x| !(0.0..1.0).contains(x)) {
                return param("circle coordinates must lie in [0, 1)");
            }
        }
        Ok(Self { id: id.into(), weights, circle })
    }

    /// Equispaced midpoint rule on `[0, 1]`: nodes `(i + 1/2) / q`.
    pub fn midpoint(q: usize) -> Result<Self> {
        if q == 0 {
            return param("midpoint grid needs q >= 1");
        }
        let w = 1.0 / q as f64;
        let coords = (0..q).map(|i| (i as f64 + 0.5) / q as f64).collect();
        Self::new(format!("midpoint-{q}"), vec![w; q], Some(coords))
    }

    /// `q` equally weighted abstract samples without a circle coordinate.
    pub fn samples(id: impl Into<String>, q: usize) -> Result<Self> {
        if q == 0 {
            return param("sample grid needs q >= 1");
        }
        Self::new(id, vec![1.0 / q as f64; q], None)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn circle_coords(&self) -> Option<&[f64]> {
        self.circle.as_deref()
    }

    pub fn has_circle(&self) -> bool {
        self.circle.is_some()
    }

    pub fn coord(&self, i: usize) -> Option<f64> {
        self.circle.as_ref().map(|c| c[i])
    }
}
