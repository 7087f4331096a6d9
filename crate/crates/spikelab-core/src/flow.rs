//! One-parameter diagonal flows `diag(e^{c_1 t}, ..., e^{c_d t})` with
//! trace-free exponents.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Exponent vector of a diagonal flow. All exponents are nonzero and they
/// sum to zero, so the flow preserves volume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    exponents: Vec<f64>,
}

impl FlowSpec {
    /// Build a flow from its exponents. Requires d >= 2, every exponent
    /// nonzero, and a zero sum (within 1e-12 absolute).
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.len() < 2 {
            return Err(Error::InvalidInput(
                "flow needs at least 2 exponents".into(),
            ));
        }
        if exponents.iter().any(|c| *c == 0.0 || !c.is_finite()) {
            return Err(Error::InvalidInput(
                "flow exponents must be nonzero finite reals".into(),
            ));
        }
        let sum: f64 = exponents.iter().sum();
        if sum.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "flow exponents must sum to zero (got {sum:e})"
            )));
        }
        Ok(Self { exponents })
    }

    /// The standard 2-dimensional flow diag(e^t, e^-t).
    pub fn standard_2d() -> Self {
        Self {
            exponents: vec![1.0, -1.0],
        }
    }

    /// Flow used for simultaneous approximation of a vector in R^n:
    /// diag(e^t, ..., e^t, e^{-nt}) on R^{n+1}.
    pub fn approximation_flow(n: usize) -> Self {
        let mut c = vec![1.0; n];
        c.push(-(n as f64));
        Self { exponents: c }
    }

    /// Weighted approximation flow diag(e^{i_1 t}, ..., e^{i_n t}, e^{-t}).
    pub fn weighted_approximation_flow(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|w| *w <= 0.0 || *w >= 1.0) {
            return Err(Error::InvalidInput(
                "weights must lie in (0,1)".into(),
            ));
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("weights must sum to 1".into()));
        }
        let mut c = weights.to_vec();
        c.push(-1.0);
        Self::new(c)
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn exponent(&self, j: usize) -> f64 {
        self.exponents[j]
    }

    /// Indices of the expanding coordinates (c_j > 0).
    pub fn unstable_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.exponents[j] > 0.0).collect()
    }

    /// Sum of the positive exponents: the quasi-metric dimension of the
    /// expanding translation group.
    pub fn expansion_rate(&self) -> f64 {
        self.exponents.iter().filter(|c| **c > 0.0).sum()
    }

    /// True when max_j c_j = 1 (the normalization used for covering
    /// arguments, where Euclidean r-balls sit inside quasi-metric r-balls).
    pub fn is_normalized(&self) -> bool {
        let max = self.exponents.iter().cloned().fold(f64::MIN, f64::max);
        (max - 1.0).abs() <= 1e-12
    }

    /// Rescale time so that max_j c_j = 1.
    pub fn normalized(&self) -> Self {
        let max = self.exponents.iter().cloned().fold(f64::MIN, f64::max);
        Self {
            exponents: self.exponents.iter().map(|c| c / max).collect(),
        }
    }

    /// e^{c_j t}, guarded against overflow.
    pub fn scale_at(&self, j: usize, t: f64) -> Result<f64> {
        let m = self.exponents[j] * t;
        if m.abs() > 700.0 {
            return Err(Error::Overflow { magnitude: m.abs() });
        }
        Ok(m.exp())
    }

    /// For d = 2 flows (c, -c), the positive rate c.
    pub fn rate_2d(&self) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::DimensionUnsupported {
                d: self.dim(),
                max: 2,
            });
        }
        Ok(self.exponents[0].abs())
    }

    /// Apply the flow to a point for time t.
    pub fn apply_point(&self, t: f64, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, flow has {}",
                p.len(),
                self.dim()
            )));
        }
        let mut out = Vec::with_capacity(p.len());
        for (j, &x) in p.iter().enumerate() {
            out.push(self.scale_at(j, t)? * x);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_exponents() {
        assert!(FlowSpec::new(vec![1.0]).is_err());
        assert!(FlowSpec::new(vec![1.0, 0.0, -1.0]).is_err());
        assert!(FlowSpec::new(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn unstable_data() {
        let f = FlowSpec::new(vec![1.0, 0.5, -1.5]).unwrap();
        assert_eq!(f.unstable_indices(), vec![0, 1]);
        assert!((f.expansion_rate() - 1.5).abs() < 1e-15);
        assert!(f.is_normalized());
    }

    #[test]
    fn normalization_rescales() {
        let f = FlowSpec::new(vec![2.0, -2.0]).unwrap();
        assert!(!f.is_normalized());
        let g = f.normalized();
        assert_eq!(g.exponents(), &[1.0, -1.0]);
    }

    #[test]
    fn weighted_flow_shape() {
        let f = FlowSpec::weighted_approximation_flow(&[0.3, 0.7]).unwrap();
        assert_eq!(f.exponents(), &[0.3, 0.7, -1.0]);
        assert_eq!(f.unstable_indices(), vec![0, 1]);
        assert!((f.expansion_rate() - 1.0).abs() < 1e-15);
        assert!(FlowSpec::weighted_approximation_flow(&[0.4, 0.4]).is_err());
        assert!(FlowSpec::weighted_approximation_flow(&[1.2, -0.2]).is_err());
    }

    #[test]
    fn point_flow_as_exponentials() {
        let f = FlowSpec::standard_2d();
        let p = f.apply_point(1.0, &[1.0, 1.0]).unwrap();
        assert!((p[0] - 1f64.exp()).abs() < 1e-15);
        assert!((p[1] - (-1f64).exp()).abs() < 1e-15);
        assert!(f.apply_point(800.0, &[1.0, 1.0]).is_err());
    }
}
