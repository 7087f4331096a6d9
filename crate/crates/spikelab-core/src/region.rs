//! Bounded open target regions: finite unions of open axis-aligned boxes.
//!
//! Every target set used by the spike, avoidance and approximation
//! experiments is a sup-norm ball or a product of intervals, so this class
//! covers all of them while keeping hit-times computable in closed form.

use crate::error::{Error, Result};

/// One open box, as per-coordinate open intervals (l_j, u_j).
pub type OpenBox = Vec<(f64, f64)>;

/// A nonempty finite union of bounded open boxes in R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion {
    dim: usize,
    boxes: Vec<OpenBox>,
}

impl BoxRegion {
    pub fn new(boxes: Vec<OpenBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::InvalidInput("region needs at least one box".into()));
        }
        let dim = boxes[0].len();
        if dim == 0 {
            return Err(Error::InvalidInput("boxes must have dimension >= 1".into()));
        }
        for b in &boxes {
            if b.len() != dim {
                return Err(Error::InvalidInput("boxes have mixed dimensions".into()));
            }
            for &(l, u) in b {
                if l >= u || !l.is_finite() || !u.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "box interval ({l}, {u}) must be bounded with l < u"
                    )));
                }
            }
        }
        Ok(Self { dim, boxes })
    }

    /// Open sup-norm ball of the given radius around a center.
    pub fn sup_ball(center: &[f64], radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::InvalidInput("radius must be positive".into()));
        }
        Self::new(vec![center.iter().map(|&c| (c - radius, c + radius)).collect()])
    }

    /// Open cube (-r, r)^d around the origin.
    pub fn centered_cube(dim: usize, r: f64) -> Result<Self> {
        Self::sup_ball(&vec![0.0; dim], r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[OpenBox] {
        &self.boxes
    }

    /// Strict membership (the region is open).
    pub fn contains(&self, p: &[f64]) -> bool {
        self.boxes
            .iter()
            .any(|b| b.iter().zip(p).all(|(&(l, u), &x)| l < x && x < u))
    }

    /// Per-coordinate extremes over all boxes: the smallest box containing
    /// the region.
    pub fn bounding_box(&self) -> OpenBox {
        let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for b in &self.boxes {
            for (j, &(l, u)) in b.iter().enumerate() {
                out[j].0 = out[j].0.min(l);
                out[j].1 = out[j].1.max(u);
            }
        }
        out
    }

    /// JSON with decimal-string scalars.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "boxes": self.boxes.iter().map(|b| {
                b.iter().map(|(l, u)| serde_json::json!([l.to_string(), u.to_string()]))
                    .collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let parse_scalar = |s: &serde_json::Value| -> Result<f64> {
            s.as_str()
                .ok_or_else(|| Error::InvalidInput("scalar must be a decimal string".into()))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("bad decimal scalar: {e}")))
        };
        let boxes = v
            .get("boxes")
            .and_then(|b| b.as_array())
            .ok_or_else(|| Error::InvalidInput("missing 'boxes' array".into()))?;
        let mut out = Vec::new();
        for b in boxes {
            let arr = b
                .as_array()
                .ok_or_else(|| Error::InvalidInput("box must be an array".into()))?;
            let mut ob = Vec::new();
            for iv in arr {
                let pair = iv
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::InvalidInput("interval must be [lo, hi]".into()))?;
                ob.push((parse_scalar(&pair[0])?, parse_scalar(&pair[1])?));
            }
            out.push(ob);
        }
        Self::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_boxes() {
        assert!(BoxRegion::new(vec![]).is_err());
        assert!(BoxRegion::new(vec![vec![(0.0, 0.0)]]).is_err());
        assert!(BoxRegion::new(vec![vec![(0.0, f64::INFINITY)]]).is_err());
    }

    #[test]
    fn membership_is_strict() {
        let r = BoxRegion::centered_cube(2, 0.5).unwrap();
        assert!(r.contains(&[0.0, 0.0]));
        assert!(!r.contains(&[0.5, 0.0]));
        assert!(!r.contains(&[0.49, 0.51]));
    }

    #[test]
    fn json_round_trip() {
        let r = BoxRegion::new(vec![vec![(-0.5, 0.5), (0.1, 0.7)], vec![(1.0, 2.0), (3.0, 4.5)]])
            .unwrap();
        let j = r.to_json();
        let back = BoxRegion::from_json(&j).unwrap();
        assert_eq!(r, back);
    }
}
