use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted parameter values in the open unit interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SweepGrid {
    points: Vec<f64>,
}

impl SweepGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("grid must have at least one point".into()));
        }
        if let Some(&bad) = points.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::InvalidParameter(format!("grid point {bad} is outside (0, 1)")));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid points must be strictly increasing".into()));
        }
        Ok(SweepGrid { points })
    }

    /// `count` evenly spaced values from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::InvalidParameter("grid needs at least one point".into())),
            1 => Self::new(vec![lo]),
            _ => {
                let step = (hi - lo) / (count - 1) as f64;
                let mut pts: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
                pts[count - 1] = hi;
                Self::new(pts)
            }
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for SweepGrid {
    /// 50 values on `[0.01, 0.99]`.
    fn default() -> Self {
        SweepGrid::linspace(0.01, 0.99, 50).expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for SweepGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SweepGrid::new(v)
    }
}

impl From<SweepGrid> for Vec<f64> {
    fn from(g: SweepGrid) -> Vec<f64> {
        g.points
    }
}
