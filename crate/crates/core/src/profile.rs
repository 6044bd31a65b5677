use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function on `[0, R]` sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Option<Vec<f64>>,
}

impl SolutionProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, derivs: Option<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "profile needs matching grid and values of length >= 2 (got {} and {})",
                grid.len(),
                values.len()
            )));
        }
        if let Some(d) = &derivs {
            if d.len() != grid.len() {
                return Err(Error::InvalidParameter("derivative length mismatch".into()));
            }
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values, derivs })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn upper(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Uniform spacing, if the grid is uniform to rounding.
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.grid.len() - 1;
        let h = (self.grid[n] - self.grid[0]) / n as f64;
        let ok = self
            .grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        ok.then_some(h)
    }

    /// Derivative values, or second-order differences of the values when
    /// none were stored.
    pub fn derivatives(&self) -> Vec<f64> {
        if let Some(d) = &self.derivs {
            return d.clone();
        }
        let t = &self.grid;
        let s = &self.values;
        let n = t.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = t[i] - t[i - 1];
            let h1 = t[i + 1] - t[i];
            d[i] = (s[i + 1] * h0 * h0 - s[i - 1] * h1 * h1 + s[i] * (h1 * h1 - h0 * h0))
                / (h0 * h1 * (h0 + h1));
        }
        if n == 2 {
            let v = (s[1] - s[0]) / (t[1] - t[0]);
            return vec![v, v];
        }
        // one-sided second order at the ends
        let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
        d[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * s[0] + (h0 + h1) / (h0 * h1) * s[1]
            - h0 / (h1 * (h0 + h1)) * s[2];
        let (h0, h1) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
        d[n - 1] = h1 / (h0 * (h0 + h1)) * s[n - 3] - (h0 + h1) / (h0 * h1) * s[n - 2]
            + (2.0 * h1 + h0) / (h1 * (h0 + h1)) * s[n - 1];
        d
    }

    pub fn with_derivatives(mut self) -> Self {
        if self.derivs.is_none() {
            self.derivs = Some(self.derivatives());
        }
        self
    }
}
