//! Frequency and parameter grids.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        GridSpec {
            start,
            stop,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(start: f64, stop: f64, count: usize) -> Self {
        GridSpec {
            start,
            stop,
            count,
            spacing: Spacing::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(invalid("grid.count", "need at least 2 points"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(invalid("grid", "endpoints must be finite"));
        }
        if !(self.start < self.stop) {
            return Err(invalid(
                "grid",
                format!("start {} must be below stop {}", self.start, self.stop),
            ));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(invalid("grid", "log spacing needs positive endpoints"));
        }
        Ok(())
    }

    /// Grid points; the endpoints are reproduced exactly.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.count;
        let last = (n - 1) as f64;
        let pts = match self.spacing {
            Spacing::Linear => (0..n)
                .map(|k| {
                    let t = k as f64 / last;
                    self.start + (self.stop - self.start) * t
                })
                .collect::<Vec<_>>(),
            Spacing::Log => {
                let (a, b) = (self.start.log10(), self.stop.log10());
                (0..n)
                    .map(|k| 10f64.powf(a + (b - a) * (k as f64 / last)))
                    .collect()
            }
        };
        let mut pts = pts;
        pts[0] = self.start;
        pts[n - 1] = self.stop;
        Ok(pts)
    }
}
