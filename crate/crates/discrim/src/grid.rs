//! Uniform credulity grid and the local cubic interpolation rule used
//! by the grid dynamic programs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `s` linearly spaced credulity samples on `[0, 1]`.
///
/// `s` must be odd (so `p = 1/2` is a sample) and at least 5 (so the
/// four-point interpolation stencil always fits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct GridSpec {
    s: usize,
}

impl GridSpec {
    pub fn new(s: usize) -> Result<Self> {
        if s < 5 || s.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s as f64,
                constraint: "odd and >= 5",
            });
        }
        Ok(GridSpec { s })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.s
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the `p = 1/2` sample.
    pub fn midpoint_index(&self) -> usize {
        (self.s - 1) / 2
    }

    /// Grid spacing `1 / (s - 1)`.
    pub fn spacing(&self) -> f64 {
        1.0 / (self.s - 1) as f64
    }

    /// Credulity value of sample `i`.
    pub fn credulity(&self, i: usize) -> f64 {
        debug_assert!(i < self.s);
        i as f64 / (self.s - 1) as f64
    }

    /// Iterator over `(index, credulity)` pairs.
    pub fn samples(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.s).map(move |i| (i, self.credulity(i)))
    }

    /// Cubic interpolation of `values` (one per sample) at credulity `p`.
    ///
    /// Local four-point Lagrange interpolation on the uniform grid; the
    /// stencil is shifted to stay inside the grid near the endpoints.
    /// On-sample queries reproduce the stored value exactly. The result
    /// is *not* range-clamped here; callers clamp to their own valid
    /// ranges since cubic interpolation can overshoot near kinks.
    pub fn interpolate(&self, values: &[f64], p: f64) -> f64 {
        debug_assert_eq!(values.len(), self.s);
        debug_assert!((-1e-12..=1.0 + 1e-12).contains(&p), "p = {p}");

        let x = p.clamp(0.0, 1.0) * (self.s - 1) as f64;
        let cell = (x.floor() as usize).min(self.s - 2);
        // Four-point stencil centered on [cell, cell + 1].
        let base = cell.saturating_sub(1).min(self.s - 4);
        let t = x - base as f64;

        if t == t.floor() {
            // Exactly on a node: avoid rounding noise from the basis sum.
            return values[base + t as usize];
        }

        let d0 = t;
        let d1 = t - 1.0;
        let d2 = t - 2.0;
        let d3 = t - 3.0;
        // Lagrange basis for nodes {0, 1, 2, 3}; denominators -6, 2, -2, 6.
        let l0 = d1 * d2 * d3 * (-1.0 / 6.0);
        let l1 = d0 * d2 * d3 * 0.5;
        let l2 = d0 * d1 * d3 * (-0.5);
        let l3 = d0 * d1 * d2 * (1.0 / 6.0);
        values[base] * l0 + values[base + 1] * l1 + values[base + 2] * l2 + values[base + 3] * l3
    }
}

impl TryFrom<usize> for GridSpec {
    type Error = Error;

    fn try_from(s: usize) -> Result<Self> {
        GridSpec::new(s)
    }
}

impl From<GridSpec> for usize {
    fn from(g: GridSpec) -> usize {
        g.s
    }
}
