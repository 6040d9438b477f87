//! Backward value iteration on the credulity grid.
//!
//! The value function `R` (expected remaining error as a function of
//! the credulity) is sampled on the grid and stepped backward one copy
//! at a time; posteriors falling between samples are evaluated by
//! cubic interpolation of the next stage's table. Because the same
//! backward operator applies at every stage for the policies used
//! here, the value at `p = 1/2` after `n` steps is the full `n`-copy
//! error probability, so a single pass yields every `C_n` up to the
//! requested depth.
//!
//! Deep runs decay exponentially, so the table is renormalized by its
//! maximum whenever it drops below a trigger, and the accumulated
//! scale is carried as a logarithm. Renormalization commutes with the
//! linear backward operator and with interpolation, and leaves the
//! location of angle minima unchanged, so it only changes the
//! representation, not the result.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::qubit_model::{Sign, StateFamily};

use super::policy::AnglePolicy;

/// Table maxima below this trigger renormalization.
const RESCALE_TRIGGER: f64 = 1e-100;

/// One-step lookahead: expected clamped next-stage value after
/// measuring one copy at angle `phi` from credulity `p`.
#[inline]
pub(crate) fn lookahead(
    family: &StateFamily,
    grid: GridSpec,
    values: &[f64],
    upper: f64,
    p: f64,
    phi: f64,
) -> f64 {
    let mut acc = 0.0;
    for d in Sign::BOTH {
        let (u, v) = family.likelihoods(d, phi);
        let w = u * p + v * (1.0 - p);
        if w > 0.0 {
            let posterior = u * p / w;
            acc += w * grid.interpolate(values, posterior).clamp(0.0, upper);
        }
    }
    acc
}

/// Backward dynamic-programming state: the (rescaled) value table with
/// `steps` copies remaining, plus the accumulated log scale.
pub(crate) struct BackwardDp<'a> {
    pub family: &'a StateFamily,
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub ln_scale: f64,
    pub steps: usize,
}

impl<'a> BackwardDp<'a> {
    /// Terminal condition `R(p) = min(p, 1-p)`.
    pub fn new(family: &'a StateFamily, grid: GridSpec) -> Self {
        let values = grid.samples().map(|(_, p)| p.min(1.0 - p)).collect();
        BackwardDp {
            family,
            grid,
            values,
            ln_scale: 0.0,
            steps: 0,
        }
    }

    /// Clamp ceiling in table units: true values never exceed 1/2.
    pub fn upper_clamp(&self) -> f64 {
        if self.ln_scale == 0.0 {
            0.5
        } else {
            (0.5f64.ln() - self.ln_scale).exp()
        }
    }

    /// `ln R(1/2)` in true units: the log error for `steps` copies.
    pub fn ln_mid(&self) -> f64 {
        self.values[self.grid.midpoint_index()].ln() + self.ln_scale
    }

    /// True-scale table values (may underflow for very deep runs).
    pub fn materialized(&self) -> Vec<f64> {
        let scale = self.ln_scale.exp();
        self.values.iter().map(|v| v * scale).collect()
    }

    /// Advance one copy using `angle(i, p)` for each sample.
    pub fn step_with(&mut self, angle: impl Fn(usize, f64) -> f64 + Sync) {
        let upper = self.upper_clamp();
        let next: Vec<f64> = (0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                let p = self.grid.credulity(i);
                lookahead(self.family, self.grid, &self.values, upper, p, angle(i, p))
            })
            .collect();
        self.values = next;
        self.steps += 1;
        self.maybe_rescale();
    }

    /// Install a precomputed table for this step (used by the
    /// minimizing construction, which produces values and angles
    /// together).
    pub fn install(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.grid.len());
        self.values = values;
        self.steps += 1;
        self.maybe_rescale();
    }

    fn maybe_rescale(&mut self) {
        let max = self.values.iter().cloned().fold(0.0f64, f64::max);
        if max > 0.0 && max < RESCALE_TRIGGER {
            let inv = 1.0 / max;
            for v in &mut self.values {
                *v *= inv;
            }
            self.ln_scale += max.ln();
        }
    }
}

/// Value function for one stage, in true scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueTable {
    /// Stage index `n`: this is `R_n`, the expected remaining error
    /// after `n` of the run's copies have been measured.
    pub stage: usize,
    pub values: Vec<f64>,
}

/// Documented stage-major JSON structure for value tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueTablesJson {
    pub s: usize,
    pub n_copies: usize,
    pub stages: Vec<ValueTable>,
}

/// Result of a backward grid run: per-`n` error probabilities (kept as
/// natural logs so deep runs stay representable) and optionally the
/// value tables.
#[derive(Debug, Clone)]
pub struct GridRun {
    grid: GridSpec,
    ln_errors: Vec<f64>,
    value_tables: Option<Vec<ValueTable>>,
}

impl GridRun {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Highest copy count the run covered.
    pub fn n_copies(&self) -> usize {
        self.ln_errors.len() - 1
    }

    /// `ln C_n`.
    pub fn ln_error(&self, n_copies: usize) -> f64 {
        self.ln_errors[n_copies]
    }

    /// `C_n` (underflows to 0 below about `e^-745`).
    pub fn error(&self, n_copies: usize) -> f64 {
        self.ln_errors[n_copies].exp()
    }

    /// All errors `C_0 ..= C_N`.
    pub fn errors(&self) -> Vec<f64> {
        self.ln_errors.iter().map(|l| l.exp()).collect()
    }

    /// Stored value tables (terminal stage first), if requested.
    pub fn value_tables(&self) -> Option<&[ValueTable]> {
        self.value_tables.as_deref()
    }

    /// Stage-major JSON view of the stored value tables.
    pub fn tables_stage_major(&self) -> Option<ValueTablesJson> {
        self.value_tables.as_ref().map(|tables| {
            let mut stages = tables.clone();
            stages.sort_by_key(|t| t.stage);
            ValueTablesJson {
                s: self.grid.len(),
                n_copies: self.n_copies(),
                stages,
            }
        })
    }

    /// CSV export of stored value tables:
    /// `stage,sample_index,credulity,value`.
    pub fn write_tables_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "stage,sample_index,credulity,value")?;
        if let Some(json) = self.tables_stage_major() {
            for table in &json.stages {
                for (i, p) in self.grid.samples() {
                    writeln!(
                        w,
                        "{},{},{:.16e},{:.16e}",
                        table.stage, i, p, table.values[i]
                    )?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn from_parts(
        grid: GridSpec,
        ln_errors: Vec<f64>,
        value_tables: Option<Vec<ValueTable>>,
    ) -> Self {
        GridRun {
            grid,
            ln_errors,
            value_tables,
        }
    }
}

/// Backward value iteration of `policy` down to `n_copies` copies.
///
/// Returns the error probability for *every* `n <= n_copies` (read off
/// at `p = 1/2` after each backward step) in a single pass. With
/// `store_tables` the per-stage value functions are retained; this is
/// meant for plot-scale runs, as deep tables underflow when
/// materialized to true scale.
pub fn grid_policy_run(
    policy: &AnglePolicy,
    family: &StateFamily,
    n_copies: usize,
    grid: GridSpec,
    store_tables: bool,
) -> Result<GridRun> {
    family.require_equal_priors()?;
    policy.require_resolvable(n_copies)?;

    let mut dp = BackwardDp::new(family, grid);
    let mut ln_errors = Vec::with_capacity(n_copies + 1);
    let mut tables: Option<Vec<ValueTable>> = store_tables.then(Vec::new);

    let record = |dp: &BackwardDp, tables: &mut Option<Vec<ValueTable>>| {
        if let Some(tables) = tables.as_mut() {
            tables.push(ValueTable {
                stage: n_copies - dp.steps,
                values: dp.materialized(),
            });
        }
    };

    ln_errors.push(dp.ln_mid());
    record(&dp, &mut tables);
    for copies_remaining in 1..=n_copies {
        dp.step_with(|_, p| policy.angle(family, copies_remaining, p));
        ln_errors.push(dp.ln_mid());
        record(&dp, &mut tables);
    }

    Ok(GridRun::from_parts(grid, ln_errors, tables))
}
