//! Globally optimal adaptive scheme: backward construction of the
//! angle table by Bellman's principle.
//!
//! The final column (one copy remaining) is the optimal single-copy
//! angle; each earlier column minimizes the one-step lookahead into
//! the following value table, sample by sample. Since the equal-prior
//! problem is symmetric under `p -> 1 - p`, `phi -> pi/2 - phi`, only
//! the lower half of the grid is minimized and the upper half is
//! filled by reflection; this halves the work and keeps the table
//! exactly mirror-symmetric even where two nearly degenerate minima
//! would otherwise be resolved inconsistently by rounding noise.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::GridSpec;
use crate::optimize::scan_then_golden;
use crate::qubit_model::{osm_angle, StateFamily};

use super::grid_dp::{lookahead, BackwardDp, GridRun, ValueTable};
use super::policy::{AngleTable, ANGLE_MAX};

/// Coarse-scan resolution for the per-sample angle minimization.
const ANGLE_SCAN_POINTS: usize = 64;

/// Golden-section bracket tolerance in the angle.
const ANGLE_TOL: f64 = 1e-9;

/// Solved GOA scheme: the angle table and the per-`n` errors.
#[derive(Debug, Clone)]
pub struct GoaSolution {
    pub angles: AngleTable,
    pub run: GridRun,
}

/// Build the globally optimal adaptive angle table for up to
/// `n_copies` copies and return it with the per-`n` error
/// probabilities (one backward pass serves every `n <= n_copies`).
pub fn goa_solve(family: &StateFamily, n_copies: usize, grid: GridSpec) -> Result<GoaSolution> {
    goa_solve_impl(family, n_copies, grid, false)
}

/// As [`goa_solve`], also retaining the per-stage value tables.
pub fn goa_solve_with_tables(
    family: &StateFamily,
    n_copies: usize,
    grid: GridSpec,
) -> Result<GoaSolution> {
    goa_solve_impl(family, n_copies, grid, true)
}

fn goa_solve_impl(
    family: &StateFamily,
    n_copies: usize,
    grid: GridSpec,
    store_tables: bool,
) -> Result<GoaSolution> {
    family.require_equal_priors()?;

    let mut dp = BackwardDp::new(family, grid);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n_copies);
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
        if copies_remaining == 1 {
            // Final measurement: the optimal single-copy angle, by
            // construction rather than by search.
            let column: Vec<f64> = grid
                .samples()
                .map(|(_, p)| osm_angle(p, family.alpha()))
                .collect();
            dp.step_with(|i, _| column[i]);
            columns.push(column);
        } else {
            let (column, values) = minimized_step(&dp);
            dp.install(values);
            columns.push(column);
        }
        ln_errors.push(dp.ln_mid());
        record(&dp, &mut tables);
    }

    let angles = AngleTable::new(grid, columns, true);
    Ok(GoaSolution {
        angles,
        run: GridRun::from_parts(grid, ln_errors, tables),
    })
}

/// Minimize the one-step lookahead per sample on the lower half of the
/// grid and reflect to the upper half.
fn minimized_step(dp: &BackwardDp) -> (Vec<f64>, Vec<f64>) {
    let grid = dp.grid;
    let s = grid.len();
    let mid = grid.midpoint_index();
    let upper = dp.upper_clamp();

    let half: Vec<(f64, f64)> = (0..=mid)
        .into_par_iter()
        .map(|i| {
            let p = grid.credulity(i);
            scan_then_golden(
                |phi| lookahead(dp.family, grid, &dp.values, upper, p, phi),
                0.0,
                FRAC_PI_2,
                ANGLE_SCAN_POINTS,
                ANGLE_TOL,
            )
        })
        .collect();

    let mut angles = vec![0.0; s];
    let mut values = vec![0.0; s];
    for (i, &(phi, value)) in half.iter().enumerate() {
        let phi = phi.clamp(0.0, ANGLE_MAX);
        angles[i] = phi;
        values[i] = value;
        angles[s - 1 - i] = (FRAC_PI_2 - phi).clamp(0.0, ANGLE_MAX);
        values[s - 1 - i] = value;
    }
    (angles, values)
}
