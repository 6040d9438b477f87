//! Declarative sweep configuration: one TOML file drives every
//! subcommand; command-line flags override individual fields.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use discrim::grid::GridSpec;
use discrim::montecarlo::TrueStateSampling;
use discrim::schemes_dp::{EvalMode, SchemeId};
use discrim::{Sign, StateFamily};

use crate::CliError;

/// How finite-N scheme errors are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Grid,
}

/// Exponent methods selectable for the chernoff command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Classical,
    Numeric,
    Extrapolated,
}

/// True-state sampling rule for simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrueState {
    Plus,
    Minus,
    Prior,
}

impl From<TrueState> for TrueStateSampling {
    fn from(t: TrueState) -> Self {
        match t {
            TrueState::Plus => TrueStateSampling::Fixed(Sign::Plus),
            TrueState::Minus => TrueStateSampling::Fixed(Sign::Minus),
            TrueState::Prior => TrueStateSampling::Prior,
        }
    }
}

/// The full sweep configuration. Every field has a default so partial
/// files work; `deny_unknown_fields` turns typos into config errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Schemes to sweep (error-curve/chernoff take several; angles and
    /// simulate take exactly one).
    pub schemes: Vec<String>,
    /// Separations, radians unless `degrees` is set.
    pub alphas: Vec<f64>,
    /// Depolarizing mixtures.
    pub nus: Vec<f64>,
    /// Prior probability of the plus preparation.
    pub q: f64,
    /// Interpret `alphas` as degrees on input (outputs stay radians).
    pub degrees: bool,
    /// Largest copy count for finite-N sweeps.
    pub n_max: usize,
    /// Finite-N evaluation mode.
    pub mode: Mode,
    /// Credulity samples for grid evaluation.
    pub grid: usize,
    /// Grid sizes for numeric/extrapolated exponents.
    pub grids: Vec<usize>,
    /// Drop the largest entry of `grids` (the dominant cost) at some
    /// loss of extrapolation accuracy.
    pub skip_largest_grid: bool,
    /// Exponent methods to emit (valid combinations per scheme only).
    pub methods: Vec<Method>,
    /// Depth of the numeric exponent run.
    pub chernoff_n_max: usize,
    /// Log-gradient differencing step (even).
    pub delta_n: usize,
    /// Below this mixture, adaptive extrapolations are skipped as
    /// unreliable.
    pub high_purity_floor: f64,
    /// Bisection tolerance for the critical mixture.
    pub critical_tol: f64,
    /// Scan resolution for the critical-mixture maximum.
    pub critical_scan_points: usize,
    /// Append the global-maximum row to the critical table.
    pub include_max: bool,
    /// Simulation seed.
    pub seed: u64,
    /// Simulation trials for the empirical rate.
    pub trials: u64,
    /// Number of trajectories exported by simulate.
    pub trajectories: u64,
    /// True-state sampling rule.
    pub true_state: TrueState,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            schemes: Vec::new(),
            alphas: Vec::new(),
            nus: Vec::new(),
            q: 0.5,
            degrees: false,
            n_max: 10,
            mode: Mode::Grid,
            grid: 2501,
            grids: vec![501, 1001, 1501, 2001, 2501, 10001],
            skip_largest_grid: false,
            methods: vec![
                Method::Analytic,
                Method::Classical,
                Method::Numeric,
                Method::Extrapolated,
            ],
            chernoff_n_max: 400,
            delta_n: 2,
            high_purity_floor: 0.002,
            critical_tol: 1e-4,
            critical_scan_points: 50,
            include_max: false,
            seed: 0,
            trials: 100_000,
            trajectories: 6,
            true_state: TrueState::Prior,
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    /// Separations in radians, after the optional degrees conversion.
    pub fn alphas_radians(&self) -> Vec<f64> {
        self.alphas
            .iter()
            .map(|&a| {
                if self.degrees {
                    a * std::f64::consts::PI / 180.0
                } else {
                    a
                }
            })
            .collect()
    }

    pub fn scheme_ids(&self) -> Result<Vec<SchemeId>, CliError> {
        if self.schemes.is_empty() {
            return Err(CliError::Config(
                "config field `schemes` must list at least one scheme".into(),
            ));
        }
        self.schemes
            .iter()
            .map(|s| {
                SchemeId::from_str(s).map_err(|_| {
                    CliError::Config(format!(
                        "config field `schemes`: unknown scheme {s:?} (expected ocm|lof|gof|loa|goa)"
                    ))
                })
            })
            .collect()
    }

    /// Exactly one scheme, for the commands that need it.
    pub fn single_scheme(&self) -> Result<SchemeId, CliError> {
        let ids = self.scheme_ids()?;
        if ids.len() != 1 {
            return Err(CliError::Config(format!(
                "this command takes exactly one scheme, got {}",
                self.schemes.len()
            )));
        }
        Ok(ids[0])
    }

    /// Cartesian product of the family parameters, in config order.
    pub fn families(&self) -> Result<Vec<StateFamily>, CliError> {
        if self.alphas.is_empty() {
            return Err(CliError::Config(
                "config field `alphas` must list at least one separation".into(),
            ));
        }
        if self.nus.is_empty() {
            return Err(CliError::Config(
                "config field `nus` must list at least one mixture".into(),
            ));
        }
        let mut families = Vec::with_capacity(self.alphas.len() * self.nus.len());
        for &alpha in &self.alphas_radians() {
            for &nu in &self.nus {
                families.push(StateFamily::new(alpha, nu, self.q).map_err(|e| {
                    CliError::Config(format!("invalid family (alpha={alpha}, nu={nu}): {e}"))
                })?);
            }
        }
        Ok(families)
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.grid)
            .map_err(|e| CliError::Config(format!("config field `grid`: {e}")))
    }

    pub fn grid_specs(&self) -> Result<Vec<GridSpec>, CliError> {
        let mut sizes = self.grids.clone();
        if sizes.is_empty() {
            return Err(CliError::Config(
                "config field `grids` must list at least one grid size".into(),
            ));
        }
        if self.skip_largest_grid && sizes.len() > 1 {
            let max = *sizes.iter().max().unwrap();
            sizes.retain(|&s| s != max);
        }
        sizes
            .iter()
            .map(|&s| {
                GridSpec::new(s).map_err(|e| CliError::Config(format!("config field `grids`: {e}")))
            })
            .collect()
    }

    pub fn eval_mode(&self) -> Result<EvalMode, CliError> {
        Ok(match self.mode {
            Mode::Exact => EvalMode::Exact,
            Mode::Grid => EvalMode::Grid(self.grid_spec()?),
        })
    }
}
