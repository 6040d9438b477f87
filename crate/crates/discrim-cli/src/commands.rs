//! The five subcommands, each a pure function of (config, seed).

use std::io::Write;

use rayon::prelude::*;
use serde_json::json;

use discrim::asymptotics::{
    classical_chernoff_fixed, critical_mixture, critical_mixture_max_with_resolution,
    extrapolated_chernoff, lof_chernoff, numeric_chernoff, NumericScheme,
};
use discrim::collective::quantum_chernoff;
use discrim::montecarlo::{
    empirical_error, simulate_sampled_trial, write_trajectory_csv, SimulationConfig, Trajectory,
    TRAJECTORY_CSV_HEADER,
};
use discrim::schemes_dp::{
    error_curve, goa_solve, gof_optimize, loa_error, lof_error, AnglePolicy, SchemeId,
};
use discrim::{Error as LibError, StateFamily};

use crate::config::{Method, SweepConfig};
use crate::output::{Cell, Table};
use crate::CliError;

/// Error curve: one row per (scheme, family, N).
pub fn cmd_error_curve(config: &SweepConfig) -> Result<Table, CliError> {
    let schemes = config.scheme_ids()?;
    let families = config.families()?;
    let mode = config.eval_mode()?;

    let tasks: Vec<(SchemeId, StateFamily)> = schemes
        .iter()
        .flat_map(|&s| families.iter().map(move |&f| (s, f)))
        .collect();
    let results: Vec<_> = tasks
        .par_iter()
        .map(|(scheme, family)| error_curve(*scheme, family, config.n_max, mode))
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;

    let mut table = Table::new(&["scheme", "alpha", "nu", "n", "error"]);
    for ((scheme, family), result) in tasks.iter().zip(&results) {
        for n in 1..=config.n_max {
            table.push(vec![
                Cell::Str(scheme.to_string()),
                Cell::Float(family.alpha()),
                Cell::Float(family.nu()),
                Cell::Int(n as u64),
                Cell::Float(result.errors[n]),
            ]);
        }
    }
    Ok(table)
}

/// Optimal angles: per-N fixed angles for gof, the full stage-major
/// table for goa.
pub fn cmd_angles(config: &SweepConfig) -> Result<Table, CliError> {
    let scheme = config.single_scheme()?;
    let families = config.families()?;
    match scheme {
        SchemeId::Gof => {
            let results: Vec<_> = families
                .par_iter()
                .map(|family| {
                    (1..=config.n_max)
                        .map(|n| gof_optimize(family, n))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()
                .map_err(CliError::from)?;
            let mut table = Table::new(&["scheme", "alpha", "nu", "n", "phi", "degenerate"]);
            for (family, optima) in families.iter().zip(&results) {
                for (n, opt) in (1..=config.n_max).zip(optima) {
                    table.push(vec![
                        Cell::Str("gof".into()),
                        Cell::Float(family.alpha()),
                        Cell::Float(family.nu()),
                        Cell::Int(n as u64),
                        Cell::Float(opt.phi),
                        Cell::Bool(opt.degenerate),
                    ]);
                }
            }
            Ok(table)
        }
        SchemeId::Goa => {
            let grid = config.grid_spec()?;
            let solutions: Vec<_> = families
                .par_iter()
                .map(|family| goa_solve(family, config.n_max, grid))
                .collect::<Result<_, _>>()
                .map_err(CliError::from)?;
            let mut table = Table::new(&[
                "scheme",
                "alpha",
                "nu",
                "stage",
                "sample_index",
                "credulity",
                "angle",
            ]);
            for (family, solution) in families.iter().zip(&solutions) {
                let stage_major = solution.angles.to_stage_major();
                for stage in &stage_major.stages {
                    for (i, p) in grid.samples() {
                        table.push(vec![
                            Cell::Str("goa".into()),
                            Cell::Float(family.alpha()),
                            Cell::Float(family.nu()),
                            Cell::Int(stage.stage as u64),
                            Cell::Int(i as u64),
                            Cell::Float(p),
                            Cell::Float(stage.angles[i]),
                        ]);
                    }
                }
            }
            Ok(table)
        }
        other => Err(CliError::Config(format!(
            "angles supports gof or goa, got {other}"
        ))),
    }
}

fn numeric_scheme(scheme: SchemeId) -> Option<NumericScheme> {
    match scheme {
        SchemeId::Lof => Some(NumericScheme::Lof),
        SchemeId::Loa => Some(NumericScheme::Loa),
        SchemeId::Goa => Some(NumericScheme::Goa),
        _ => None,
    }
}

/// Chernoff exponents; rows carry the method tag and, for numeric
/// estimates, the grid size they were computed at.
pub fn cmd_chernoff(config: &SweepConfig) -> Result<Table, CliError> {
    let schemes = config.scheme_ids()?;
    let families = config.families()?;
    let grids = config.grid_specs()?;

    let mut table = Table::new(&["alpha", "nu", "scheme", "method", "s", "xi"]);
    let mut row = |family: &StateFamily, scheme: SchemeId, method: &str, s: Option<usize>, xi: f64| {
        table.push(vec![
            Cell::Float(family.alpha()),
            Cell::Float(family.nu()),
            Cell::Str(scheme.to_string()),
            Cell::Str(method.into()),
            s.map_or(Cell::Empty, |s| Cell::Int(s as u64)),
            Cell::Float(xi),
        ]);
    };

    for family in &families {
        for &scheme in &schemes {
            for &method in &config.methods {
                match (scheme, method) {
                    (SchemeId::Ocm, Method::Analytic) => {
                        row(family, scheme, "analytic", None, quantum_chernoff(family)?.xi);
                    }
                    (SchemeId::Lof, Method::Analytic) => {
                        row(family, scheme, "analytic", None, lof_chernoff(family)?.xi);
                    }
                    (SchemeId::Gof, Method::Classical) => {
                        let est = classical_chernoff_fixed(family)?;
                        row(family, scheme, "classical-optimized", None, est.xi);
                    }
                    (_, Method::Numeric) => {
                        let Some(numeric) = numeric_scheme(scheme) else {
                            continue;
                        };
                        for &grid in &grids {
                            eprintln!(
                                "# chernoff numeric {numeric} alpha={} nu={} s={} n_max={}",
                                family.alpha(),
                                family.nu(),
                                grid.len(),
                                config.chernoff_n_max
                            );
                            let run = numeric_chernoff(
                                numeric,
                                family,
                                grid,
                                config.chernoff_n_max,
                                config.delta_n,
                            )?;
                            row(family, scheme, "numeric", Some(grid.len()), run.estimate.xi);
                        }
                    }
                    (_, Method::Extrapolated) => {
                        let Some(numeric) = numeric_scheme(scheme) else {
                            continue;
                        };
                        eprintln!(
                            "# chernoff extrapolated {numeric} alpha={} nu={} grids={:?}",
                            family.alpha(),
                            family.nu(),
                            config.grids
                        );
                        match extrapolated_chernoff(
                            numeric,
                            family,
                            &grids,
                            config.chernoff_n_max,
                            config.delta_n,
                            config.high_purity_floor,
                        ) {
                            Ok(est) => row(family, scheme, "extrapolated", None, est.xi),
                            // The high-purity regime is omitted rather
                            // than reported with a bogus value.
                            Err(LibError::NumericFailure(msg)) => {
                                eprintln!("# skipped: {msg}");
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(table)
}

/// Critical mixture per separation, with an optional global-maximum row.
pub fn cmd_critical(config: &SweepConfig) -> Result<Table, CliError> {
    let alphas = config.alphas_radians();
    if alphas.is_empty() {
        return Err(CliError::Config(
            "config field `alphas` must list at least one separation".into(),
        ));
    }
    let results: Vec<_> = alphas
        .par_iter()
        .map(|&alpha| critical_mixture(alpha, config.critical_tol))
        .collect::<Result<_, _>>()
        .map_err(CliError::from)?;

    let mut table = Table::new(&["alpha", "nu_crit", "is_max"]);
    for c in &results {
        table.push(vec![
            Cell::Float(c.alpha),
            Cell::Float(c.nu_crit),
            Cell::Bool(false),
        ]);
    }
    if config.include_max {
        let max = critical_mixture_max_with_resolution(
            config.critical_scan_points,
            config.critical_tol,
        )?;
        table.push(vec![
            Cell::Float(max.alpha),
            Cell::Float(max.nu_crit),
            Cell::Bool(true),
        ]);
    }
    Ok(table)
}

/// Policy and dynamic-programming prediction for one scheme, as used
/// by the simulator.
fn simulation_policy(
    scheme: SchemeId,
    family: &StateFamily,
    config: &SweepConfig,
) -> Result<(AnglePolicy, f64), CliError> {
    let n = config.n_max;
    Ok(match scheme {
        SchemeId::Lof => (AnglePolicy::unbiased(), lof_error(family, n)?),
        SchemeId::Gof => {
            let opt = gof_optimize(family, n)?;
            (AnglePolicy::Fixed(opt.phi), opt.error)
        }
        SchemeId::Loa => (
            AnglePolicy::OsmRule,
            loa_error(family, n, config.eval_mode()?)?,
        ),
        SchemeId::Goa => {
            let solution = goa_solve(family, n, config.grid_spec()?)?;
            let predicted = solution.run.error(n);
            (AnglePolicy::Table(solution.angles), predicted)
        }
        SchemeId::Ocm => {
            return Err(CliError::Config(
                "ocm is a collective measurement; it has no local trajectory simulation".into(),
            ))
        }
    })
}

pub struct SimulateOutput {
    pub trajectories: Vec<(u64, Trajectory)>,
    pub summary: serde_json::Value,
}

/// Seeded trajectories plus an empirical-vs-predicted summary.
pub fn cmd_simulate(config: &SweepConfig) -> Result<SimulateOutput, CliError> {
    let scheme = config.single_scheme()?;
    let families = config.families()?;
    if families.len() != 1 {
        return Err(CliError::Config(format!(
            "simulate takes exactly one (alpha, nu) pair, got {}",
            families.len()
        )));
    }
    let family = families[0];
    if config.trials == 0 {
        return Err(CliError::Config("config field `trials` must be >= 1".into()));
    }
    let (policy, predicted) = simulation_policy(scheme, &family, config)?;

    let sampling = config.true_state.into();
    let sim = SimulationConfig {
        seed: config.seed,
        trials: config.trials,
        sampling,
    };
    let empirical = empirical_error(&policy, &family, config.n_max, &sim)?;
    if empirical.is_low_count() {
        eprintln!(
            "# warning: only {} failures observed; standard error is unreliable",
            empirical.failures
        );
    }

    // Exported trajectories are bit-identical replays of the first
    // trials the empirical rate counted.
    let mut trajectories = Vec::with_capacity(config.trajectories as usize);
    for trial in 0..config.trajectories {
        let t = simulate_sampled_trial(&policy, &family, config.n_max, config.seed, trial, sampling)?;
        trajectories.push((trial, t));
    }

    let deviation = (empirical.rate - predicted).abs();
    let summary = json!({
        "scheme": scheme.to_string(),
        "alpha": family.alpha(),
        "nu": family.nu(),
        "n_copies": config.n_max,
        "trials": config.trials,
        "empirical_rate": empirical.rate,
        "standard_error": empirical.standard_error,
        "failures": empirical.failures,
        "dp_error": predicted,
        "abs_deviation": deviation,
        "within_three_sigma": deviation <= 3.0 * empirical.standard_error,
        "low_count_warning": empirical.is_low_count(),
    });
    Ok(SimulateOutput {
        trajectories,
        summary,
    })
}

/// Trajectory export in CSV form.
pub fn write_trajectories_csv<W: Write>(
    out: &mut W,
    trajectories: &[(u64, Trajectory)],
) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for (trial, t) in trajectories {
        write_trajectory_csv(&mut *out, *trial, t)?;
    }
    Ok(())
}

/// Trajectory export as JSON lines.
pub fn write_trajectories_jsonl<W: Write>(
    out: &mut W,
    trajectories: &[(u64, Trajectory)],
) -> std::io::Result<()> {
    for (trial, t) in trajectories {
        let mut value = serde_json::to_value(t)?;
        value["trial"] = json!(trial);
        writeln!(out, "{value}")?;
    }
    Ok(())
}
