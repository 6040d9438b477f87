//! The four local measurement schemes: locally/globally optimal,
//! fixed/adaptive.
//!
//! * LOF: unbiased fixed measurements, binomial closed form.
//! * GOF: fixed measurements with the shared angle optimized against
//!   the exact outcome tree.
//! * LOA: the single-copy optimal rule applied adaptively.
//! * GOA: the Bellman-optimal adaptive angle table.
//!
//! Small-`N` errors are evaluated exactly on the outcome tree; large
//! `N` uses backward value iteration on a credulity grid.

mod binom;
pub mod exact;
pub mod goa;
pub mod grid_dp;
pub mod policy;

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::collective;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::optimize::scan_then_golden;
use crate::qubit_model::{osm_error, StateFamily};

pub use exact::{exact_policy_error, exact_policy_error_with_ceiling, DEFAULT_EXACT_TREE_CEILING};
pub use goa::{goa_solve, goa_solve_with_tables, GoaSolution};
pub use grid_dp::{grid_policy_run, GridRun, ValueTable, ValueTablesJson};
pub use policy::{AnglePolicy, AngleTable, AngleTableJson, StageAngles};

/// Angular deviation from `pi/4` beyond which a fixed-scheme optimum
/// counts as (mirror-)degenerate.
const GOF_DEGENERACY_TOL: f64 = 1e-3;

/// How finite-`N` scheme errors are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Full outcome-tree recursion (exponential in `N`).
    Exact,
    /// Backward value iteration on a credulity grid.
    Grid(GridSpec),
}

/// Error probability of the locally optimal fixed (unbiased) scheme,
/// by the binomial closed form. Even `N` inherits the preceding odd
/// value: the last measurement can only produce a tie, and any
/// tie-breaking rule leaves the error unchanged.
pub fn lof_error(family: &StateFamily, n_copies: usize) -> Result<f64> {
    family.require_equal_priors()?;
    if n_copies == 0 {
        return Ok(0.5);
    }
    let n = if n_copies.is_multiple_of(2) {
        n_copies - 1
    } else {
        n_copies
    };
    let c = osm_error(family)?;
    if c == 0.0 {
        return Ok(0.0);
    }

    if n <= 40 {
        // Binomial coefficients are exact in f64 here.
        let mut total = 0.0;
        for k in 0..=n / 2 {
            total += binom::binomial_exact(n, k)
                * (1.0 - c).powi(k as i32)
                * c.powi((n - k) as i32);
        }
        Ok(total)
    } else {
        // Log-domain sum, stable for arbitrary depth.
        let ln_terms: Vec<f64> = (0..=n / 2)
            .map(|k| {
                binom::ln_binomial(n, k)
                    + k as f64 * (1.0 - c).ln()
                    + (n - k) as f64 * c.ln()
            })
            .collect();
        let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = ln_terms.iter().map(|l| (l - max).exp()).sum();
        Ok((max + sum.ln()).exp())
    }
}

/// Result of the fixed-angle global optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofOptimum {
    /// Optimal shared angle, canonicalized to `<= pi/4` when the
    /// mirror pair is degenerate.
    pub phi: f64,
    pub error: f64,
    /// Set when `phi` and `pi/2 - phi` are equally optimal.
    pub degenerate: bool,
}

/// Globally optimal fixed measurement for `n_copies` copies: minimizes
/// the exact tree error over the shared angle.
///
/// The equal-prior objective satisfies `error(phi) = error(pi/2 - phi)`
/// exactly, so the search runs on `[0, pi/4]` and any optimum biased
/// away from `pi/4` implies an equally optimal mirror partner, which
/// sets the degeneracy flag.
pub fn gof_optimize(family: &StateFamily, n_copies: usize) -> Result<GofOptimum> {
    gof_optimize_with_ceiling(family, n_copies, DEFAULT_EXACT_TREE_CEILING)
}

/// As [`gof_optimize`] with an explicit tree ceiling.
pub fn gof_optimize_with_ceiling(
    family: &StateFamily,
    n_copies: usize,
    ceiling: usize,
) -> Result<GofOptimum> {
    family.require_equal_priors()?;
    if n_copies == 0 {
        return Err(Error::InvalidParameter {
            name: "n_copies",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    if n_copies > ceiling {
        return Err(Error::SizeLimit {
            what: "fixed-angle optimization",
            requested: n_copies,
            ceiling,
        });
    }

    let objective = |phi: f64| {
        let policy = AnglePolicy::Fixed(phi);
        exact_policy_error_with_ceiling(&policy, family, n_copies, ceiling)
            .expect("ceiling checked above")
    };
    let (phi, error) = scan_then_golden(objective, 0.0, FRAC_PI_4, 64, 1e-9);
    let degenerate = FRAC_PI_4 - phi > GOF_DEGENERACY_TOL;
    Ok(GofOptimum {
        phi,
        error,
        degenerate,
    })
}

/// Error probability of the locally optimal adaptive scheme (measure
/// each copy in the single-copy optimal basis for the running
/// posterior).
pub fn loa_error(family: &StateFamily, n_copies: usize, mode: EvalMode) -> Result<f64> {
    family.require_equal_priors()?;
    match mode {
        EvalMode::Exact => exact_policy_error(&AnglePolicy::OsmRule, family, n_copies),
        EvalMode::Grid(grid) => {
            Ok(grid_policy_run(&AnglePolicy::OsmRule, family, n_copies, grid, false)?
                .error(n_copies))
        }
    }
}

/// Scheme identifiers shared with the sweep front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    Ocm,
    Lof,
    Gof,
    Loa,
    Goa,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::Ocm,
        SchemeId::Lof,
        SchemeId::Gof,
        SchemeId::Loa,
        SchemeId::Goa,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Ocm => "ocm",
            SchemeId::Lof => "lof",
            SchemeId::Gof => "gof",
            SchemeId::Loa => "loa",
            SchemeId::Goa => "goa",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ocm" => Ok(SchemeId::Ocm),
            "lof" => Ok(SchemeId::Lof),
            "gof" => Ok(SchemeId::Gof),
            "loa" => Ok(SchemeId::Loa),
            "goa" => Ok(SchemeId::Goa),
            _ => Err(Error::InvalidParameter {
                name: "scheme",
                value: f64::NAN,
                constraint: "one of ocm|lof|gof|loa|goa",
            }),
        }
    }
}

/// Per-`N` error curve of one scheme for one family.
#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub scheme: SchemeId,
    /// `errors[n]` is the `n`-copy error; `errors[0] = 1/2`.
    pub errors: Vec<f64>,
    /// Optimal fixed angles per `N` (GOF only), index `n - 1`.
    pub gof_angles: Option<Vec<GofOptimum>>,
    /// Grid used, `None` for exact/closed-form evaluation.
    pub grid: Option<GridSpec>,
}

/// Compute the error curve `C_1 ..= C_{n_max}` of `scheme`.
///
/// OCM, LOF and GOF ignore `mode` (dense solve, closed form, and exact
/// tree respectively); LOA honors it; GOA requires a grid.
pub fn error_curve(
    scheme: SchemeId,
    family: &StateFamily,
    n_max: usize,
    mode: EvalMode,
) -> Result<SchemeResult> {
    family.require_equal_priors()?;
    let mut errors = vec![0.5];
    let mut gof_angles = None;
    let mut grid_used = None;

    match scheme {
        SchemeId::Ocm => {
            for n in 1..=n_max {
                errors.push(collective::ocm_error(family, n)?);
            }
        }
        SchemeId::Lof => {
            for n in 1..=n_max {
                errors.push(lof_error(family, n)?);
            }
        }
        SchemeId::Gof => {
            let mut angles = Vec::with_capacity(n_max);
            for n in 1..=n_max {
                let opt = gof_optimize(family, n)?;
                errors.push(opt.error);
                angles.push(opt);
            }
            gof_angles = Some(angles);
        }
        SchemeId::Loa => match mode {
            EvalMode::Exact => {
                for n in 1..=n_max {
                    errors.push(loa_error(family, n, EvalMode::Exact)?);
                }
            }
            EvalMode::Grid(grid) => {
                let run = grid_policy_run(&AnglePolicy::OsmRule, family, n_max, grid, false)?;
                errors = run.errors();
                grid_used = Some(grid);
            }
        },
        SchemeId::Goa => {
            let grid = match mode {
                EvalMode::Grid(grid) => grid,
                EvalMode::Exact => {
                    return Err(Error::InvalidParameter {
                        name: "mode",
                        value: f64::NAN,
                        constraint: "goa requires a grid",
                    })
                }
            };
            let solution = goa_solve(family, n_max, grid)?;
            errors = solution.run.errors();
            grid_used = Some(grid);
        }
    }

    Ok(SchemeResult {
        scheme,
        errors,
        gof_angles,
        grid: grid_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::ocm_error_pure;
    use std::f64::consts::FRAC_PI_6;

    fn fam(alpha: f64, nu: f64) -> StateFamily {
        StateFamily::symmetric(alpha, nu).unwrap()
    }

    #[test]
    fn lof_single_copy_is_osm() {
        for nu in [0.0, 0.1, 0.8] {
            let f = fam(FRAC_PI_6, nu);
            assert_eq!(
                lof_error(&f, 1).unwrap(),
                osm_error(&f).unwrap(),
                "nu = {nu}"
            );
        }
    }

    #[test]
    fn lof_step_law_is_exact() {
        let f = fam(FRAC_PI_6, 0.1);
        for k in 1..=8 {
            assert_eq!(
                lof_error(&f, 2 * k).unwrap(),
                lof_error(&f, 2 * k - 1).unwrap(),
                "k = {k}"
            );
        }
    }

    #[test]
    fn lof_three_copies_pure_hand_value() {
        let f = fam(FRAC_PI_6, 0.0);
        assert!((lof_error(&f, 3).unwrap() - 5.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn lof_log_domain_matches_exact_binomials() {
        // The two summation paths cross over at n = 40; compare them on
        // a family where both are well-conditioned.
        let f = fam(FRAC_PI_6, 0.1);
        let c = osm_error(&f).unwrap();
        for n in [11usize, 25, 39] {
            let direct: f64 = (0..=n / 2)
                .map(|k| {
                    binom::binomial_exact(n, k)
                        * (1.0 - c).powi(k as i32)
                        * c.powi((n - k) as i32)
                })
                .sum();
            // Force the log-domain path through its building blocks.
            let ln_terms: Vec<f64> = (0..=n / 2)
                .map(|k| {
                    binom::ln_binomial(n, k)
                        + k as f64 * (1.0 - c).ln()
                        + (n - k) as f64 * c.ln()
                })
                .collect();
            let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let log_sum: f64 = ln_terms.iter().map(|l| (l - max).exp()).sum();
            let via_logs = (max + log_sum.ln()).exp();
            assert!(
                ((direct - via_logs) / direct).abs() < 1e-11,
                "n = {n}: {direct} vs {via_logs}"
            );
        }
    }

    #[test]
    fn lof_decreases_only_on_odd_steps() {
        let f = fam(FRAC_PI_6, 0.2);
        let errors: Vec<f64> = (1..=9).map(|n| lof_error(&f, n).unwrap()).collect();
        for w in errors.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(lof_error(&f, 3).unwrap() < lof_error(&f, 2).unwrap());
    }

    #[test]
    fn lof_orthogonal_pure_is_zero() {
        let f = fam(std::f64::consts::FRAC_PI_2, 0.0);
        assert_eq!(lof_error(&f, 5).unwrap(), 0.0);
    }

    #[test]
    fn gof_single_copy_is_unbiased_osm() {
        let f = fam(FRAC_PI_6, 0.1);
        let opt = gof_optimize(&f, 1).unwrap();
        assert!((opt.phi - FRAC_PI_4).abs() < 1e-6);
        assert!((opt.error - osm_error(&f).unwrap()).abs() < 1e-12);
        assert!(!opt.degenerate);
    }

    #[test]
    fn gof_pure_states_bifurcate_with_growing_bias() {
        let f = fam(FRAC_PI_6, 0.0);
        let mut last_bias = 0.0;
        for n in 2..=6 {
            let opt = gof_optimize(&f, n).unwrap();
            assert!(opt.degenerate, "n = {n} should be degenerate");
            assert!(opt.phi < FRAC_PI_4);
            let bias = FRAC_PI_4 - opt.phi;
            assert!(bias > last_bias, "bias should grow with n");
            last_bias = bias;
            // The mirror partner is equally optimal.
            let mirrored = exact_policy_error(
                &AnglePolicy::Fixed(std::f64::consts::FRAC_PI_2 - opt.phi),
                &f,
                n,
            )
            .unwrap();
            assert!((mirrored - opt.error).abs() < 1e-12);
        }
    }

    #[test]
    fn gof_mixed_odd_copies_stay_unbiased() {
        let f = fam(FRAC_PI_6, 0.1);
        for n in [1, 3, 5, 7] {
            let opt = gof_optimize(&f, n).unwrap();
            assert!(
                (opt.phi - FRAC_PI_4).abs() < 1e-4,
                "n = {n}: phi = {}",
                opt.phi
            );
            assert!(!opt.degenerate);
        }
    }

    #[test]
    fn gof_never_beats_collective_and_never_loses_to_lof() {
        let f = fam(FRAC_PI_6, 0.05);
        for n in 1..=6 {
            let gof = gof_optimize(&f, n).unwrap().error;
            let lof = lof_error(&f, n).unwrap();
            let ocm = collective::ocm_error(&f, n).unwrap();
            assert!(gof <= lof + 1e-12, "n = {n}");
            assert!(ocm <= gof + 1e-9, "n = {n}");
        }
    }

    #[test]
    fn loa_pure_matches_collective_closed_form() {
        let f = fam(FRAC_PI_6, 0.0);
        for n in 1..=10 {
            let e = loa_error(&f, n, EvalMode::Exact).unwrap();
            let expect = ocm_error_pure(f.c(), 0.5, n);
            assert!((e - expect).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn loa_fully_depolarized_is_half() {
        let f = fam(FRAC_PI_6, 1.0);
        for n in [1, 5] {
            assert!((loa_error(&f, n, EvalMode::Exact).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unequal_priors_are_rejected_at_scheme_level() {
        let f = StateFamily::new(FRAC_PI_6, 0.1, 0.7).unwrap();
        assert!(lof_error(&f, 3).is_err());
        assert!(gof_optimize(&f, 3).is_err());
        assert!(loa_error(&f, 3, EvalMode::Exact).is_err());
        assert!(goa_solve(&f, 3, GridSpec::new(101).unwrap()).is_err());
    }

    #[test]
    fn scheme_id_round_trips() {
        for scheme in SchemeId::ALL {
            assert_eq!(scheme.as_str().parse::<SchemeId>().unwrap(), scheme);
        }
        assert!("xyz".parse::<SchemeId>().is_err());
        assert_eq!(serde_json::to_string(&SchemeId::Goa).unwrap(), "\"goa\"");
    }

    #[test]
    fn error_curve_assembles_all_schemes() {
        let f = fam(FRAC_PI_6, 0.1);
        let grid = GridSpec::new(501).unwrap();
        for scheme in SchemeId::ALL {
            let result = error_curve(scheme, &f, 4, EvalMode::Grid(grid)).unwrap();
            assert_eq!(result.errors.len(), 5);
            assert_eq!(result.errors[0], 0.5);
            for w in result.errors.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{scheme}");
            }
            if scheme == SchemeId::Gof {
                assert_eq!(result.gof_angles.as_ref().unwrap().len(), 4);
            }
        }
    }

    #[test]
    fn goa_error_curve_requires_grid() {
        let f = fam(FRAC_PI_6, 0.1);
        assert!(error_curve(SchemeId::Goa, &f, 3, EvalMode::Exact).is_err());
    }
}
