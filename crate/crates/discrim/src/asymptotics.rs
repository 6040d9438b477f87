//! Asymptotic error exponents (Chernoff bounds): closed forms,
//! optimized classical bounds for fixed measurements, numeric
//! large-`N` estimates for the adaptive schemes, grid-size
//! extrapolation, and the critical-mixture bifurcation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::optimize::golden_section_min;
use crate::qubit_model::{Sign, StateFamily};
use crate::schemes_dp::{goa_solve, grid_policy_run, AnglePolicy};

/// Fixed exponent of `log s` in the grid-size extrapolation model.
pub const LOG_S_EXPONENT: f64 = 1.22;

/// Below this mixture the grid-size extrapolation of the adaptive
/// schemes is too unstable to report.
pub const DEFAULT_HIGH_PURITY_FLOOR: f64 = 0.002;

/// Angle tolerance defining "the optimal fixed measurement is
/// unbiased" in the bifurcation predicate.
const BIFURCATION_ANGLE_TOL: f64 = 1e-5;

/// Deviation from `pi/4` beyond which the optimized fixed measurement
/// is reported as mirror-degenerate.
const CLASSICAL_DEGENERACY_TOL: f64 = 1e-5;

/// Default depth and differencing step of the numeric estimator.
pub const DEFAULT_NUMERIC_N_MAX: usize = 400;
pub const DEFAULT_NUMERIC_DELTA_N: usize = 2;

/// Provenance of an exponent estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentMethod {
    Analytic,
    ClassicalOptimized,
    Numeric { grid_size: usize },
    Extrapolated,
}

impl ExponentMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExponentMethod::Analytic => "analytic",
            ExponentMethod::ClassicalOptimized => "classical-optimized",
            ExponentMethod::Numeric { .. } => "numeric",
            ExponentMethod::Extrapolated => "extrapolated",
        }
    }

    /// Grid size for numeric estimates, if any.
    pub fn grid_size(&self) -> Option<usize> {
        match self {
            ExponentMethod::Numeric { grid_size } => Some(*grid_size),
            _ => None,
        }
    }
}

impl fmt::Display for ExponentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid-size extrapolation model `xi_s = x + y / (log s)^z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    /// Asymptote: the extrapolated exponent.
    pub x: f64,
    /// Amplitude of the finite-grid excess.
    pub y: f64,
    /// Exponent of `log s`; fixed to 1.22 unless overridden.
    pub z: f64,
}

/// An exponent with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffEstimate {
    pub xi: f64,
    pub method: ExponentMethod,
    /// Minimizing Rényi weight, where an optimization produced one.
    pub a_star: Option<f64>,
    /// Minimizing measurement angle, canonicalized to `<= pi/4`.
    pub phi_star: Option<f64>,
    /// Set when `phi_star` and `pi/2 - phi_star` are equally optimal.
    pub degenerate: bool,
    pub fit: Option<FitModel>,
}

/// Critical mixture at one separation: below `nu_crit` the optimal
/// fixed measurement bifurcates away from unbiased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalMixture {
    pub alpha: f64,
    pub nu_crit: f64,
}

/// Analytic Chernoff exponent of the locally optimal fixed scheme:
/// `-1/2 log[1 - (1-nu)^2 (1-c^2)]`.
pub fn lof_chernoff(family: &StateFamily) -> Result<ChernoffEstimate> {
    family.require_equal_priors()?;
    let c2 = family.c() * family.c();
    let r = 1.0 - family.nu();
    let xi = -0.5 * (1.0 - r * r * (1.0 - c2)).ln();
    Ok(ChernoffEstimate {
        xi: xi.max(0.0),
        method: ExponentMethod::Analytic,
        a_star: None,
        phi_star: None,
        degenerate: false,
        fit: None,
    })
}

/// Classical Chernoff coefficient of the fixed measurement at angle
/// `phi`:
/// `M(a, phi) = sum_d Pr[d|rho_+,phi]^a Pr[d|rho_-,phi]^(1-a)`.
///
/// Outcomes impossible under either hypothesis contribute nothing for
/// every `a` (the support convention), which keeps the pure-state
/// boundary consistent with the `a -> 0, 1` limits.
pub fn chernoff_coefficient(family: &StateFamily, a: f64, phi: f64) -> f64 {
    let mut m = 0.0;
    for d in Sign::BOTH {
        let (u, v) = family.likelihoods(d, phi);
        if u > 0.0 && v > 0.0 {
            m += u.powf(a) * v.powf(1.0 - a);
        }
    }
    m
}

/// Minimize `M(a, phi)` on a slice of fixed `phi`.
fn minimize_over_a(family: &StateFamily, phi: f64) -> (f64, f64) {
    golden_section_min(|a| chernoff_coefficient(family, a, phi), 0.0, 1.0, 1e-10)
}

/// Globally optimal fixed-measurement exponent by direct minimization
/// of the classical Chernoff coefficient over `(a, phi)`.
///
/// The equal-prior symmetry `M(a, phi) = M(1-a, pi/2-phi)` restricts
/// the search to `phi <= pi/4`; any optimum biased away from `pi/4`
/// therefore has an equally optimal mirror partner, reported via the
/// degeneracy flag. The search combines a 16x16 multistart with
/// alternating golden-section descent, plus the two analytically
/// special slices (unbiased, and fully biased where the pure-state
/// optimum sits on the support boundary).
pub fn classical_chernoff_fixed(family: &StateFamily) -> Result<ChernoffEstimate> {
    family.require_equal_priors()?;

    let alternating = |a0: f64, phi0: f64| -> Result<(f64, f64, f64)> {
        let mut a = a0;
        let mut phi = phi0;
        let mut best = chernoff_coefficient(family, a, phi);
        for _ in 0..200 {
            let (a_new, _) = minimize_over_a(family, phi);
            let (phi_new, m_new) = golden_section_min(
                |phi| chernoff_coefficient(family, a_new, phi),
                0.0,
                FRAC_PI_4,
                1e-10,
            );
            a = a_new;
            phi = phi_new;
            if best - m_new < 1e-12 {
                return Ok((a, phi, m_new.min(best)));
            }
            best = m_new;
        }
        // Not converged to the improvement tolerance.
        if best.is_finite() {
            Ok((a, phi, best))
        } else {
            Err(Error::OptimizerFailure(format!(
                "alternating minimization diverged at alpha={}, nu={}",
                family.alpha(),
                family.nu()
            )))
        }
    };

    // Multistart over the reduced domain.
    let mut starts: Vec<(f64, f64, f64)> = Vec::with_capacity(256);
    for i in 0..16 {
        for j in 0..16 {
            let a = (i as f64 + 0.5) / 16.0;
            let phi = (j as f64 + 0.5) / 16.0 * FRAC_PI_4;
            starts.push((chernoff_coefficient(family, a, phi), a, phi));
        }
    }
    starts.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut candidates: Vec<(f64, f64, f64)> = Vec::new();
    for &(_, a0, phi0) in starts.iter().take(3) {
        candidates.push(alternating(a0, phi0)?);
    }
    // Special slices: exactly unbiased, and exactly fully biased.
    for phi in [FRAC_PI_4, 0.5 * family.alpha()] {
        let (a, m) = minimize_over_a(family, phi);
        candidates.push((a, phi, m));
    }

    // Pick the lowest coefficient; on ties prefer the more biased
    // angle so the bifurcation flips only when unbiased strictly wins.
    let mut best = candidates[0];
    for &c in &candidates[1..] {
        let better = c.2 < best.2 - 1e-15 || ((c.2 - best.2).abs() <= 1e-15 && c.1 < best.1);
        if better {
            best = c;
        }
    }
    let (a_star, phi_star, m_star) = best;
    if !(m_star.is_finite() && m_star > 0.0) {
        return Err(Error::OptimizerFailure(format!(
            "classical coefficient left (0, inf): {m_star}"
        )));
    }

    Ok(ChernoffEstimate {
        xi: (-m_star.ln()).max(0.0),
        method: ExponentMethod::ClassicalOptimized,
        a_star: Some(a_star),
        phi_star: Some(phi_star),
        degenerate: FRAC_PI_4 - phi_star > CLASSICAL_DEGENERACY_TOL,
        fit: None,
    })
}

/// Bifurcation point of the optimal fixed measurement: the smallest
/// mixture at which the optimizing angle is unbiased, located by
/// bisection on the angle predicate.
pub fn critical_mixture(alpha: f64, tol: f64) -> Result<CriticalMixture> {
    if !(alpha > 0.0 && alpha < FRAC_PI_2) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            constraint: "0 < alpha < pi/2",
        });
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            constraint: "> 0",
        });
    }

    let unbiased = |nu: f64| -> Result<bool> {
        let family = StateFamily::symmetric(alpha, nu)?;
        let estimate = classical_chernoff_fixed(&family)?;
        let phi = estimate.phi_star.expect("optimizer reports an angle");
        Ok((phi - FRAC_PI_4).abs() <= BIFURCATION_ANGLE_TOL)
    };

    let mut lo = 0.0;
    let mut hi = 0.05;
    while !unbiased(hi)? {
        lo = hi;
        hi = (2.0 * hi).min(1.0);
        if hi >= 1.0 {
            break;
        }
    }
    if unbiased(lo)? {
        // Already unbiased at the lower end: the bifurcation sits at 0.
        return Ok(CriticalMixture {
            alpha,
            nu_crit: lo,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if unbiased(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalMixture {
        alpha,
        nu_crit: 0.5 * (lo + hi),
    })
}

/// Maximum of the critical mixture over the separation, by coarse scan
/// plus golden-section refinement. Returns the maximizing `alpha` and
/// the maximal `nu_crit`.
pub fn critical_mixture_max() -> Result<CriticalMixture> {
    critical_mixture_max_with_resolution(50, 1e-4)
}

/// As [`critical_mixture_max`] with explicit scan resolution and
/// bisection tolerance.
pub fn critical_mixture_max_with_resolution(
    scan_points: usize,
    tol: f64,
) -> Result<CriticalMixture> {
    debug_assert!(scan_points >= 8);
    let step = FRAC_PI_2 / (scan_points + 1) as f64;
    let mut best_k = 1;
    let mut best = f64::NEG_INFINITY;
    for k in 1..=scan_points {
        let alpha = step * k as f64;
        let nu = critical_mixture(alpha, tol)?.nu_crit;
        if nu > best {
            best = nu;
            best_k = k;
        }
    }
    let lo = step * (best_k as f64 - 1.0);
    let hi = step * (best_k as f64 + 1.0);
    let (alpha_star, neg) = golden_section_min(
        |alpha| -critical_mixture(alpha, tol).map(|c| c.nu_crit).unwrap_or(0.0),
        lo.max(1e-6),
        hi.min(FRAC_PI_2 - 1e-6),
        1e-3,
    );
    let refined = -neg;
    if refined >= best {
        Ok(CriticalMixture {
            alpha: alpha_star,
            nu_crit: refined,
        })
    } else {
        Ok(CriticalMixture {
            alpha: step * best_k as f64,
            nu_crit: best,
        })
    }
}

/// Schemes the numeric large-`N` estimator supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericScheme {
    Lof,
    Loa,
    Goa,
}

impl NumericScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            NumericScheme::Lof => "lof",
            NumericScheme::Loa => "loa",
            NumericScheme::Goa => "goa",
        }
    }
}

impl fmt::Display for NumericScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Log errors of a deep grid run plus the terminal gradient estimate.
#[derive(Debug, Clone)]
pub struct NumericExponentRun {
    pub scheme: NumericScheme,
    pub grid: GridSpec,
    ln_errors: Vec<f64>,
    pub estimate: ChernoffEstimate,
}

impl NumericExponentRun {
    /// `ln C_n` along the run.
    pub fn ln_error(&self, n_copies: usize) -> f64 {
        self.ln_errors[n_copies]
    }

    /// Log-gradient exponent estimate at depth `n` over a step of
    /// `delta` copies: `-(ln C_n - ln C_{n-delta}) / delta`.
    pub fn gradient_at(&self, n_copies: usize, delta: usize) -> f64 {
        -(self.ln_errors[n_copies] - self.ln_errors[n_copies - delta]) / delta as f64
    }
}

/// Numeric Chernoff estimate: run the grid dynamic program out to
/// `n_max` copies and difference the log error over the last
/// `delta_n` copies. `delta_n` must be even to step over the parity
/// staircase of the fixed scheme.
pub fn numeric_chernoff(
    scheme: NumericScheme,
    family: &StateFamily,
    grid: GridSpec,
    n_max: usize,
    delta_n: usize,
) -> Result<NumericExponentRun> {
    family.require_equal_priors()?;
    if n_max < 100 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            constraint: ">= 100",
        });
    }
    if delta_n == 0 || !delta_n.is_multiple_of(2) || delta_n >= n_max {
        return Err(Error::InvalidParameter {
            name: "delta_n",
            value: delta_n as f64,
            constraint: "even, >= 2, < n_max",
        });
    }

    let ln_errors: Vec<f64> = match scheme {
        NumericScheme::Lof => {
            let run = grid_policy_run(&AnglePolicy::unbiased(), family, n_max, grid, false)?;
            (0..=n_max).map(|n| run.ln_error(n)).collect()
        }
        NumericScheme::Loa => {
            let run = grid_policy_run(&AnglePolicy::OsmRule, family, n_max, grid, false)?;
            (0..=n_max).map(|n| run.ln_error(n)).collect()
        }
        NumericScheme::Goa => {
            let solution = goa_solve(family, n_max, grid)?;
            (0..=n_max).map(|n| solution.run.ln_error(n)).collect()
        }
    };

    let xi = -(ln_errors[n_max] - ln_errors[n_max - delta_n]) / delta_n as f64;
    if !xi.is_finite() {
        return Err(Error::NumericFailure(format!(
            "log-gradient estimate is not finite (scheme {scheme}, s = {})",
            grid.len()
        )));
    }
    let estimate = ChernoffEstimate {
        xi: xi.max(0.0),
        method: ExponentMethod::Numeric {
            grid_size: grid.len(),
        },
        a_star: None,
        phi_star: None,
        degenerate: false,
        fit: None,
    };
    Ok(NumericExponentRun {
        scheme,
        grid,
        ln_errors,
        estimate,
    })
}

/// Least-squares fit of `xi_s = x + y / (log s)^1.22` and evaluation
/// at `s -> infinity` (that is, `xi = x`).
pub fn extrapolate_chernoff(samples: &[(usize, f64)]) -> Result<ChernoffEstimate> {
    extrapolate_chernoff_with_exponent(samples, LOG_S_EXPONENT)
}

/// As [`extrapolate_chernoff`] with an explicit `log s` exponent, for
/// callers that override the fixed 1.22.
pub fn extrapolate_chernoff_with_exponent(
    samples: &[(usize, f64)],
    z: f64,
) -> Result<ChernoffEstimate> {
    let distinct = {
        let mut sizes: Vec<usize> = samples.iter().map(|&(s, _)| s).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes.len()
    };
    if distinct < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct grid sizes, got {distinct}"
        )));
    }

    // Normal equations for the basis {1, (log s)^-z}.
    let mut s11 = 0.0f64;
    let mut s1g = 0.0;
    let mut sgg = 0.0;
    let mut s1y = 0.0;
    let mut sgy = 0.0;
    for &(s, xi) in samples {
        let g = (s as f64).ln().powf(-z);
        s11 += 1.0;
        s1g += g;
        sgg += g * g;
        s1y += xi;
        sgy += g * xi;
    }
    let det = s11 * sgg - s1g * s1g;
    if det.abs() < 1e-14 * s11 * sgg {
        return Err(Error::DegenerateFit(
            "design matrix is rank-deficient".to_string(),
        ));
    }
    let x = (sgg * s1y - s1g * sgy) / det;
    let y = (s11 * sgy - s1g * s1y) / det;
    Ok(ChernoffEstimate {
        xi: x.max(0.0),
        method: ExponentMethod::Extrapolated,
        a_star: None,
        phi_star: None,
        degenerate: false,
        fit: Some(FitModel { x, y, z }),
    })
}

/// Numeric estimates for each grid size followed by the grid-size
/// extrapolation. Adaptive-scheme extrapolations below the
/// high-purity floor are refused as unstable rather than reported.
pub fn extrapolated_chernoff(
    scheme: NumericScheme,
    family: &StateFamily,
    grids: &[GridSpec],
    n_max: usize,
    delta_n: usize,
    high_purity_floor: f64,
) -> Result<ChernoffEstimate> {
    if matches!(scheme, NumericScheme::Loa | NumericScheme::Goa)
        && family.nu() < high_purity_floor
    {
        return Err(Error::NumericFailure(format!(
            "extrapolated {scheme} exponent is unreliable below nu = {high_purity_floor}"
        )));
    }
    let samples: Vec<(usize, f64)> = grids
        .iter()
        .map(|&grid| {
            numeric_chernoff(scheme, family, grid, n_max, delta_n)
                .map(|run| (grid.len(), run.estimate.xi))
        })
        .collect::<Result<_>>()?;
    extrapolate_chernoff(&samples)
}
