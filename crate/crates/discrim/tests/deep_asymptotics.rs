//! Large-N exponent checks that exercise the full extrapolation
//! pipeline for the adaptive schemes.

use discrim::asymptotics::{
    extrapolate_chernoff, extrapolated_chernoff, lof_chernoff, numeric_chernoff, NumericScheme,
    DEFAULT_HIGH_PURITY_FLOOR,
};
use discrim::grid::GridSpec;
use discrim::StateFamily;
use std::f64::consts::FRAC_PI_6;

fn grids(sizes: &[usize]) -> Vec<GridSpec> {
    sizes.iter().map(|&s| GridSpec::new(s).unwrap()).collect()
}

/// The optimal adaptive scheme cannot scale worse than the locally
/// optimal one, and above the critical mixture its extrapolated
/// exponent lies on top of the fixed-scheme one.
#[test]
fn goa_extrapolation_dominates_loa_and_tracks_lof() {
    let sizes = [501usize, 1001, 1501, 2001, 2501];
    for nu in [0.01, 0.02] {
        let family = StateFamily::symmetric(FRAC_PI_6, nu).unwrap();
        let goa = extrapolated_chernoff(
            NumericScheme::Goa,
            &family,
            &grids(&sizes),
            400,
            2,
            DEFAULT_HIGH_PURITY_FLOOR,
        )
        .unwrap();
        let loa = extrapolated_chernoff(
            NumericScheme::Loa,
            &family,
            &grids(&sizes),
            400,
            2,
            DEFAULT_HIGH_PURITY_FLOOR,
        )
        .unwrap();
        let lof = extrapolated_chernoff(
            NumericScheme::Lof,
            &family,
            &grids(&sizes),
            400,
            2,
            DEFAULT_HIGH_PURITY_FLOOR,
        )
        .unwrap();
        assert!(
            goa.xi >= loa.xi - 1e-3,
            "nu={nu}: goa {} < loa {}",
            goa.xi,
            loa.xi
        );
        assert!(
            (goa.xi - lof.xi).abs() <= 5e-3,
            "nu={nu}: goa {} vs numeric lof {}",
            goa.xi,
            lof.xi
        );
    }
}

/// Finite-grid estimates decrease monotonically toward the analytic
/// value as the grid refines.
#[test]
fn lof_numeric_estimates_decrease_with_grid_size() {
    let family = StateFamily::symmetric(FRAC_PI_6, 0.05).unwrap();
    let analytic = lof_chernoff(&family).unwrap().xi;
    let mut last = f64::INFINITY;
    for s in [501usize, 1001, 1501] {
        let run = numeric_chernoff(
            NumericScheme::Lof,
            &family,
            GridSpec::new(s).unwrap(),
            400,
            2,
        )
        .unwrap();
        assert!(run.estimate.xi < last, "s={s}");
        assert!(run.estimate.xi > analytic, "s={s}");
        last = run.estimate.xi;
    }
}

/// The critical mixture rises from zero at the separation limits to a
/// single interior maximum: evaluated on a coarse scan, the curve is
/// unimodal within the bisection tolerance (its own oracle for the
/// maximum search).
#[test]
fn critical_mixture_has_monotone_flanks() {
    use discrim::asymptotics::critical_mixture;
    let tol = 2e-4;
    let points = 24;
    let step = std::f64::consts::FRAC_PI_2 / (points + 1) as f64;
    let scan: Vec<f64> = (1..=points)
        .map(|k| critical_mixture(step * k as f64, tol).unwrap().nu_crit)
        .collect();
    let peak = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(peak > 0 && peak < points - 1, "peak at index {peak}");
    for i in 1..=peak {
        assert!(scan[i] >= scan[i - 1] - 2.0 * tol, "rise at {i}: {scan:?}");
    }
    for i in peak + 1..scan.len() {
        assert!(scan[i] <= scan[i - 1] + 2.0 * tol, "fall at {i}: {scan:?}");
    }
    // Both ends decay toward zero.
    assert!(scan[0] < 0.01);
    assert!(scan[scan.len() - 1] < 0.01);
}

/// The paper's full sample set including s = 10001; expensive, so
/// ignored by default (run with `--ignored`).
#[test]
#[ignore = "runs the s=10001 grid; several minutes"]
fn lof_extrapolation_with_largest_grid() {
    let family = StateFamily::symmetric(FRAC_PI_6, 0.02).unwrap();
    let analytic = lof_chernoff(&family).unwrap().xi;
    let mut samples = Vec::new();
    for s in [501usize, 1001, 1501, 2001, 2501, 10001] {
        let run = numeric_chernoff(
            NumericScheme::Lof,
            &family,
            GridSpec::new(s).unwrap(),
            400,
            2,
        )
        .unwrap();
        samples.push((s, run.estimate.xi));
    }
    let extrapolated = extrapolate_chernoff(&samples).unwrap().xi;
    let gap = analytic - extrapolated;
    assert!(gap > 0.0 && gap <= 0.005, "gap = {gap}");
}
