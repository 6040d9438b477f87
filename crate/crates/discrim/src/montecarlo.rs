//! Measurement-by-measurement simulation of a policy against a
//! sampled true state: credulity trajectories and empirical error
//! rates that statistically validate the dynamic-programming values.
//!
//! Randomness comes from per-trial ChaCha streams derived from
//! `(seed, trial index)`, so trials are order-independent, replayable
//! bit-for-bit, and safe to run in parallel.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::qubit_model::{Sign, StateFamily};
use crate::schemes_dp::AnglePolicy;

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        })
    }
}

/// How the true state is drawn for each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrueStateSampling {
    /// Always the given preparation (as in the published trajectory
    /// plots, which fix the true state to `rho_+`).
    Fixed(Sign),
    /// Bernoulli draw with the family prior `q`.
    Prior,
}

/// Seeded simulation parameters.
#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub seed: u64,
    pub trials: u64,
    pub sampling: TrueStateSampling,
}

/// One recorded measurement step.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryStep {
    pub stage: usize,
    pub credulity_before: f64,
    pub angle: f64,
    pub outcome: Sign,
    pub credulity_after: f64,
}

/// A full simulated run of `N` measurements.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub true_sign: Sign,
    pub steps: Vec<TrajectoryStep>,
    pub final_guess: Sign,
    pub correct: bool,
}

impl Serialize for Trajectory {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Trajectory", 4)?;
        s.serialize_field("true_sign", &self.true_sign)?;
        s.serialize_field("steps", &self.steps)?;
        s.serialize_field("final_guess", &self.final_guess)?;
        s.serialize_field("correct", &self.correct)?;
        s.end()
    }
}

/// Empirical error estimate from repeated trials.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmpiricalError {
    pub rate: f64,
    pub standard_error: f64,
    pub trials: u64,
    pub failures: u64,
}

impl EmpiricalError {
    /// True when too few failures were observed for the normal-theory
    /// standard error to be trustworthy.
    pub fn is_low_count(&self) -> bool {
        self.failures < 10
    }
}

/// The ChaCha stream for one trial of one seeded experiment.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Simulate a single `n_copies`-measurement run of `policy` against a
/// fixed true preparation (trial index 0 of the seed's stream family).
pub fn simulate_trajectory(
    policy: &AnglePolicy,
    true_sign: Sign,
    family: &StateFamily,
    n_copies: usize,
    seed: u64,
) -> Result<Trajectory> {
    simulate_trial(policy, true_sign, family, n_copies, seed, 0)
}

/// As [`simulate_trajectory`] with an explicit trial index.
pub fn simulate_trial(
    policy: &AnglePolicy,
    true_sign: Sign,
    family: &StateFamily,
    n_copies: usize,
    seed: u64,
    trial: u64,
) -> Result<Trajectory> {
    policy.require_resolvable(n_copies)?;
    let mut rng = trial_rng(seed, trial);
    Ok(run_trajectory(policy, true_sign, family, n_copies, &mut rng))
}

/// Replay one trial exactly as [`empirical_error`] runs it: the true
/// state comes from the trial's own stream under `sampling`, so the
/// returned trajectory is bit-identical to the one the aggregate rate
/// counted.
pub fn simulate_sampled_trial(
    policy: &AnglePolicy,
    family: &StateFamily,
    n_copies: usize,
    seed: u64,
    trial: u64,
    sampling: TrueStateSampling,
) -> Result<Trajectory> {
    policy.require_resolvable(n_copies)?;
    let mut rng = trial_rng(seed, trial);
    let true_sign = draw_true_sign(&mut rng, family, sampling);
    Ok(run_trajectory(policy, true_sign, family, n_copies, &mut rng))
}

fn draw_true_sign(rng: &mut ChaCha8Rng, family: &StateFamily, sampling: TrueStateSampling) -> Sign {
    match sampling {
        TrueStateSampling::Fixed(sign) => sign,
        TrueStateSampling::Prior => {
            if rng.random::<f64>() < family.q() {
                Sign::Plus
            } else {
                Sign::Minus
            }
        }
    }
}

fn run_trajectory(
    policy: &AnglePolicy,
    true_sign: Sign,
    family: &StateFamily,
    n_copies: usize,
    rng: &mut ChaCha8Rng,
) -> Trajectory {
    let mut p = family.q();
    let mut steps = Vec::with_capacity(n_copies);
    for stage in 1..=n_copies {
        let copies_remaining = n_copies - stage + 1;
        let phi = policy.angle(family, copies_remaining, p);
        let click = family.outcome_probability(true_sign, Sign::Plus, phi);
        let d = if rng.random::<f64>() < click {
            Sign::Plus
        } else {
            Sign::Minus
        };
        let p_next = match family.bayes_update(p, d, phi) {
            Ok(next) => next,
            // The belief has rounded to full certainty in the state
            // this outcome excludes; the outcome settles it the other
            // way.
            Err(_) => {
                let (u, _) = family.likelihoods(d, phi);
                if u == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        };
        steps.push(TrajectoryStep {
            stage,
            credulity_before: p,
            angle: phi,
            outcome: d,
            credulity_after: p_next,
        });
        p = p_next;
    }
    // Ties guess rho_+, matching the dynamic-programming convention.
    let final_guess = if p >= 0.5 { Sign::Plus } else { Sign::Minus };
    Trajectory {
        true_sign,
        steps,
        final_guess,
        correct: final_guess == true_sign,
    }
}

/// Fraction of wrong final guesses over seeded trials, with its
/// binomial standard error.
pub fn empirical_error(
    policy: &AnglePolicy,
    family: &StateFamily,
    n_copies: usize,
    config: &SimulationConfig,
) -> Result<EmpiricalError> {
    if config.trials == 0 {
        return Err(crate::error::Error::InvalidParameter {
            name: "trials",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    policy.require_resolvable(n_copies)?;
    let failures: u64 = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial);
            let true_sign = draw_true_sign(&mut rng, family, config.sampling);
            let trajectory = run_trajectory(policy, true_sign, family, n_copies, &mut rng);
            u64::from(!trajectory.correct)
        })
        .sum();
    let rate = failures as f64 / config.trials as f64;
    Ok(EmpiricalError {
        rate,
        standard_error: (rate * (1.0 - rate) / config.trials as f64).sqrt(),
        trials: config.trials,
        failures,
    })
}

/// CSV header for trajectory exports.
pub const TRAJECTORY_CSV_HEADER: &str =
    "trial,stage,credulity_before,angle,outcome,credulity_after";

/// Append one trajectory's rows to a CSV stream.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    trial: u64,
    trajectory: &Trajectory,
) -> io::Result<()> {
    for step in &trajectory.steps {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{},{:.16e}",
            trial,
            step.stage,
            step.credulity_before,
            step.angle,
            step.outcome.as_f64() as i8,
            step.credulity_after,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes_dp::{goa_solve, lof_error};
    use crate::grid::GridSpec;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn fam(alpha: f64, nu: f64) -> StateFamily {
        StateFamily::symmetric(alpha, nu).unwrap()
    }

    #[test]
    fn orthogonal_pure_states_identified_in_one_step() {
        let f = fam(FRAC_PI_2, 0.0);
        let policy = AnglePolicy::unbiased();
        let t = simulate_trajectory(&policy, Sign::Plus, &f, 1, 7).unwrap();
        assert_eq!(t.steps[0].credulity_after, 1.0);
        assert!(t.correct);
        let t = simulate_trajectory(&policy, Sign::Minus, &f, 1, 7).unwrap();
        assert_eq!(t.steps[0].credulity_after, 0.0);
        assert!(t.correct);
    }

    #[test]
    fn same_seed_gives_identical_trajectories() {
        let f = fam(FRAC_PI_6, 0.1);
        let policy = AnglePolicy::OsmRule;
        let a = simulate_trajectory(&policy, Sign::Plus, &f, 10, 42).unwrap();
        let b = simulate_trajectory(&policy, Sign::Plus, &f, 10, 42).unwrap();
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.credulity_after, y.credulity_after);
            assert_eq!(x.outcome, y.outcome);
        }
        let c = simulate_trajectory(&policy, Sign::Plus, &f, 10, 43).unwrap();
        assert!(a.steps.iter().zip(&c.steps).any(|(x, y)| x.outcome != y.outcome));
    }

    #[test]
    fn recorded_posteriors_replay_through_bayes_update() {
        let f = fam(FRAC_PI_6, 0.1);
        let solution = goa_solve(&f, 10, GridSpec::new(501).unwrap()).unwrap();
        let policy = AnglePolicy::Table(solution.angles);
        let t = simulate_trajectory(&policy, Sign::Minus, &f, 10, 5).unwrap();
        let mut p = 0.5;
        for step in &t.steps {
            assert!((step.credulity_before - p).abs() < 1e-12);
            p = f.bayes_update(p, step.outcome, step.angle).unwrap();
            assert!((step.credulity_after - p).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarized_rate_is_one_half() {
        let f = fam(FRAC_PI_6, 1.0);
        let config = SimulationConfig {
            seed: 11,
            trials: 40_000,
            sampling: TrueStateSampling::Prior,
        };
        let e = empirical_error(&AnglePolicy::unbiased(), &f, 4, &config).unwrap();
        assert!((e.rate - 0.5).abs() <= 3.0 * e.standard_error);
    }

    #[test]
    fn lof_rate_matches_closed_form_within_three_sigma() {
        let f = fam(FRAC_PI_6, 0.0);
        let config = SimulationConfig {
            seed: 20_250_101,
            trials: 200_000,
            sampling: TrueStateSampling::Prior,
        };
        let e = empirical_error(&AnglePolicy::unbiased(), &f, 3, &config).unwrap();
        let expect = lof_error(&f, 3).unwrap();
        assert!(
            (e.rate - expect).abs() <= 3.0 * e.standard_error,
            "rate = {}, expect = {expect}, se = {}",
            e.rate,
            e.standard_error
        );
        assert!(!e.is_low_count());
    }

    #[test]
    fn adaptive_rate_matches_collective_closed_form_for_pure_states() {
        // The locally optimal adaptive rule attains the collective
        // bound at nu = 0, so the empirical rate must match
        // 1/2 (1 - sqrt(1 - c^10)) for five copies.
        let f = fam(FRAC_PI_6, 0.0);
        let config = SimulationConfig {
            seed: 77,
            trials: 200_000,
            sampling: TrueStateSampling::Prior,
        };
        let e = empirical_error(&AnglePolicy::OsmRule, &f, 5, &config).unwrap();
        let c2 = f.c() * f.c();
        let expect = 0.5 * (1.0 - (1.0 - c2.powi(5)).sqrt());
        assert!(
            (e.rate - expect).abs() <= 3.0 * e.standard_error,
            "rate = {}, expect = {expect}",
            e.rate
        );
    }

    #[test]
    fn zero_trials_is_rejected() {
        let f = fam(FRAC_PI_6, 0.1);
        let config = SimulationConfig {
            seed: 1,
            trials: 0,
            sampling: TrueStateSampling::Prior,
        };
        assert!(empirical_error(&AnglePolicy::unbiased(), &f, 2, &config).is_err());
    }

    #[test]
    fn fixed_sampling_pins_the_true_state() {
        let f = fam(FRAC_PI_6, 0.1);
        for seed in [1, 2, 3] {
            let t = simulate_trial(&AnglePolicy::unbiased(), Sign::Minus, &f, 5, seed, 9).unwrap();
            assert_eq!(t.true_sign, Sign::Minus);
            assert_eq!(t.steps.len(), 5);
        }
    }

    #[test]
    fn posteriors_drift_toward_the_true_state() {
        let f = fam(FRAC_PI_6, 0.1);
        let config = SimulationConfig {
            seed: 33,
            trials: 20_000,
            sampling: TrueStateSampling::Fixed(Sign::Plus),
        };
        // Mean final credulity should favor rho_+ clearly.
        let total: f64 = (0..config.trials)
            .map(|trial| {
                simulate_trial(&AnglePolicy::OsmRule, Sign::Plus, &f, 10, config.seed, trial)
                    .unwrap()
                    .steps
                    .last()
                    .unwrap()
                    .credulity_after
            })
            .sum();
        assert!(total / config.trials as f64 > 0.75);
    }

    #[test]
    fn csv_rows_are_formatted() {
        let f = fam(FRAC_PI_6, 0.1);
        let t = simulate_trajectory(&AnglePolicy::unbiased(), Sign::Plus, &f, 2, 3).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, 17, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("17,1,5.0000000000000000e-1,"));
    }

    #[test]
    fn trajectory_serializes_with_signed_outcomes() {
        let f = fam(FRAC_PI_6, 0.1);
        let t = simulate_trajectory(&AnglePolicy::unbiased(), Sign::Minus, &f, 1, 1).unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["true_sign"], -1);
        let d = json["steps"][0]["outcome"].as_i64().unwrap();
        assert!(d == 1 || d == -1);
    }
}
