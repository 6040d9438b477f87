//! Exact outcome-tree evaluation of a policy's error probability.
//!
//! Evaluates the backward recursion
//! `R_{n-1}(p) = sum_d Pr[d | p, phi_n(p)] R_n(p')` with terminal value
//! `R_N(p) = min(p, 1-p)` by full recursion over the `2^N` outcome
//! tree. Exact to floating precision; cost is exponential in `N`,
//! hence the ceiling.

use crate::error::{Error, Result};
use crate::qubit_model::{Sign, StateFamily};

use super::policy::AnglePolicy;

/// Default ceiling for the exact outcome-tree recursion.
pub const DEFAULT_EXACT_TREE_CEILING: usize = 24;

/// Subtrees above this depth run on the rayon pool.
const PARALLEL_DEPTH: usize = 18;

/// Exact error probability of `policy` on `n_copies` copies, starting
/// from the family prior, with the default tree ceiling.
pub fn exact_policy_error(
    policy: &AnglePolicy,
    family: &StateFamily,
    n_copies: usize,
) -> Result<f64> {
    exact_policy_error_with_ceiling(policy, family, n_copies, DEFAULT_EXACT_TREE_CEILING)
}

/// As [`exact_policy_error`] with an explicit ceiling.
pub fn exact_policy_error_with_ceiling(
    policy: &AnglePolicy,
    family: &StateFamily,
    n_copies: usize,
    ceiling: usize,
) -> Result<f64> {
    if n_copies > ceiling {
        return Err(Error::SizeLimit {
            what: "exact outcome tree",
            requested: n_copies,
            ceiling,
        });
    }
    policy.require_resolvable(n_copies)?;
    Ok(node_value(policy, family, n_copies, family.q()))
}

fn node_value(policy: &AnglePolicy, family: &StateFamily, remaining: usize, p: f64) -> f64 {
    if remaining == 0 {
        return p.min(1.0 - p);
    }
    let phi = policy.angle(family, remaining, p);

    let branch = |d: Sign| -> f64 {
        let (u, v) = family.likelihoods(d, phi);
        let w = u * p + v * (1.0 - p);
        if w <= 0.0 {
            // Zero-probability outcome: the branch contributes nothing.
            return 0.0;
        }
        w * node_value(policy, family, remaining - 1, u * p / w)
    };

    if remaining >= PARALLEL_DEPTH {
        let (a, b) = rayon::join(|| branch(Sign::Plus), || branch(Sign::Minus));
        a + b
    } else {
        branch(Sign::Plus) + branch(Sign::Minus)
    }
}
