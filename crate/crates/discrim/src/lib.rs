//! Multiple-copy discrimination of two depolarized qubit states.
//!
//! Given `N` identical copies of one of two known qubit states
//! `rho_+` or `rho_-` (a pure pair separated by a Hilbert-space angle
//! `alpha`, sent through a depolarizing channel of strength `nu`),
//! this crate computes the minimum probability of guessing the wrong
//! state for five measurement schemes:
//!
//! * **OCM**: optimal collective measurement over all `N` copies
//!   (the Helstrom bound), via the spectrum of the weighted difference
//!   of Kronecker powers.
//! * **LOF**: locally optimal fixed local measurements (the unbiased
//!   majority-vote scheme), in closed form.
//! * **GOF**: globally optimal fixed local measurements, by scalar
//!   minimization over the shared measurement angle.
//! * **LOA**: locally optimal adaptive local measurements, where each
//!   copy is measured in the single-copy optimal basis for the current
//!   Bayesian posterior.
//! * **GOA**: globally optimal adaptive local measurements, built
//!   backward on a posterior grid by Bellman dynamic programming.
//!
//! Finite-`N` errors are evaluated either exactly (full outcome-tree
//! recursion) or on a credulity grid with cubic interpolation; the
//! asymptotic error exponents (Chernoff bounds) come from closed
//! forms, direct 2-D minimization, or log-gradient estimates of the
//! grid dynamic program with grid-size extrapolation.

pub mod asymptotics;
pub mod collective;
mod error;
pub mod grid;
pub mod montecarlo;
pub mod optimize;
pub mod qubit_model;
pub mod schemes_dp;

pub use error::{Error, Result};
pub use qubit_model::{Sign, StateFamily};
