//! Optimal observation-intensity and harvesting policies for a population
//! driven by a regime-switching flow process that is observed only at the
//! jump times of a controlled Poisson clock.
//!
//! The crate is `no_std` (with `alloc`) so the numerical core can be embedded
//! anywhere; the `std` feature is on by default and `parallel` adds a rayon
//! backed grid sweep inside the solver and across Monte Carlo paths.
//!
//! Layout:
//! - [`model`]: regime chain, parameters and the pointwise model functions.
//! - [`regime`]: regime assignment, chain estimation from discharge records,
//!   entropy, synthetic series.
//! - [`weno`]: third-order WENO one-sided derivatives and the local
//!   Lax-Friedrichs Hamiltonian.
//! - [`solver`]: pseudo-time marching of the flexible and inflexible
//!   optimality systems, policy extraction, value of information.
//! - [`closed_form`]: exact two-regime linear solution used as an oracle.
//! - [`sim`]: event-driven Monte Carlo of the controlled process.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod closed_form;
pub mod model;
pub mod regime;
pub mod sim;
pub mod solver;
pub mod weno;

pub use model::{
    Disutility, Drift, Harvest, HarvestCost, ModelError, ModelParams, Problem, RegimeChain,
};
