//! Pseudo-time marching solver for the flexible and inflexible optimality
//! systems.
//!
//! Both systems are advanced with forward Euler from `Psi = 0`. Each step
//! freezes the observation-time target (the intervention operator for the
//! flexible model, the committed-harvest target for the inflexible one) from
//! the incoming value field, updates every auxiliary slot independently, and
//! then refreshes the value field as the pointwise minimum over slots.

mod field;
mod intervention;
mod march;
mod policy;
mod voi;

pub use field::{AuxFieldFlexible, AuxFieldInflexible, ValueField};
pub use intervention::{apply_intervention_operator, InterventionResult};
pub use march::{
    solve_flexible, solve_flexible_from, solve_inflexible, solve_inflexible_from, step_flexible,
    step_inflexible, Diagnostics, FlexibleSolution, InflexibleSolution,
};
pub use policy::{extract_policy, PolicyField, PolicySource};
pub(crate) use policy::inflexible_argmin;
pub use voi::{voi, VOI_TOLERANCE};

use crate::model::{ModelError, Problem};
use core::fmt;

/// Relative tolerance (times the field scale) for the bound, monotonicity
/// and consistency checks reported in [`Diagnostics`].
pub const INVARIANT_TOLERANCE: f64 = 1e-8;

/// Number of consecutive residual increases treated as divergence.
pub const DIVERGENCE_WINDOW: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    Model(ModelError),
    InvalidGrid { reason: &'static str },
    /// The explicit step violates `dt (max|f|/dx + delta + lambda_hi + max_i sum_j w_ij) <= 1`.
    Unstable { number: f64 },
    NonFinite { step: usize, regime: usize, node: usize },
    Diverged { step: usize, residual: f64 },
    ShapeMismatch,
    /// Value of information below `-VOI_TOLERANCE * scale`.
    NegativeVoi { regime: usize, node: usize, value: f64 },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(e) => write!(f, "{e}"),
            Self::InvalidGrid { reason } => write!(f, "invalid grid: {reason}"),
            Self::Unstable { number } => write!(
                f,
                "explicit step is unstable: stability number {number:.6} exceeds 1; reduce dt"
            ),
            Self::NonFinite { step, regime, node } => write!(
                f,
                "non-finite value at step {step}, regime {regime}, node {node}; the time step is likely too large"
            ),
            Self::Diverged { step, residual } => write!(
                f,
                "residual grew for {DIVERGENCE_WINDOW} consecutive steps (step {step}, residual {residual:e})"
            ),
            Self::ShapeMismatch => write!(f, "fields do not share a grid and regime set"),
            Self::NegativeVoi { regime, node, value } => write!(
                f,
                "value of information {value:e} is negative at regime {regime}, node {node}"
            ),
        }
    }
}

impl core::error::Error for SolverError {}

impl From<ModelError> for SolverError {
    fn from(e: ModelError) -> Self {
        SolverError::Model(e)
    }
}

/// Uniform grid on `[0, 1]` plus pseudo-time stepping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nodes: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Early exit once `max |dPsi| / dt` drops below this.
    pub tolerance: f64,
    pub weno_eps: f64,
}

impl Grid {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    pub fn new(nodes: usize, dt: f64, horizon: f64) -> Result<Self, SolverError> {
        let grid = Self {
            nodes,
            dt,
            horizon,
            tolerance: Self::DEFAULT_TOLERANCE,
            weno_eps: crate::weno::DEFAULT_EPSILON,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// 401 nodes, `dt = 0.0003`, horizon a quarter year.
    pub fn reference() -> Self {
        Self::new(401, 0.0003, 365.0 / 4.0).expect("reference grid is valid")
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.nodes < crate::weno::MIN_NODES {
            return Err(SolverError::InvalidGrid {
                reason: "at least 5 nodes are required",
            });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::InvalidGrid {
                reason: "time step must be positive",
            });
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SolverError::InvalidGrid {
                reason: "horizon must be positive",
            });
        }
        if !(self.tolerance >= 0.0) || !(self.weno_eps > 0.0) {
            return Err(SolverError::InvalidGrid {
                reason: "tolerance and WENO epsilon must be nonnegative",
            });
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.nodes - 1) as f64
    }

    /// Node coordinate; the last node is exactly 1.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        j as f64 / (self.nodes - 1) as f64
    }

    pub fn steps(&self) -> usize {
        libm::ceil(self.horizon / self.dt - 1e-9) as usize
    }

    pub fn stability_number(&self, problem: &Problem) -> f64 {
        self.dt
            * (problem.max_drift(self.nodes) / self.dx()
                + problem.discount
                + problem.highest_intensity()
                + problem.chain.max_exit_rate())
    }

    /// Returns the stability number, or an error when it exceeds one.
    pub fn check_stability(&self, problem: &Problem) -> Result<f64, SolverError> {
        let number = self.stability_number(problem);
        if number > 1.0 {
            return Err(SolverError::Unstable { number });
        }
        Ok(number)
    }
}
