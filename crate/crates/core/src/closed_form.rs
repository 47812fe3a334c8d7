//! Exact solution of the two-regime linear reduction: linear drift `f_i x`,
//! disutility `x`, a single fixed observation intensity, no observation or
//! fixed harvesting cost, and a harvesting cost `K z x` that is multiplied by
//! `P` in the flood regime 1.
//!
//! The value function is `Phi_i(x) = C_i x` when harvesting happens in regime
//! 0 only. The coefficients come from a 2x2 linear system; the textbook
//! formulas are checked against that system on every call.

use alloc::vec;
use core::fmt;

use crate::model::{Disutility, Drift, HarvestCost, ModelError, Problem, RegimeChain};
use crate::solver::{Grid, SolverError};

/// Parameters of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub f0: f64,
    pub f1: f64,
    pub w01: f64,
    pub w10: f64,
    pub delta: f64,
    /// Fixed observation intensity.
    pub r: f64,
    pub zbar: f64,
    /// Proportional harvesting cost in regime 0.
    pub k: f64,
    /// Flood multiplier for regime 1.
    pub penalty: f64,
}

impl ReducedParams {
    /// A feasible configuration used by the oracle checks and as the CLI
    /// default.
    pub fn example() -> Self {
        Self {
            f0: -0.1,
            f1: -0.4,
            w01: 0.5,
            w10: 1.0,
            delta: 0.2,
            r: 0.5,
            zbar: 0.5,
            k: 0.5,
            penalty: 50.0,
        }
    }

    pub fn validate(&self) -> Result<(), ClosedFormError> {
        let checks: [(&'static str, f64, bool); 9] = [
            ("f0", self.f0, true),
            ("f1", self.f1, true),
            ("w01", self.w01, self.w01 >= 0.0),
            ("w10", self.w10, self.w10 >= 0.0),
            ("delta", self.delta, self.delta > 0.0),
            ("r", self.r, self.r > 0.0),
            ("zbar", self.zbar, self.zbar > 0.0 && self.zbar < 1.0),
            ("k", self.k, self.k > 0.0),
            ("penalty", self.penalty, self.penalty > 1.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(ClosedFormError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Diagonal entries of the system under the harvest-in-regime-0 pattern.
    fn diagonal(&self) -> (f64, f64) {
        (
            self.delta - self.f0 + self.w01 + self.r * self.zbar,
            self.delta - self.f1 + self.w10,
        )
    }

    /// The determinant `L`.
    pub fn determinant(&self) -> f64 {
        let (a, b) = self.diagonal();
        a * b - self.w01 * self.w10
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFormError {
    InvalidParameter { name: &'static str, value: f64 },
    /// `L <= 0`.
    Degenerate { determinant: f64 },
    /// The regime-0-only harvesting pattern is not optimal for these
    /// parameters.
    InfeasiblePattern,
    /// A positive drift makes `x = 1` an inflow boundary, which the
    /// truncated grid has no data for.
    InflowBoundary { regime: usize, drift: f64 },
    Model(ModelError),
    Solver(SolverError),
}

impl fmt::Display for ClosedFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidParameter { name, value } => {
                write!(f, "invalid reduced parameter {name} = {value}")
            }
            Self::Degenerate { determinant } => {
                write!(f, "determinant L = {determinant} must be positive")
            }
            Self::InfeasiblePattern => {
                write!(f, "harvesting only in regime 0 is not optimal for these parameters")
            }
            Self::InflowBoundary { regime, drift } => write!(
                f,
                "drift f{regime} = {drift} is positive; the grid on [0, 1] needs f0, f1 <= 0"
            ),
            Self::Model(e) => write!(f, "{e}"),
            Self::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ClosedFormError {}

/// Where the returned coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// The closed-form expressions satisfied the linear system.
    Formula,
    /// The closed-form expressions missed the system; a direct solve was used.
    DirectSolve,
}

/// Truth values of the threshold conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// `C0 > K`.
    pub c0_above_k: bool,
    /// `C0 <= P K`, the second inequality in its printed form.
    pub c0_within_pk: bool,
    /// `C1 <= P K`, the form the penalty bound follows from.
    pub c1_within_pk: bool,
    /// `[L - (delta - f1 + w10) r zbar] K < delta - f1 + w10 + w01`.
    pub cost_condition: bool,
    /// `P >= min_penalty`.
    pub penalty_condition: bool,
    /// `(delta - f0 + w01 + r zbar + w10 (1 + r K zbar)) / (L K)`.
    pub min_penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSolution {
    pub c0: f64,
    pub c1: f64,
    pub determinant: f64,
    /// Whether harvesting in regime 0 only is optimal, so that `C_i x` is the
    /// value function.
    pub pattern_valid: bool,
    pub provenance: Provenance,
    /// Largest relative residual of the linear system at the returned
    /// coefficients.
    pub residual: f64,
    pub conditions: ThresholdReport,
}

impl ReducedSolution {
    pub fn slope(&self, i: usize) -> f64 {
        if i == 0 {
            self.c0
        } else {
            self.c1
        }
    }
}

/// Relative residual above which the closed-form expressions are replaced by
/// the direct solve.
pub const FORMULA_TOLERANCE: f64 = 1e-10;

/// Residuals of the two equations, each relative to the size of its terms.
fn system_residual(p: &ReducedParams, c0: f64, c1: f64) -> f64 {
    let (a, b) = p.diagonal();
    let rhs0 = 1.0 + p.r * p.k * p.zbar;
    let r0 = (a * c0 - p.w01 * c1 - rhs0).abs() / (a * c0.abs() + p.w01 * c1.abs() + rhs0);
    let r1 = (b * c1 - p.w10 * c0 - 1.0).abs() / (b.abs() * c1.abs() + p.w10 * c0.abs() + 1.0);
    r0.max(r1)
}

fn direct_solve(p: &ReducedParams) -> (f64, f64) {
    let (a, b) = p.diagonal();
    let rhs0 = 1.0 + p.r * p.k * p.zbar;
    // eliminate C0 from the second row
    let c1 = (1.0 + p.w10 * rhs0 / a) / (b - p.w10 * p.w01 / a);
    let c0 = (rhs0 + p.w01 * c1) / a;
    (c0, c1)
}

pub fn closed_form_coefficients(p: &ReducedParams) -> Result<ReducedSolution, ClosedFormError> {
    p.validate()?;
    let l = p.determinant();
    if !(l > 0.0) {
        return Err(ClosedFormError::Degenerate { determinant: l });
    }
    let (_, b) = p.diagonal();
    let boost = 1.0 + p.r * p.k * p.zbar;
    let c0 = (b * boost + p.w01) / l;
    let c1 = (p.delta - p.f0 + p.w01 + p.r * p.zbar + p.w10 * boost) / l;
    let residual = system_residual(p, c0, c1);
    let (c0, c1, residual, provenance) = if residual <= FORMULA_TOLERANCE {
        (c0, c1, residual, Provenance::Formula)
    } else {
        let (c0, c1) = direct_solve(p);
        (c0, c1, system_residual(p, c0, c1), Provenance::DirectSolve)
    };
    let mut sol = ReducedSolution {
        c0,
        c1,
        determinant: l,
        pattern_valid: false,
        provenance,
        residual,
        conditions: ThresholdReport {
            c0_above_k: false,
            c0_within_pk: false,
            c1_within_pk: false,
            cost_condition: false,
            penalty_condition: false,
            min_penalty: 0.0,
        },
    };
    sol.conditions = check_threshold_conditions(p, &sol);
    sol.pattern_valid = sol.conditions.c0_above_k && sol.conditions.c1_within_pk;
    Ok(sol)
}

pub fn check_threshold_conditions(p: &ReducedParams, sol: &ReducedSolution) -> ThresholdReport {
    let l = sol.determinant;
    let (_, b) = p.diagonal();
    let pk = p.penalty * p.k;
    let numerator = p.delta - p.f0 + p.w01 + p.r * p.zbar + p.w10 * (1.0 + p.r * p.k * p.zbar);
    let min_penalty = numerator / (l * p.k);
    ThresholdReport {
        c0_above_k: sol.c0 > p.k,
        c0_within_pk: sol.c0 <= pk,
        c1_within_pk: sol.c1 <= pk,
        cost_condition: (l - b * p.r * p.zbar) * p.k < b + p.w01,
        penalty_condition: p.penalty >= min_penalty,
        min_penalty,
    }
}

/// The reduced model as a [`Problem`] for the grid solver, plus a stable grid
/// with `nodes` nodes.
///
/// The domain is truncated to `[0, 1]`, which does not disturb the linear
/// solution as long as no drift points out through `x = 1`.
pub fn reduced_numeric_config(
    p: &ReducedParams,
    nodes: usize,
) -> Result<(Problem, Grid), ClosedFormError> {
    let sol = closed_form_coefficients(p)?;
    if !sol.pattern_valid {
        return Err(ClosedFormError::InfeasiblePattern);
    }
    for (regime, drift) in [p.f0, p.f1].into_iter().enumerate() {
        if drift > 0.0 {
            return Err(ClosedFormError::InflowBoundary { regime, drift });
        }
    }
    let chain = RegimeChain::from_rows(vec![0.0, 1.0], &[vec![0.0, p.w01], vec![p.w10, 0.0]])
        .map_err(ClosedFormError::Model)?;
    let problem = Problem {
        chain,
        discount: p.delta,
        observation_cost: 0.0,
        harvest_fraction: p.zbar,
        intensities: vec![p.r],
        drift: Drift::Linear(vec![p.f0, p.f1]),
        disutility: Disutility::Power(1.0),
        cost: HarvestCost {
            fixed: 0.0,
            proportional: p.k,
            penalty: p.penalty,
            flood_threshold: 0,
        },
    };
    problem.validate().map_err(ClosedFormError::Model)?;
    let dx = 1.0 / (nodes.max(2) - 1) as f64;
    let rate = p.f0.abs().max(p.f1.abs()) / dx + p.delta + p.r + p.w01.max(p.w10);
    let grid = Grid::new(nodes, 0.5 / rate, 365.0 / 4.0).map_err(ClosedFormError::Solver)?;
    Ok((problem, grid))
}
