//! Regime chain, model parameters and the pointwise model functions.
//!
//! The free functions [`capacity`], [`growth_rate`], [`disutility`] and
//! [`harvest_cost`] evaluate the logistic-with-detachment model on a
//! [`RegimeChain`] with a flat [`ModelParams`] record. Solvers and the
//! simulator work on a [`Problem`], which carries the same information but
//! lets the drift, disutility and intensity set be overridden (the reduced
//! linear model and the analytic degenerate cases need that).

use alloc::vec::Vec;
use core::fmt;

/// Largest violation of `[0, 1]` that is treated as floating-point drift and
/// clamped instead of rejected.
pub const STATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    EmptyChain,
    DischargesNotIncreasing { index: usize },
    RateMatrixShape { expected: usize, found: usize },
    NegativeRate { from: usize, to: usize, rate: f64 },
    RegimeOutOfRange { index: usize, count: usize },
    StateOutOfRange { x: f64 },
    HarvestNotAdmissible { z: f64 },
    /// A parameter failed its range check; `name` is the parameter name.
    InvalidParameter { name: &'static str, value: f64 },
    CapacityOutOfRange { regime: usize, capacity: f64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyChain => write!(f, "regime chain has no regimes"),
            Self::DischargesNotIncreasing { index } => {
                write!(f, "discharges must be strictly increasing (violated at index {index})")
            }
            Self::RateMatrixShape { expected, found } => {
                write!(f, "rate matrix has {found} entries, expected {expected}")
            }
            Self::NegativeRate { from, to, rate } => {
                write!(f, "switching rate w[{from}][{to}] = {rate} is negative")
            }
            Self::RegimeOutOfRange { index, count } => {
                write!(f, "regime index {index} out of range for {count} regimes")
            }
            Self::StateOutOfRange { x } => write!(f, "population {x} outside [0, 1]"),
            Self::HarvestNotAdmissible { z } => {
                write!(f, "harvest fraction {z} is not in {{0, zbar}}")
            }
            Self::InvalidParameter { name, value } => {
                write!(f, "parameter {name} = {value} is out of range")
            }
            Self::CapacityOutOfRange { regime, capacity } => {
                write!(f, "capacity c[{regime}] = {capacity} outside (0, 1]")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// Clamp `x` into `[0, 1]` when it is within [`STATE_SLACK`] of the interval.
pub fn clamp_state(x: f64) -> Result<f64, ModelError> {
    if !x.is_finite() || x < -STATE_SLACK || x > 1.0 + STATE_SLACK {
        return Err(ModelError::StateOutOfRange { x });
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Flow regimes: representative discharges and the switching-rate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeChain {
    discharges: Vec<f64>,
    /// Row-major `n x n`, diagonal stored as zero.
    rates: Vec<f64>,
}

impl RegimeChain {
    /// Builds a chain from discharges and a row-major rate matrix. Diagonal
    /// entries are ignored.
    pub fn new(discharges: Vec<f64>, mut rates: Vec<f64>) -> Result<Self, ModelError> {
        let n = discharges.len();
        if n == 0 {
            return Err(ModelError::EmptyChain);
        }
        if rates.len() != n * n {
            return Err(ModelError::RateMatrixShape {
                expected: n * n,
                found: rates.len(),
            });
        }
        for i in 0..n {
            if !discharges[i].is_finite() || (i > 0 && discharges[i] <= discharges[i - 1]) {
                return Err(ModelError::DischargesNotIncreasing { index: i });
            }
            for j in 0..n {
                let w = rates[i * n + j];
                if i == j {
                    rates[i * n + j] = 0.0;
                } else if !(w >= 0.0) || !w.is_finite() {
                    return Err(ModelError::NegativeRate {
                        from: i,
                        to: j,
                        rate: w,
                    });
                }
            }
        }
        Ok(Self { discharges, rates })
    }

    pub fn from_rows(discharges: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = discharges.len();
        let mut rates = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(ModelError::RateMatrixShape {
                    expected: n * n,
                    found: rows.iter().map(Vec::len).sum(),
                });
            }
            rates.extend_from_slice(row);
        }
        Self::new(discharges, rates)
    }

    /// A chain with no switching at all.
    pub fn frozen(discharges: Vec<f64>) -> Result<Self, ModelError> {
        let n = discharges.len();
        Self::new(discharges, alloc::vec![0.0; n * n])
    }

    /// `q0 + dq * i` for `i = 0..count`.
    pub fn uniform_levels(count: usize, q0: f64, dq: f64) -> Vec<f64> {
        (0..count).map(|i| q0 + dq * i as f64).collect()
    }

    pub fn regime_count(&self) -> usize {
        self.discharges.len()
    }

    /// The largest regime index `I`.
    pub fn max_index(&self) -> usize {
        self.discharges.len() - 1
    }

    pub fn discharges(&self) -> &[f64] {
        &self.discharges
    }

    pub fn discharge(&self, i: usize) -> f64 {
        self.discharges[i]
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.regime_count() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.regime_count();
        &self.rates[i * n..(i + 1) * n]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Total rate of leaving regime `i`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.regime_count())
            .map(|i| self.exit_rate(i))
            .fold(0.0, f64::max)
    }

    /// Nonzero off-diagonal entries of row `i` as `(j, w_ij)`.
    pub fn sparse_row(&self, i: usize) -> Vec<(usize, f64)> {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|&(j, &w)| j != i && w > 0.0)
            .map(|(j, &w)| (j, w))
            .collect()
    }

    fn check_index(&self, i: usize) -> Result<(), ModelError> {
        if i >= self.regime_count() {
            return Err(ModelError::RegimeOutOfRange {
                index: i,
                count: self.regime_count(),
            });
        }
        Ok(())
    }
}

/// Flat parameter record of the logistic-with-detachment model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Intrinsic growth rate (1/day).
    pub mu: f64,
    /// Capacity slope (s/m^3).
    pub a: f64,
    /// Capacity intercept.
    pub b: f64,
    /// Detachment coefficient (1/(day m^3/s)).
    pub eta: f64,
    /// Discount rate (1/day).
    pub delta: f64,
    /// Cost per observation.
    pub d: f64,
    /// Fixed harvesting cost.
    pub k0: f64,
    /// Proportional harvesting cost.
    pub k1: f64,
    /// Multiplier applied to harvesting costs in flood regimes.
    pub penalty: f64,
    /// Regimes with index above this are flood regimes.
    pub flood_threshold: usize,
    /// Harvested fraction when harvesting.
    pub zbar: f64,
    pub lambda_hi: f64,
    pub lambda_lo: f64,
    /// Disutility exponent, `h(x) = x^m`.
    pub m: f64,
}

impl ModelParams {
    /// Parameter set of the Hii River application, with `a` normalized so
    /// that the capacity of the top regime (`Q = 50.5`) is one.
    pub fn reference() -> Self {
        Self {
            mu: 0.5,
            a: 0.2 / 50.5,
            b: 0.8,
            eta: 0.07,
            delta: 0.2,
            d: 0.1,
            k0: 0.15,
            k1: 0.25,
            penalty: 50.0,
            flood_threshold: 16,
            zbar: 0.5,
            lambda_hi: 1.0 / 3.0,
            lambda_lo: 1.0 / 10.0,
            m: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let checks: [(&'static str, f64, bool); 13] = [
            ("mu", self.mu, self.mu > 0.0),
            ("a", self.a, self.a >= 0.0),
            ("b", self.b, self.b > 0.0),
            ("eta", self.eta, self.eta > 0.0),
            ("delta", self.delta, self.delta > 0.0),
            ("d", self.d, self.d > 0.0),
            ("k0", self.k0, self.k0 >= 0.0),
            ("k1", self.k1, self.k1 > 0.0),
            ("penalty", self.penalty, self.penalty > 1.0),
            ("zbar", self.zbar, self.zbar > 0.0 && self.zbar < 1.0),
            ("lambda_lo", self.lambda_lo, self.lambda_lo > 0.0),
            (
                "lambda_hi",
                self.lambda_hi,
                self.lambda_hi > self.lambda_lo && self.lambda_hi.is_finite(),
            ),
            ("m", self.m, self.m > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Parameter checks plus the capacity range against a concrete chain.
    pub fn validate_with(&self, chain: &RegimeChain) -> Result<(), ModelError> {
        self.validate()?;
        for i in 0..chain.regime_count() {
            let c = capacity(chain, self, i)?;
            if !(c > 0.0 && c <= 1.0) {
                return Err(ModelError::CapacityOutOfRange {
                    regime: i,
                    capacity: c,
                });
            }
        }
        Ok(())
    }
}

/// `c_i = (a Q_i + b) / (a Q_I + b)`.
pub fn capacity(chain: &RegimeChain, params: &ModelParams, i: usize) -> Result<f64, ModelError> {
    chain.check_index(i)?;
    let top = chain.discharge(chain.max_index());
    Ok((params.a * chain.discharge(i) + params.b) / (params.a * top + params.b))
}

/// `f(i, x) = mu x (1 - x / c_i) - eta Q_i x`.
pub fn growth_rate(
    chain: &RegimeChain,
    params: &ModelParams,
    i: usize,
    x: f64,
) -> Result<f64, ModelError> {
    let c = capacity(chain, params, i)?;
    let x = clamp_state(x)?;
    Ok(params.mu * x * (1.0 - x / c) - params.eta * chain.discharge(i) * x)
}

/// `h(x) = x^m`.
pub fn disutility(params: &ModelParams, x: f64) -> Result<f64, ModelError> {
    let x = clamp_state(x)?;
    Ok(libm::pow(x, params.m))
}

/// Harvesting cost at an observation, with `z` either `0` or `zbar`.
pub fn harvest_cost(params: &ModelParams, i: usize, x: f64, z: f64) -> Result<f64, ModelError> {
    let x = clamp_state(x)?;
    let harvest = if z == 0.0 {
        Harvest::Hold
    } else if z == params.zbar {
        Harvest::Cut
    } else {
        return Err(ModelError::HarvestNotAdmissible { z });
    };
    Ok(HarvestCost::from_params(params).eval(i, x, harvest, params.zbar))
}

/// The two admissible harvesting actions at an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Harvest {
    /// `z = 0`.
    Hold,
    /// `z = zbar`.
    Cut,
}

impl Harvest {
    pub const BOTH: [Harvest; 2] = [Harvest::Hold, Harvest::Cut];

    pub fn fraction(self, zbar: f64) -> f64 {
        match self {
            Harvest::Hold => 0.0,
            Harvest::Cut => zbar,
        }
    }
}

/// Population drift between observations.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    /// `mu x (1 - x / c_i) - eta Q_i x`; `capacity` holds `c_i` per regime.
    Logistic { mu: f64, eta: f64, capacity: Vec<f64> },
    /// `f_i x` with one coefficient per regime.
    Linear(Vec<f64>),
    /// No motion at all.
    Still,
}

/// Running disutility of the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Disutility {
    Power(f64),
    Constant(f64),
}

impl Disutility {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Disutility::Power(m) if m == 1.0 => x,
            Disutility::Power(m) if m == 2.0 => x * x,
            Disutility::Power(m) => libm::pow(x, m),
            Disutility::Constant(c) => c,
        }
    }
}

/// Piecewise harvesting cost `K(i, x, z)` with `theta(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestCost {
    pub fixed: f64,
    pub proportional: f64,
    pub penalty: f64,
    pub flood_threshold: usize,
}

impl HarvestCost {
    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            fixed: params.k0,
            proportional: params.k1,
            penalty: params.penalty,
            flood_threshold: params.flood_threshold,
        }
    }

    #[inline]
    pub fn eval(&self, i: usize, x: f64, harvest: Harvest, zbar: f64) -> f64 {
        match harvest {
            Harvest::Hold => 0.0,
            Harvest::Cut => {
                let base = self.fixed + self.proportional * x * zbar;
                if i > self.flood_threshold {
                    self.penalty * base
                } else {
                    base
                }
            }
        }
    }
}

/// Everything the solvers and the simulator need to know about one control
/// problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub chain: RegimeChain,
    pub discount: f64,
    pub observation_cost: f64,
    pub harvest_fraction: f64,
    /// Admissible observation intensities in increasing order; ties in any
    /// argmin go to the first (lowest) entry.
    pub intensities: Vec<f64>,
    pub drift: Drift,
    pub disutility: Disutility,
    pub cost: HarvestCost,
}

impl Problem {
    pub fn from_params(chain: RegimeChain, params: &ModelParams) -> Result<Self, ModelError> {
        params.validate_with(&chain)?;
        let capacity = (0..chain.regime_count())
            .map(|i| capacity(&chain, params, i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            chain,
            discount: params.delta,
            observation_cost: params.d,
            harvest_fraction: params.zbar,
            intensities: alloc::vec![params.lambda_lo, params.lambda_hi],
            drift: Drift::Logistic {
                mu: params.mu,
                eta: params.eta,
                capacity,
            },
            disutility: Disutility::Power(params.m),
            cost: HarvestCost::from_params(params),
        })
    }

    pub fn with_drift(mut self, drift: Drift) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_disutility(mut self, disutility: Disutility) -> Self {
        self.disutility = disutility;
        self
    }

    pub fn with_intensities(mut self, intensities: Vec<f64>) -> Self {
        self.intensities = intensities;
        self
    }

    pub fn with_cost(mut self, cost: HarvestCost) -> Self {
        self.cost = cost;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.chain.regime_count();
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, value: v })
            }
        };
        positive("delta", self.discount)?;
        if !(self.observation_cost >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "d",
                value: self.observation_cost,
            });
        }
        if !(self.harvest_fraction > 0.0 && self.harvest_fraction < 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "zbar",
                value: self.harvest_fraction,
            });
        }
        if self.intensities.is_empty() {
            return Err(ModelError::InvalidParameter {
                name: "intensities",
                value: 0.0,
            });
        }
        for (k, &r) in self.intensities.iter().enumerate() {
            positive("intensity", r)?;
            if k > 0 && r <= self.intensities[k - 1] {
                return Err(ModelError::InvalidParameter {
                    name: "intensity",
                    value: r,
                });
            }
        }
        if !(self.cost.fixed >= 0.0 && self.cost.proportional >= 0.0 && self.cost.penalty >= 1.0)
        {
            return Err(ModelError::InvalidParameter {
                name: "harvest cost",
                value: self.cost.penalty,
            });
        }
        match &self.drift {
            Drift::Logistic { capacity, .. } if capacity.len() != n => {
                Err(ModelError::RateMatrixShape {
                    expected: n,
                    found: capacity.len(),
                })
            }
            Drift::Logistic { capacity, .. } => {
                for (i, &c) in capacity.iter().enumerate() {
                    if !(c > 0.0 && c <= 1.0) {
                        return Err(ModelError::CapacityOutOfRange {
                            regime: i,
                            capacity: c,
                        });
                    }
                }
                Ok(())
            }
            Drift::Linear(coef) if coef.len() != n => Err(ModelError::RateMatrixShape {
                expected: n,
                found: coef.len(),
            }),
            _ => Ok(()),
        }
    }

    pub fn regime_count(&self) -> usize {
        self.chain.regime_count()
    }

    /// Drift `f(i, x)`; no range checks.
    #[inline]
    pub fn drift_at(&self, i: usize, x: f64) -> f64 {
        match &self.drift {
            Drift::Logistic { mu, eta, capacity } => {
                mu * x * (1.0 - x / capacity[i]) - eta * self.chain.discharge(i) * x
            }
            Drift::Linear(coef) => coef[i] * x,
            Drift::Still => 0.0,
        }
    }

    #[inline]
    pub fn disutility_at(&self, x: f64) -> f64 {
        self.disutility.eval(x)
    }

    #[inline]
    pub fn harvest_cost_at(&self, i: usize, x: f64, harvest: Harvest) -> f64 {
        self.cost.eval(i, x, harvest, self.harvest_fraction)
    }

    pub fn lowest_intensity(&self) -> f64 {
        self.intensities[0]
    }

    pub fn highest_intensity(&self) -> f64 {
        self.intensities[self.intensities.len() - 1]
    }

    /// Upper bound `h(1)/delta + d lambda_hi / delta` on the value function,
    /// attained by never harvesting at the dense intensity.
    pub fn value_bound(&self) -> f64 {
        (self.disutility_at(1.0) + self.observation_cost * self.highest_intensity()) / self.discount
    }

    /// Largest `|f(i, x)|` sampled on `nodes` equispaced points of `[0, 1]`.
    pub fn max_drift(&self, nodes: usize) -> f64 {
        let mut m: f64 = 0.0;
        let dx = 1.0 / (nodes.max(2) - 1) as f64;
        for i in 0..self.regime_count() {
            for j in 0..nodes.max(2) {
                m = m.max(self.drift_at(i, j as f64 * dx).abs());
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn reference_chain() -> RegimeChain {
        RegimeChain::frozen(RegimeChain::uniform_levels(41, 0.5, 1.25)).unwrap()
    }

    fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn capacity_values() {
        let chain = reference_chain();
        let p = ModelParams::reference();
        assert_eq!(capacity(&chain, &p, 40).unwrap(), 1.0);
        assert!((capacity(&chain, &p, 0).unwrap() - 0.801980).abs() < 1e-6);
        let flat = ModelParams { a: 0.0, ..p.clone() };
        for i in 0..41 {
            assert_eq!(capacity(&chain, &flat, i).unwrap(), 1.0);
        }
        assert_eq!(
            capacity(&chain, &p, 41),
            Err(ModelError::RegimeOutOfRange { index: 41, count: 41 })
        );
    }

    #[test]
    fn growth_rate_values() {
        let chain = reference_chain();
        let p = ModelParams::reference();
        for i in 0..41 {
            assert_eq!(growth_rate(&chain, &p, i, 0.0).unwrap(), 0.0);
        }
        assert!((growth_rate(&chain, &p, 40, 1.0).unwrap() + 3.535).abs() < 1e-12);
        // interior equilibrium at regime 0, located independently by bisection
        let root = bisect(0.1, 1.0, |x| growth_rate(&chain, &p, 0, x).unwrap());
        assert!((root - 0.745842).abs() < 1e-6);
        let c0 = capacity(&chain, &p, 0).unwrap();
        let closed = c0 * (1.0 - p.eta * 0.5 / p.mu);
        assert!((root - closed).abs() < 1e-12);
        assert!(growth_rate(&chain, &p, 0, 1.0 + 1e-13).is_ok());
        assert!(growth_rate(&chain, &p, 0, 1.0 + 1e-9).is_err());
        assert!(growth_rate(&chain, &p, 0, -0.1).is_err());
    }

    #[test]
    fn disutility_values() {
        let p = ModelParams::reference();
        assert_eq!(disutility(&p, 0.0).unwrap(), 0.0);
        assert_eq!(disutility(&p, 1.0).unwrap(), 1.0);
        assert_eq!(disutility(&ModelParams { m: 0.5, ..p.clone() }, 1.0).unwrap(), 1.0);
        assert_eq!(disutility(&p, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn harvest_cost_values() {
        let p = ModelParams::reference();
        assert_eq!(harvest_cost(&p, 3, 0.7, 0.0).unwrap(), 0.0);
        assert!((harvest_cost(&p, 5, 0.8, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((harvest_cost(&p, 20, 0.8, 0.5).unwrap() - 12.5).abs() < 1e-12);
        assert_eq!(
            harvest_cost(&p, 5, 0.8, 0.3),
            Err(ModelError::HarvestNotAdmissible { z: 0.3 })
        );
    }

    #[test]
    fn params_validation() {
        let p = ModelParams::reference();
        assert!(p.validate_with(&reference_chain()).is_ok());
        let bad = ModelParams { penalty: 1.0, ..p.clone() };
        assert!(matches!(
            bad.validate(),
            Err(ModelError::InvalidParameter { name: "penalty", .. })
        ));
        let bad = ModelParams {
            lambda_lo: 0.5,
            ..p.clone()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn chain_validation() {
        assert_eq!(RegimeChain::new(vec![], vec![]), Err(ModelError::EmptyChain));
        assert!(matches!(
            RegimeChain::new(vec![1.0, 1.0], vec![0.0; 4]),
            Err(ModelError::DischargesNotIncreasing { index: 1 })
        ));
        assert!(matches!(
            RegimeChain::new(vec![1.0, 2.0], vec![0.0, -1.0, 0.0, 0.0]),
            Err(ModelError::NegativeRate { from: 0, to: 1, .. })
        ));
        let c = RegimeChain::new(vec![1.0, 2.0], vec![7.0, 1.5, 0.5, 9.0]).unwrap();
        assert_eq!(c.rate(0, 0), 0.0);
        assert_eq!(c.exit_rate(0), 1.5);
        assert_eq!(c.sparse_row(1), vec![(0, 0.5)]);
    }

    #[test]
    fn problem_bound_matches_reference_value() {
        let problem = Problem::from_params(reference_chain(), &ModelParams::reference()).unwrap();
        assert!((problem.value_bound() - (1.0 / 0.2 + 0.1 / 3.0 / 0.2)).abs() < 1e-12);
        assert!((problem.value_bound() - 5.1667).abs() < 1e-4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn growth_nonpositive_above_capacity(i in 0usize..41, t in 0.0f64..1.0) {
                let chain = reference_chain();
                let p = ModelParams::reference();
                let c = capacity(&chain, &p, i).unwrap();
                let x = c + t * (1.0 - c);
                prop_assert!(growth_rate(&chain, &p, i, x).unwrap() <= 0.0);
            }

            #[test]
            fn harvest_cost_monotone(i in 0usize..41, x in 0.0f64..1.0, y in 0.0f64..1.0) {
                let p = ModelParams::reference();
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                prop_assert!(harvest_cost(&p, i, lo, 0.5).unwrap() <= harvest_cost(&p, i, hi, 0.5).unwrap());
                prop_assert!(harvest_cost(&p, i, x, 0.0).unwrap() <= harvest_cost(&p, i, x, 0.5).unwrap());
                let calm = harvest_cost(&p, 3, x, 0.5).unwrap();
                let flood = harvest_cost(&p, 30, x, 0.5).unwrap();
                prop_assert!((flood - p.penalty * calm).abs() <= 1e-12 * flood.max(1.0));
            }

            #[test]
            fn disutility_monotone(m in 0.1f64..4.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
                let p = ModelParams { m, ..ModelParams::reference() };
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                prop_assert!(disutility(&p, lo).unwrap() <= disutility(&p, hi).unwrap());
            }

            #[test]
            fn capacity_nondecreasing(i in 0usize..40) {
                let chain = reference_chain();
                let p = ModelParams::reference();
                prop_assert!(capacity(&chain, &p, i).unwrap() <= capacity(&chain, &p, i + 1).unwrap());
            }
        }
    }
}
