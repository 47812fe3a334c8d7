use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ctmc::{ctmc_next_switch, exponential};
use super::ode::{discounted_disutility, ode_segment};
use super::policy::Policy;
use crate::model::{Harvest, ModelError, Problem};

/// Monte Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub initial_regime: usize,
    pub initial_state: f64,
    /// Truncation of the infinite horizon (days).
    pub horizon: f64,
    pub paths: usize,
    /// Path `k` uses the stream seeded with `seed + k`.
    pub seed: u64,
    /// Sub-step of the RK4 cross-check integrator (days).
    pub ode_substep: f64,
}

impl SimConfig {
    /// Discount factor left at the truncation horizon.
    pub const TRUNCATION: f64 = 1e-8;

    /// Settings with the horizon chosen so that `e^{-delta T} <= 1e-8`.
    pub fn new(problem: &Problem, initial_regime: usize, initial_state: f64, paths: usize, seed: u64) -> Self {
        Self {
            initial_regime,
            initial_state,
            horizon: libm::ceil(-libm::log(Self::TRUNCATION) / problem.discount),
            paths,
            seed,
            ode_substep: 1e-3,
        }
    }

    pub fn validate(&self, problem: &Problem) -> Result<(), ModelError> {
        if self.initial_regime >= problem.regime_count() {
            return Err(ModelError::RegimeOutOfRange {
                index: self.initial_regime,
                count: problem.regime_count(),
            });
        }
        if !(0.0..=1.0).contains(&self.initial_state) {
            return Err(ModelError::StateOutOfRange {
                x: self.initial_state,
            });
        }
        let checks = [
            ("horizon", self.horizon, self.horizon > 0.0 && self.horizon.is_finite()),
            ("paths", self.paths as f64, self.paths >= 1),
            ("ode_substep", self.ode_substep, self.ode_substep > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Upper bound on the value lost by truncating at the horizon.
    pub fn truncation_bound(&self, problem: &Problem) -> f64 {
        problem.value_bound() * libm::exp(-problem.discount * self.horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Switch,
    Observation,
}

/// One line of the event log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    /// Regime after the event.
    pub regime: usize,
    pub x_before: f64,
    pub x_after: f64,
    /// Harvested fraction (zero at switches).
    pub z: f64,
    /// Intensity in force after the event.
    pub lambda_next: f64,
}

/// Discounted cost of one path split by source.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub disutility: f64,
    pub observation: f64,
    pub harvest: f64,
    pub events: Vec<Event>,
}

impl PathOutcome {
    pub fn total(&self) -> f64 {
        self.disutility + self.observation + self.harvest
    }
}

/// Simulates path `index` of the run. Identical inputs give bit-identical
/// outcomes. The event log is only filled when `log` is set.
pub fn simulate_path<P: Policy + ?Sized>(
    problem: &Problem,
    policy: &P,
    config: &SimConfig,
    index: u64,
    log: bool,
) -> PathOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(index));
    let delta = problem.discount;
    let zbar = problem.harvest_fraction;
    let mut out = PathOutcome {
        disutility: 0.0,
        observation: 0.0,
        harvest: 0.0,
        events: Vec::new(),
    };
    let mut t = 0.0;
    let mut i = config.initial_regime;
    let mut x = config.initial_state;
    let mut commit = policy.start(i, x);
    let (sojourn, mut pending) = ctmc_next_switch(&problem.chain, i, &mut rng);
    let mut next_switch = sojourn;
    let mut next_obs = exponential(commit.intensity, &mut rng);
    loop {
        let t_next = next_switch.min(next_obs).min(config.horizon);
        out.disutility += discounted_disutility(problem, i, x, t, t_next - t);
        x = ode_segment(problem, i, x, t_next - t);
        t = t_next;
        if t >= config.horizon && next_switch > t && next_obs > t {
            break;
        }
        if next_switch <= next_obs {
            i = pending;
            let (sojourn, j) = ctmc_next_switch(&problem.chain, i, &mut rng);
            next_switch = t + sojourn;
            pending = j;
            if log {
                out.events.push(Event {
                    t,
                    kind: EventKind::Switch,
                    regime: i,
                    x_before: x,
                    x_after: x,
                    z: 0.0,
                    lambda_next: commit.intensity,
                });
            }
        } else {
            let decision = policy.observe(i, x, commit.harvest);
            let weight = libm::exp(-delta * t);
            out.observation += weight * problem.observation_cost;
            let z = decision.harvest.fraction(zbar);
            if decision.harvest == Harvest::Cut {
                out.harvest += weight * problem.harvest_cost_at(i, x, Harvest::Cut);
            }
            let before = x;
            x *= 1.0 - z;
            commit = decision.next;
            next_obs = t + exponential(commit.intensity, &mut rng);
            if log {
                out.events.push(Event {
                    t,
                    kind: EventKind::Observation,
                    regime: i,
                    x_before: before,
                    x_after: x,
                    z,
                    lambda_next: commit.intensity,
                });
            }
        }
    }
    out
}
