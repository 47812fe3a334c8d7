//! Event-driven Monte Carlo of the controlled process: regime switches,
//! deterministic motion between events, Poisson observations at the
//! currently committed intensity, and proportional harvests at observations.

mod ctmc;
mod estimate;
mod ode;
mod path;
mod policy;

pub use ctmc::{ctmc_next_switch, exponential};
pub use estimate::{estimate_performance, Estimate};
pub use ode::{discounted_disutility, ode_segment, ode_segment_rk4, SIMPSON_TOLERANCE};
pub use path::{simulate_path, Event, EventKind, PathOutcome, SimConfig};
pub use policy::{
    Commitment, Decision, FixedPolicy, FlexibleGridPolicy, InflexibleGridPolicy, Policy,
};
