use alloc::vec::Vec;

use super::path::{simulate_path, PathOutcome, SimConfig};
use super::policy::Policy;
use crate::model::{ModelError, Problem};

/// Monte Carlo estimate of the performance index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// `disutility + observation + harvest`.
    pub mean: f64,
    pub standard_error: f64,
    pub disutility: f64,
    pub observation: f64,
    pub harvest: f64,
    pub paths: usize,
}

/// Averages `config.paths` independent paths. The result does not depend on
/// how the paths are scheduled across threads.
pub fn estimate_performance<P: Policy + Sync + ?Sized>(
    problem: &Problem,
    policy: &P,
    config: &SimConfig,
) -> Result<Estimate, ModelError> {
    problem.validate()?;
    config.validate(problem)?;
    let outcomes = run_paths(problem, policy, config);
    let n = outcomes.len() as f64;
    let (mut dis, mut obs, mut harv) = (0.0, 0.0, 0.0);
    for o in &outcomes {
        dis += o.disutility;
        obs += o.observation;
        harv += o.harvest;
    }
    let (dis, obs, harv) = (dis / n, obs / n, harv / n);
    let mean = dis + obs + harv;
    let var = if outcomes.len() > 1 {
        outcomes
            .iter()
            .map(|o| {
                let e = o.total() - mean;
                e * e
            })
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        standard_error: libm::sqrt(var / n),
        disutility: dis,
        observation: obs,
        harvest: harv,
        paths: outcomes.len(),
    })
}

fn run_paths<P: Policy + Sync + ?Sized>(
    problem: &Problem,
    policy: &P,
    config: &SimConfig,
) -> Vec<PathOutcome> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.paths as u64)
            .into_par_iter()
            .map(|k| simulate_path(problem, policy, config, k, false))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.paths as u64)
            .map(|k| simulate_path(problem, policy, config, k, false))
            .collect()
    }
}
