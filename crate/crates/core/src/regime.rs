//! Regime assignment and Markov-chain estimation from sampled discharge
//! records, the entropy diagnostic, and synthetic records drawn from a known
//! chain.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{ModelError, RegimeChain};
use crate::sim::ctmc_next_switch;

/// Consecutive samples further apart than this many intervals are treated as
/// a gap.
const GAP_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateError {
    EmptySeries,
    /// Fewer than two consecutive usable samples.
    TooShort { pairs: usize },
    TimesNotIncreasing { index: usize },
    NegativeDischarge { index: usize, value: f64 },
    LengthMismatch { times: usize, discharges: usize },
    InvalidInterval(f64),
    Model(ModelError),
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySeries => write!(f, "discharge series is empty"),
            Self::TooShort { pairs } => {
                write!(f, "need at least 2 consecutive usable samples, found {pairs} pairs")
            }
            Self::TimesNotIncreasing { index } => {
                write!(f, "timestamps must be strictly increasing (sample {index})")
            }
            Self::NegativeDischarge { index, value } => {
                write!(f, "negative discharge {value} at sample {index}")
            }
            Self::LengthMismatch { times, discharges } => {
                write!(f, "{times} timestamps but {discharges} discharges")
            }
            Self::InvalidInterval(dt) => write!(f, "sample interval {dt} must be positive"),
            Self::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EstimateError {}

impl From<ModelError> for EstimateError {
    fn from(e: ModelError) -> Self {
        EstimateError::Model(e)
    }
}

/// Discharge samples on a nominally regular clock. `None` marks a missing
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct DischargeSeries {
    times: Vec<f64>,
    discharges: Vec<Option<f64>>,
    interval: f64,
}

impl DischargeSeries {
    /// `times` in days, `interval` the nominal spacing in days.
    pub fn new(
        times: Vec<f64>,
        discharges: Vec<Option<f64>>,
        interval: f64,
    ) -> Result<Self, EstimateError> {
        if times.len() != discharges.len() {
            return Err(EstimateError::LengthMismatch {
                times: times.len(),
                discharges: discharges.len(),
            });
        }
        if !(interval > 0.0 && interval.is_finite()) {
            return Err(EstimateError::InvalidInterval(interval));
        }
        for k in 0..times.len() {
            if !times[k].is_finite() || (k > 0 && times[k] <= times[k - 1]) {
                return Err(EstimateError::TimesNotIncreasing { index: k });
            }
            if let Some(q) = discharges[k] {
                if !(q >= 0.0) || !q.is_finite() {
                    return Err(EstimateError::NegativeDischarge { index: k, value: q });
                }
            }
        }
        Ok(Self {
            times,
            discharges,
            interval,
        })
    }

    /// Samples `q[k]` at `t = k * interval`.
    pub fn regular(discharges: Vec<Option<f64>>, interval: f64) -> Result<Self, EstimateError> {
        let times = (0..discharges.len()).map(|k| k as f64 * interval).collect();
        Self::new(times, discharges, interval)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn discharges(&self) -> &[Option<f64>] {
        &self.discharges
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    /// Whether samples `k` and `k + 1` are both present and one interval
    /// apart.
    fn linked(&self, k: usize) -> bool {
        self.discharges[k].is_some()
            && self.discharges[k + 1].is_some()
            && self.times[k + 1] - self.times[k] <= GAP_FACTOR * self.interval
    }
}

/// Index of the level nearest to `q`, ties to the lower index. `levels` must
/// be strictly increasing.
pub fn nearest_level(levels: &[f64], q: f64) -> usize {
    let above = levels.partition_point(|&l| l < q);
    if above == 0 {
        return 0;
    }
    if above == levels.len() {
        return levels.len() - 1;
    }
    if q - levels[above - 1] <= levels[above] - q {
        above - 1
    } else {
        above
    }
}

/// Regime of every sample (`None` at gaps).
pub fn assign_regimes(
    series: &DischargeSeries,
    levels: &[f64],
) -> Result<Vec<Option<usize>>, EstimateError> {
    if series.is_empty() {
        return Err(EstimateError::EmptySeries);
    }
    if levels.is_empty() {
        return Err(ModelError::EmptyChain.into());
    }
    if let Some(k) = (1..levels.len()).find(|&k| !(levels[k] > levels[k - 1])) {
        return Err(ModelError::DischargesNotIncreasing { index: k }.into());
    }
    Ok(series
        .discharges
        .iter()
        .map(|q| q.map(|q| nearest_level(levels, q)))
        .collect())
}

/// Empirical chain from one sampled record.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEstimate {
    pub levels: Vec<f64>,
    /// Sample interval the probabilities refer to (days).
    pub interval: f64,
    /// One-interval transition probabilities, row-major.
    pub transition: Vec<f64>,
    /// `p_ij / interval` off the diagonal, zero on it.
    pub rates: Vec<f64>,
    /// Fraction of present samples in each regime.
    pub occupancy: Vec<f64>,
    /// Rows with at least one counted transition.
    pub visited: Vec<bool>,
    pub entropy: f64,
    /// Number of counted consecutive pairs.
    pub pairs: usize,
}

impl ChainEstimate {
    pub fn regime_count(&self) -> usize {
        self.levels.len()
    }

    pub fn probability(&self, i: usize, j: usize) -> f64 {
        self.transition[i * self.regime_count() + j]
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.regime_count() + j]
    }

    pub fn to_chain(&self) -> Result<RegimeChain, ModelError> {
        RegimeChain::new(self.levels.clone(), self.rates.clone())
    }
}

/// Counts transitions between consecutive present samples (never across a
/// gap) and converts them to rates.
pub fn estimate_chain(
    series: &DischargeSeries,
    levels: &[f64],
) -> Result<ChainEstimate, EstimateError> {
    let regimes = assign_regimes(series, levels)?;
    let n = levels.len();
    let mut counts = vec![0u64; n * n];
    let mut pairs = 0usize;
    for k in 0..series.len().saturating_sub(1) {
        if series.linked(k) {
            let (a, b) = (regimes[k].unwrap_or(0), regimes[k + 1].unwrap_or(0));
            counts[a * n + b] += 1;
            pairs += 1;
        }
    }
    if pairs < 1 {
        return Err(EstimateError::TooShort { pairs });
    }
    let mut occupancy = vec![0.0; n];
    let mut present = 0usize;
    for r in regimes.iter().flatten() {
        occupancy[*r] += 1.0;
        present += 1;
    }
    for o in &mut occupancy {
        *o /= present as f64;
    }
    let mut transition = vec![0.0; n * n];
    let mut rates = vec![0.0; n * n];
    let mut visited = vec![false; n];
    for i in 0..n {
        let row: u64 = counts[i * n..(i + 1) * n].iter().sum();
        if row == 0 {
            continue;
        }
        visited[i] = true;
        for j in 0..n {
            let p = counts[i * n + j] as f64 / row as f64;
            transition[i * n + j] = p;
            if i != j {
                rates[i * n + j] = p / series.interval;
            }
        }
    }
    let mut est = ChainEstimate {
        levels: levels.to_vec(),
        interval: series.interval,
        transition,
        rates,
        occupancy,
        visited,
        entropy: 0.0,
        pairs,
    };
    est.entropy = entropy(&est);
    Ok(est)
}

/// Occupancy-weighted row entropy of the one-interval chain, in nats.
pub fn entropy(estimate: &ChainEstimate) -> f64 {
    let n = estimate.regime_count();
    let mut h = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            let p = estimate.probability(i, j);
            if p > 0.0 {
                row -= p * libm::log(p);
            }
        }
        h += estimate.occupancy[i] * row;
    }
    h
}

/// Samples the regime of a simulated chain every `dt` days over `duration`
/// days and records its representative discharge.
pub fn synthesize_series(
    chain: &RegimeChain,
    duration: f64,
    dt: f64,
    seed: u64,
    start: usize,
) -> Result<DischargeSeries, EstimateError> {
    if start >= chain.regime_count() {
        return Err(ModelError::RegimeOutOfRange {
            index: start,
            count: chain.regime_count(),
        }
        .into());
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EstimateError::InvalidInterval(dt));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(EstimateError::EmptySeries);
    }
    let samples = libm::floor(duration / dt + 1e-9) as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut regime = start;
    let (sojourn, mut next) = ctmc_next_switch(chain, regime, &mut rng);
    let mut switch_at = sojourn;
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = k as f64 * dt;
        while switch_at <= t {
            regime = next;
            let (s, j) = ctmc_next_switch(chain, regime, &mut rng);
            switch_at += s;
            next = j;
        }
        out.push(Some(chain.discharge(regime)));
    }
    DischargeSeries::regular(out, dt)
}

/// Birth-death chain on equally spaced discharge levels with rare jumps up to
/// a flood level, used where no measured record is available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticChainSpec {
    pub count: usize,
    pub q0: f64,
    pub dq: f64,
    /// Rate of moving one level up (1/day).
    pub up: f64,
    /// Rate of moving one level down (1/day).
    pub down: f64,
    /// Rate of jumping from any lower level to the flood level (1/day).
    pub flood_rate: f64,
    /// Discharge of the flood level; the nearest level is used.
    pub flood_discharge: f64,
}

impl SyntheticChainSpec {
    /// 41 levels `0.5 + 1.25 i`, mostly near the bottom.
    pub fn reference() -> Self {
        Self {
            count: 41,
            q0: 0.5,
            dq: 1.25,
            up: 0.25,
            down: 1.0,
            flood_rate: 0.005,
            flood_discharge: 30.5,
        }
    }

    /// 11 levels `0.5 + 5 i` spanning the same discharge range, with the
    /// one-level rates scaled by the coarser spacing.
    pub fn coarse() -> Self {
        Self {
            count: 11,
            q0: 0.5,
            dq: 5.0,
            up: 0.0625,
            down: 0.25,
            flood_rate: 0.005,
            flood_discharge: 30.5,
        }
    }

    pub fn levels(&self) -> Vec<f64> {
        RegimeChain::uniform_levels(self.count, self.q0, self.dq)
    }

    pub fn build(&self) -> Result<RegimeChain, ModelError> {
        let n = self.count;
        let levels = self.levels();
        let flood = nearest_level(&levels, self.flood_discharge);
        let mut rates = vec![0.0; n * n];
        for i in 0..n {
            if i + 1 < n {
                rates[i * n + i + 1] += self.up;
            }
            if i > 0 {
                rates[i * n + i - 1] += self.down;
            }
            if i < flood {
                rates[i * n + flood] += self.flood_rate;
            }
        }
        RegimeChain::new(levels, rates)
    }
}
