use crate::model::{Harvest, Problem};
use crate::solver::{AuxFieldFlexible, AuxFieldInflexible, ValueField};

/// What is fixed for the interval up to the next observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commitment {
    pub intensity: f64,
    /// Harvest to apply at the next observation. Only inflexible policies
    /// use it; flexible ones leave it at `Hold`.
    pub harvest: Harvest,
}

/// Response to one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Harvest applied now.
    pub harvest: Harvest,
    pub next: Commitment,
}

/// A control rule that only ever sees the regime and population at
/// observation times.
pub trait Policy {
    /// Commitment made at time zero for the first interval.
    fn start(&self, regime: usize, x: f64) -> Commitment;

    /// Called at each observation with the observed state and the harvest
    /// committed at the previous observation.
    fn observe(&self, regime: usize, x: f64, committed: Harvest) -> Decision;
}

/// Never-changing controls: a flexible rule that always takes `harvest` and
/// always observes at `intensity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPolicy {
    pub harvest: Harvest,
    pub intensity: f64,
}

impl Policy for FixedPolicy {
    fn start(&self, _: usize, _: f64) -> Commitment {
        Commitment {
            intensity: self.intensity,
            harvest: Harvest::Hold,
        }
    }

    fn observe(&self, _: usize, _: f64, _: Harvest) -> Decision {
        Decision {
            harvest: self.harvest,
            next: self.start(0, 0.0),
        }
    }
}

/// Flexible policy read from solver fields by interpolation at the observed
/// state: harvest from the intervention comparison, then the intensity that
/// minimizes `Psi` at the post-harvest state.
#[derive(Debug, Clone, Copy)]
pub struct FlexibleGridPolicy<'a> {
    pub problem: &'a Problem,
    pub value: &'a ValueField,
    pub aux: &'a AuxFieldFlexible,
}

impl FlexibleGridPolicy<'_> {
    fn intensity_at(&self, i: usize, x: f64) -> f64 {
        let mut best = 0;
        let mut best_value = self.aux.interp(i, 0, x);
        for r in 1..self.aux.intensities().len() {
            let v = self.aux.interp(i, r, x);
            if v < best_value {
                best = r;
                best_value = v;
            }
        }
        self.aux.intensities()[best]
    }
}

impl Policy for FlexibleGridPolicy<'_> {
    fn start(&self, regime: usize, x: f64) -> Commitment {
        Commitment {
            intensity: self.intensity_at(regime, x),
            harvest: Harvest::Hold,
        }
    }

    fn observe(&self, regime: usize, x: f64, _: Harvest) -> Decision {
        let zbar = self.problem.harvest_fraction;
        let hold = self.value.interp(regime, x);
        let cut = self.value.interp(regime, (1.0 - zbar) * x)
            + self.problem.harvest_cost_at(regime, x, Harvest::Cut);
        let harvest = if cut < hold { Harvest::Cut } else { Harvest::Hold };
        let post = (1.0 - harvest.fraction(zbar)) * x;
        Decision {
            harvest,
            next: self.start(regime, post),
        }
    }
}

/// Inflexible policy: applies the harvest committed at the previous
/// observation, then commits the `(intensity, harvest)` pair minimizing
/// `Psi` at the post-harvest state.
#[derive(Debug, Clone, Copy)]
pub struct InflexibleGridPolicy<'a> {
    pub problem: &'a Problem,
    pub aux: &'a AuxFieldInflexible,
}

impl Policy for InflexibleGridPolicy<'_> {
    fn start(&self, regime: usize, x: f64) -> Commitment {
        let (r, harvest) = crate::solver::inflexible_argmin(self.aux.intensities().len(), |r, y| {
            self.aux.interp(regime, r, y, x)
        });
        Commitment {
            intensity: self.aux.intensities()[r],
            harvest,
        }
    }

    fn observe(&self, regime: usize, x: f64, committed: Harvest) -> Decision {
        let post = (1.0 - committed.fraction(self.problem.harvest_fraction)) * x;
        Decision {
            harvest: committed,
            next: self.start(regime, post),
        }
    }
}
