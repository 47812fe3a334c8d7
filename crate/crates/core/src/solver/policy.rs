use alloc::vec::Vec;

use super::field::{AuxFieldFlexible, AuxFieldInflexible, ValueField};
use super::intervention::apply_intervention_operator;
use super::SolverError;
use crate::model::{Harvest, Problem};

/// Optimal `(z*, lambda*)` at every `(regime, node)`.
///
/// For the flexible model both entries are read at the current observation.
/// For the inflexible model they are the pair committed for the next
/// interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyField {
    regimes: usize,
    nodes: usize,
    zbar: f64,
    intensities: Vec<f64>,
    harvest: Vec<Harvest>,
    intensity: Vec<usize>,
    inflexible: bool,
}

impl PolicyField {
    pub fn regimes(&self) -> usize {
        self.regimes
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn is_inflexible(&self) -> bool {
        self.inflexible
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    #[inline]
    pub fn harvest(&self, i: usize, j: usize) -> Harvest {
        self.harvest[i * self.nodes + j]
    }

    /// Index into [`Self::intensities`].
    #[inline]
    pub fn intensity_index(&self, i: usize, j: usize) -> usize {
        self.intensity[i * self.nodes + j]
    }

    pub fn zstar(&self, i: usize, j: usize) -> f64 {
        self.harvest(i, j).fraction(self.zbar)
    }

    pub fn lamstar(&self, i: usize, j: usize) -> f64 {
        self.intensities[self.intensity_index(i, j)]
    }

    /// Number of nodes with `z* = zbar`.
    pub fn harvest_count(&self) -> usize {
        self.harvest.iter().filter(|&&h| h == Harvest::Cut).count()
    }

    /// Whether every harvesting node of `self` lies within `slack` cells of a
    /// harvesting node of `other` in the same regime.
    pub fn harvest_region_within(&self, other: &PolicyField, slack: usize) -> bool {
        if self.regimes != other.regimes || self.nodes != other.nodes {
            return false;
        }
        (0..self.regimes).all(|i| {
            (0..self.nodes).all(|j| {
                self.harvest(i, j) == Harvest::Hold || {
                    let lo = j.saturating_sub(slack);
                    let hi = (j + slack).min(self.nodes - 1);
                    (lo..=hi).any(|k| other.harvest(i, k) == Harvest::Cut)
                }
            })
        })
    }
}

/// Auxiliary fields from which a policy can be read off.
pub trait PolicySource {
    fn policy(&self, phi: &ValueField, problem: &Problem) -> Result<PolicyField, SolverError>;
}

impl PolicySource for AuxFieldFlexible {
    fn policy(&self, phi: &ValueField, problem: &Problem) -> Result<PolicyField, SolverError> {
        if self.regimes() != phi.regimes() || self.nodes() != phi.nodes() {
            return Err(SolverError::ShapeMismatch);
        }
        let harvest = apply_intervention_operator(phi, problem)?.harvest;
        let mut intensity = Vec::with_capacity(harvest.len());
        for i in 0..phi.regimes() {
            for j in 0..phi.nodes() {
                let mut best = 0;
                for r in 1..self.intensities.len() {
                    if self.get(i, j, r) < self.get(i, j, best) {
                        best = r;
                    }
                }
                intensity.push(best);
            }
        }
        Ok(PolicyField {
            regimes: phi.regimes(),
            nodes: phi.nodes(),
            zbar: problem.harvest_fraction,
            intensities: self.intensities.clone(),
            harvest,
            intensity,
            inflexible: false,
        })
    }
}

impl PolicySource for AuxFieldInflexible {
    fn policy(&self, phi: &ValueField, problem: &Problem) -> Result<PolicyField, SolverError> {
        if self.regimes() != phi.regimes() || self.nodes() != phi.nodes() {
            return Err(SolverError::ShapeMismatch);
        }
        let n = phi.regimes() * phi.nodes();
        let mut harvest = Vec::with_capacity(n);
        let mut intensity = Vec::with_capacity(n);
        for i in 0..phi.regimes() {
            for j in 0..phi.nodes() {
                let (r, y) = inflexible_argmin(self.intensities.len(), |r, y| self.get(i, j, r, y));
                harvest.push(y);
                intensity.push(r);
            }
        }
        Ok(PolicyField {
            regimes: phi.regimes(),
            nodes: phi.nodes(),
            zbar: problem.harvest_fraction,
            intensities: self.intensities.clone(),
            harvest,
            intensity,
            inflexible: true,
        })
    }
}

/// Argmin over `(r, y)` preferring `y = Hold`, then the lowest intensity.
pub(crate) fn inflexible_argmin(
    intensities: usize,
    value: impl Fn(usize, Harvest) -> f64,
) -> (usize, Harvest) {
    let mut best = (0, Harvest::Hold);
    let mut best_value = value(0, Harvest::Hold);
    for y in Harvest::BOTH {
        for r in 0..intensities {
            let v = value(r, y);
            if v < best_value {
                best = (r, y);
                best_value = v;
            }
        }
    }
    best
}

/// Reads the optimal controls off converged fields.
pub fn extract_policy<S: PolicySource + ?Sized>(
    aux: &S,
    phi: &ValueField,
    problem: &Problem,
) -> Result<PolicyField, SolverError> {
    aux.policy(phi, problem)
}
