use alloc::vec;
use alloc::vec::Vec;

use super::field::ValueField;
use super::march::Prepared;
use super::SolverError;
use crate::model::{Harvest, Problem};

/// `M Phi` together with the minimizing harvest at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionResult {
    pub value: ValueField,
    /// Indexed like the value field: `regime * nodes + node`.
    pub harvest: Vec<Harvest>,
}

impl InterventionResult {
    pub fn harvest_at(&self, i: usize, j: usize) -> Harvest {
        self.harvest[i * self.value.nodes() + j]
    }
}

/// `M Phi(i, x) = min_z { Phi(i, (1 - z) x) + d + K(i, x, z) }` on the grid
/// nodes, with `Phi` interpolated linearly off-grid and ties going to `z = 0`.
pub fn apply_intervention_operator(
    phi: &ValueField,
    problem: &Problem,
) -> Result<InterventionResult, SolverError> {
    if phi.regimes() != problem.regime_count() || phi.nodes() < crate::weno::MIN_NODES {
        return Err(SolverError::ShapeMismatch);
    }
    if let Some(k) = phi.values().iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite {
            step: 0,
            regime: k / phi.nodes(),
            node: k % phi.nodes(),
        });
    }
    let prep = Prepared::new(problem, phi.nodes());
    let n = phi.nodes();
    let mut value = vec![0.0; phi.values().len()];
    let mut harvest = vec![Harvest::Hold; phi.values().len()];
    for i in 0..phi.regimes() {
        let span = i * n..(i + 1) * n;
        prep.intervention_row(
            i,
            phi.row(i),
            &mut value[span.clone()],
            Some(&mut harvest[span]),
        );
    }
    Ok(InterventionResult {
        value: ValueField::from_raw(phi.regimes(), n, value),
        harvest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, RegimeChain};

    fn problem() -> Problem {
        let chain = RegimeChain::frozen(RegimeChain::uniform_levels(41, 0.5, 1.25)).unwrap();
        Problem::from_params(chain, &ModelParams::reference()).unwrap()
    }

    #[test]
    fn zero_field_gives_observation_cost() {
        let p = problem();
        let out = apply_intervention_operator(&ValueField::zeros(41, 21), &p).unwrap();
        assert!(out.value.values().iter().all(|&v| (v - 0.1).abs() < 1e-15));
        assert!(out.harvest.iter().all(|&h| h == Harvest::Hold));
    }

    #[test]
    fn steep_field_enumeration() {
        let p = problem();
        // node 8 of 11 sits at x = 0.8 and (1 - 0.5) * 0.8 = 0.4 is node 4
        let phi = ValueField::from_fn(41, 11, |_, x| 10.0 * x);
        let out = apply_intervention_operator(&phi, &p).unwrap();
        assert!((out.value.get(5, 8) - 4.35).abs() < 1e-12);
        assert_eq!(out.harvest_at(5, 8), Harvest::Cut);
        assert!((out.value.get(20, 8) - 8.1).abs() < 1e-12);
        assert_eq!(out.harvest_at(20, 8), Harvest::Hold);
    }

    #[test]
    fn bounded_by_no_harvest_branch() {
        let p = problem();
        let phi = ValueField::from_fn(41, 33, |i, x| x * x * (1.0 + i as f64 * 0.1) + 0.2 * x);
        let out = apply_intervention_operator(&phi, &p).unwrap();
        for (m, v) in out.value.values().iter().zip(phi.values()) {
            assert!(*m <= v + 0.1 + 1e-15);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let p = problem();
        let phi = ValueField::from_fn(41, 11, |i, x| if i == 3 && x > 0.5 { f64::NAN } else { x });
        assert!(matches!(
            apply_intervention_operator(&phi, &p),
            Err(SolverError::NonFinite { regime: 3, .. })
        ));
    }
}
