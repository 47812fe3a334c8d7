use super::field::ValueField;
use super::SolverError;

/// Relative tolerance (times the field scale) below zero that a value of
/// information may reach before it is reported as an error.
pub const VOI_TOLERANCE: f64 = 1e-6;

/// `V = Phi_inflexible - Phi_flexible` pointwise.
pub fn voi(inflexible: &ValueField, flexible: &ValueField) -> Result<ValueField, SolverError> {
    if !inflexible.same_shape(flexible) {
        return Err(SolverError::ShapeMismatch);
    }
    let scale = inflexible.scale().max(flexible.scale());
    let n = inflexible.nodes();
    let mut out = alloc::vec::Vec::with_capacity(inflexible.values().len());
    for (k, (a, b)) in inflexible.values().iter().zip(flexible.values()).enumerate() {
        let v = a - b;
        if v < -VOI_TOLERANCE * scale {
            return Err(SolverError::NegativeVoi {
                regime: k / n,
                node: k % n,
                value: v,
            });
        }
        out.push(v);
    }
    Ok(ValueField::from_raw(inflexible.regimes(), n, out))
}
