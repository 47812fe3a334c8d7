use alloc::vec;
use alloc::vec::Vec;

use crate::model::Harvest;

/// `Phi[i][j]` over regimes and grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    regimes: usize,
    nodes: usize,
    values: Vec<f64>,
}

impl ValueField {
    pub fn zeros(regimes: usize, nodes: usize) -> Self {
        Self {
            regimes,
            nodes,
            values: vec![0.0; regimes * nodes],
        }
    }

    pub fn from_fn(regimes: usize, nodes: usize, f: impl Fn(usize, f64) -> f64) -> Self {
        let last = (nodes - 1) as f64;
        let mut values = Vec::with_capacity(regimes * nodes);
        for i in 0..regimes {
            for j in 0..nodes {
                values.push(f(i, j as f64 / last));
            }
        }
        Self {
            regimes,
            nodes,
            values,
        }
    }

    pub(crate) fn from_raw(regimes: usize, nodes: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), regimes * nodes);
        Self {
            regimes,
            nodes,
            values,
        }
    }

    pub fn regimes(&self) -> usize {
        self.regimes
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nodes + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.nodes..(i + 1) * self.nodes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_shape(&self, other: &ValueField) -> bool {
        self.regimes == other.regimes && self.nodes == other.nodes
    }

    /// Piecewise-linear interpolation of regime `i` at `x` (clamped into
    /// `[0, 1]`).
    #[inline]
    pub fn interp(&self, i: usize, x: f64) -> f64 {
        interp_row(self.row(i), x)
    }

    /// Largest `Phi[i][j] - Phi[i][j+1]` over all regimes (zero when every
    /// row is nondecreasing).
    pub fn monotonicity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.regimes {
            let row = self.row(i);
            for w in row.windows(2) {
                worst = worst.max(w[0] - w[1]);
            }
        }
        worst
    }
}

#[inline]
pub(crate) fn interp_row(row: &[f64], x: f64) -> f64 {
    let last = row.len() - 1;
    let s = x.clamp(0.0, 1.0) * last as f64;
    let lo = (s as usize).min(last);
    let frac = s - lo as f64;
    if lo == last || frac == 0.0 {
        row[lo]
    } else {
        row[lo] + frac * (row[lo + 1] - row[lo])
    }
}

/// Storage shared by the two auxiliary field types: `slots` values per
/// `(regime, node)`, laid out regime-major then slot then node.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SlotField {
    pub regimes: usize,
    pub slots: usize,
    pub nodes: usize,
    pub values: Vec<f64>,
}

impl SlotField {
    pub fn zeros(regimes: usize, slots: usize, nodes: usize) -> Self {
        Self {
            regimes,
            slots,
            nodes,
            values: vec![0.0; regimes * slots * nodes],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, s: usize, j: usize) -> f64 {
        self.values[(i * self.slots + s) * self.nodes + j]
    }

    pub fn row(&self, i: usize, s: usize) -> &[f64] {
        let start = (i * self.slots + s) * self.nodes;
        &self.values[start..start + self.nodes]
    }

    /// Pointwise minimum over slots.
    pub fn min_over_slots(&self) -> ValueField {
        let mut out = Vec::with_capacity(self.regimes * self.nodes);
        for i in 0..self.regimes {
            for j in 0..self.nodes {
                let mut m = f64::INFINITY;
                for s in 0..self.slots {
                    m = m.min(self.get(i, s, j));
                }
                out.push(m);
            }
        }
        ValueField::from_raw(self.regimes, self.nodes, out)
    }
}

/// `Psi[i][j][r]` for each admissible intensity `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxFieldFlexible {
    pub(crate) intensities: Vec<f64>,
    pub(crate) field: SlotField,
}

impl AuxFieldFlexible {
    pub fn zeros(intensities: &[f64], regimes: usize, nodes: usize) -> Self {
        Self {
            intensities: intensities.to_vec(),
            field: SlotField::zeros(regimes, intensities.len(), nodes),
        }
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn regimes(&self) -> usize {
        self.field.regimes
    }

    pub fn nodes(&self) -> usize {
        self.field.nodes
    }

    /// `Psi(i, x_j, intensities[r])`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, r: usize) -> f64 {
        self.field.get(i, r, j)
    }

    pub fn row(&self, i: usize, r: usize) -> &[f64] {
        self.field.row(i, r)
    }

    pub fn interp(&self, i: usize, r: usize, x: f64) -> f64 {
        interp_row(self.field.row(i, r), x)
    }

    /// Pointwise minimum over intensities.
    pub fn min_value(&self) -> ValueField {
        self.field.min_over_slots()
    }
}

/// `Psi[i][j][r][y]` for every intensity `r` and committed harvest `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxFieldInflexible {
    pub(crate) intensities: Vec<f64>,
    pub(crate) field: SlotField,
}

impl AuxFieldInflexible {
    pub fn zeros(intensities: &[f64], regimes: usize, nodes: usize) -> Self {
        Self {
            intensities: intensities.to_vec(),
            field: SlotField::zeros(regimes, 2 * intensities.len(), nodes),
        }
    }

    #[inline]
    pub(crate) fn slot(r: usize, y: Harvest) -> usize {
        2 * r
            + match y {
                Harvest::Hold => 0,
                Harvest::Cut => 1,
            }
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn regimes(&self) -> usize {
        self.field.regimes
    }

    pub fn nodes(&self) -> usize {
        self.field.nodes
    }

    /// `Psi(i, x_j, intensities[r], y)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, r: usize, y: Harvest) -> f64 {
        self.field.get(i, Self::slot(r, y), j)
    }

    pub fn row(&self, i: usize, r: usize, y: Harvest) -> &[f64] {
        self.field.row(i, Self::slot(r, y))
    }

    pub fn interp(&self, i: usize, r: usize, y: Harvest, x: f64) -> f64 {
        interp_row(self.field.row(i, Self::slot(r, y)), x)
    }

    /// Pointwise minimum over all `(r, y)` slots.
    pub fn min_value(&self) -> ValueField {
        self.field.min_over_slots()
    }
}
