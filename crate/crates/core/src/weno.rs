//! Third-order WENO one-sided derivatives and the local Lax-Friedrichs
//! numerical Hamiltonian for `H(p) = -f p`.
//!
//! Interior nodes use the Jiang-Peng WENO3 reconstruction built from
//! undivided differences. No ghost nodes are used: the outermost node on each
//! side takes the first-order one-sided difference for both derivatives, and
//! on the next-to-outermost node the derivative whose WENO stencil would leave
//! the grid falls back to the second-order three-point difference.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Smallest array the WENO stencils can handle.
pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TooShort {
    pub len: usize,
}

impl fmt::Display for TooShort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WENO3 needs at least {MIN_NODES} nodes, got {}", self.len)
    }
}

impl core::error::Error for TooShort {}

/// Left-biased (`p-`) and right-biased (`p+`) derivative estimates at every
/// node, with the default regularization.
pub fn weno3_biased_derivatives(values: &[f64], dx: f64) -> Result<(Vec<f64>, Vec<f64>), TooShort> {
    weno3_biased_derivatives_with(values, dx, DEFAULT_EPSILON)
}

pub fn weno3_biased_derivatives_with(
    values: &[f64],
    dx: f64,
    eps: f64,
) -> Result<(Vec<f64>, Vec<f64>), TooShort> {
    let n = values.len();
    if n < MIN_NODES {
        return Err(TooShort { len: n });
    }
    let inv_dx = 1.0 / dx;
    let mut minus = vec![0.0; n];
    let mut plus = vec![0.0; n];
    for j in 0..n {
        minus[j] = left_derivative(values, j, inv_dx, eps);
        plus[j] = right_derivative(values, j, inv_dx, eps);
    }
    Ok((minus, plus))
}

/// `p-` at node `j`. The caller guarantees `u.len() >= MIN_NODES`.
#[inline]
pub fn left_derivative(u: &[f64], j: usize, inv_dx: f64, eps: f64) -> f64 {
    let n = u.len();
    if j == 0 {
        return (u[1] - u[0]) * inv_dx;
    }
    if j == n - 1 {
        return (u[n - 1] - u[n - 2]) * inv_dx;
    }
    if j == 1 {
        return 0.5 * (u[2] - u[0]) * inv_dx;
    }
    let dm2 = u[j - 1] - u[j - 2];
    let dm1 = u[j] - u[j - 1];
    let d0 = u[j + 1] - u[j];
    let a = dm1 - dm2;
    let b = d0 - dm1;
    let r = (eps + a * a) / (eps + b * b);
    let w = 1.0 / (1.0 + 2.0 * r * r);
    (0.5 * (dm1 + d0) - 0.5 * w * (b - a)) * inv_dx
}

/// `p+` at node `j`. The caller guarantees `u.len() >= MIN_NODES`.
#[inline]
pub fn right_derivative(u: &[f64], j: usize, inv_dx: f64, eps: f64) -> f64 {
    let n = u.len();
    if j == 0 {
        return (u[1] - u[0]) * inv_dx;
    }
    if j == n - 1 {
        return (u[n - 1] - u[n - 2]) * inv_dx;
    }
    if j == n - 2 {
        return 0.5 * (u[n - 1] - u[n - 3]) * inv_dx;
    }
    let dm1 = u[j] - u[j - 1];
    let d0 = u[j + 1] - u[j];
    let dp1 = u[j + 2] - u[j + 1];
    let a = dp1 - d0;
    let b = d0 - dm1;
    let r = (eps + a * a) / (eps + b * b);
    let w = 1.0 / (1.0 + 2.0 * r * r);
    (0.5 * (dm1 + d0) - 0.5 * w * (a - b)) * inv_dx
}

/// Local Lax-Friedrichs flux for `H(p) = -f p` with dissipation `|f|`.
#[inline]
pub fn llxf_hamiltonian(f: f64, p_minus: f64, p_plus: f64) -> f64 {
    -f * 0.5 * (p_minus + p_plus) - f.abs() * 0.5 * (p_plus - p_minus)
}

/// The same flux evaluated from the one derivative it actually weights: with
/// dissipation `|f|` the LLxF flux of a linear Hamiltonian is exact upwinding.
#[inline]
pub fn upwind_hamiltonian(u: &[f64], j: usize, f: f64, inv_dx: f64, eps: f64) -> f64 {
    if f > 0.0 {
        -f * right_derivative(u, j, inv_dx, eps)
    } else if f < 0.0 {
        -f * left_derivative(u, j, inv_dx, eps)
    } else {
        0.0
    }
}
