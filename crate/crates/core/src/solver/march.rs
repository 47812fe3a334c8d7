use alloc::vec;
use alloc::vec::Vec;

use super::field::{AuxFieldFlexible, AuxFieldInflexible, SlotField, ValueField};
use super::{Grid, SolverError, DIVERGENCE_WINDOW, INVARIANT_TOLERANCE};
use crate::model::{Harvest, Problem};
use crate::weno::upwind_hamiltonian;

/// Below this many slot-node updates per step the rayon dispatch costs more
/// than it saves.
#[cfg(feature = "parallel")]
const PARALLEL_THRESHOLD: usize = 16_384;

/// Grid-dependent coefficients computed once per solve.
pub(crate) struct Prepared {
    pub nodes: usize,
    pub inv_dx: f64,
    pub discount: f64,
    pub observation_cost: f64,
    /// `f(i, x_j)`, regime-major.
    pub drift: Vec<f64>,
    /// `h(x_j)`.
    pub running: Vec<f64>,
    /// `K(i, x_j, zbar)`, regime-major.
    pub cut_cost: Vec<f64>,
    /// `(1 - zbar) x_j` as a lower node index plus fraction of a cell.
    pub shrink: Vec<(usize, f64)>,
    pub couplings: Vec<Vec<(usize, f64)>>,
    pub exit: Vec<f64>,
    /// Maximal runs `[start, end)` of interior nodes (`2..nodes - 2`) on which
    /// the drift is positive (`true`) or not, per regime.
    pub runs: Vec<Vec<(usize, usize, bool)>>,
}

impl Prepared {
    pub fn new(problem: &Problem, nodes: usize) -> Self {
        let regimes = problem.regime_count();
        let last = (nodes - 1) as f64;
        let x = |j: usize| j as f64 / last;
        let mut drift = Vec::with_capacity(regimes * nodes);
        let mut cut_cost = Vec::with_capacity(regimes * nodes);
        for i in 0..regimes {
            for j in 0..nodes {
                drift.push(problem.drift_at(i, x(j)));
                cut_cost.push(problem.harvest_cost_at(i, x(j), Harvest::Cut));
            }
        }
        let keep = 1.0 - problem.harvest_fraction;
        let shrink = (0..nodes)
            .map(|j| {
                let s = keep * j as f64;
                let lo = (libm::floor(s) as usize).min(nodes - 1);
                (lo, s - lo as f64)
            })
            .collect();
        let runs = (0..regimes)
            .map(|i| {
                let mut out: Vec<(usize, usize, bool)> = Vec::new();
                for j in 2..nodes - 2 {
                    let right = drift[i * nodes + j] > 0.0;
                    match out.last_mut() {
                        Some(run) if run.2 == right => run.1 = j + 1,
                        _ => out.push((j, j + 1, right)),
                    }
                }
                out
            })
            .collect();
        Self {
            nodes,
            inv_dx: last,
            runs,
            discount: problem.discount,
            observation_cost: problem.observation_cost,
            drift,
            running: (0..nodes).map(|j| problem.disutility_at(x(j))).collect(),
            cut_cost,
            shrink,
            couplings: (0..regimes).map(|i| problem.chain.sparse_row(i)).collect(),
            exit: (0..regimes).map(|i| problem.chain.exit_rate(i)).collect(),
        }
    }

    /// `Phi(i, (1 - zbar) x_j)` by linear interpolation.
    #[inline]
    pub fn shrunk(&self, row: &[f64], j: usize) -> f64 {
        let (lo, frac) = self.shrink[j];
        if frac == 0.0 {
            row[lo]
        } else {
            row[lo] + frac * (row[lo + 1] - row[lo])
        }
    }

    /// Intervention operator on one regime row.
    pub fn intervention_row(
        &self,
        i: usize,
        phi: &[f64],
        out: &mut [f64],
        mut argmin: Option<&mut [Harvest]>,
    ) {
        let cost = &self.cut_cost[i * self.nodes..(i + 1) * self.nodes];
        for j in 0..self.nodes {
            let hold = phi[j];
            let cut = self.shrunk(phi, j) + cost[j];
            let (best, choice) = if cut < hold {
                (cut, Harvest::Cut)
            } else {
                (hold, Harvest::Hold)
            };
            out[j] = best + self.observation_cost;
            if let Some(a) = argmin.as_deref_mut() {
                a[j] = choice;
            }
        }
    }
}

/// How auxiliary slots map to intensities and observation-time targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coupling {
    /// One slot per intensity, all relaxing toward `M Phi`.
    Flexible,
    /// Slot `2 r + y`: intensity `r`, committed harvest `y`, relaxing toward
    /// `Phi(i, (1 - y) x) + d + K(i, x, y)`.
    Inflexible,
}

impl Coupling {
    fn slots(self, intensities: usize) -> usize {
        match self {
            Coupling::Flexible => intensities,
            Coupling::Inflexible => 2 * intensities,
        }
    }

    fn targets(self) -> usize {
        match self {
            Coupling::Flexible => 1,
            Coupling::Inflexible => 2,
        }
    }

    #[inline]
    fn intensity_of(self, slot: usize) -> usize {
        match self {
            Coupling::Flexible => slot,
            Coupling::Inflexible => slot / 2,
        }
    }

    #[inline]
    fn target_of(self, slot: usize) -> usize {
        match self {
            Coupling::Flexible => 0,
            Coupling::Inflexible => slot % 2,
        }
    }
}

/// Convergence and invariant report of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    pub pseudo_time: f64,
    /// Final `max |dPsi| / dt`.
    pub residual: f64,
    /// Whether the residual dropped below the grid tolerance before the horizon.
    pub converged: bool,
    pub stability_number: f64,
    /// `h(1)/delta + d lambda_hi / delta`.
    pub bound: f64,
    /// Smallest and largest `Phi` seen over all steps.
    pub phi_min: f64,
    pub phi_max: f64,
    pub bound_held: bool,
    /// Largest decrease of the final `Phi` between neighbouring nodes.
    pub monotonicity_defect: f64,
    pub monotone: bool,
}

struct Marcher<'a> {
    grid: Grid,
    prep: Prepared,
    coupling: Coupling,
    intensities: &'a [f64],
    regimes: usize,
    slots: usize,
    psi: Vec<f64>,
    next: Vec<f64>,
    phi: Vec<f64>,
    target: Vec<f64>,
}

impl<'a> Marcher<'a> {
    fn new(
        problem: &'a Problem,
        grid: &Grid,
        coupling: Coupling,
        initial: Option<&SlotField>,
    ) -> Result<Self, SolverError> {
        problem.validate()?;
        grid.validate()?;
        let regimes = problem.regime_count();
        let nodes = grid.nodes;
        let slots = coupling.slots(problem.intensities.len());
        let psi = match initial {
            Some(f) => {
                if f.regimes != regimes || f.slots != slots || f.nodes != nodes {
                    return Err(SolverError::ShapeMismatch);
                }
                f.values.clone()
            }
            None => vec![0.0; regimes * slots * nodes],
        };
        let mut m = Self {
            grid: *grid,
            prep: Prepared::new(problem, nodes),
            coupling,
            intensities: &problem.intensities,
            regimes,
            slots,
            next: vec![0.0; psi.len()],
            psi,
            phi: vec![0.0; regimes * nodes],
            target: vec![0.0; regimes * coupling.targets() * nodes],
        };
        m.refresh_phi();
        Ok(m)
    }

    fn refresh_targets(&mut self) {
        let n = self.grid.nodes;
        let t = self.coupling.targets();
        for i in 0..self.regimes {
            let phi = &self.phi[i * n..(i + 1) * n];
            let out = &mut self.target[i * t * n..(i + 1) * t * n];
            match self.coupling {
                Coupling::Flexible => self.prep.intervention_row(i, phi, out, None),
                Coupling::Inflexible => {
                    let (hold, cut) = out.split_at_mut(n);
                    let cost = &self.prep.cut_cost[i * n..(i + 1) * n];
                    let d = self.prep.observation_cost;
                    for j in 0..n {
                        hold[j] = phi[j] + d;
                        cut[j] = self.prep.shrunk(phi, j) + d + cost[j];
                    }
                }
            }
        }
    }

    /// `Phi = min over slots of Psi`; returns the range of `Phi`.
    fn refresh_phi(&mut self) -> (f64, f64) {
        let n = self.grid.nodes;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (phi, psi) in self.phi.chunks_exact_mut(n).zip(self.psi.chunks_exact(self.slots * n)) {
            phi.copy_from_slice(&psi[..n]);
            for slot in psi.chunks_exact(n).skip(1) {
                for (p, &v) in phi.iter_mut().zip(slot) {
                    *p = if v < *p { v } else { *p };
                }
            }
            for &v in phi.iter() {
                lo = if v < lo { v } else { lo };
                hi = if v > hi { v } else { hi };
            }
        }
        (lo, hi)
    }

    /// One explicit step into `next`; returns `max |dPsi|`.
    fn advance(&mut self) -> Result<f64, (usize, usize)> {
        let chunk = self.slots * self.grid.nodes;
        let ctx = StepContext {
            prep: &self.prep,
            coupling: self.coupling,
            intensities: self.intensities,
            slots: self.slots,
            dt: self.grid.dt,
            eps: self.grid.weno_eps,
            psi: &self.psi,
            target: &self.target,
        };
        let results = update_all(&ctx, &mut self.next, chunk);
        let mut worst: f64 = 0.0;
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(d) => worst = worst.max(d),
                Err(node) => return Err((i, node)),
            }
        }
        core::mem::swap(&mut self.psi, &mut self.next);
        Ok(worst)
    }

    fn run(mut self, problem: &Problem) -> Result<(SlotField, ValueField, Diagnostics), SolverError> {
        let stability_number = self.grid.check_stability(problem)?;
        let bound = problem.value_bound();
        let (mut phi_min, mut phi_max) = (0.0f64, 0.0f64);
        for &v in &self.phi {
            phi_min = phi_min.min(v);
            phi_max = phi_max.max(v);
        }
        let total = self.grid.steps();
        let mut prev = f64::INFINITY;
        let mut rising = 0usize;
        let mut residual = f64::INFINITY;
        let mut steps = 0usize;
        let mut converged = false;
        while steps < total {
            self.refresh_targets();
            let change = self.advance().map_err(|(regime, node)| SolverError::NonFinite {
                step: steps + 1,
                regime,
                node,
            })?;
            steps += 1;
            let (lo, hi) = self.refresh_phi();
            phi_min = phi_min.min(lo);
            phi_max = phi_max.max(hi);
            residual = change / self.grid.dt;
            if residual > prev {
                rising += 1;
                if rising >= DIVERGENCE_WINDOW {
                    return Err(SolverError::Diverged {
                        step: steps,
                        residual,
                    });
                }
            } else {
                rising = 0;
            }
            prev = residual;
            if residual < self.grid.tolerance {
                converged = true;
                break;
            }
        }
        let n = self.grid.nodes;
        let value = ValueField::from_raw(self.regimes, n, self.phi);
        let slack = INVARIANT_TOLERANCE * bound.max(value.scale()).max(f64::MIN_POSITIVE);
        let monotonicity_defect = value.monotonicity_defect();
        let diagnostics = Diagnostics {
            steps,
            pseudo_time: steps as f64 * self.grid.dt,
            residual,
            converged,
            stability_number,
            bound,
            phi_min,
            phi_max,
            bound_held: phi_min >= -slack && phi_max <= bound + slack,
            monotonicity_defect,
            monotone: monotonicity_defect <= slack,
        };
        let aux = SlotField {
            regimes: self.regimes,
            slots: self.slots,
            nodes: n,
            values: self.psi,
        };
        Ok((aux, value, diagnostics))
    }
}

struct StepContext<'a> {
    prep: &'a Prepared,
    coupling: Coupling,
    intensities: &'a [f64],
    slots: usize,
    dt: f64,
    eps: f64,
    psi: &'a [f64],
    target: &'a [f64],
}

fn update_all(ctx: &StepContext<'_>, next: &mut [f64], chunk: usize) -> Vec<Result<f64, usize>> {
    #[cfg(feature = "parallel")]
    {
        if next.len() >= PARALLEL_THRESHOLD && rayon::current_num_threads() > 1 {
            use rayon::prelude::*;
            return next
                .par_chunks_mut(chunk)
                .enumerate()
                .map(|(i, out)| update_regime(ctx, i, out))
                .collect();
        }
    }
    next.chunks_mut(chunk)
        .enumerate()
        .map(|(i, out)| update_regime(ctx, i, out))
        .collect()
}

/// Forward-Euler update of every slot of regime `i`; `Err(node)` flags the
/// first non-finite result.
fn update_regime(ctx: &StepContext<'_>, i: usize, out: &mut [f64]) -> Result<f64, usize> {
    let prep = ctx.prep;
    let n = prep.nodes;
    let t = ctx.coupling.targets();
    let drift = &prep.drift[i * n..(i + 1) * n];
    let mut worst: f64 = 0.0;
    let mut finite = true;
    for s in 0..ctx.slots {
        let row = &ctx.psi[(i * ctx.slots + s) * n..(i * ctx.slots + s + 1) * n];
        let tgt_start = (i * t + ctx.coupling.target_of(s)) * n;
        let target = &ctx.target[tgt_start..tgt_start + n];
        let r = ctx.intensities[ctx.coupling.intensity_of(s)];
        let out_row = &mut out[s * n..(s + 1) * n];

        // inflow from the other regimes: sum_k w_ik Psi_k
        let other = |k: usize| &ctx.psi[(k * ctx.slots + s) * n..(k * ctx.slots + s + 1) * n];
        match prep.couplings[i].split_first() {
            None => out_row.fill(0.0),
            Some((&(k, w), rest)) => {
                for (o, &v) in out_row.iter_mut().zip(other(k)) {
                    *o = w * v;
                }
                for &(k, w) in rest {
                    for (o, &v) in out_row.iter_mut().zip(other(k)) {
                        *o += w * v;
                    }
                }
            }
        }

        let decay = prep.discount + prep.exit[i] + r;
        let mut node = |j: usize, u: f64, transport: f64, acc: f64| {
            let rhs = -decay * u + transport + acc + prep.running[j] + r * target[j];
            let new = u + ctx.dt * rhs;
            finite &= new.is_finite();
            worst = worst.max((new - u).abs());
            new
        };
        for j in [0, 1, n - 2, n - 1] {
            let ham = upwind_hamiltonian(row, j, drift[j], prep.inv_dx, ctx.eps);
            out_row[j] = node(j, row[j], -ham, out_row[j]);
        }
        // interior nodes: every stencil fits and the upwind side is fixed
        // along each run, so these loops are branch free
        let mut local: f64 = 0.0;
        for &(start, end, right) in &prep.runs[i] {
            let kernel = Kernel {
                decay,
                r,
                dt: ctx.dt,
                eps: ctx.eps,
                inv_dx: prep.inv_dx,
            };
            let span = start..end;
            let change = if right {
                kernel.run::<true>(row, span, drift, &prep.running, target, out_row)
            } else {
                kernel.run::<false>(row, span, drift, &prep.running, target, out_row)
            };
            local = local.max(change);
        }
        worst = worst.max(local);
        finite &= out_row.iter().all(|v| v.is_finite());
        if !finite {
            let node = out_row.iter().position(|v| !v.is_finite()).unwrap_or(0);
            return Err(node);
        }
    }
    Ok(worst)
}

struct Kernel {
    decay: f64,
    r: f64,
    dt: f64,
    eps: f64,
    inv_dx: f64,
}

impl Kernel {
    /// Euler update of `out[span]` (which holds the regime inflow on entry)
    /// using the right-biased WENO3 derivative when `RIGHT`, the left-biased
    /// one otherwise. Agrees with [`crate::weno`] up to rounding. Returns the
    /// largest absolute change.
    #[inline(always)]
    fn run<const RIGHT: bool>(
        &self,
        u: &[f64],
        span: core::ops::Range<usize>,
        drift: &[f64],
        running: &[f64],
        target: &[f64],
        out: &mut [f64],
    ) -> f64 {
        let (start, m) = (span.start, span.end - span.start);
        let (um2, um1, u0) = (&u[start - 2..][..m], &u[start - 1..][..m], &u[start..][..m]);
        let (up1, up2) = (&u[start + 1..][..m], &u[start + 2..][..m]);
        let (f, h, tg) = (&drift[start..][..m], &running[start..][..m], &target[start..][..m]);
        let o = &mut out[start..][..m];
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let dm1 = u0[k] - um1[k];
            let d0 = up1[k] - u0[k];
            let b = d0 - dm1;
            let (a, diff) = if RIGHT {
                let a = (up2[k] - up1[k]) - d0;
                (a, a - b)
            } else {
                let a = dm1 - (um1[k] - um2[k]);
                (a, b - a)
            };
            let sa = self.eps + a * a;
            let sb = self.eps + b * b;
            let w = sb * sb / (sb * sb + 2.0 * sa * sa);
            let p = 0.5 * (dm1 + d0) - 0.5 * w * diff;
            let rhs = -self.decay * u0[k] + f[k] * p * self.inv_dx + o[k] + h[k] + self.r * tg[k];
            let change = self.dt * rhs;
            o[k] = u0[k] + change;
            let c = change.abs();
            worst = if c > worst { c } else { worst };
        }
        worst
    }
}

/// Output of [`solve_flexible`].
#[derive(Debug, Clone)]
pub struct FlexibleSolution {
    pub value: ValueField,
    pub aux: AuxFieldFlexible,
    pub diagnostics: Diagnostics,
}

/// Output of [`solve_inflexible`].
#[derive(Debug, Clone)]
pub struct InflexibleSolution {
    pub value: ValueField,
    pub aux: AuxFieldInflexible,
    pub diagnostics: Diagnostics,
}

/// Marches the flexible system from `Psi = 0` to the horizon or to a
/// residual below the grid tolerance.
pub fn solve_flexible(problem: &Problem, grid: &Grid) -> Result<FlexibleSolution, SolverError> {
    solve_flexible_from(problem, grid, None)
}

/// Same as [`solve_flexible`] but starting from a given auxiliary field
/// (warm start).
pub fn solve_flexible_from(
    problem: &Problem,
    grid: &Grid,
    initial: Option<&AuxFieldFlexible>,
) -> Result<FlexibleSolution, SolverError> {
    let marcher = Marcher::new(problem, grid, Coupling::Flexible, initial.map(|a| &a.field))?;
    let (field, value, diagnostics) = marcher.run(problem)?;
    Ok(FlexibleSolution {
        value,
        aux: AuxFieldFlexible {
            intensities: problem.intensities.clone(),
            field,
        },
        diagnostics,
    })
}

pub fn solve_inflexible(problem: &Problem, grid: &Grid) -> Result<InflexibleSolution, SolverError> {
    solve_inflexible_from(problem, grid, None)
}

pub fn solve_inflexible_from(
    problem: &Problem,
    grid: &Grid,
    initial: Option<&AuxFieldInflexible>,
) -> Result<InflexibleSolution, SolverError> {
    let marcher = Marcher::new(problem, grid, Coupling::Inflexible, initial.map(|a| &a.field))?;
    let (field, value, diagnostics) = marcher.run(problem)?;
    Ok(InflexibleSolution {
        value,
        aux: AuxFieldInflexible {
            intensities: problem.intensities.clone(),
            field,
        },
        diagnostics,
    })
}

fn single_step(
    problem: &Problem,
    grid: &Grid,
    coupling: Coupling,
    psi: &SlotField,
    phi: &ValueField,
) -> Result<(SlotField, ValueField), SolverError> {
    grid.check_stability(problem)?;
    if phi.regimes() != psi.regimes || phi.nodes() != psi.nodes {
        return Err(SolverError::ShapeMismatch);
    }
    let mut m = Marcher::new(problem, grid, coupling, Some(psi))?;
    m.phi.copy_from_slice(phi.values());
    m.refresh_targets();
    m.advance()
        .map_err(|(regime, node)| SolverError::NonFinite {
            step: 1,
            regime,
            node,
        })?;
    m.refresh_phi();
    let field = SlotField {
        regimes: psi.regimes,
        slots: psi.slots,
        nodes: psi.nodes,
        values: m.psi,
    };
    Ok((field, ValueField::from_raw(phi.regimes(), phi.nodes(), m.phi)))
}

/// One forward-Euler pseudo-time step of the flexible system, with the
/// intervention operator frozen from the incoming `phi`.
pub fn step_flexible(
    psi: &AuxFieldFlexible,
    phi: &ValueField,
    problem: &Problem,
    grid: &Grid,
) -> Result<(AuxFieldFlexible, ValueField), SolverError> {
    let (field, value) = single_step(problem, grid, Coupling::Flexible, &psi.field, phi)?;
    Ok((
        AuxFieldFlexible {
            intensities: psi.intensities.clone(),
            field,
        },
        value,
    ))
}

/// One forward-Euler pseudo-time step of the inflexible system.
pub fn step_inflexible(
    psi: &AuxFieldInflexible,
    phi: &ValueField,
    problem: &Problem,
    grid: &Grid,
) -> Result<(AuxFieldInflexible, ValueField), SolverError> {
    let (field, value) = single_step(problem, grid, Coupling::Inflexible, &psi.field, phi)?;
    Ok((
        AuxFieldInflexible {
            intensities: psi.intensities.clone(),
            field,
        },
        value,
    ))
}
