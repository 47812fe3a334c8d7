//! Executes one configured run and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use obsharvest_core::closed_form::{
    closed_form_coefficients, reduced_numeric_config, ClosedFormError,
};
use obsharvest_core::regime::estimate_chain;
use obsharvest_core::sim::{
    estimate_performance, simulate_path, EventKind, FixedPolicy, FlexibleGridPolicy,
    InflexibleGridPolicy, Policy, SimConfig,
};
use obsharvest_core::solver::{
    extract_policy, solve_flexible, solve_flexible_from, solve_inflexible_from,
    voi, Diagnostics, FlexibleSolution, Grid, InflexibleSolution, PolicyField, SolverError,
    ValueField,
};
use obsharvest_core::{Harvest, ModelParams, Problem, RegimeChain};
use serde_json::{json, Value};

use crate::config::{set_model_key, ChainSource, Mode, RunConfig, SimPolicy};
use crate::io::{fmt_f64, parse_discharge_series, read_chain, render_chain_matrix, render_chain_meta, meta_path, Table};

/// A failed run, sorted by exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// Bad configuration or input data (exit 2).
    #[error("{0:#}")]
    Validation(anyhow::Error),
    /// The solver diverged or broke an invariant (exit 3).
    #[error("{0:#}")]
    Numerical(anyhow::Error),
    #[error("{0:#}")]
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 1,
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Diverged { .. }
            | SolverError::NonFinite { .. }
            | SolverError::NegativeVoi { .. } => Failure::Numerical(e.into()),
            _ => Failure::Validation(e.into()),
        }
    }
}

fn validation(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Validation(e.into())
}

fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

/// Where the run writes and how chatty it is.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub quiet: bool,
}

/// Summary returned to the caller; also the content of `manifest.json`.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: Value,
    pub files: Vec<PathBuf>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    hash: String,
    out: PathBuf,
    quiet: bool,
    solves: Vec<Value>,
    files: Vec<PathBuf>,
    extra: serde_json::Map<String, Value>,
}

impl Ctx<'_> {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_table(&mut self, name: &str, table: &Table) -> Result<(), Failure> {
        let p = self.path(name);
        table.write(&p).map_err(io)?;
        self.files.push(p);
        Ok(())
    }

    fn write_text(&mut self, path: PathBuf, text: &str) -> Result<(), Failure> {
        fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(io)?;
        self.files.push(path);
        Ok(())
    }

    fn record_solve(&mut self, label: &str, d: &Diagnostics, seconds: f64) {
        self.solves.push(json!({
            "label": label,
            "steps": d.steps,
            "pseudo_time": d.pseudo_time,
            "residual": d.residual,
            "converged": d.converged,
            "stability_number": d.stability_number,
            "bound": d.bound,
            "phi_min": d.phi_min,
            "phi_max": d.phi_max,
            "bound_held": d.bound_held,
            "monotonicity_defect": d.monotonicity_defect,
            "monotone": d.monotone,
            "wall_time_s": seconds,
        }));
        self.note(format!(
            "{label}: {} steps, residual {:e}{}, stability {:.4}, Phi in [{:.6}, {:.6}]",
            d.steps,
            d.residual,
            if d.converged { "" } else { " (horizon reached)" },
            d.stability_number,
            d.phi_min,
            d.phi_max
        ));
        if !d.bound_held || !d.monotone {
            self.note(format!(
                "warning: {label}: bound held = {}, monotone = {} (defect {:e})",
                d.bound_held, d.monotone, d.monotonicity_defect
            ));
        }
    }
}

/// Runs `cfg`, writing tables and `manifest.json` into `opts.out`.
pub fn execute(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport, Failure> {
    let started = chrono::Utc::now();
    let clock = Instant::now();
    fs::create_dir_all(&opts.out)
        .with_context(|| format!("creating {}", opts.out.display()))
        .map_err(io)?;
    let mut ctx = Ctx {
        cfg,
        hash: cfg.hash(),
        out: opts.out.clone(),
        quiet: opts.quiet,
        solves: Vec::new(),
        files: Vec::new(),
        extra: serde_json::Map::new(),
    };
    ctx.note(format!("{} (config {})", cfg.mode.name(), &ctx.hash[..12]));
    match cfg.mode {
        Mode::SolveFlexible => run_solve(&mut ctx, false)?,
        Mode::SolveInflexible => run_solve(&mut ctx, true)?,
        Mode::Voi => run_voi(&mut ctx)?,
        Mode::Simulate => run_simulate(&mut ctx)?,
        Mode::EstimateChain => run_estimate(&mut ctx)?,
        Mode::OracleCheck => run_oracle(&mut ctx)?,
        Mode::Sweep => run_sweep(&mut ctx)?,
    }
    let mut manifest = json!({
        "program": "obsharvest",
        "version": env!("CARGO_PKG_VERSION"),
        "mode": cfg.mode.name(),
        "config_hash": ctx.hash,
        "seed": cfg.seed,
        "config": cfg.to_toml(),
        "started_at": started.to_rfc3339(),
        "wall_time_s": clock.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
        "solves": ctx.solves,
        "files": ctx.files.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    if let Value::Object(m) = &mut manifest {
        m.extend(ctx.extra.clone());
    }
    let manifest_path = ctx.path("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(io)?;
    fs::write(&manifest_path, text + "\n")
        .with_context(|| format!("writing {}", manifest_path.display()))
        .map_err(io)?;
    ctx.note(format!("wrote {} files to {}", ctx.files.len() + 1, opts.out.display()));
    let mut files = ctx.files;
    files.push(manifest_path);
    Ok(RunReport { manifest, files })
}

// ---------------------------------------------------------------------------
// shared pieces

fn build_chain(source: &ChainSource) -> Result<RegimeChain, Failure> {
    match source {
        ChainSource::Synthetic(spec) => spec.build().map_err(validation),
        ChainSource::File(path) => read_chain(path).map_err(validation),
        ChainSource::Inline { discharges, rates } => {
            RegimeChain::from_rows(discharges.clone(), rates).map_err(validation)
        }
    }
}

fn build_problem(cfg: &RunConfig, params: &ModelParams) -> Result<Problem, Failure> {
    let source = cfg
        .chain
        .as_ref()
        .ok_or_else(|| validation(anyhow::anyhow!("missing required key `chain.source`")))?;
    let chain = build_chain(source)?;
    if params.flood_threshold >= chain.regime_count() {
        return Err(validation(anyhow::anyhow!(
            "invalid value for `model.flood_threshold`: {} but the chain has {} regimes",
            params.flood_threshold,
            chain.regime_count()
        )));
    }
    Problem::from_params(chain, params).map_err(validation)
}

fn grid(cfg: &RunConfig) -> Grid {
    cfg.grid.grid()
}

fn model_comment(p: &ModelParams) -> String {
    format!(
        "model mu={} a={} b={} eta={} delta={} d={} k0={} k1={} P={} L={} zbar={} lambda_lo={} lambda_hi={} m={}",
        fmt_f64(p.mu),
        fmt_f64(p.a),
        fmt_f64(p.b),
        fmt_f64(p.eta),
        fmt_f64(p.delta),
        fmt_f64(p.d),
        fmt_f64(p.k0),
        fmt_f64(p.k1),
        fmt_f64(p.penalty),
        p.flood_threshold,
        fmt_f64(p.zbar),
        fmt_f64(p.lambda_lo),
        fmt_f64(p.lambda_hi),
        fmt_f64(p.m)
    )
}

fn grid_comment(g: &Grid, problem: &Problem) -> String {
    format!(
        "grid N={} dx={} dt={} T={} tol_ss={} weno_eps={} regimes={} stability={}",
        g.nodes,
        fmt_f64(g.dx()),
        fmt_f64(g.dt),
        fmt_f64(g.horizon),
        fmt_f64(g.tolerance),
        fmt_f64(g.weno_eps),
        problem.regime_count(),
        fmt_f64(g.stability_number(problem))
    )
}

fn diag_comment(label: &str, d: &Diagnostics) -> String {
    format!(
        "{label} steps={} pseudo_time={} residual={} converged={} bound={} phi_min={} phi_max={} bound_held={} monotonicity_defect={} monotone={}",
        d.steps,
        fmt_f64(d.pseudo_time),
        fmt_f64(d.residual),
        d.converged,
        fmt_f64(d.bound),
        fmt_f64(d.phi_min),
        fmt_f64(d.phi_max),
        d.bound_held,
        fmt_f64(d.monotonicity_defect),
        d.monotone
    )
}

fn header(ctx: &Ctx, table: &mut Table, params: &ModelParams, problem: &Problem) {
    table.comment(model_comment(params));
    table.comment(grid_comment(&grid(ctx.cfg), problem));
}

fn flexible_table(
    ctx: &Ctx,
    params: &ModelParams,
    problem: &Problem,
    sol: &FlexibleSolution,
    policy: &PolicyField,
) -> Table {
    let g = grid(ctx.cfg);
    let mut t = Table::new(
        &ctx.hash,
        &["i", "x", "Phi", "Psi_lo", "Psi_hi", "zstar", "lamstar"],
    );
    header(ctx, &mut t, params, problem);
    t.comment(diag_comment("flexible", &sol.diagnostics));
    let hi = sol.aux.intensities().len() - 1;
    for i in 0..sol.value.regimes() {
        for j in 0..sol.value.nodes() {
            t.row(&[
                i.to_string(),
                fmt_f64(g.x(j)),
                fmt_f64(sol.value.get(i, j)),
                fmt_f64(sol.aux.get(i, j, 0)),
                fmt_f64(sol.aux.get(i, j, hi)),
                fmt_f64(policy.zstar(i, j)),
                fmt_f64(policy.lamstar(i, j)),
            ]);
        }
    }
    t
}

fn inflexible_table(
    ctx: &Ctx,
    params: &ModelParams,
    problem: &Problem,
    sol: &InflexibleSolution,
    policy: &PolicyField,
) -> Table {
    let g = grid(ctx.cfg);
    let mut t = Table::new(
        &ctx.hash,
        &[
            "i",
            "x",
            "Phi",
            "Psi_lo_hold",
            "Psi_lo_cut",
            "Psi_hi_hold",
            "Psi_hi_cut",
            "zstar",
            "lamstar",
        ],
    );
    header(ctx, &mut t, params, problem);
    t.comment(diag_comment("inflexible", &sol.diagnostics));
    let hi = sol.aux.intensities().len() - 1;
    for i in 0..sol.value.regimes() {
        for j in 0..sol.value.nodes() {
            t.row(&[
                i.to_string(),
                fmt_f64(g.x(j)),
                fmt_f64(sol.value.get(i, j)),
                fmt_f64(sol.aux.get(i, j, 0, Harvest::Hold)),
                fmt_f64(sol.aux.get(i, j, 0, Harvest::Cut)),
                fmt_f64(sol.aux.get(i, j, hi, Harvest::Hold)),
                fmt_f64(sol.aux.get(i, j, hi, Harvest::Cut)),
                fmt_f64(policy.zstar(i, j)),
                fmt_f64(policy.lamstar(i, j)),
            ]);
        }
    }
    t
}

fn voi_table(ctx: &Ctx, params: &ModelParams, problem: &Problem, v: &ValueField) -> Table {
    let g = grid(ctx.cfg);
    let mut t = Table::new(&ctx.hash, &["i", "x", "V"]);
    header(ctx, &mut t, params, problem);
    for i in 0..v.regimes() {
        for j in 0..v.nodes() {
            t.row(&[i.to_string(), fmt_f64(g.x(j)), fmt_f64(v.get(i, j))]);
        }
    }
    t
}

fn flexible(
    ctx: &mut Ctx,
    label: &str,
    problem: &Problem,
    warm: Option<&FlexibleSolution>,
) -> Result<FlexibleSolution, Failure> {
    let clock = Instant::now();
    let sol = solve_flexible_from(problem, &grid(ctx.cfg), warm.map(|s| &s.aux))?;
    ctx.record_solve(label, &sol.diagnostics, clock.elapsed().as_secs_f64());
    Ok(sol)
}

fn inflexible(
    ctx: &mut Ctx,
    label: &str,
    problem: &Problem,
    warm: Option<&InflexibleSolution>,
) -> Result<InflexibleSolution, Failure> {
    let clock = Instant::now();
    let sol = solve_inflexible_from(problem, &grid(ctx.cfg), warm.map(|s| &s.aux))?;
    ctx.record_solve(label, &sol.diagnostics, clock.elapsed().as_secs_f64());
    Ok(sol)
}

// ---------------------------------------------------------------------------
// modes

fn run_solve(ctx: &mut Ctx, inflex: bool) -> Result<(), Failure> {
    let params = ctx.cfg.model.clone();
    let problem = build_problem(ctx.cfg, &params)?;
    ctx.extra.insert(
        "stability_number".into(),
        json!(grid(ctx.cfg).stability_number(&problem)),
    );
    if inflex {
        let sol = inflexible(ctx, "inflexible", &problem, None)?;
        let pol = extract_policy(&sol.aux, &sol.value, &problem)?;
        let t = inflexible_table(ctx, &params, &problem, &sol, &pol);
        ctx.write_table("solution_inflexible.csv", &t)
    } else {
        let sol = flexible(ctx, "flexible", &problem, None)?;
        let pol = extract_policy(&sol.aux, &sol.value, &problem)?;
        let t = flexible_table(ctx, &params, &problem, &sol, &pol);
        ctx.write_table("solution_flexible.csv", &t)
    }
}

/// Both solves and their VOI for one parameter set.
fn voi_point(
    ctx: &mut Ctx,
    params: &ModelParams,
    suffix: &str,
    warm: Option<&(FlexibleSolution, InflexibleSolution)>,
) -> Result<(FlexibleSolution, InflexibleSolution, ValueField), Failure> {
    let problem = build_problem(ctx.cfg, params)?;
    let f = flexible(ctx, &format!("flexible{suffix}"), &problem, warm.map(|w| &w.0))?;
    let g = inflexible(ctx, &format!("inflexible{suffix}"), &problem, warm.map(|w| &w.1))?;
    let v = voi(&g.value, &f.value)?;
    let pf = extract_policy(&f.aux, &f.value, &problem)?;
    let pg = extract_policy(&g.aux, &g.value, &problem)?;
    let t = flexible_table(ctx, params, &problem, &f, &pf);
    ctx.write_table(&format!("solution_flexible{suffix}.csv"), &t)?;
    let t = inflexible_table(ctx, params, &problem, &g, &pg);
    ctx.write_table(&format!("solution_inflexible{suffix}.csv"), &t)?;
    let t = voi_table(ctx, params, &problem, &v);
    ctx.write_table(&format!("voi{suffix}.csv"), &t)?;
    Ok((f, g, v))
}

fn run_voi(ctx: &mut Ctx) -> Result<(), Failure> {
    let params = ctx.cfg.model.clone();
    let (_, _, v) = voi_point(ctx, &params, "", None)?;
    let max = v.values().iter().cloned().fold(0.0, f64::max);
    ctx.note(format!("max VOI {max:e}"));
    ctx.extra.insert("voi_max".into(), json!(max));
    Ok(())
}

fn run_sweep(ctx: &mut Ctx) -> Result<(), Failure> {
    let sweep = ctx.cfg.sweep.clone().expect("checked at load");
    let axis = sweep.axis.strip_prefix("model.").unwrap_or(&sweep.axis).to_string();
    let g = grid(ctx.cfg);
    let mut curves: Vec<(String, Vec<f64>)> = Vec::new();
    let mut warm_voi: Option<(FlexibleSolution, InflexibleSolution)> = None;
    let mut warm_f: Option<FlexibleSolution> = None;
    let mut warm_i: Option<InflexibleSolution> = None;
    let mut regions = Vec::new();
    for &value in &sweep.values {
        let mut params = ctx.cfg.model.clone();
        set_model_key(&mut params, &sweep.axis, value).map_err(validation)?;
        params.validate().map_err(validation)?;
        let tag = fmt_f64(value);
        let suffix = format!("_{axis}_{tag}");
        ctx.note(format!("sweep {axis} = {tag}"));
        match sweep.mode {
            Mode::Voi => {
                let (f, i, v) = voi_point(ctx, &params, &suffix, warm_voi.as_ref())?;
                curves.push((format!("V_{axis}_{tag}"), v.row(0).to_vec()));
                warm_voi = Some((f, i));
            }
            Mode::SolveFlexible => {
                let problem = build_problem(ctx.cfg, &params)?;
                let sol = flexible(ctx, &format!("flexible{suffix}"), &problem, warm_f.as_ref())?;
                let pol = extract_policy(&sol.aux, &sol.value, &problem)?;
                regions.push(json!({"value": value, "harvest_nodes": pol.harvest_count()}));
                let t = flexible_table(ctx, &params, &problem, &sol, &pol);
                ctx.write_table(&format!("solution_flexible{suffix}.csv"), &t)?;
                warm_f = Some(sol);
            }
            Mode::SolveInflexible => {
                let problem = build_problem(ctx.cfg, &params)?;
                let sol =
                    inflexible(ctx, &format!("inflexible{suffix}"), &problem, warm_i.as_ref())?;
                let pol = extract_policy(&sol.aux, &sol.value, &problem)?;
                regions.push(json!({"value": value, "harvest_nodes": pol.harvest_count()}));
                let t = inflexible_table(ctx, &params, &problem, &sol, &pol);
                ctx.write_table(&format!("solution_inflexible{suffix}.csv"), &t)?;
                warm_i = Some(sol);
            }
            _ => unreachable!("sweep mode checked at load"),
        }
    }
    if !curves.is_empty() {
        let mut cols = vec!["x".to_string()];
        cols.extend(curves.iter().map(|(name, _)| name.clone()));
        let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut t = Table::new(&ctx.hash, &col_refs);
        t.comment(format!("value of information in regime 0 across {axis}"));
        for j in 0..g.nodes {
            let mut row = vec![fmt_f64(g.x(j))];
            row.extend(curves.iter().map(|(_, c)| fmt_f64(c[j])));
            t.row(&row);
        }
        ctx.write_table(&format!("voi_regime0_{axis}.csv"), &t)?;
    }
    if !regions.is_empty() {
        ctx.extra.insert("harvest_region_sizes".into(), Value::Array(regions));
    }
    Ok(())
}

fn run_simulate(ctx: &mut Ctx) -> Result<(), Failure> {
    let sim = ctx.cfg.sim.clone().expect("checked at load");
    let params = ctx.cfg.model.clone();
    let problem = build_problem(ctx.cfg, &params)?;
    let mut solved_f = None;
    let mut solved_i = None;
    match sim.policy {
        SimPolicy::Flexible => solved_f = Some(flexible(ctx, "flexible", &problem, None)?),
        SimPolicy::Inflexible => solved_i = Some(inflexible(ctx, "inflexible", &problem, None)?),
        SimPolicy::Fixed => {}
    }
    let fixed = FixedPolicy {
        harvest: if sim.fixed_harvest { Harvest::Cut } else { Harvest::Hold },
        intensity: sim.fixed_intensity.unwrap_or(problem.lowest_intensity()),
    };
    let policy: Box<dyn PolicySync + '_> = match (&solved_f, &solved_i) {
        (Some(f), _) => Box::new(FlexibleGridPolicy {
            problem: &problem,
            value: &f.value,
            aux: &f.aux,
        }),
        (_, Some(i)) => Box::new(InflexibleGridPolicy {
            problem: &problem,
            aux: &i.aux,
        }),
        _ => Box::new(fixed),
    };
    let value_at = |i: usize, x: f64| -> Option<f64> {
        solved_f
            .as_ref()
            .map(|f| f.value.interp(i, x))
            .or_else(|| solved_i.as_ref().map(|s| s.value.interp(i, x)))
    };
    let mut t = Table::new(
        &ctx.hash,
        &[
            "policy",
            "regime",
            "x0",
            "paths",
            "mean",
            "standard_error",
            "disutility",
            "observation",
            "harvest",
            "Phi",
            "truncation_bound",
        ],
    );
    t.comment(model_comment(&params));
    let mut events = Table::new(
        &ctx.hash,
        &["path", "t", "kind", "regime", "X_before", "X_after", "z", "lambda_next"],
    );
    for (k, &(i, x)) in sim.starts.iter().enumerate() {
        let mut sc = SimConfig::new(&problem, i, x, sim.paths, ctx.cfg.seed);
        if let Some(h) = sim.horizon {
            sc.horizon = h;
        }
        let est = estimate_performance(&problem, policy.as_ref(), &sc).map_err(validation)?;
        let phi = value_at(i, x);
        ctx.note(format!(
            "start ({i}, {x}): mean {:.6} +- {:.2e}{}",
            est.mean,
            est.standard_error,
            phi.map(|p| format!(", Phi {p:.6}")).unwrap_or_default()
        ));
        t.row(&[
            sim.policy.name().to_string(),
            i.to_string(),
            fmt_f64(x),
            est.paths.to_string(),
            fmt_f64(est.mean),
            fmt_f64(est.standard_error),
            fmt_f64(est.disutility),
            fmt_f64(est.observation),
            fmt_f64(est.harvest),
            phi.map(fmt_f64).unwrap_or_default(),
            fmt_f64(sc.truncation_bound(&problem)),
        ]);
        if k == 0 {
            for path in 0..sim.event_log.min(sim.paths) {
                let out = simulate_path(&problem, policy.as_ref(), &sc, path as u64, true);
                for e in &out.events {
                    events.row(&[
                        path.to_string(),
                        fmt_f64(e.t),
                        match e.kind {
                            EventKind::Switch => "switch",
                            EventKind::Observation => "obs",
                        }
                        .to_string(),
                        e.regime.to_string(),
                        fmt_f64(e.x_before),
                        fmt_f64(e.x_after),
                        fmt_f64(e.z),
                        fmt_f64(e.lambda_next),
                    ]);
                }
            }
        }
    }
    ctx.write_table("estimate.csv", &t)?;
    if sim.event_log > 0 {
        ctx.write_table("events.csv", &events)?;
    }
    Ok(())
}

/// Object-safe `Policy + Sync`.
trait PolicySync: Policy + Sync {}
impl<T: Policy + Sync> PolicySync for T {}

fn run_estimate(ctx: &mut Ctx) -> Result<(), Failure> {
    let e = ctx.cfg.estimate.clone().expect("checked at load");
    let text = fs::read_to_string(&e.input)
        .with_context(|| format!("reading {}", e.input.display()))
        .map_err(validation)?;
    let series = parse_discharge_series(&text, e.interval).map_err(validation)?;
    let levels = RegimeChain::uniform_levels(e.count, e.q0, e.dq);
    let est = estimate_chain(&series, &levels).map_err(validation)?;
    ctx.note(format!(
        "{} records, {} counted pairs, entropy {:.6}",
        series.len(),
        est.pairs,
        est.entropy
    ));
    let unvisited = est.visited.iter().filter(|v| !**v).count();
    if unvisited > 0 {
        ctx.note(format!("warning: {unvisited} regimes have no outgoing transitions"));
    }
    let chain_path = ctx.path("chain.txt");
    ctx.write_text(chain_path.clone(), &render_chain_matrix(&ctx.hash, &est))?;
    let meta = render_chain_meta(&ctx.hash, &est, e.q0, e.dq);
    ctx.write_text(meta_path(&chain_path), &meta)?;
    ctx.extra.insert("entropy".into(), json!(est.entropy));
    ctx.extra.insert("pairs".into(), json!(est.pairs));
    Ok(())
}

/// Largest relative deviation of `Phi(i, x) / x` from the exact slope over
/// `x` in `[0.05, 0.5]`, for each regime.
pub fn oracle_errors(value: &ValueField, grid: &Grid, slopes: [f64; 2]) -> [f64; 2] {
    let mut err = [0.0f64; 2];
    for (i, e) in err.iter_mut().enumerate() {
        for j in 0..grid.nodes {
            let x = grid.x(j);
            if (0.05 - 1e-12..=0.5 + 1e-12).contains(&x) {
                let rel = (value.get(i, j) / x - slopes[i]).abs() / slopes[i].abs();
                *e = e.max(rel);
            }
        }
    }
    err
}

fn run_oracle(ctx: &mut Ctx) -> Result<(), Failure> {
    let o = ctx.cfg.oracle.clone().expect("checked at load");
    let closed = closed_form_coefficients(&o.params).map_err(closed_form_failure)?;
    let c = &closed.conditions;
    ctx.note(format!(
        "C0 = {:.10}, C1 = {:.10}, L = {:.6}, pattern valid = {}, min P = {:.6}",
        closed.c0, closed.c1, closed.determinant, closed.pattern_valid, c.min_penalty
    ));
    let mut t = Table::new(
        &ctx.hash,
        &["N", "dt", "err_regime0", "err_regime1", "max_err", "residual", "converged"],
    );
    let p = &o.params;
    t.comment(format!(
        "reduced f0={} f1={} w01={} w10={} delta={} r={} zbar={} K={} P={}",
        fmt_f64(p.f0),
        fmt_f64(p.f1),
        fmt_f64(p.w01),
        fmt_f64(p.w10),
        fmt_f64(p.delta),
        fmt_f64(p.r),
        fmt_f64(p.zbar),
        fmt_f64(p.k),
        fmt_f64(p.penalty)
    ));
    t.comment(format!(
        "exact C0={} C1={} L={} provenance={:?} pattern_valid={} C0>K={} C1<=PK={} C0<=PK={} cost_condition={} min_P={}",
        fmt_f64(closed.c0),
        fmt_f64(closed.c1),
        fmt_f64(closed.determinant),
        closed.provenance,
        closed.pattern_valid,
        c.c0_above_k,
        c.c1_within_pk,
        c.c0_within_pk,
        c.cost_condition,
        fmt_f64(c.min_penalty)
    ));
    t.comment(format!(
        "relative error of Phi(i,x)/x against C_i over x in [0.05, 0.5]; check at N={} with tolerance {}",
        o.check_nodes,
        fmt_f64(o.tolerance)
    ));
    if !closed.pattern_valid {
        return Err(validation(ClosedFormError::InfeasiblePattern));
    }
    let mut rows = Vec::new();
    for &n in &o.nodes {
        let (problem, mut g) = reduced_numeric_config(p, n).map_err(closed_form_failure)?;
        g.tolerance = ctx.cfg.grid.tol_ss;
        let clock = Instant::now();
        let sol = solve_flexible(&problem, &g)?;
        ctx.record_solve(&format!("oracle N={n}"), &sol.diagnostics, clock.elapsed().as_secs_f64());
        let err = oracle_errors(&sol.value, &g, [closed.c0, closed.c1]);
        let max = err[0].max(err[1]);
        ctx.note(format!("N = {n}: max relative error {max:e}"));
        t.row(&[
            n.to_string(),
            fmt_f64(g.dt),
            fmt_f64(err[0]),
            fmt_f64(err[1]),
            fmt_f64(max),
            fmt_f64(sol.diagnostics.residual),
            sol.diagnostics.converged.to_string(),
        ]);
        rows.push((n, max));
    }
    let checked = rows.iter().find(|(n, _)| *n == o.check_nodes).map(|r| r.1);
    let within = checked.is_some_and(|e| e <= o.tolerance);
    let decreasing = rows.windows(2).all(|w| w[1].1 < w[0].1);
    ctx.write_table("oracle.csv", &t)?;
    ctx.extra.insert(
        "oracle".into(),
        json!({
            "c0": closed.c0,
            "c1": closed.c1,
            "determinant": closed.determinant,
            "pattern_valid": closed.pattern_valid,
            "min_penalty": c.min_penalty,
            "errors": rows.iter().map(|(n, e)| json!({"N": n, "max_relative_error": e})).collect::<Vec<_>>(),
            "check_nodes": o.check_nodes,
            "tolerance": o.tolerance,
            "within_tolerance": within,
            "decreasing_under_refinement": decreasing,
        }),
    );
    ctx.note(format!(
        "oracle: error at N = {} {} tolerance {}; decreasing under refinement: {decreasing}",
        o.check_nodes,
        if within { "within" } else { "OUTSIDE" },
        o.tolerance
    ));
    Ok(())
}

fn closed_form_failure(e: ClosedFormError) -> Failure {
    match e {
        ClosedFormError::Solver(s) => s.into(),
        other => validation(other),
    }
}

/// Resolves the output directory: flag, then config, then `./out`.
pub fn output_dir(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}
