//! Run configuration: flat dotted-key TOML (`model.delta = 0.2`) or the same
//! structure as JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use obsharvest_core::closed_form::ReducedParams;
use obsharvest_core::regime::SyntheticChainSpec;
use obsharvest_core::solver::Grid;
use obsharvest_core::ModelParams;
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SolveFlexible,
    SolveInflexible,
    Voi,
    Simulate,
    EstimateChain,
    OracleCheck,
    Sweep,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::SolveFlexible,
        Mode::SolveInflexible,
        Mode::Voi,
        Mode::Simulate,
        Mode::EstimateChain,
        Mode::OracleCheck,
        Mode::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::SolveFlexible => "solve-flexible",
            Mode::SolveInflexible => "solve-inflexible",
            Mode::Voi => "voi",
            Mode::Simulate => "simulate",
            Mode::EstimateChain => "estimate-chain",
            Mode::OracleCheck => "oracle-check",
            Mode::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }

    fn needs_chain(self) -> bool {
        !matches!(self, Mode::EstimateChain | Mode::OracleCheck)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainSource {
    Synthetic(SyntheticChainSpec),
    /// Rate matrix written by `estimate-chain`, with its `.meta` sidecar.
    File(PathBuf),
    Inline {
        discharges: Vec<f64>,
        rates: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub nodes: usize,
    pub dt: f64,
    pub horizon: f64,
    pub tol_ss: f64,
    pub weno_eps: f64,
}

impl GridConfig {
    pub fn reference() -> Self {
        let g = Grid::reference();
        Self {
            nodes: g.nodes,
            dt: g.dt,
            horizon: g.horizon,
            tol_ss: g.tolerance,
            weno_eps: g.weno_eps,
        }
    }

    pub fn grid(&self) -> Grid {
        Grid {
            nodes: self.nodes,
            dt: self.dt,
            horizon: self.horizon,
            tolerance: self.tol_ss,
            weno_eps: self.weno_eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimPolicy {
    Flexible,
    Inflexible,
    /// Same harvest and intensity at every observation.
    Fixed,
}

impl SimPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SimPolicy::Flexible => "flexible",
            SimPolicy::Inflexible => "inflexible",
            SimPolicy::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub policy: SimPolicy,
    pub paths: usize,
    /// `(regime, x)` start points.
    pub starts: Vec<(usize, f64)>,
    /// Truncation horizon in days; derived from `delta` when absent.
    pub horizon: Option<f64>,
    /// Number of paths of the first start point written to the event log.
    pub event_log: usize,
    pub fixed_harvest: bool,
    pub fixed_intensity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSettings {
    pub input: PathBuf,
    pub count: usize,
    pub q0: f64,
    pub dq: f64,
    /// Nominal sample spacing in days.
    pub interval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub params: ReducedParams,
    pub nodes: Vec<usize>,
    /// Grid size at which the relative error is checked against `tolerance`.
    pub check_nodes: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// A numeric `model.*` key.
    pub axis: String,
    pub values: Vec<f64>,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub model: ModelParams,
    pub chain: Option<ChainSource>,
    pub grid: GridConfig,
    pub sim: Option<SimSettings>,
    pub estimate: Option<EstimateSettings>,
    pub oracle: Option<OracleSettings>,
    pub sweep: Option<SweepSettings>,
}

/// Reference parameter set on the 41-level synthetic chain and the reference grid.
pub fn default_config() -> RunConfig {
    RunConfig {
        mode: Mode::SolveFlexible,
        seed: 42,
        output: None,
        model: ModelParams::reference(),
        chain: Some(ChainSource::Synthetic(SyntheticChainSpec::reference())),
        grid: GridConfig::reference(),
        sim: None,
        estimate: None,
        oracle: None,
        sweep: None,
    }
}

// ---------------------------------------------------------------------------
// raw (all-optional) layer

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    mode: Option<String>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    model: Option<RawModel>,
    chain: Option<RawChain>,
    grid: Option<RawGrid>,
    sim: Option<RawSim>,
    estimate: Option<RawEstimate>,
    oracle: Option<RawOracle>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    mu: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    eta: Option<f64>,
    delta: Option<f64>,
    d: Option<f64>,
    k0: Option<f64>,
    k1: Option<f64>,
    #[serde(alias = "P")]
    penalty: Option<f64>,
    #[serde(alias = "L")]
    flood_threshold: Option<usize>,
    zbar: Option<f64>,
    lambda_hi: Option<f64>,
    lambda_lo: Option<f64>,
    m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    source: Option<String>,
    preset: Option<String>,
    count: Option<usize>,
    q0: Option<f64>,
    dq: Option<f64>,
    up: Option<f64>,
    down: Option<f64>,
    flood_rate: Option<f64>,
    flood_discharge: Option<f64>,
    path: Option<PathBuf>,
    discharges: Option<Vec<f64>>,
    rates: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "N")]
    nodes: Option<usize>,
    dt: Option<f64>,
    #[serde(rename = "T")]
    horizon: Option<f64>,
    tol_ss: Option<f64>,
    weno_eps: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    policy: Option<String>,
    paths: Option<usize>,
    starts: Option<Vec<(usize, f64)>>,
    horizon: Option<f64>,
    event_log: Option<usize>,
    fixed_harvest: Option<bool>,
    fixed_intensity: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimate {
    input: Option<PathBuf>,
    count: Option<usize>,
    q0: Option<f64>,
    dq: Option<f64>,
    interval: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    preset: Option<String>,
    f0: Option<f64>,
    f1: Option<f64>,
    w01: Option<f64>,
    w10: Option<f64>,
    delta: Option<f64>,
    r: Option<f64>,
    zbar: Option<f64>,
    k: Option<f64>,
    penalty: Option<f64>,
    nodes: Option<Vec<usize>>,
    check_nodes: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<String>,
    values: Option<Vec<f64>>,
    mode: Option<String>,
}

fn need<T>(v: Option<T>, key: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::Missing(key.to_string()))
}

// ---------------------------------------------------------------------------
// parsing

/// Reads a `.toml` or `.json` config. Relative paths inside it are resolved
/// against the file's directory.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let raw = if is_json {
        parse_json(&text)
    } else {
        parse_toml(&text)
    }
    .map_err(|message| ConfigError::Parse {
        path: path.to_path_buf(),
        message,
    })?;
    let mut cfg = resolve(raw)?;
    if let Some(dir) = path.parent() {
        cfg.rebase(dir);
    }
    Ok(cfg)
}

pub fn from_toml_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw = parse_toml(text).map_err(|message| ConfigError::Parse {
        path: PathBuf::from("<string>"),
        message,
    })?;
    resolve(raw)
}

pub fn from_json_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw = parse_json(text).map_err(|message| ConfigError::Parse {
        path: PathBuf::from("<string>"),
        message,
    })?;
    resolve(raw)
}

fn parse_toml(text: &str) -> Result<Raw, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

fn parse_json(text: &str) -> Result<Raw, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    serde_json::from_value(expand_dotted(value)?).map_err(|e| e.to_string())
}

/// `{"model.delta": 0.2}` -> `{"model": {"delta": 0.2}}`, so both nested
/// and flat JSON work.
fn expand_dotted(value: serde_json::Value) -> Result<serde_json::Value, String> {
    use serde_json::{Map, Value};
    let Value::Object(map) = value else {
        return Err("top level must be an object".into());
    };
    let mut out = Map::new();
    for (key, v) in map {
        let v = if v.is_object() { expand_dotted(v)? } else { v };
        let mut parts = key.split('.').collect::<Vec<_>>();
        let last = parts.pop().unwrap_or_default();
        let mut slot = &mut out;
        for p in parts {
            let entry = slot
                .entry(p.to_string())
                .or_insert_with(|| Value::Object(Map::new()));
            slot = entry
                .as_object_mut()
                .ok_or_else(|| format!("key `{key}` conflicts with a scalar `{p}`"))?;
        }
        match (slot.get_mut(last), v) {
            (Some(Value::Object(existing)), Value::Object(more)) => existing.extend(more),
            (Some(_), _) => return Err(format!("duplicate key `{key}`")),
            (None, v) => {
                slot.insert(last.to_string(), v);
            }
        }
    }
    Ok(Value::Object(out))
}

fn resolve(raw: Raw) -> Result<RunConfig, ConfigError> {
    let mode_name = need(raw.mode, "mode")?;
    let mode = Mode::parse(&mode_name).ok_or_else(|| {
        let names: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
        invalid("mode", format!("`{mode_name}` is not one of {}", names.join(", ")))
    })?;
    let model = resolve_model(raw.model.unwrap_or_default())?;
    let chain = match raw.chain {
        Some(c) => Some(resolve_chain(c)?),
        None if mode.needs_chain() => return Err(ConfigError::Missing("chain.source".into())),
        None => None,
    };
    let grid = resolve_grid(raw.grid.unwrap_or_default())?;
    let sim = raw.sim.map(resolve_sim).transpose()?;
    let estimate = raw.estimate.map(resolve_estimate).transpose()?;
    let oracle = raw.oracle.map(resolve_oracle).transpose()?;
    let sweep = raw.sweep.map(resolve_sweep).transpose()?;
    let cfg = RunConfig {
        mode,
        seed: raw.seed.unwrap_or(0),
        output: raw.output,
        model,
        chain,
        grid,
        sim,
        estimate,
        oracle,
        sweep,
    };
    cfg.check_mode_sections()?;
    Ok(cfg)
}

fn resolve_model(m: RawModel) -> Result<ModelParams, ConfigError> {
    let p = ModelParams {
        mu: need(m.mu, "model.mu")?,
        a: need(m.a, "model.a")?,
        b: need(m.b, "model.b")?,
        eta: need(m.eta, "model.eta")?,
        delta: need(m.delta, "model.delta")?,
        d: need(m.d, "model.d")?,
        k0: need(m.k0, "model.k0")?,
        k1: need(m.k1, "model.k1")?,
        penalty: need(m.penalty, "model.penalty")?,
        flood_threshold: need(m.flood_threshold, "model.flood_threshold")?,
        zbar: need(m.zbar, "model.zbar")?,
        lambda_hi: need(m.lambda_hi, "model.lambda_hi")?,
        lambda_lo: need(m.lambda_lo, "model.lambda_lo")?,
        m: need(m.m, "model.m")?,
    };
    p.validate().map_err(|e| match e {
        obsharvest_core::ModelError::InvalidParameter { name, value } => {
            invalid(&format!("model.{name}"), format!("{value} is out of range"))
        }
        other => invalid("model", other.to_string()),
    })?;
    Ok(p)
}

fn resolve_chain(c: RawChain) -> Result<ChainSource, ConfigError> {
    let source = need(c.source, "chain.source")?;
    match source.as_str() {
        "synthetic" => {
            let base = match c.preset.as_deref() {
                None | Some("reference") => SyntheticChainSpec::reference(),
                Some("coarse") => SyntheticChainSpec::coarse(),
                Some(other) => {
                    return Err(invalid(
                        "chain.preset",
                        format!("`{other}` is not one of reference, coarse"),
                    ))
                }
            };
            let spec = SyntheticChainSpec {
                count: c.count.unwrap_or(base.count),
                q0: c.q0.unwrap_or(base.q0),
                dq: c.dq.unwrap_or(base.dq),
                up: c.up.unwrap_or(base.up),
                down: c.down.unwrap_or(base.down),
                flood_rate: c.flood_rate.unwrap_or(base.flood_rate),
                flood_discharge: c.flood_discharge.unwrap_or(base.flood_discharge),
            };
            if spec.count < 1 {
                return Err(invalid("chain.count", "must be at least 1"));
            }
            for (key, v) in [
                ("chain.dq", spec.dq),
                ("chain.up", spec.up),
                ("chain.down", spec.down),
                ("chain.flood_rate", spec.flood_rate),
            ] {
                if !(v >= 0.0 && v.is_finite()) || (key == "chain.dq" && v <= 0.0) {
                    return Err(invalid(key, format!("{v} is out of range")));
                }
            }
            Ok(ChainSource::Synthetic(spec))
        }
        "file" => Ok(ChainSource::File(need(c.path, "chain.path")?)),
        "inline" => {
            let discharges = need(c.discharges, "chain.discharges")?;
            let rates = need(c.rates, "chain.rates")?;
            if rates.len() != discharges.len() {
                return Err(invalid(
                    "chain.rates",
                    format!("{} rows for {} discharges", rates.len(), discharges.len()),
                ));
            }
            Ok(ChainSource::Inline { discharges, rates })
        }
        other => Err(invalid(
            "chain.source",
            format!("`{other}` is not one of synthetic, file, inline"),
        )),
    }
}

fn resolve_grid(g: RawGrid) -> Result<GridConfig, ConfigError> {
    let d = GridConfig::reference();
    let grid = GridConfig {
        nodes: g.nodes.unwrap_or(d.nodes),
        dt: g.dt.unwrap_or(d.dt),
        horizon: g.horizon.unwrap_or(d.horizon),
        tol_ss: g.tol_ss.unwrap_or(d.tol_ss),
        weno_eps: g.weno_eps.unwrap_or(d.weno_eps),
    };
    grid.grid().validate().map_err(|e| invalid("grid", e.to_string()))?;
    Ok(grid)
}

fn resolve_sim(s: RawSim) -> Result<SimSettings, ConfigError> {
    let policy = match s.policy.as_deref() {
        None | Some("flexible") => SimPolicy::Flexible,
        Some("inflexible") => SimPolicy::Inflexible,
        Some("fixed") => SimPolicy::Fixed,
        Some(other) => {
            return Err(invalid(
                "sim.policy",
                format!("`{other}` is not one of flexible, inflexible, fixed"),
            ))
        }
    };
    let paths = s.paths.unwrap_or(100_000);
    if paths == 0 {
        return Err(invalid("sim.paths", "must be positive"));
    }
    let starts = need(s.starts, "sim.starts")?;
    if starts.is_empty() {
        return Err(invalid("sim.starts", "needs at least one [regime, x] pair"));
    }
    if let Some(&(_, x)) = starts.iter().find(|(_, x)| !(0.0..=1.0).contains(x)) {
        return Err(invalid("sim.starts", format!("x = {x} is outside [0, 1]")));
    }
    if let Some(h) = s.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid("sim.horizon", format!("{h} is out of range")));
        }
    }
    if policy == SimPolicy::Fixed && s.fixed_intensity.is_none() {
        return Err(ConfigError::Missing("sim.fixed_intensity".into()));
    }
    Ok(SimSettings {
        policy,
        paths,
        starts,
        horizon: s.horizon,
        event_log: s.event_log.unwrap_or(0),
        fixed_harvest: s.fixed_harvest.unwrap_or(false),
        fixed_intensity: s.fixed_intensity,
    })
}

fn resolve_estimate(e: RawEstimate) -> Result<EstimateSettings, ConfigError> {
    let levels = SyntheticChainSpec::reference();
    let s = EstimateSettings {
        input: need(e.input, "estimate.input")?,
        count: e.count.unwrap_or(levels.count),
        q0: e.q0.unwrap_or(levels.q0),
        dq: e.dq.unwrap_or(levels.dq),
        interval: e.interval.unwrap_or(1.0 / 24.0),
    };
    if s.count < 1 {
        return Err(invalid("estimate.count", "must be at least 1"));
    }
    if !(s.dq > 0.0) {
        return Err(invalid("estimate.dq", "must be positive"));
    }
    if !(s.interval > 0.0 && s.interval.is_finite()) {
        return Err(invalid("estimate.interval", "must be positive"));
    }
    Ok(s)
}

fn resolve_oracle(o: RawOracle) -> Result<OracleSettings, ConfigError> {
    let base = match o.preset.as_deref() {
        Some("example") => Some(ReducedParams::example()),
        None => None,
        Some(other) => {
            return Err(invalid("oracle.preset", format!("`{other}` is not `example`")));
        }
    };
    let pick = |v: Option<f64>, from: Option<f64>, key: &str| need(v.or(from), key);
    let params = ReducedParams {
        f0: pick(o.f0, base.map(|b| b.f0), "oracle.f0")?,
        f1: pick(o.f1, base.map(|b| b.f1), "oracle.f1")?,
        w01: pick(o.w01, base.map(|b| b.w01), "oracle.w01")?,
        w10: pick(o.w10, base.map(|b| b.w10), "oracle.w10")?,
        delta: pick(o.delta, base.map(|b| b.delta), "oracle.delta")?,
        r: pick(o.r, base.map(|b| b.r), "oracle.r")?,
        zbar: pick(o.zbar, base.map(|b| b.zbar), "oracle.zbar")?,
        k: pick(o.k, base.map(|b| b.k), "oracle.k")?,
        penalty: pick(o.penalty, base.map(|b| b.penalty), "oracle.penalty")?,
    };
    params.validate().map_err(|e| invalid("oracle", e.to_string()))?;
    let nodes = o.nodes.unwrap_or_else(|| vec![201, 401, 801]);
    if nodes.is_empty() || nodes.iter().any(|&n| n < obsharvest_core::weno::MIN_NODES) {
        return Err(invalid("oracle.nodes", "needs grid sizes of at least 5 nodes"));
    }
    let check_nodes = o.check_nodes.unwrap_or(401);
    if !nodes.contains(&check_nodes) {
        return Err(invalid("oracle.check_nodes", format!("{check_nodes} is not in oracle.nodes")));
    }
    let tolerance = o.tolerance.unwrap_or(0.02);
    if !(tolerance > 0.0) {
        return Err(invalid("oracle.tolerance", "must be positive"));
    }
    Ok(OracleSettings {
        params,
        nodes,
        check_nodes,
        tolerance,
    })
}

fn resolve_sweep(s: RawSweep) -> Result<SweepSettings, ConfigError> {
    let axis = need(s.axis, "sweep.axis")?;
    let values = need(s.values, "sweep.values")?;
    if values.is_empty() {
        return Err(invalid("sweep.values", "needs at least one value"));
    }
    let mode = match s.mode.as_deref() {
        None => Mode::Voi,
        Some(name) => match Mode::parse(name) {
            Some(m @ (Mode::Voi | Mode::SolveFlexible | Mode::SolveInflexible)) => m,
            _ => {
                return Err(invalid(
                    "sweep.mode",
                    format!("`{name}` is not one of voi, solve-flexible, solve-inflexible"),
                ))
            }
        },
    };
    let mut probe = ModelParams::reference();
    set_model_key(&mut probe, &axis, values[0])?;
    Ok(SweepSettings { axis, values, mode })
}

/// Sets a numeric `model.*` field by key.
pub fn set_model_key(p: &mut ModelParams, key: &str, value: f64) -> Result<(), ConfigError> {
    let field = key.strip_prefix("model.").unwrap_or(key);
    let slot = match field {
        "mu" => &mut p.mu,
        "a" => &mut p.a,
        "b" => &mut p.b,
        "eta" => &mut p.eta,
        "delta" => &mut p.delta,
        "d" => &mut p.d,
        "k0" => &mut p.k0,
        "k1" => &mut p.k1,
        "penalty" | "P" => &mut p.penalty,
        "zbar" => &mut p.zbar,
        "lambda_hi" => &mut p.lambda_hi,
        "lambda_lo" => &mut p.lambda_lo,
        "m" => &mut p.m,
        "flood_threshold" | "L" => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(invalid(key, format!("{value} is not a regime index")));
            }
            p.flood_threshold = value as usize;
            return Ok(());
        }
        _ => return Err(invalid("sweep.axis", format!("`{key}` is not a numeric model key"))),
    };
    *slot = value;
    Ok(())
}

impl RunConfig {
    /// Errors when the sections the mode needs are absent.
    pub fn check_mode_sections(&self) -> Result<(), ConfigError> {
        match self.mode {
            Mode::Simulate if self.sim.is_none() => Err(ConfigError::Missing("sim.starts".into())),
            Mode::EstimateChain if self.estimate.is_none() => {
                Err(ConfigError::Missing("estimate.input".into()))
            }
            Mode::OracleCheck if self.oracle.is_none() => {
                Err(ConfigError::Missing("oracle.preset".into()))
            }
            Mode::Sweep if self.sweep.is_none() => Err(ConfigError::Missing("sweep.axis".into())),
            _ => Ok(()),
        }
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let Some(ChainSource::File(p)) = &mut self.chain {
            fix(p);
        }
        if let Some(e) = &mut self.estimate {
            fix(&mut e.input);
        }
        if let Some(o) = &mut self.output {
            fix(o);
        }
    }

    /// Canonical flat TOML. Parsing the result gives back an equal config.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mode", quote(self.mode.name()));
        kv("seed", self.seed.to_string());
        if let Some(o) = &self.output {
            kv("output", quote(&o.to_string_lossy()));
        }
        let m = &self.model;
        for (k, v) in [
            ("mu", m.mu),
            ("a", m.a),
            ("b", m.b),
            ("eta", m.eta),
            ("delta", m.delta),
            ("d", m.d),
            ("k0", m.k0),
            ("k1", m.k1),
            ("penalty", m.penalty),
        ] {
            kv(&format!("model.{k}"), num(v));
        }
        kv("model.flood_threshold", m.flood_threshold.to_string());
        for (k, v) in [
            ("zbar", m.zbar),
            ("lambda_hi", m.lambda_hi),
            ("lambda_lo", m.lambda_lo),
            ("m", m.m),
        ] {
            kv(&format!("model.{k}"), num(v));
        }
        match &self.chain {
            None => {}
            Some(ChainSource::Synthetic(c)) => {
                kv("chain.source", quote("synthetic"));
                kv("chain.count", c.count.to_string());
                for (k, v) in [
                    ("q0", c.q0),
                    ("dq", c.dq),
                    ("up", c.up),
                    ("down", c.down),
                    ("flood_rate", c.flood_rate),
                    ("flood_discharge", c.flood_discharge),
                ] {
                    kv(&format!("chain.{k}"), num(v));
                }
            }
            Some(ChainSource::File(p)) => {
                kv("chain.source", quote("file"));
                kv("chain.path", quote(&p.to_string_lossy()));
            }
            Some(ChainSource::Inline { discharges, rates }) => {
                kv("chain.source", quote("inline"));
                kv("chain.discharges", list(discharges));
                let rows: Vec<_> = rates.iter().map(|r| list(r)).collect();
                kv("chain.rates", format!("[{}]", rows.join(", ")));
            }
        }
        let g = &self.grid;
        kv("grid.N", g.nodes.to_string());
        kv("grid.dt", num(g.dt));
        kv("grid.T", num(g.horizon));
        kv("grid.tol_ss", num(g.tol_ss));
        kv("grid.weno_eps", num(g.weno_eps));
        if let Some(sim) = &self.sim {
            kv("sim.policy", quote(sim.policy.name()));
            kv("sim.paths", sim.paths.to_string());
            let starts: Vec<_> = sim
                .starts
                .iter()
                .map(|(i, x)| format!("[{i}, {}]", num(*x)))
                .collect();
            kv("sim.starts", format!("[{}]", starts.join(", ")));
            if let Some(h) = sim.horizon {
                kv("sim.horizon", num(h));
            }
            kv("sim.event_log", sim.event_log.to_string());
            kv("sim.fixed_harvest", sim.fixed_harvest.to_string());
            if let Some(l) = sim.fixed_intensity {
                kv("sim.fixed_intensity", num(l));
            }
        }
        if let Some(e) = &self.estimate {
            kv("estimate.input", quote(&e.input.to_string_lossy()));
            kv("estimate.count", e.count.to_string());
            kv("estimate.q0", num(e.q0));
            kv("estimate.dq", num(e.dq));
            kv("estimate.interval", num(e.interval));
        }
        if let Some(o) = &self.oracle {
            let p = &o.params;
            for (k, v) in [
                ("f0", p.f0),
                ("f1", p.f1),
                ("w01", p.w01),
                ("w10", p.w10),
                ("delta", p.delta),
                ("r", p.r),
                ("zbar", p.zbar),
                ("k", p.k),
                ("penalty", p.penalty),
            ] {
                kv(&format!("oracle.{k}"), num(v));
            }
            let nodes: Vec<_> = o.nodes.iter().map(usize::to_string).collect();
            kv("oracle.nodes", format!("[{}]", nodes.join(", ")));
            kv("oracle.check_nodes", o.check_nodes.to_string());
            kv("oracle.tolerance", num(o.tolerance));
        }
        if let Some(sw) = &self.sweep {
            kv("sweep.axis", quote(&sw.axis));
            kv("sweep.values", list(&sw.values));
            kv("sweep.mode", quote(sw.mode.name()));
        }
        s
    }

    /// SHA-256 of the canonical TOML with the output directory left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let digest = Sha256::digest(c.to_toml().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// Shortest round-trip representation, always with a decimal point or
/// exponent so TOML reads it back as a float.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn list(v: &[f64]) -> String {
    let items: Vec<_> = v.iter().map(|&x| num(x)).collect();
    format!("[{}]", items.join(", "))
}
