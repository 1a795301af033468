//! Flag and config-file handling. Everything here fails with
//! `CliError::Config` so nothing gets written on bad input.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;
use serde_json::Value;

use entcap::channels::ChannelSpec;
use entcap::discrimination::{basis_flip_pair, ChannelPair};
use entcap::memsim::constant_pair;
use entcap::qcore::{max_entangled, werner_state, ComplexMatrix, DensityMatrix, C64};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<entcap::Error> for CliError {
    fn from(e: entcap::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Channel spec as inline JSON or a path. Give it twice for a channel pair.
    #[arg(long)]
    pub channel: Vec<String>,
    /// Named pair as JSON or a path: {"kind":"basis_flip","d":2}, {"kind":"constant","delta":0.6} or {"m0":…,"m1":…}.
    #[arg(long)]
    pub pair: Option<String>,
    /// State spec as inline JSON or a path.
    #[arg(long)]
    pub state: Option<String>,
    /// Pure probe for the unassisted protocol, JSON list of [re, im].
    #[arg(long)]
    pub probe: Option<String>,
    /// lo:hi:steps
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Constant in front of log d̃ in the unassisted upper bound.
    #[arg(long)]
    pub c_overhead: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Alphabet size of the MUB symbols.
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub d_tilde: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Largest log2 d in the capacity-bounds table.
    #[arg(long)]
    pub max_log2_d: Option<u32>,
}

/// Same keys as the flags; specs may be inline JSON objects.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    channel: Option<Value>,
    pair: Option<Value>,
    state: Option<Value>,
    probe: Option<Value>,
    grid: Option<Value>,
    seed: Option<u64>,
    trials: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    workers: Option<usize>,
    c_overhead: Option<f64>,
    restarts: Option<usize>,
    tol: Option<f64>,
    d: Option<u64>,
    d_tilde: Option<u64>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    max_log2_d: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

/// Flags merged over the config file, with specs still unparsed.
#[derive(Debug, Default)]
pub struct RunConfig {
    pub channels: Vec<Value>,
    pub pair: Option<Value>,
    pub state: Option<Value>,
    pub probe: Option<Value>,
    pub grid: Option<Grid>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub c_overhead: Option<f64>,
    pub restarts: Option<usize>,
    pub tol: Option<f64>,
    pub d: Option<u64>,
    pub d_tilde: Option<u64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub max_log2_d: Option<u32>,
}

fn read_json_arg(arg: &str, what: &str) -> Result<Value, CliError> {
    let text = if arg.trim_start().starts_with(['{', '[']) {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| config_err(format!("{what}: cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| config_err(format!("{what}: {e}")))
}

/// Strings in the config file are treated like flag values (inline JSON or path).
fn file_json(v: Value, what: &str) -> Result<Value, CliError> {
    match v {
        Value::String(s) => read_json_arg(&s, what),
        other => Ok(other),
    }
}

pub fn parse_grid(text: &str) -> Result<Grid, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || config_err(format!("grid must be lo:hi:steps, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    check_grid(Grid { lo, hi, steps })
}

fn check_grid(g: Grid) -> Result<Grid, CliError> {
    if !(g.lo < g.hi) || g.steps < 2 {
        return Err(config_err(format!("grid needs lo < hi and steps >= 2 (got {}:{}:{})", g.lo, g.hi, g.steps)));
    }
    Ok(g)
}

fn grid_from_value(v: Value) -> Result<Grid, CliError> {
    match v {
        Value::String(s) => parse_grid(&s),
        Value::Object(m) => {
            let num = |k: &str| m.get(k).and_then(Value::as_f64).ok_or_else(|| config_err(format!("grid.{k} missing")));
            let steps = m.get("steps").and_then(Value::as_u64).ok_or_else(|| config_err("grid.steps missing"))?;
            check_grid(Grid { lo: num("lo")?, hi: num("hi")?, steps: steps as usize })
        }
        _ => Err(config_err("grid must be \"lo:hi:steps\" or {lo, hi, steps}")),
    }
}

impl RunConfig {
    pub fn resolve(flags: Flags, config_path: Option<&PathBuf>) -> Result<Self, CliError> {
        let file = match config_path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| config_err(format!("config file: {e}")))?
            }
            None => FileConfig::default(),
        };
        let channels = if !flags.channel.is_empty() {
            flags.channel.iter().map(|c| read_json_arg(c, "channel")).collect::<Result<Vec<_>, _>>()?
        } else {
            match file.channel {
                Some(Value::Array(items)) => items.into_iter().map(|v| file_json(v, "channel")).collect::<Result<Vec<_>, _>>()?,
                Some(v) => vec![file_json(v, "channel")?],
                None => Vec::new(),
            }
        };
        let pick = |flag: &Option<String>, fv: Option<Value>, what: &str| -> Result<Option<Value>, CliError> {
            match flag {
                Some(s) => read_json_arg(s, what).map(Some),
                None => fv.map(|v| file_json(v, what)).transpose(),
            }
        };
        let grid = match &flags.grid {
            Some(g) => Some(parse_grid(g)?),
            None => file.grid.map(grid_from_value).transpose()?,
        };
        let cfg = Self {
            channels,
            pair: pick(&flags.pair, file.pair, "pair")?,
            state: pick(&flags.state, file.state, "state")?,
            probe: pick(&flags.probe, file.probe, "probe")?,
            grid,
            seed: flags.seed.or(file.seed),
            trials: flags.trials.or(file.trials),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format),
            workers: flags.workers.or(file.workers),
            c_overhead: flags.c_overhead.or(file.c_overhead),
            restarts: flags.restarts.or(file.restarts),
            tol: flags.tol.or(file.tol),
            d: flags.d.or(file.d),
            d_tilde: flags.d_tilde.or(file.d_tilde),
            epsilon: flags.epsilon.or(file.epsilon),
            delta: flags.delta.or(file.delta),
            max_log2_d: flags.max_log2_d.or(file.max_log2_d),
        };
        if cfg.trials == Some(0) {
            return Err(config_err("trials must be >= 1"));
        }
        if cfg.restarts == Some(0) {
            return Err(config_err("restarts must be >= 1"));
        }
        if cfg.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(config_err("tol must be positive"));
        }
        if cfg.c_overhead.is_some_and(|c| !(c >= 0.0)) {
            return Err(config_err("c-overhead must be >= 0"));
        }
        Ok(cfg)
    }

    pub fn single_channel(&self) -> Result<ChannelSpec, CliError> {
        match self.channels.as_slice() {
            [v] => channel_spec(v),
            [] => Err(config_err("--channel is required")),
            _ => Err(config_err("expected exactly one --channel")),
        }
    }

    pub fn channel_pair(&self) -> Result<ChannelPair, CliError> {
        match (self.channels.as_slice(), &self.pair) {
            ([a, b], None) => Ok(ChannelPair::new(channel_spec(a)?.build()?, channel_spec(b)?.build()?)?),
            ([], Some(p)) => pair_spec(p),
            _ => Err(config_err("give either two --channel specs or one --pair")),
        }
    }

    pub fn density(&self) -> Result<DensityMatrix, CliError> {
        state_spec(self.state.as_ref().ok_or_else(|| config_err("--state is required"))?)
    }

    pub fn probe_vector(&self) -> Result<Option<Vec<C64>>, CliError> {
        self.probe.as_ref().map(complex_list).transpose()
    }
}

pub fn channel_spec(v: &Value) -> Result<ChannelSpec, CliError> {
    let spec: ChannelSpec = serde_json::from_value(v.clone()).map_err(|e| config_err(format!("channel spec: {e}")))?;
    spec.build()?;
    Ok(spec)
}

fn pair_spec(v: &Value) -> Result<ChannelPair, CliError> {
    if let (Some(m0), Some(m1)) = (v.get("m0"), v.get("m1")) {
        return Ok(ChannelPair::new(channel_spec(m0)?.build()?, channel_spec(m1)?.build()?)?);
    }
    match v.get("kind").and_then(Value::as_str) {
        Some("basis_flip") => {
            let d = v.get("d").and_then(Value::as_u64).unwrap_or(2) as usize;
            Ok(basis_flip_pair(d)?)
        }
        Some("constant") => {
            let delta = v.get("delta").and_then(Value::as_f64).ok_or_else(|| config_err("constant pair needs \"delta\""))?;
            Ok(constant_pair(delta)?)
        }
        _ => Err(config_err("pair must be {\"m0\",\"m1\"} or kind basis_flip/constant")),
    }
}

fn complex_entry(v: &Value) -> Result<C64, CliError> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
            (Some(re), Some(im)) => Ok(C64::new(re, im)),
            _ => Err(config_err("complex entries are numbers or [re, im]")),
        },
        _ => Err(config_err("complex entries are numbers or [re, im]")),
    }
}

fn complex_list(v: &Value) -> Result<Vec<C64>, CliError> {
    v.as_array().ok_or_else(|| config_err("expected a JSON list"))?.iter().map(complex_entry).collect()
}

fn dims_of(v: &Value) -> Result<Vec<usize>, CliError> {
    v.as_array()
        .and_then(|a| a.iter().map(|x| x.as_u64().map(|u| u as usize)).collect::<Option<Vec<_>>>())
        .ok_or_else(|| config_err("dims must be a list of positive integers"))
}

pub fn state_spec(v: &Value) -> Result<DensityMatrix, CliError> {
    if let Value::Array(_) = v {
        return raw_state(v, None);
    }
    if let Some(family) = v.get("family").and_then(Value::as_str) {
        return match family {
            "werner" => {
                let q = v.get("q").and_then(Value::as_f64).ok_or_else(|| config_err("werner state needs \"q\""))?;
                Ok(werner_state(q)?)
            }
            other => Err(config_err(format!("unknown state family {other:?}"))),
        };
    }
    match v.get("kind").and_then(Value::as_str) {
        Some("max_entangled") => {
            let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| config_err("max_entangled needs \"d\""))?;
            Ok(max_entangled(d as usize)?)
        }
        Some("maximally_mixed") => {
            let dims = dims_of(v.get("dims").ok_or_else(|| config_err("maximally_mixed needs \"dims\""))?)?;
            if dims.is_empty() || dims.contains(&0) {
                return Err(config_err("dims must be positive"));
            }
            Ok(DensityMatrix::maximally_mixed(dims))
        }
        Some(other) => Err(config_err(format!("unknown state kind {other:?}"))),
        None => match v.get("matrix") {
            Some(m) => raw_state(m, v.get("dims").map(dims_of).transpose()?),
            None => Err(config_err("state needs \"family\", \"kind\" or \"matrix\"")),
        },
    }
}

fn raw_state(m: &Value, dims: Option<Vec<usize>>) -> Result<DensityMatrix, CliError> {
    let rows = m.as_array().ok_or_else(|| config_err("matrix must be a list of rows"))?;
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for row in rows {
        let row = complex_list(row)?;
        if row.len() != n {
            return Err(config_err("matrix must be square"));
        }
        entries.extend(row);
    }
    let matrix = ComplexMatrix::from_entries(n, n, entries)?;
    Ok(DensityMatrix::new(dims.unwrap_or_else(|| vec![n]), matrix)?)
}

/// Splits a single-factor state `[n]` into `[first, n / first]`.
pub fn as_bipartite(rho: DensityMatrix, first: usize) -> Result<DensityMatrix, CliError> {
    if rho.dims().len() >= 2 {
        return Ok(rho);
    }
    let n = rho.dim();
    if first == 0 || n % first != 0 {
        return Err(config_err(format!("state of dimension {n} cannot hold a {first}-dimensional input")));
    }
    Ok(rho.with_dims(vec![first, n / first])?)
}
