use std::fs;
use std::io::Write;

use serde_json::{json, Value};

use entcap::discrimination::{
    advantage_gap, assisted_distance, gap_at_log2_d, lemma1_upper, lemma2_lower, min_d_for_gap,
    unassisted_distance_with, MinD, DEFAULT_C_OVERHEAD, UNASSISTED_SEED,
};
use entcap::entropy::{s_min_analytic, s_min_numeric_seeded, DEFAULT_SMIN_RESTARTS, DEFAULT_SMIN_SEED};
use entcap::format::{fmt_sig, round_sig};
use entcap::memsim::{compare, MemoryChannelSpec};
use entcap::channels::standard_mub;
use entcap::witness::{analytic_kind, linear_grid, threshold_find, witness_sweep as sweep, StateFamily, WitnessChannel};

use crate::config::{as_bipartite, config_err, CliError, Format, Grid, RunConfig};
use crate::Status;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_TOL: f64 = 1e-6;
const THRESHOLD_TOL: f64 = 1e-10;
const DEFAULT_D: u64 = 1024;
const DEFAULT_SIM_D: u64 = 8;
const DEFAULT_TRIALS: usize = 100_000;
const DEFAULT_SIM_SEED: u64 = 1;
const DEFAULT_MAX_LOG2_D: u32 = 40;

/// Rounds every float to the file precision so reruns compare byte for byte.
fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn json_text(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&rounded(v)).expect("serializable");
    s.push('\n');
    s
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn min_d_json(m: MinD) -> Value {
    match m {
        MinD::Finite { log2_d } => json!({ "log2_d": log2_d, "d": m.d() }),
        MinD::Unbounded => json!("unbounded"),
    }
}

fn family_of(cfg: &RunConfig) -> Result<StateFamily, CliError> {
    match &cfg.state {
        None => Ok(StateFamily::Werner),
        Some(v) => match v.get("family").and_then(Value::as_str) {
            Some("werner") => Ok(StateFamily::Werner),
            _ => Err(config_err("witness-sweep needs a state family, e.g. {\"family\":\"werner\"}")),
        },
    }
}

pub fn witness_sweep(cfg: &RunConfig) -> Result<Status, CliError> {
    let spec = cfg.single_channel()?;
    let family = family_of(cfg)?;
    let Grid { lo, hi, steps } = cfg.grid.unwrap_or(Grid { lo: 0.0, hi: 1.0, steps: 101 });
    let grid = linear_grid(lo, hi, steps)?;
    let channel = WitnessChannel::from_spec_seeded(
        &spec,
        cfg.restarts.unwrap_or(DEFAULT_SMIN_RESTARTS),
        cfg.tol.unwrap_or(DEFAULT_TOL),
        cfg.seed.unwrap_or(DEFAULT_SMIN_SEED),
    )?;
    let result = sweep(family, &channel, &grid)?;
    let q_star = match result.first_crossing() {
        Some((a, b)) => Some(threshold_find(family, &channel, a, b, THRESHOLD_TOL)?),
        None => None,
    };
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => result.to_csv(),
        Format::Json => {
            let rows: Vec<Value> = result
                .rows
                .iter()
                .map(|r| {
                    let v = &r.verdict;
                    json!({
                        "param": r.param,
                        "s_cond_bits": v.s_cond,
                        "s_min_bits": v.s_min,
                        "delta_s_bits": v.delta_s,
                        "entangled_witnessed": v.entangled_witnessed,
                        "eb_channel": v.eb_channel.to_string(),
                        "capacity_claim": v.capacity_claim.to_string(),
                        "advisory": v.advisory,
                    })
                })
                .collect();
            json_text(json!({
                "version": VERSION,
                "command": "witness-sweep",
                "family": result.family_label,
                "channel": result.channel_label,
                "s_min_converged": channel.smin.converged,
                "q_star": q_star,
                "rows": rows,
            }))
        }
    };
    emit(cfg, &text)?;
    match q_star {
        Some(q) => eprintln!("q* = {}", fmt_sig(q)),
        None => eprintln!("no sign change of delta_s on the grid"),
    }
    if result.has_advisory() {
        return Ok(Status::Advisory("S_min multistart did not converge; rows are flagged".into()));
    }
    Ok(Status::Ok)
}

pub fn smin(cfg: &RunConfig) -> Result<Status, CliError> {
    let spec = cfg.single_channel()?;
    let channel = spec.build()?;
    let analytic = analytic_kind(&spec).map(s_min_analytic).transpose()?;
    let numeric = s_min_numeric_seeded(
        &channel,
        cfg.restarts.unwrap_or(DEFAULT_SMIN_RESTARTS),
        cfg.tol.unwrap_or(DEFAULT_TOL),
        cfg.seed.unwrap_or(DEFAULT_SMIN_SEED),
    );
    let analytic_bits = analytic.as_ref().map(|a| a.value);
    let agreement = analytic_bits.map(|a| (a - numeric.value).abs());
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json_text(json!({
            "version": VERSION,
            "command": "smin",
            "channel": channel.label(),
            "analytic_bits": analytic_bits,
            "numeric_bits": numeric.value,
            "agreement_bits": agreement,
            "converged": numeric.converged,
            "restarts": numeric.restarts_used,
        })),
        Format::Csv => {
            let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
            format!(
                "channel,analytic_bits,numeric_bits,agreement_bits,converged\n{},{},{},{},{}\n",
                channel.label(),
                opt(analytic_bits),
                fmt_sig(numeric.value),
                opt(agreement),
                numeric.converged
            )
        }
    };
    emit(cfg, &text)?;
    if !numeric.converged {
        return Ok(Status::Advisory("multistart restarts disagree beyond tol".into()));
    }
    Ok(Status::Ok)
}

pub fn discriminate(cfg: &RunConfig) -> Result<Status, CliError> {
    let pair = cfg.channel_pair()?;
    let rho = as_bipartite(cfg.density()?, pair.dim_in())?;
    if cfg.format == Some(Format::Csv) {
        return Err(config_err("discriminate writes JSON only"));
    }
    let d = cfg.d.unwrap_or(DEFAULT_D);
    let d_tilde = cfg.d_tilde.unwrap_or(pair.dim_in() as u64);
    let c = cfg.c_overhead.unwrap_or(DEFAULT_C_OVERHEAD);
    // Bound inputs are validated before the expensive part.
    lemma1_upper(0.0, d, d_tilde, c)?;
    let delta = assisted_distance(&pair, &rho)?;
    let eps = unassisted_distance_with(&pair, cfg.restarts, cfg.seed.unwrap_or(UNASSISTED_SEED));
    let report = advantage_gap(eps.epsilon, delta, d, d_tilde, c)?;
    let min_d = min_d_for_gap(eps.epsilon, delta, d_tilde, c)?;
    let text = json_text(json!({
        "version": VERSION,
        "command": "discriminate",
        "m0": pair.m0.label(),
        "m1": pair.m1.label(),
        "state_dims": rho.dims(),
        "epsilon": eps.epsilon,
        "epsilon_converged": eps.converged,
        "delta": delta,
        "bounds": serde_json::to_value(&report).expect("serializable"),
        "min_d_for_gap": min_d_json(min_d),
    }));
    emit(cfg, &text)?;
    if !eps.converged {
        return Ok(Status::Advisory("unassisted distance multistart did not converge".into()));
    }
    Ok(Status::Ok)
}

pub fn capacity_bounds(cfg: &RunConfig) -> Result<Status, CliError> {
    let epsilon = cfg.epsilon.ok_or_else(|| config_err("--epsilon is required"))?;
    let delta = cfg.delta.ok_or_else(|| config_err("--delta is required"))?;
    let d_tilde = cfg.d_tilde.unwrap_or(2);
    let c = cfg.c_overhead.unwrap_or(DEFAULT_C_OVERHEAD);
    let min_d = min_d_for_gap(epsilon, delta, d_tilde, c)?;
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => {
            let d = cfg.d.unwrap_or(DEFAULT_D);
            let report = advantage_gap(epsilon, delta, d, d_tilde, c)?;
            json_text(json!({
                "version": VERSION,
                "command": "capacity-bounds",
                "bounds": serde_json::to_value(&report).expect("serializable"),
                "min_d_for_gap": min_d_json(min_d),
            }))
        }
        Format::Csv => {
            let max = cfg.max_log2_d.unwrap_or(DEFAULT_MAX_LOG2_D);
            if !(1..=62).contains(&max) {
                return Err(config_err("max-log2-d must be in 1..=62"));
            }
            let mut out = String::from("log2_d,lemma1_upper_bits_per_use,lemma2_lower_bits_per_use,lemma2_exact_bits_per_use,gap_bits_per_use\n");
            for k in 1..=max {
                let d = 1u64 << k;
                let upper = lemma1_upper(epsilon, d, d_tilde, c)?;
                let lower = lemma2_lower(delta, d)?;
                out.push_str(&format!(
                    "{k},{},{},{},{}\n",
                    fmt_sig(upper),
                    fmt_sig(lower.bound_per_use),
                    fmt_sig(lower.exact_per_use),
                    fmt_sig(gap_at_log2_d(epsilon, delta, k as f64, d_tilde, c))
                ));
            }
            out
        }
    };
    emit(cfg, &text)?;
    match min_d {
        MinD::Finite { log2_d } => eprintln!("smallest d with a positive gap: 2^{log2_d}"),
        MinD::Unbounded => eprintln!("no positive gap for any d"),
    }
    Ok(Status::Ok)
}

pub fn simulate(cfg: &RunConfig) -> Result<Status, CliError> {
    let pair = cfg.channel_pair()?;
    let rho = as_bipartite(cfg.density()?, pair.dim_in())?;
    if cfg.format == Some(Format::Csv) {
        return Err(config_err("simulate writes JSON only"));
    }
    let d = cfg.d.unwrap_or(DEFAULT_SIM_D);
    if !(2..=4096).contains(&d) {
        return Err(config_err("simulate needs 2 <= d <= 4096"));
    }
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = cfg.seed.unwrap_or(DEFAULT_SIM_SEED);
    let c = cfg.c_overhead.unwrap_or(DEFAULT_C_OVERHEAD);
    let probe = cfg.probe_vector()?;
    if probe.as_ref().is_some_and(|p| p.len() != pair.dim_in()) {
        return Err(config_err(format!("probe must have {} entries", pair.dim_in())));
    }
    let eps = unassisted_distance_with(&pair, cfg.restarts, UNASSISTED_SEED);
    let probe = probe.unwrap_or_else(|| eps.probe.clone());
    let mubs = standard_mub(d as usize)?;
    let spec = MemoryChannelSpec::seeded(pair, mubs, seed)?;
    let cmp = compare(&spec, &rho, &probe, eps.epsilon, trials, seed, Some(c))?;
    let mut report = serde_json::to_value(&cmp.report).expect("serializable");
    let obj = report.as_object_mut().expect("object");
    obj.insert("version".into(), json!(VERSION));
    obj.insert("command".into(), json!("simulate"));
    obj.insert("epsilon_converged".into(), json!(eps.converged));
    obj.insert("mutual_info_assisted_bits".into(), json!(cmp.assisted.empirical_mutual_info));
    obj.insert("mutual_info_unassisted_bits".into(), json!(cmp.unassisted.empirical_mutual_info));
    emit(cfg, &json_text(report))?;
    if !eps.converged {
        return Ok(Status::Advisory("unassisted distance multistart did not converge".into()));
    }
    Ok(Status::Ok)
}
