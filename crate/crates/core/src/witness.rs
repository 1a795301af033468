//! Entropic entanglement witness `ΔS = S(B|B̃)_ω − S_min(M)` with
//! `ω = (M ⊗ id)(ρ)`, and the Holevo quantities of the Weyl-twirled
//! extension of `M` that it compares.
//!
//! For the extension `N` (see [`crate::channels::shor_extend`]) the unassisted
//! Holevo capacity is `log|B| − S_min(M)` while a shared state `ρ` lifts the
//! achievable Holevo rate to `log|B| − S(B|B̃)_ω`; `ΔS < 0` therefore certifies
//! both an assisted advantage and entanglement of `ρ`. Everything here is
//! evaluated from `M` directly; `N` is only built for cross-checks.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{is_entanglement_breaking, shor_extend, ChannelKind, ChannelSpec, EbVerdict, QuantumChannel};
use crate::entropy::{
    conditional_entropy, holevo_of_ensemble, majorizes, s_min_analytic, s_min_numeric_seeded, AnalyticChannel, Ensemble,
    SminMethod, SminResult, DEFAULT_SMIN_SEED,
};
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::qcore::{werner_state, DensityMatrix, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityClaim {
    HolevoOnly,
    FullCapacity,
}

impl fmt::Display for CapacityClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CapacityClaim::HolevoOnly => "holevo_only",
            CapacityClaim::FullCapacity => "full_capacity",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub s_cond: f64,
    pub s_min: f64,
    pub delta_s: f64,
    pub entangled_witnessed: bool,
    pub eb_channel: EbVerdict,
    pub capacity_claim: CapacityClaim,
    /// The minimum output entropy came from a multistart run that did not
    /// converge. Multistart values overestimate `S_min`, which pushes `ΔS`
    /// down, so a witnessed row with this flag may be a false positive.
    pub advisory: bool,
}

impl WitnessVerdict {
    fn from_parts(s_cond: f64, smin: &SminResult, eb: EbVerdict) -> Self {
        let delta_s = s_cond - smin.value;
        let witnessed = delta_s < 0.0;
        let claim =
            if eb == EbVerdict::Yes && witnessed { CapacityClaim::FullCapacity } else { CapacityClaim::HolevoOnly };
        Self {
            s_cond,
            s_min: smin.value,
            delta_s,
            entangled_witnessed: witnessed,
            eb_channel: eb,
            capacity_claim: claim,
            advisory: smin.method == SminMethod::Multistart && !smin.converged,
        }
    }
}

fn check_input(rho: &DensityMatrix, m: &QuantumChannel) -> Result<()> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite { count: rho.dims().len() });
    }
    if rho.dims()[0] != m.dim_in() {
        return Err(Error::DimensionMismatch { expected: m.dim_in(), got: rho.dims()[0] });
    }
    Ok(())
}

/// `S(B|B̃)` of `(M ⊗ id)(ρ)`.
pub fn conditional_output_entropy(rho: &DensityMatrix, m: &QuantumChannel) -> Result<f64> {
    check_input(rho, m)?;
    conditional_entropy(&m.apply_on_subsystem(rho, 0)?, 0, 1)
}

pub fn delta_s(rho: &DensityMatrix, m: &QuantumChannel, smin: &SminResult) -> Result<WitnessVerdict> {
    delta_s_with_eb(rho, m, smin, is_entanglement_breaking(m))
}

fn delta_s_with_eb(rho: &DensityMatrix, m: &QuantumChannel, smin: &SminResult, eb: EbVerdict) -> Result<WitnessVerdict> {
    Ok(WitnessVerdict::from_parts(conditional_output_entropy(rho, m)?, smin, eb))
}

/// Holevo rate `log|B| − S(B|B̃)_ω` reached by the extension with `ρ` shared.
pub fn assisted_holevo_lower(rho: &DensityMatrix, m: &QuantumChannel) -> Result<f64> {
    Ok((m.dim_out() as f64).log2() - conditional_output_entropy(rho, m)?)
}

/// `χ(N) = log|B| − S_min(M)`.
pub fn unassisted_chi_shor(m: &QuantumChannel, smin: &SminResult) -> f64 {
    (m.dim_out() as f64).log2() - smin.value
}

/// `{1/|B|², ψ_min ⊗ |jk><jk|}`, the ensemble attaining `χ(N)`.
pub fn optimal_shor_ensemble(m: &QuantumChannel, smin: &SminResult) -> Result<Ensemble> {
    let psi = DensityMatrix::pure(vec![m.dim_in()], &smin.argmin)?;
    let dd = m.dim_out() * m.dim_out();
    let states = (0..dd)
        .map(|jk| Ok(psi.tensor(&DensityMatrix::basis(dd, jk)?)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(vec![1.0 / dd as f64; dd], states)
}

/// Holevo quantity of the materialized extension on [`optimal_shor_ensemble`].
pub fn chi_shor_by_ensemble(m: &QuantumChannel, smin: &SminResult) -> Result<f64> {
    holevo_of_ensemble(&optimal_shor_ensemble(m, smin)?, &shor_extend(m))
}

/// State families that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    Werner,
}

impl StateFamily {
    pub fn state(&self, param: f64) -> Result<DensityMatrix> {
        match self {
            StateFamily::Werner => werner_state(param),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StateFamily::Werner => "werner",
        }
    }
}

/// Closed-form `S_min` family for a spec, if there is one.
pub fn analytic_kind(spec: &ChannelSpec) -> Option<AnalyticChannel> {
    match (spec.kind, spec.d, spec.t) {
        (ChannelKind::Depolarizing, Some(d), Some(t)) => Some(AnalyticChannel::Depolarizing { d, t }),
        (ChannelKind::TransposeDepolarizing, Some(d), Some(t)) => Some(AnalyticChannel::TransposeDepolarizing { d, t }),
        (ChannelKind::TwoPauli, _, Some(t)) => Some(AnalyticChannel::TwoPauli { t }),
        (ChannelKind::Identity, Some(d), _) => Some(AnalyticChannel::Depolarizing { d, t: 1.0 }),
        _ => None,
    }
}

/// A channel together with the `S_min` value the witness compares against.
#[derive(Clone, Debug)]
pub struct WitnessChannel {
    pub channel: QuantumChannel,
    pub smin: SminResult,
    pub eb: EbVerdict,
}

impl WitnessChannel {
    pub fn new(channel: QuantumChannel, smin: SminResult) -> Self {
        let eb = is_entanglement_breaking(&channel);
        Self { channel, smin, eb }
    }

    /// Builds the channel and uses the closed-form `S_min` when the kind has
    /// one, otherwise a multistart estimate.
    pub fn from_spec(spec: &ChannelSpec, restarts: usize, tol: f64) -> Result<Self> {
        Self::from_spec_seeded(spec, restarts, tol, DEFAULT_SMIN_SEED)
    }

    pub fn from_spec_seeded(spec: &ChannelSpec, restarts: usize, tol: f64, seed: u64) -> Result<Self> {
        let channel = spec.build()?;
        let smin = match analytic_kind(spec) {
            Some(kind) => s_min_analytic(kind)?,
            None => s_min_numeric_seeded(&channel, restarts, tol, seed),
        };
        Ok(Self::new(channel, smin))
    }

    pub fn verdict(&self, rho: &DensityMatrix) -> Result<WitnessVerdict> {
        delta_s_with_eb(rho, &self.channel, &self.smin, self.eb)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub verdict: WitnessVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub family_label: String,
    pub channel_label: String,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str =
    "param,s_cond_bits,s_min_bits,delta_s_bits,entangled_witnessed,eb_channel,capacity_claim";

impl SweepResult {
    pub fn delta_s_column(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.verdict.delta_s).collect()
    }

    pub fn has_advisory(&self) -> bool {
        self.rows.iter().any(|r| r.verdict.advisory)
    }

    /// Linear interpolation of the first sign change of `ΔS` from negative to
    /// non-negative, if any.
    pub fn first_crossing(&self) -> Option<(f64, f64)> {
        self.rows.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            (a.verdict.delta_s < 0.0 && b.verdict.delta_s >= 0.0).then_some((a.param, b.param))
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let v = &row.verdict;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_sig(row.param),
                fmt_sig(v.s_cond),
                fmt_sig(v.s_min),
                fmt_sig(v.delta_s),
                v.entangled_witnessed,
                v.eb_channel,
                v.capacity_claim
            ));
        }
        out
    }
}

/// Evaluates the witness at each grid point; rows come back in grid order
/// regardless of how many workers ran them.
pub fn witness_sweep(family: StateFamily, channel: &WitnessChannel, grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
    }
    let rows = grid
        .par_iter()
        .map(|&param| Ok(SweepRow { param, verdict: channel.verdict(&family.state(param)?)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        family_label: family.label().to_string(),
        channel_label: channel.channel.label().to_string(),
        rows,
    })
}

/// `steps` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || steps < 2 {
        return Err(Error::InvalidParameter(format!("grid needs lo < hi and steps >= 2 (got {lo}:{hi}:{steps})")));
    }
    Ok((0..steps).map(|k| if k + 1 == steps { hi } else { lo + (hi - lo) * k as f64 / (steps - 1) as f64 }).collect())
}

/// Bisection for the root of `ΔS(param)` on `[lo, hi]`.
pub fn threshold_find(family: StateFamily, channel: &WitnessChannel, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let f = |p: f64| -> Result<f64> { Ok(channel.verdict(&family.state(p)?)?.delta_s) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectraPrecheck {
    /// False when both marginal spectra majorize the global one, in which case
    /// no channel whose output spectrum depends only on input spectra can
    /// witness the state.
    pub witnessable_by_spectral_channels: bool,
    pub marginal_a_majorizes: bool,
    pub marginal_b_majorizes: bool,
    pub spectrum_a: Spectrum,
    pub spectrum_b: Spectrum,
    pub spectrum_ab: Spectrum,
}

pub fn spectra_precheck(rho: &DensityMatrix) -> Result<SpectraPrecheck> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite { count: rho.dims().len() });
    }
    let spectrum_ab = rho.spectrum();
    let spectrum_a = rho.partial_trace(&[0])?.spectrum();
    let spectrum_b = rho.partial_trace(&[1])?.spectrum();
    let marginal_a_majorizes = majorizes(&spectrum_a, &spectrum_ab)?;
    let marginal_b_majorizes = majorizes(&spectrum_b, &spectrum_ab)?;
    Ok(SpectraPrecheck {
        witnessable_by_spectral_channels: !(marginal_a_majorizes && marginal_b_majorizes),
        marginal_a_majorizes,
        marginal_b_majorizes,
        spectrum_a,
        spectrum_b,
        spectrum_ab,
    })
}
