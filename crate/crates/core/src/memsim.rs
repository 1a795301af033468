//! Memory channel with two one-bit registers and a Monte Carlo model of the
//! feedback protocol that runs over it.
//!
//! On odd uses (`k = 0`) the channel applies `m_i`; on even uses (`k = 1`) it
//! measures in MUB basis `i` and outputs the outcome, then redraws `i`. Bob
//! learns `i` by discriminating the odd-round output, feeds back his guess `j`,
//! and Alice encodes a uniform symbol in basis `j`. A correct guess gives a
//! noiseless symbol; a wrong one gives a uniform outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{make_mub_qc, MubPair, QuantumChannel};
use crate::discrimination::{
    assisted_distance, helstrom_povm, lemma1_upper, lemma2_lower, ChannelPair, DEFAULT_C_OVERHEAD,
};
use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, DensityMatrix, C64};

#[derive(Clone, Debug)]
pub struct MemoryChannelSpec {
    pub pair: ChannelPair,
    pub d: usize,
    pub mubs: MubPair,
    pub i_bit: u8,
    pub k_bit: u8,
    readout: [QuantumChannel; 2],
}

impl MemoryChannelSpec {
    /// Starts at `k = 0` with the latch drawn from `rng`.
    pub fn new<R: Rng + ?Sized>(pair: ChannelPair, mubs: MubPair, rng: &mut R) -> Result<Self> {
        let readout = [make_mub_qc(&mubs, 0)?, make_mub_qc(&mubs, 1)?];
        Ok(Self { pair, d: mubs.d(), mubs, i_bit: rng.random_range(0..2), k_bit: 0, readout })
    }

    pub fn seeded(pair: ChannelPair, mubs: MubPair, seed: u64) -> Result<Self> {
        Self::new(pair, mubs, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_latch(mut self, i_bit: u8, k_bit: u8) -> Self {
        self.i_bit = i_bit & 1;
        self.k_bit = k_bit & 1;
        self
    }

    /// Map applied by the next use.
    pub fn current_channel(&self) -> &QuantumChannel {
        match (self.k_bit, self.i_bit) {
            (0, 0) => &self.pair.m0,
            (0, _) => &self.pair.m1,
            (_, i) => &self.readout[i as usize],
        }
    }

    pub fn readout(&self, i: usize) -> &QuantumChannel {
        &self.readout[i]
    }

    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.k_bit == 1 {
            self.i_bit = rng.random_range(0..2);
        }
        self.k_bit ^= 1;
    }
}

/// One use of the memory channel.
pub fn step<R: Rng + ?Sized>(spec: &mut MemoryChannelSpec, input: &DensityMatrix, rng: &mut R) -> Result<DensityMatrix> {
    let ch = spec.current_channel();
    if input.dim() != ch.dim_in() {
        return Err(Error::DimensionMismatch { expected: ch.dim_in(), got: input.dim() });
    }
    let out = ch.apply(input)?;
    spec.advance(rng);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolRecord {
    /// Index of the odd (probe) use; the payload use is `round_index + 1`.
    pub round_index: u64,
    pub i_true: u8,
    pub j_guess: u8,
    pub symbol_sent: u32,
    pub symbol_decoded: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub rounds: Vec<SymbolRecord>,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Bits per symbol, bias corrected.
    pub empirical_mutual_info: f64,
    pub mutual_info_plugin: f64,
    pub mutual_info_stderr: f64,
    /// Bits per channel use.
    pub per_use: f64,
    pub per_use_stderr: f64,
    /// `2·P(j = i) − 1`.
    pub delta_hat: f64,
    pub delta_stderr: f64,
    /// Row `x` holds the empirical distribution of the decoded symbol given `x`.
    pub confusion: Vec<Vec<f64>>,
    pub counts: Vec<Vec<u64>>,
}

impl RateEstimate {
    pub fn from_trace(trace: &ProtocolTrace, d: usize) -> Self {
        let mut counts = vec![vec![0u64; d]; d];
        let mut hits = 0u64;
        for r in &trace.rounds {
            counts[r.symbol_sent as usize][r.symbol_decoded as usize] += 1;
            hits += u64::from(r.i_true == r.j_guess);
        }
        let n = trace.rounds.len().max(1) as f64;
        let acc = hits as f64 / n;
        let (mi, mi_plugin, mi_se) = mutual_information_estimate(&counts);
        let confusion = counts
            .iter()
            .map(|row| {
                let s: u64 = row.iter().sum();
                row.iter().map(|&c| if s == 0 { 0.0 } else { c as f64 / s as f64 }).collect()
            })
            .collect();
        Self {
            empirical_mutual_info: mi,
            mutual_info_plugin: mi_plugin,
            mutual_info_stderr: mi_se,
            per_use: mi / 2.0,
            per_use_stderr: mi_se / 2.0,
            delta_hat: 2.0 * acc - 1.0,
            delta_stderr: 2.0 * (acc * (1.0 - acc) / n).sqrt(),
            confusion,
            counts,
        }
    }
}

/// Returns (Miller–Madow corrected MI, plug-in MI, delta-method stderr), all in bits.
/// The corrected value is clamped to `[0, log2 d]`.
pub fn mutual_information_estimate(counts: &[Vec<u64>]) -> (f64, f64, f64) {
    let d = counts.len();
    let n: u64 = counts.iter().flatten().sum();
    if n == 0 {
        return (0.0, 0.0, 0.0);
    }
    let nf = n as f64;
    let px: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64 / nf).collect();
    let py: Vec<f64> = (0..counts[0].len()).map(|y| counts.iter().map(|r| r[y]).sum::<u64>() as f64 / nf).collect();
    let mut mi = 0.0;
    let mut second = 0.0;
    let mut nonzero = 0usize;
    for (x, row) in counts.iter().enumerate() {
        for (y, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            nonzero += 1;
            let p = c as f64 / nf;
            let l = (p / (px[x] * py[y])).log2();
            mi += p * l;
            second += p * l * l;
        }
    }
    let kx = px.iter().filter(|&&p| p > 0.0).count();
    let ky = py.iter().filter(|&&p| p > 0.0).count();
    let correction = (nonzero as f64 - kx as f64 - ky as f64 + 1.0) / (2.0 * nf * std::f64::consts::LN_2);
    let corrected = (mi - correction).clamp(0.0, (d.max(2) as f64).log2());
    let var = ((second - mi * mi) / nf).max(0.0);
    (corrected, mi, var.sqrt())
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// `P(y | i, j, x)`: readout in basis `i` of `|v_x^{(j)}>`.
fn readout_table(spec: &MemoryChannelSpec) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    let d = spec.d;
    let mut table = vec![vec![vec![vec![0.0; d]; d]; 2]; 2];
    for (i, by_i) in table.iter_mut().enumerate() {
        for (j, by_j) in by_i.iter_mut().enumerate() {
            for (x, dist) in by_j.iter_mut().enumerate() {
                let input = DensityMatrix::pure(vec![d], &spec.mubs.basis(j)[x])?;
                let out = spec.readout[i].apply(&input)?;
                let mut total = 0.0;
                for (y, p) in dist.iter_mut().enumerate() {
                    *p = out.matrix()[(y, y)].re.max(0.0);
                    total += *p;
                }
                dist.iter_mut().for_each(|p| *p /= total);
            }
        }
    }
    Ok(table)
}

/// Stream offset separating the unassisted run from the assisted one.
const UNASSISTED_STREAM: u64 = 1 << 40;

fn run_protocol(spec: &MemoryChannelSpec, guess0: [f64; 2], n_symbols: usize, seed: u64, stream_base: u64) -> Result<ProtocolTrace> {
    let table = readout_table(spec)?;
    let d = spec.d;
    let rounds = (0..n_symbols)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + s as u64);
            let i_true: u8 = rng.random_range(0..2);
            let j_guess = if rng.random::<f64>() < guess0[i_true as usize] { 0u8 } else { 1u8 };
            let x = rng.random_range(0..d);
            let y = sample_index(&table[i_true as usize][j_guess as usize][x], &mut rng);
            SymbolRecord {
                round_index: 2 * s as u64 + 1,
                i_true,
                j_guess,
                symbol_sent: x as u32,
                symbol_decoded: y as u32,
            }
        })
        .collect();
    Ok(ProtocolTrace { rounds, seed, trials: n_symbols })
}

/// Protocol with Alice's half of `rho` as the probe and Bob's Helstrom
/// measurement on the channel output together with his half.
pub fn simulate_assisted(spec: &MemoryChannelSpec, rho: &DensityMatrix, n_symbols: usize, seed: u64) -> Result<(ProtocolTrace, RateEstimate)> {
    if rho.dims().first() != Some(&spec.pair.dim_in()) {
        return Err(Error::DimensionMismatch { expected: spec.pair.dim_in(), got: rho.dims().first().copied().unwrap_or(0) });
    }
    let s0 = spec.pair.m0.apply_on_subsystem(rho, 0)?;
    let s1 = spec.pair.m1.apply_on_subsystem(rho, 0)?;
    let h = helstrom_povm(&s0, &s1)?;
    let guess0 = [h.prob_guess0(s0.matrix()), h.prob_guess0(s1.matrix())];
    let trace = run_protocol(spec, guess0, n_symbols, seed, 0)?;
    let est = RateEstimate::from_trace(&trace, spec.d);
    Ok((trace, est))
}

/// Same protocol with a pure probe and no reference system.
pub fn simulate_unassisted(spec: &MemoryChannelSpec, probe: &[C64], n_symbols: usize, seed: u64) -> Result<(ProtocolTrace, RateEstimate)> {
    if probe.len() != spec.pair.dim_in() {
        return Err(Error::DimensionMismatch { expected: spec.pair.dim_in(), got: probe.len() });
    }
    let input = DensityMatrix::pure(vec![probe.len()], probe)?;
    let s0 = spec.pair.m0.apply(&input)?;
    let s1 = spec.pair.m1.apply(&input)?;
    let h = helstrom_povm(&s0, &s1)?;
    let guess0 = [h.prob_guess0(s0.matrix()), h.prob_guess0(s1.matrix())];
    let trace = run_protocol(spec, guess0, n_symbols, seed, UNASSISTED_STREAM)?;
    let est = RateEstimate::from_trace(&trace, spec.d);
    Ok((trace, est))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub delta_hat: f64,
    pub stderr: f64,
    pub epsilon_hat: f64,
    pub epsilon_stderr: f64,
    pub empirical_rate_assisted_per_use: f64,
    pub empirical_rate_assisted_stderr: f64,
    pub empirical_rate_unassisted_per_use: f64,
    pub empirical_rate_unassisted_stderr: f64,
    pub c: f64,
    pub lemma1_upper: f64,
    pub lemma2_lower: f64,
    pub assisted_advantage: bool,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub report: CompareReport,
    pub assisted: RateEstimate,
    pub unassisted: RateEstimate,
}

/// Runs both protocols and adds the analytic bounds. `epsilon` is the
/// unassisted distance of the pair, used for the upper bound; the probe
/// should attain it for the comparison to be meaningful.
pub fn compare(
    spec: &MemoryChannelSpec,
    rho: &DensityMatrix,
    probe: &[C64],
    epsilon: f64,
    n_symbols: usize,
    seed: u64,
    c: Option<f64>,
) -> Result<Comparison> {
    let c = c.unwrap_or(DEFAULT_C_OVERHEAD);
    let (_, assisted) = simulate_assisted(spec, rho, n_symbols, seed)?;
    let (_, unassisted) = simulate_unassisted(spec, probe, n_symbols, seed)?;
    let delta = assisted_distance(&spec.pair, rho)?;
    let d = spec.d as u64;
    let d_tilde = spec.pair.dim_in() as u64;
    let upper = lemma1_upper(epsilon.clamp(0.0, 1.0), d, d_tilde, c)?;
    let lower = lemma2_lower(delta, d)?.bound_per_use;
    let diff = assisted.per_use - unassisted.per_use;
    let combined = assisted.per_use_stderr.hypot(unassisted.per_use_stderr);
    let report = CompareReport {
        d: spec.d,
        trials: n_symbols,
        seed,
        delta,
        epsilon,
        delta_hat: assisted.delta_hat,
        stderr: assisted.delta_stderr,
        epsilon_hat: unassisted.delta_hat,
        epsilon_stderr: unassisted.delta_stderr,
        empirical_rate_assisted_per_use: assisted.per_use,
        empirical_rate_assisted_stderr: assisted.per_use_stderr,
        empirical_rate_unassisted_per_use: unassisted.per_use,
        empirical_rate_unassisted_stderr: unassisted.per_use_stderr,
        c,
        lemma1_upper: upper,
        lemma2_lower: lower,
        assisted_advantage: diff > 3.0 * combined,
    };
    Ok(Comparison { report, assisted, unassisted })
}

/// Pair of constant channels on a qubit, `|0><0|` and `diag(1 − δ, δ)`; its
/// assisted and unassisted distances both equal `δ`.
pub fn constant_pair(delta: f64) -> Result<ChannelPair> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 1]")));
    }
    let a = DensityMatrix::basis(2, 0)?;
    let b = DensityMatrix::new(vec![2], ComplexMatrix::diag_real(&[1.0 - delta, delta]))?;
    ChannelPair::new(QuantumChannel::constant(2, &a)?, QuantumChannel::constant(2, &b)?)
}
