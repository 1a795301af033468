//! Channel discrimination distances and the capacity bounds they feed.
//!
//! `ε = ½ max_ψ ‖m0(ψ) − m1(ψ)‖₁` is the best single-shot bias without a
//! reference system; `δ = ½ ‖(m0 ⊗ id)(ρ) − (m1 ⊗ id)(ρ)‖₁` is the bias with
//! a fixed shared probe `ρ`. In the memory channel protocol a discrimination
//! bias is converted into a d-ary symmetric channel, so `δ > ε` grows into a
//! rate gap proportional to `log d`.
//!
//! Rates are reported per use of the memory channel. One MUB symbol costs two
//! uses (probe round plus payload round), so per-symbol figures are halved in
//! the per-use fields.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{standard_mub, QuantumChannel};
use crate::entropy::dary_symmetric_capacity;
use crate::error::{Error, Result};
use crate::format::round_sig;
use crate::optim::{minimize_on_sphere, SphereSearch};
use crate::qcore::{eigh, trace_norm, ComplexMatrix, DensityMatrix, C64, ONE, ZERO};
use crate::random::random_unitary;

/// Default constant standing in for the `O(log d̃)` overhead of the unassisted bound.
pub const DEFAULT_C_OVERHEAD: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPair {
    pub m0: QuantumChannel,
    pub m1: QuantumChannel,
    pub epsilon: Option<f64>,
    /// Half assisted trace distance keyed by a probe-state label.
    pub delta_by_state: BTreeMap<String, f64>,
}

impl ChannelPair {
    pub fn new(m0: QuantumChannel, m1: QuantumChannel) -> Result<Self> {
        if m0.dim_in() != m1.dim_in() {
            return Err(Error::DimensionMismatch { expected: m0.dim_in(), got: m1.dim_in() });
        }
        if m0.dim_out() != m1.dim_out() {
            return Err(Error::DimensionMismatch { expected: m0.dim_out(), got: m1.dim_out() });
        }
        Ok(Self { m0, m1, epsilon: None, delta_by_state: BTreeMap::new() })
    }

    pub fn dim_in(&self) -> usize {
        self.m0.dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.m0.dim_out()
    }

    /// Half trace distance of the two outputs on a pure input.
    pub fn bias_at(&self, psi: &[C64]) -> f64 {
        let x = ComplexMatrix::outer(psi, psi);
        half_trace_distance(&self.m0.apply_matrix(&x), &self.m1.apply_matrix(&x))
    }

    /// Half trace distance of the outputs on an arbitrary input state.
    pub fn bias_at_state(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim_in() {
            return Err(Error::DimensionMismatch { expected: self.dim_in(), got: rho.dim() });
        }
        Ok(half_trace_distance(&self.m0.apply_matrix(rho.matrix()), &self.m1.apply_matrix(rho.matrix())))
    }
}

fn half_trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * trace_norm(&(a - b)).expect("channel outputs are Hermitian")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnassistedDistance {
    pub epsilon: f64,
    /// Pure input attaining `epsilon`.
    pub probe: Vec<C64>,
    pub converged: bool,
}

pub const UNASSISTED_RESTARTS_SMALL: usize = 256;
pub const UNASSISTED_RESTARTS_LARGE: usize = 64;
pub const UNASSISTED_SEED: u64 = 0xd15c;

/// `ε` by multistart maximization over pure inputs; the trace distance is
/// convex, so pure inputs suffice.
pub fn unassisted_distance(pair: &ChannelPair) -> UnassistedDistance {
    unassisted_distance_seeded(pair, UNASSISTED_SEED)
}

pub fn unassisted_distance_seeded(pair: &ChannelPair, seed: u64) -> UnassistedDistance {
    unassisted_distance_with(pair, None, seed)
}

/// `restarts = None` picks 256 for inputs up to dimension 4 and 64 above.
pub fn unassisted_distance_with(pair: &ChannelPair, restarts: Option<usize>, seed: u64) -> UnassistedDistance {
    let restarts = restarts.unwrap_or(if pair.dim_in() <= 4 { UNASSISTED_RESTARTS_SMALL } else { UNASSISTED_RESTARTS_LARGE });
    let opts = SphereSearch { restarts, seed, ..Default::default() };
    let res = minimize_on_sphere(pair.dim_in(), |psi| -pair.bias_at(psi), &opts, &[]);
    UnassistedDistance { epsilon: (-res.value).clamp(0.0, 1.0), probe: res.argmin.clone(), converged: res.agrees_within(1e-6) }
}

/// `δ = ½‖(m0 ⊗ id)(ρ) − (m1 ⊗ id)(ρ)‖₁` with the channels acting on subsystem 0.
pub fn assisted_distance(pair: &ChannelPair, rho: &DensityMatrix) -> Result<f64> {
    if rho.dims().is_empty() || rho.dims()[0] != pair.dim_in() {
        return Err(Error::DimensionMismatch { expected: pair.dim_in(), got: rho.dims().first().copied().unwrap_or(0) });
    }
    let a = pair.m0.apply_on_subsystem(rho, 0)?;
    let b = pair.m1.apply_on_subsystem(rho, 0)?;
    Ok(half_trace_distance(a.matrix(), b.matrix()).clamp(0.0, 1.0))
}

/// Two-outcome measurement `{Q, I − Q}` with `Q` the projector onto the
/// positive eigenspace of `s0 − s1`; outcome 0 means "s0".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelstromMeasurement {
    pub q: ComplexMatrix,
    /// Success probability for equal priors.
    pub success_probability: f64,
}

impl HelstromMeasurement {
    /// Probability of outcome 0 (guess "s0") on `state`.
    pub fn prob_guess0(&self, state: &ComplexMatrix) -> f64 {
        (&self.q * state).trace().re.clamp(0.0, 1.0)
    }
}

pub fn helstrom_povm(s0: &DensityMatrix, s1: &DensityMatrix) -> Result<HelstromMeasurement> {
    if s0.dim() != s1.dim() {
        return Err(Error::DimensionMismatch { expected: s0.dim(), got: s1.dim() });
    }
    let diff = s0.matrix() - s1.matrix();
    let eig = eigh(&diff)?;
    let n = s0.dim();
    let mut q = ComplexMatrix::zeros(n, n);
    for (l, v) in eig.values.iter().zip(&eig.vectors) {
        if *l > 0.0 {
            q.add_assign_scaled(&ComplexMatrix::outer(v, v), ONE);
        }
    }
    let p0 = (&q * s0.matrix()).trace().re;
    let p1 = 1.0 - (&q * s1.matrix()).trace().re;
    Ok(HelstromMeasurement { q, success_probability: 0.5 * (p0 + p1) })
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Unassisted feedback product capacity bound per use:
/// `(1+ε)/4 · log d + c · log d̃`.
pub fn lemma1_upper(epsilon: f64, d: u64, d_tilde: u64, c: f64) -> Result<f64> {
    check_unit("epsilon", epsilon)?;
    if d < 2 || d_tilde < 1 || c < 0.0 {
        return Err(Error::InvalidParameter(format!("need d >= 2, d_tilde >= 1, c >= 0 (got {d}, {d_tilde}, {c})")));
    }
    Ok((1.0 + epsilon) / 4.0 * (d as f64).log2() + c * (d_tilde as f64).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Bound {
    /// `(1+δ)/2 · log d − 1`
    pub bound_per_symbol: f64,
    /// Exact d-ary symmetric capacity.
    pub exact_per_symbol: f64,
    pub bound_per_use: f64,
    pub exact_per_use: f64,
}

/// Assisted lower bound from the Helstrom-feedback-MUB protocol.
pub fn lemma2_lower(delta: f64, d: u64) -> Result<Lemma2Bound> {
    check_unit("delta", delta)?;
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d = {d} < 2")));
    }
    let bound = (1.0 + delta) / 2.0 * (d as f64).log2() - 1.0;
    let exact = dary_capacity_closed_form(d, delta);
    Ok(Lemma2Bound { bound_per_symbol: bound, exact_per_symbol: exact, bound_per_use: bound / 2.0, exact_per_use: exact / 2.0 })
}

/// Same value as [`dary_symmetric_capacity`] without materializing `d` probabilities.
fn dary_capacity_closed_form(d: u64, delta: f64) -> f64 {
    if d <= 4096 {
        return dary_symmetric_capacity(d as usize, delta).expect("validated inputs");
    }
    let df = d as f64;
    let off = (1.0 - delta) / (2.0 * df);
    let keep = (1.0 + delta) / 2.0 + off;
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    df.log2() - ((df - 1.0) * term(off) + term(keep))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d: u64,
    pub d_tilde: u64,
    pub c: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lemma1_upper_per_use: f64,
    pub lemma2_bound_per_symbol: f64,
    pub lemma2_exact_per_symbol: f64,
    pub lemma2_lower_per_use: f64,
    pub gap_per_use: f64,
}

impl BoundReport {
    /// Copy with every float rounded to the file precision.
    pub fn rounded(&self) -> Self {
        Self {
            c: round_sig(self.c),
            epsilon: round_sig(self.epsilon),
            delta: round_sig(self.delta),
            lemma1_upper_per_use: round_sig(self.lemma1_upper_per_use),
            lemma2_bound_per_symbol: round_sig(self.lemma2_bound_per_symbol),
            lemma2_exact_per_symbol: round_sig(self.lemma2_exact_per_symbol),
            lemma2_lower_per_use: round_sig(self.lemma2_lower_per_use),
            gap_per_use: round_sig(self.gap_per_use),
            ..self.clone()
        }
    }
}

/// Assisted lower bound minus unassisted upper bound, both per use.
pub fn advantage_gap(epsilon: f64, delta: f64, d: u64, d_tilde: u64, c: f64) -> Result<BoundReport> {
    let upper = lemma1_upper(epsilon, d, d_tilde, c)?;
    let lower = lemma2_lower(delta, d)?;
    Ok(BoundReport {
        d,
        d_tilde,
        c,
        epsilon,
        delta,
        lemma1_upper_per_use: upper,
        lemma2_bound_per_symbol: lower.bound_per_symbol,
        lemma2_exact_per_symbol: lower.exact_per_symbol,
        lemma2_lower_per_use: lower.bound_per_use,
        gap_per_use: lower.bound_per_use - upper,
    })
}

/// Per-use gap as a function of `log2 d` (valid for non-integer exponents too).
pub fn gap_at_log2_d(epsilon: f64, delta: f64, log2_d: f64, d_tilde: u64, c: f64) -> f64 {
    ((1.0 + delta) / 2.0 * log2_d - 1.0) / 2.0 - ((1.0 + epsilon) / 4.0 * log2_d + c * (d_tilde as f64).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinD {
    /// Smallest power of two `d = 2^log2_d` with a strictly positive gap.
    Finite { log2_d: u64 },
    Unbounded,
}

impl MinD {
    pub fn d(&self) -> Option<u64> {
        match self {
            MinD::Finite { log2_d } if *log2_d < 64 => Some(1u64 << log2_d),
            _ => None,
        }
    }
}

/// Smallest power-of-two `d ≥ 2` with a positive per-use gap. The gap is
/// affine in `log2 d` with slope `(δ − ε)/4`, so it is unbounded exactly when
/// `δ ≤ ε`.
pub fn min_d_for_gap(epsilon: f64, delta: f64, d_tilde: u64, c: f64) -> Result<MinD> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    if c < 0.0 || d_tilde < 1 {
        return Err(Error::InvalidParameter("need c >= 0 and d_tilde >= 1".into()));
    }
    if delta <= epsilon {
        return Ok(MinD::Unbounded);
    }
    let offset = 0.5 + c * (d_tilde as f64).log2();
    let root = offset * 4.0 / (delta - epsilon);
    if !root.is_finite() || root > 1e15 {
        return Ok(MinD::Unbounded);
    }
    let mut k = (root.floor() as u64).max(1);
    while k > 1 && gap_at_log2_d(epsilon, delta, (k - 1) as f64, d_tilde, c) > 0.0 {
        k -= 1;
    }
    while gap_at_log2_d(epsilon, delta, k as f64, d_tilde, c) <= 0.0 {
        k += 1;
    }
    Ok(MinD::Finite { log2_d: k })
}

/// Result of [`search_eb_pair`]: two measure-and-prepare channels that output
/// the measurement outcome as a computational basis state.
#[derive(Clone, Debug)]
pub struct EbPairSearch {
    pub pair: ChannelPair,
    pub povm0: Vec<ComplexMatrix>,
    pub povm1: Vec<ComplexMatrix>,
    pub epsilon: f64,
    pub delta: f64,
}

impl EbPairSearch {
    pub fn advantage(&self) -> f64 {
        self.delta - self.epsilon
    }
}

/// Exact `ε` for two POVMs whose channels write the outcome into orthogonal
/// flags: `½ max_ψ Σ_a |<ψ|G_a|ψ>|` with `G_a = E0_a − E1_a`, which equals
/// `½ max_s λ_max(Σ_a s_a G_a)` over sign vectors `s`.
pub fn qc_pair_epsilon(povm0: &[ComplexMatrix], povm1: &[ComplexMatrix]) -> f64 {
    let g: Vec<ComplexMatrix> = povm0.iter().zip(povm1).map(|(a, b)| a - b).collect();
    let n = g.len();
    let mut best: f64 = 0.0;
    // s and -s give λ_max and -λ_min of the same operator; fix s_0 = +1 and take both.
    for mask in 0..(1u64 << (n - 1)) {
        let mut sum = g[0].clone();
        for (a, ga) in g.iter().enumerate().skip(1) {
            let s = if mask >> (a - 1) & 1 == 1 { -1.0 } else { 1.0 };
            sum.add_assign_scaled(ga, C64::new(s, 0.0));
        }
        let eig = eigh(&sum).expect("Hermitian");
        best = best.max(eig.values[0]).max(-eig.values[eig.values.len() - 1]);
    }
    (0.5 * best).clamp(0.0, 1.0)
}

/// `δ` for the same flag-output channels: `½ Σ_a ‖Tr_A[(G_a ⊗ I) ρ]‖₁`.
pub fn qc_pair_delta(povm0: &[ComplexMatrix], povm1: &[ComplexMatrix], rho: &DensityMatrix) -> f64 {
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let m = rho.matrix();
    let mut total = 0.0;
    for (e0, e1) in povm0.iter().zip(povm1) {
        let g = e0 - e1;
        let mut red = ComplexMatrix::zeros(db, db);
        for b in 0..db {
            for b2 in 0..db {
                let mut acc = ZERO;
                for a in 0..da {
                    for a2 in 0..da {
                        acc += g[(a2, a)] * m[(a * db + b, a2 * db + b2)];
                    }
                }
                red[(b, b2)] = acc;
            }
        }
        total += trace_norm(&red).expect("Hermitian");
    }
    (0.5 * total).clamp(0.0, 1.0)
}

fn flag_channel(povm: &[ComplexMatrix], label: String) -> Result<QuantumChannel> {
    let n = povm.len();
    let outputs = (0..n).map(|a| DensityMatrix::basis(n, a)).collect::<Result<Vec<_>>>()?;
    QuantumChannel::measure_prepare(povm, &outputs, label)
}

/// POVM `E_a = S^{-1/2} A_a^† A_a S^{-1/2}` with `S = Σ A_a^† A_a`.
fn povm_from_generators(gens: &[ComplexMatrix]) -> Option<Vec<ComplexMatrix>> {
    let dim = gens[0].cols();
    let mut s = ComplexMatrix::zeros(dim, dim);
    let products: Vec<ComplexMatrix> = gens.iter().map(|a| &a.adjoint() * a).collect();
    for p in &products {
        s.add_assign_scaled(p, ONE);
    }
    let eig = eigh(&s).ok()?;
    if eig.values.last().copied().unwrap_or(0.0) < 1e-10 {
        return None;
    }
    let mut inv_sqrt = ComplexMatrix::zeros(dim, dim);
    for (l, v) in eig.values.iter().zip(&eig.vectors) {
        inv_sqrt.add_assign_scaled(&ComplexMatrix::outer(v, v), C64::new(1.0 / l.sqrt(), 0.0));
    }
    Some(products.iter().map(|p| &(&inv_sqrt * p) * &inv_sqrt).collect())
}

/// Measure in one of two bases picked at random; channel 1 relabels outcome
/// `k` of each basis as `k + 1 mod d`. Needs `2d ≤ d²` outcomes.
fn flip_pair_generators(u: &ComplexMatrix, v: &ComplexMatrix) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
    let d = u.rows();
    let n_out = d * d;
    let col = |m: &ComplexMatrix, k: usize| (0..d).map(|r| m[(r, k)]).collect::<Vec<C64>>();
    let mut g0 = vec![ComplexMatrix::zeros(d, d); n_out];
    let mut g1 = vec![ComplexMatrix::zeros(d, d); n_out];
    let h = 1.0 / 2f64.sqrt();
    for (b, basis) in [u, v].iter().enumerate() {
        for k in 0..d {
            let vk = col(basis, k);
            let proj = ComplexMatrix::outer(&vk, &vk).scale_real(h);
            g0[b * d + k] = proj.clone();
            g1[b * d + (k + 1) % d] = proj;
        }
    }
    // Remaining outcomes get a tiny generator so the POVM map stays smooth.
    for a in 2 * d..n_out {
        g0[a] = ComplexMatrix::identity(d).scale_real(1e-3);
        g1[a] = ComplexMatrix::identity(d).scale_real(1e-3);
    }
    (g0, g1)
}

fn random_generators<R: Rng>(d: usize, n: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    (0..n)
        .map(|_| ComplexMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
        .collect()
}

fn perturb<R: Rng>(gens: &[ComplexMatrix], scale: f64, rng: &mut R) -> Vec<ComplexMatrix> {
    gens.iter()
        .map(|g| {
            let noise = ComplexMatrix::from_fn(g.rows(), g.cols(), |_, _| {
                C64::new(rng.sample::<f64, _>(StandardNormal) * scale, rng.sample::<f64, _>(StandardNormal) * scale)
            });
            g + &noise
        })
        .collect()
}

/// Measure in the computational or Fourier basis with equal probability and
/// output the basis label and outcome as a flag; `m1` relabels outcome `k` as
/// `k + 1 mod d`. On a maximally entangled probe the two are perfectly
/// distinguishable, while `ε = 1/√2` at `d = 2`.
pub fn basis_flip_pair(d: usize) -> Result<ChannelPair> {
    let mub = standard_mub(d)?;
    let n = 2 * d;
    let mut povm0 = Vec::with_capacity(n);
    let mut povm1 = vec![ComplexMatrix::zeros(d, d); n];
    for b in 0..2 {
        for k in 0..d {
            let v = &mub.basis(b)[k];
            let e = ComplexMatrix::outer(v, v).scale_real(0.5);
            povm1[b * d + (k + 1) % d] = e.clone();
            povm0.push(e);
        }
    }
    let m0 = flag_channel(&povm0, format!("basis_flip_m0(d={d})"))?;
    let m1 = flag_channel(&povm1, format!("basis_flip_m1(d={d})"))?;
    ChannelPair::new(m0, m1)
}

const EB_SEARCH_STARTS: usize = 8;

/// Alternating hill climb over pairs of flag-output measure-and-prepare
/// channels with `dim_in²` outcomes, maximizing `δ(ρ) − ε`. Deterministic for
/// a fixed seed; no optimality guarantee.
pub fn search_eb_pair(rho: &DensityMatrix, iters: usize, seed: u64) -> Result<EbPairSearch> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite { count: rho.dims().len() });
    }
    let d = rho.dims()[0];
    let n_out = d * d;
    let score = |g0: &[ComplexMatrix], g1: &[ComplexMatrix]| -> Option<(f64, Vec<ComplexMatrix>, Vec<ComplexMatrix>)> {
        let e0 = povm_from_generators(g0)?;
        let e1 = povm_from_generators(g1)?;
        let s = qc_pair_delta(&e0, &e1, rho) - qc_pair_epsilon(&e0, &e1);
        Some((s, e0, e1))
    };
    let fourier = {
        let pair = standard_mub(d)?;
        ComplexMatrix::from_fn(d, d, |r, c| pair.basis(1)[c][r])
    };
    let runs: Vec<(f64, Vec<ComplexMatrix>, Vec<ComplexMatrix>)> = (0..EB_SEARCH_STARTS)
        .into_par_iter()
        .filter_map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(start as u64);
            let (mut g0, mut g1) = match start {
                0 => flip_pair_generators(&ComplexMatrix::identity(d), &fourier),
                s if s % 2 == 1 => {
                    let u = random_unitary(d, &mut rng);
                    let v = &u * &fourier;
                    flip_pair_generators(&u, &v)
                }
                _ => (random_generators(d, n_out, &mut rng), random_generators(d, n_out, &mut rng)),
            };
            let (mut best, mut e0, mut e1) = score(&g0, &g1)?;
            let mut step = 0.3;
            let mut fails = 0;
            for it in 0..iters {
                let (c0, c1) =
                    if it % 2 == 0 { (perturb(&g0, step, &mut rng), g1.clone()) } else { (g0.clone(), perturb(&g1, step, &mut rng)) };
                match score(&c0, &c1) {
                    Some((s, ne0, ne1)) if s > best => {
                        best = s;
                        g0 = c0;
                        g1 = c1;
                        e0 = ne0;
                        e1 = ne1;
                        fails = 0;
                    }
                    _ => {
                        fails += 1;
                        if fails >= 6 {
                            step = (step * 0.6).max(1e-6);
                            fails = 0;
                        }
                    }
                }
            }
            Some((best, e0, e1))
        })
        .collect();
    let (_, povm0, povm1) = runs
        .into_iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.0.total_cmp(&b.0).then(ib.cmp(ia)))
        .map(|(_, r)| r)
        .ok_or_else(|| Error::InvalidParameter("no valid POVM pair found".into()))?;
    let m0 = flag_channel(&povm0, format!("eb_search_m0(d={d},n_out={n_out},seed={seed})"))?;
    let m1 = flag_channel(&povm1, format!("eb_search_m1(d={d},n_out={n_out},seed={seed})"))?;
    let mut pair = ChannelPair::new(m0, m1)?;
    let epsilon = qc_pair_epsilon(&povm0, &povm1);
    let delta = assisted_distance(&pair, rho)?;
    pair.epsilon = Some(epsilon);
    pair.delta_by_state.insert("probe".into(), delta);
    Ok(EbPairSearch { pair, povm0, povm1, epsilon, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{make_mub_qc, standard_mub, QuantumChannel};
    use crate::qcore::{max_entangled, werner_state};
    use crate::random::{random_density, random_pure_vector, random_separable};

    fn constant(k: usize) -> QuantumChannel {
        QuantumChannel::constant(2, &DensityMatrix::basis(2, k).unwrap()).unwrap()
    }

    fn mub_pair(d: usize) -> ChannelPair {
        let p = standard_mub(d).unwrap();
        ChannelPair::new(make_mub_qc(&p, 0).unwrap(), make_mub_qc(&p, 1).unwrap()).unwrap()
    }

    #[test]
    fn signature_checked() {
        let p3 = standard_mub(3).unwrap();
        assert!(ChannelPair::new(QuantumChannel::identity(2), make_mub_qc(&p3, 0).unwrap()).is_err());
    }

    #[test]
    fn unassisted_examples() {
        let same = ChannelPair::new(QuantumChannel::identity(2), QuantumChannel::identity(2)).unwrap();
        assert!(unassisted_distance(&same).epsilon < 1e-12);
        let orth = ChannelPair::new(constant(0), constant(1)).unwrap();
        assert!((unassisted_distance(&orth).epsilon - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mub_pair_epsilon_against_dense_grid() {
        // Bloch vector r gives outputs diag((1±z)/2) and diag((1±x)/2): ε = max |z − x|/2 = 1/√2.
        let pair = mub_pair(2);
        let res = unassisted_distance(&pair);
        let mut grid_best: f64 = 0.0;
        let n = 100;
        for i in 0..n {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            for j in 0..n {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let psi = [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)];
                grid_best = grid_best.max(pair.bias_at(&psi));
            }
        }
        assert!(res.epsilon >= grid_best - 1e-12);
        assert!(res.epsilon - grid_best < 1e-3);
        assert!((res.epsilon - 0.5f64.sqrt()).abs() < 1e-9, "{}", res.epsilon);
        assert!(res.converged);
    }

    #[test]
    fn assisted_examples() {
        let same = ChannelPair::new(QuantumChannel::identity(2), QuantumChannel::identity(2)).unwrap();
        assert!(assisted_distance(&same, &werner_state(0.2).unwrap()).unwrap() < 1e-12);
        let orth = ChannelPair::new(constant(0), constant(1)).unwrap();
        assert!((assisted_distance(&orth, &werner_state(0.2).unwrap()).unwrap() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let pair = mub_pair(2);
        let eps = unassisted_distance(&pair).epsilon;
        let a = random_density(&[2], 2, &mut rng);
        let b = random_density(&[3], 3, &mut rng);
        let delta = assisted_distance(&pair, &a.tensor(&b)).unwrap();
        assert!(delta <= eps + 1e-9);
        assert!((delta - pair.bias_at_state(&a).unwrap()).abs() < 1e-12);
        assert!(assisted_distance(&pair, &max_entangled(3).unwrap()).is_err());
    }

    #[test]
    fn helstrom_examples() {
        let s0 = DensityMatrix::basis(2, 0).unwrap();
        let s1 = DensityMatrix::basis(2, 1).unwrap();
        assert!((helstrom_povm(&s0, &s1).unwrap().success_probability - 1.0).abs() < 1e-12);
        assert!((helstrom_povm(&s0, &s0).unwrap().success_probability - 0.5).abs() < 1e-12);
        assert!(helstrom_povm(&s0, &DensityMatrix::basis(3, 0).unwrap()).is_err());

        let pair = mub_pair(2);
        for q in [0.0, 0.2, 0.5] {
            let rho = werner_state(q).unwrap();
            let a = pair.m0.apply_on_subsystem(&rho, 0).unwrap();
            let b = pair.m1.apply_on_subsystem(&rho, 0).unwrap();
            let delta = assisted_distance(&pair, &rho).unwrap();
            let h = helstrom_povm(&a, &b).unwrap();
            assert!((h.success_probability - 0.5 * (1.0 + delta)).abs() < 1e-10);
        }
    }

    #[test]
    fn lemma1_examples() {
        let l = lemma1_upper(1.0, 1024, 4, 0.5).unwrap();
        assert!((l - (5.0 + 1.0)).abs() < 1e-12);
        assert!((lemma1_upper(0.0, 256, 2, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((lemma1_upper(0.2, 1024, 2, 1.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(lemma1_upper(1.2, 4, 2, 1.0).is_err());
        assert!(lemma1_upper(0.5, 4, 2, -1.0).is_err());
    }

    #[test]
    fn lemma2_examples() {
        let b = lemma2_lower(1.0, 64).unwrap();
        assert!((b.bound_per_symbol - 5.0).abs() < 1e-12);
        assert!((b.exact_per_symbol - 6.0).abs() < 1e-12);
        assert!((b.bound_per_use - 2.5).abs() < 1e-12);
        let z = lemma2_lower(0.0, 2).unwrap();
        assert!((z.bound_per_symbol + 0.5).abs() < 1e-12);
        assert!(z.exact_per_symbol >= 0.0 && z.bound_per_symbol <= z.exact_per_symbol);
        assert!((lemma2_lower(0.5, 1024).unwrap().bound_per_symbol - 6.5).abs() < 1e-12);
        assert!(lemma2_lower(-0.1, 4).is_err());
    }

    #[test]
    fn closed_form_capacity_matches_vector_form() {
        for delta in [0.0, 0.3, 1.0] {
            let df = 8192.0f64;
            let off = (1.0 - delta) / (2.0 * df);
            let keep = (1.0 + delta) / 2.0 + off;
            let mut probs = vec![off; 8192];
            probs[0] = keep;
            let oracle = df.log2() - crate::entropy::shannon(&probs);
            assert!((dary_capacity_closed_form(8192, delta) - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn gap_examples() {
        for k in 1..=40u32 {
            let r = advantage_gap(0.3, 0.3, 1u64 << k, 2, 1.0).unwrap();
            assert!(r.gap_per_use <= 0.0);
        }
        assert_eq!(min_d_for_gap(0.4, 0.4, 2, 1.0).unwrap(), MinD::Unbounded);
        // (δ − ε)/4 · k − 1/2 − c·log2 d̃ > 0 ⇔ k > 4(1/2 + 1)/0.2 = 30
        assert_eq!(min_d_for_gap(0.4, 0.6, 2, 1.0).unwrap(), MinD::Finite { log2_d: 31 });
        // δ = 1, ε = 0, c = 0: k/4 − 1/2 > 0 ⇔ k > 2
        let md = min_d_for_gap(0.0, 1.0, 2, 0.0).unwrap();
        assert_eq!(md, MinD::Finite { log2_d: 3 });
        assert_eq!(md.d(), Some(8));
    }

    #[test]
    fn min_d_matches_scan_and_grows_with_c() {
        let scan = |eps: f64, delta: f64, dt: u64, c: f64| {
            (1..=4000u64).find(|&k| gap_at_log2_d(eps, delta, k as f64, dt, c) > 0.0)
        };
        for (eps, delta) in [(0.0, 1.0), (0.1, 0.9), (0.5, 0.55), (0.7071, 1.0)] {
            let mut prev = 0;
            for c in [0.0, 0.5, 1.0, 2.0, 4.0] {
                let MinD::Finite { log2_d } = min_d_for_gap(eps, delta, 4, c).unwrap() else { panic!() };
                assert_eq!(Some(log2_d), scan(eps, delta, 4, c));
                assert!(log2_d >= prev);
                prev = log2_d;
            }
        }
    }

    #[test]
    fn qc_epsilon_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let e0 = povm_from_generators(&random_generators(2, 4, &mut rng)).unwrap();
            let e1 = povm_from_generators(&random_generators(2, 4, &mut rng)).unwrap();
            let exact = qc_pair_epsilon(&e0, &e1);
            let pair = ChannelPair::new(flag_channel(&e0, "a".into()).unwrap(), flag_channel(&e1, "b".into()).unwrap()).unwrap();
            let ms = unassisted_distance(&pair).epsilon;
            assert!(ms <= exact + 1e-12);
            assert!(exact - ms < 1e-6, "exact {exact} vs multistart {ms}");
            for _ in 0..50 {
                assert!(pair.bias_at(&random_pure_vector(2, &mut rng)) <= exact + 1e-12);
            }
            let rho = random_density(&[2, 2], 4, &mut rng);
            assert!((qc_pair_delta(&e0, &e1, &rho) - assisted_distance(&pair, &rho).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn basis_flip_pair_separates_bell_state() {
        let pair = basis_flip_pair(2).unwrap();
        assert!((assisted_distance(&pair, &max_entangled(2).unwrap()).unwrap() - 1.0).abs() < 1e-10);
        let eps = unassisted_distance(&pair);
        assert!((eps.epsilon - 0.5f64.sqrt()).abs() < 1e-9, "{}", eps.epsilon);
        // the plain MUB qc pair does not separate it
        let mub = mub_pair(2);
        let delta = assisted_distance(&mub, &max_entangled(2).unwrap()).unwrap();
        assert!((delta - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn eb_search_on_bell_state() {
        let bell = max_entangled(2).unwrap();
        let res = search_eb_pair(&bell, 60, 7).unwrap();
        assert!(res.advantage() > 0.25, "δ − ε = {}", res.advantage());
        assert!(res.pair.m0.is_measure_prepare() && res.pair.m1.is_measure_prepare());
        let again = search_eb_pair(&bell, 60, 7).unwrap();
        assert_eq!(res.epsilon.to_bits(), again.epsilon.to_bits());
        assert_eq!(res.delta.to_bits(), again.delta.to_bits());
        assert_eq!(res.povm0, again.povm0);
    }

    #[test]
    fn eb_search_on_separable_states_finds_no_advantage() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..3 {
            let sep = random_separable(2, 2, 4, &mut rng);
            let res = search_eb_pair(&sep, 40, 3).unwrap();
            assert!(res.delta <= res.epsilon + 1e-9, "δ {} ε {}", res.delta, res.epsilon);
        }
    }
}
