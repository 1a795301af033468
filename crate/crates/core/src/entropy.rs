//! Entropic functionals in bits.

use serde::{Deserialize, Serialize};

use crate::channels::{MubPair, QuantumChannel};
use crate::error::{Error, Result};
use crate::optim::{minimize_on_sphere, SphereSearch};
use crate::qcore::{ComplexMatrix, DensityMatrix, Spectrum, C64, ONE, STATE_TOL, ZERO};

/// Eigenvalues at or below this contribute nothing to an entropy.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Shannon entropy of a probability vector.
pub fn shannon(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > ENTROPY_FLOOR).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

/// Entropy of a spectrum; entries in `(-1e-10, 0)` are clipped to zero.
pub fn spectrum_entropy(spectrum: &Spectrum) -> Result<f64> {
    let min = spectrum.min();
    if min < -STATE_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(shannon(spectrum.values()))
}

pub fn von_neumann(rho: &DensityMatrix) -> Result<f64> {
    spectrum_entropy(&rho.spectrum())
}

fn check_pair(rho: &DensityMatrix, a: usize, b: usize) -> Result<()> {
    let count = rho.dims().len();
    for idx in [a, b] {
        if idx >= count {
            return Err(Error::IndexOutOfRange { index: idx, count });
        }
    }
    if a == b {
        return Err(Error::InvalidParameter("subsystem indices must differ".into()));
    }
    Ok(())
}

fn marginal_entropy(rho: &DensityMatrix, keep: &[usize]) -> Result<f64> {
    von_neumann(&rho.partial_trace(keep)?)
}

/// `S(target, cond) - S(cond)`.
pub fn conditional_entropy(rho: &DensityMatrix, target: usize, cond: usize) -> Result<f64> {
    check_pair(rho, target, cond)?;
    Ok(marginal_entropy(rho, &[target, cond])? - marginal_entropy(rho, &[cond])?)
}

/// `I(A⟩B) = S(B) - S(AB)` for a bipartite state ordered (A, B).
pub fn coherent_information(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite { count: rho.dims().len() });
    }
    Ok(marginal_entropy(rho, &[1])? - von_neumann(rho)?)
}

pub fn mutual_information(rho: &DensityMatrix, a: usize, b: usize) -> Result<f64> {
    check_pair(rho, a, b)?;
    Ok(marginal_entropy(rho, &[a])? + marginal_entropy(rho, &[b])? - marginal_entropy(rho, &[a, b])?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.is_empty() || probs.len() != states.len() {
            return Err(Error::InvalidParameter("ensemble needs matching non-empty probs and states".into()));
        }
        if probs.iter().any(|&p| p < 0.0) || (probs.iter().sum::<f64>() - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidParameter("ensemble probabilities must be nonnegative and sum to 1".into()));
        }
        let dims = states[0].dims();
        if let Some(s) = states.iter().find(|s| s.dims() != dims) {
            return Err(Error::DimensionMismatch { expected: states[0].dim(), got: s.dim() });
        }
        Ok(Self { probs, states })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn average(&self) -> DensityMatrix {
        let n = self.states[0].dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (p, s) in self.probs.iter().zip(&self.states) {
            m.add_assign_scaled(s.matrix(), C64::new(*p, 0.0));
        }
        DensityMatrix::from_trusted(self.states[0].dims().to_vec(), m)
    }
}

/// `S(N(ρ̄)) - Σ p_x S(N(ρ_x))`.
pub fn holevo_of_ensemble(ens: &Ensemble, ch: &QuantumChannel) -> Result<f64> {
    let avg = ch.apply(&ens.average())?;
    let mut conditional = 0.0;
    for (p, s) in ens.probs.iter().zip(&ens.states) {
        if *p > 0.0 {
            conditional += p * von_neumann(&ch.apply(s)?)?;
        }
    }
    Ok(von_neumann(&avg)? - conditional)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SminMethod {
    Analytic,
    Multistart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SminResult {
    pub value: f64,
    pub argmin: Vec<C64>,
    pub method: SminMethod,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Channels whose minimum output entropy has a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnalyticChannel {
    Depolarizing { d: usize, t: f64 },
    TransposeDepolarizing { d: usize, t: f64 },
    TwoPauli { t: f64 },
}

/// Pure inputs of the (transpose) depolarizing channel all give the spectrum
/// `(t + (1-t)/d, (1-t)/d, …)`. The two-Pauli channel maps the Bloch vector
/// `(x, y, z)` to `(tx, (2t-1)y, tz)`, so the least mixed output lies along the
/// longer of the two axis contractions.
pub fn s_min_analytic(kind: AnalyticChannel) -> Result<SminResult> {
    let basis0 = |d: usize| {
        let mut v = vec![ZERO; d];
        v[0] = ONE;
        v
    };
    let (value, argmin) = match kind {
        AnalyticChannel::Depolarizing { d, t } | AnalyticChannel::TransposeDepolarizing { d, t } => {
            if d < 2 {
                return Err(Error::InvalidParameter(format!("d = {d} < 2")));
            }
            let (lo, hi) = match kind {
                AnalyticChannel::Depolarizing { .. } => (-1.0 / ((d * d - 1) as f64), 1.0),
                _ => (-2.0 / ((d * d - 2) as f64), 1.0 / ((d + 1) as f64)),
            };
            if t < lo - STATE_TOL || t > hi + STATE_TOL {
                return Err(Error::InvalidParameter(format!("t = {t} outside [{lo}, {hi}]")));
            }
            let rest = (1.0 - t) / d as f64;
            let mut spec = vec![rest; d];
            spec[0] = t + rest;
            (shannon(&spec), basis0(d))
        }
        AnalyticChannel::TwoPauli { t } => {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!("two-Pauli t = {t} outside [0, 1]")));
            }
            let (along_z, along_y) = (t.abs(), (2.0 * t - 1.0).abs());
            let r = along_z.max(along_y);
            let argmin = if along_z >= along_y {
                basis0(2)
            } else {
                let h = 1.0 / 2f64.sqrt();
                vec![C64::new(h, 0.0), C64::new(0.0, h)]
            };
            (shannon(&[(1.0 + r) / 2.0, (1.0 - r) / 2.0]), argmin)
        }
    };
    Ok(SminResult { value, argmin, method: SminMethod::Analytic, restarts_used: 0, converged: true })
}

pub const DEFAULT_SMIN_RESTARTS: usize = 64;
pub const DEFAULT_SMIN_SEED: u64 = 0x5_314;

pub fn output_entropy(ch: &QuantumChannel, psi: &[C64]) -> f64 {
    let out = ch.apply_matrix(&ComplexMatrix::outer(psi, psi));
    crate::qcore::eig_hermitian(&out).map(|s| shannon(s.values())).unwrap_or(f64::INFINITY)
}

/// Multistart minimization of the output entropy over pure inputs.
pub fn s_min_numeric(ch: &QuantumChannel, restarts: usize, tol: f64) -> SminResult {
    s_min_numeric_seeded(ch, restarts, tol, DEFAULT_SMIN_SEED)
}

pub fn s_min_numeric_seeded(ch: &QuantumChannel, restarts: usize, tol: f64, seed: u64) -> SminResult {
    let opts = SphereSearch { restarts: restarts.max(1), seed, ..Default::default() };
    let res = minimize_on_sphere(ch.dim_in(), |psi| output_entropy(ch, psi), &opts, &[]);
    SminResult {
        value: res.value.max(0.0),
        argmin: res.argmin.clone(),
        method: SminMethod::Multistart,
        restarts_used: opts.restarts,
        converged: res.agrees_within(tol),
    }
}

/// Capacity of the d-ary channel keeping a symbol with probability
/// `(1+δ)/2 + (1-δ)/(2d)` and moving it to each other symbol with `(1-δ)/(2d)`.
pub fn dary_symmetric_capacity(d: usize, delta: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d = {d} < 2")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 1]")));
    }
    let off = (1.0 - delta) / (2.0 * d as f64);
    let mut probs = vec![off; d];
    probs[d - 1] = (1.0 + delta) / 2.0 + off;
    Ok((d as f64).log2() - shannon(&probs))
}

/// `a ≻ b`: every descending partial sum of `a` dominates that of `b`. The
/// shorter spectrum is padded with zeros.
pub fn majorizes(a: &Spectrum, b: &Spectrum) -> Result<bool> {
    for s in [a, b] {
        if s.min() < -STATE_TOL {
            return Err(Error::NotPositive { min_eigenvalue: s.min() });
        }
    }
    let n = a.len().max(b.len());
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..n {
        sa += a.values().get(k).copied().unwrap_or(0.0);
        sb += b.values().get(k).copied().unwrap_or(0.0);
        if sa < sb - STATE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub h0: f64,
    pub h1: f64,
    pub bound: f64,
}

impl UncertaintyReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.h0 + self.h1 >= self.bound - tol
    }
}

/// Outcome entropies of measuring `psi` in each basis of the pair, with the
/// Maassen-Uffink bound `log2 d`.
pub fn mub_uncertainty_check(pair: &MubPair, psi: &[C64]) -> Result<UncertaintyReport> {
    let d = pair.d();
    if psi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: psi.len() });
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let outcome_entropy = |i: usize| {
        let probs: Vec<f64> = pair
            .basis(i)
            .iter()
            .map(|v| v.iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr() / norm)
            .collect();
        shannon(&probs)
    };
    Ok(UncertaintyReport { h0: outcome_entropy(0), h1: outcome_entropy(1), bound: (d as f64).log2() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{make_depolarizing, make_mub_qc, make_two_pauli, standard_mub};
    use crate::qcore::{max_entangled, werner_state};
    use crate::random::{random_density, random_pure_state, random_pure_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// H(1/3, 2/3)
    const H_THIRD: f64 = 0.918_295_834_054_489_7;

    #[test]
    fn h_third_constant() {
        let direct = -(1.0 / 3.0) * (1.0f64 / 3.0).log2() - (2.0 / 3.0) * (2.0f64 / 3.0).log2();
        assert!((direct - H_THIRD).abs() < 1e-15);
        assert!((H_THIRD - 0.918296).abs() < 5e-7);
    }

    #[test]
    fn von_neumann_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        assert!(von_neumann(&random_pure_state(&[3], &mut rng)).unwrap().abs() < 1e-9);
        for d in [2usize, 3, 5] {
            let s = von_neumann(&DensityMatrix::maximally_mixed(vec![d])).unwrap();
            assert!((s - (d as f64).log2()).abs() < 1e-12);
        }
        let w = von_neumann(&werner_state(0.25).unwrap()).unwrap();
        let oracle = shannon(&[0.75, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0]);
        assert!((w - oracle).abs() < 1e-12);
        assert!((w - 1.207_518_749_639_422).abs() < 1e-12);
    }

    #[test]
    fn clipping_rule() {
        let tiny = Spectrum::new(vec![1.0, -5e-11]);
        assert_eq!(spectrum_entropy(&tiny).unwrap(), 0.0);
        let neg = Spectrum::new(vec![1.1, -0.1]);
        assert!(matches!(spectrum_entropy(&neg), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn conditional_entropy_examples() {
        let bell = max_entangled(2).unwrap();
        assert!((conditional_entropy(&bell, 0, 1).unwrap() + 1.0).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(&[2], 2, &mut rng);
        let sigma = random_density(&[3], 3, &mut rng);
        let prod = rho.tensor(&sigma);
        assert!((conditional_entropy(&prod, 0, 1).unwrap() - von_neumann(&rho).unwrap()).abs() < 1e-10);

        let omega = make_depolarizing(2, -1.0 / 3.0).unwrap().apply_on_subsystem(&werner_state(0.25).unwrap(), 0).unwrap();
        assert!(conditional_entropy(&omega, 0, 1).unwrap() < H_THIRD);

        assert!(matches!(conditional_entropy(&bell, 0, 2), Err(Error::IndexOutOfRange { .. })));
        assert!(conditional_entropy(&bell, 1, 1).is_err());
    }

    #[test]
    fn coherent_information_examples() {
        assert!((coherent_information(&max_entangled(2).unwrap()).unwrap() - 1.0).abs() < 1e-10);
        let ci = coherent_information(&werner_state(0.25).unwrap()).unwrap();
        assert!((ci - (1.0 - shannon(&[0.75, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0]))).abs() < 1e-10);
        assert!(ci <= 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let prod = random_pure_state(&[2], &mut rng).tensor(&random_pure_state(&[2], &mut rng));
        assert!(coherent_information(&prod).unwrap().abs() < 1e-9);
        assert!(coherent_information(&DensityMatrix::basis(2, 0).unwrap()).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let prod = random_density(&[2], 2, &mut rng).tensor(&random_density(&[2], 2, &mut rng));
        assert!(mutual_information(&prod, 0, 1).unwrap().abs() < 1e-9);
        assert!((mutual_information(&max_entangled(2).unwrap(), 0, 1).unwrap() - 2.0).abs() < 1e-10);
        let classical = DensityMatrix::new(vec![2, 2], ComplexMatrix::diag_real(&[0.5, 0.0, 0.0, 0.5])).unwrap();
        assert!((mutual_information(&classical, 1, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let id = QuantumChannel::identity(2);
        let single = Ensemble::new(vec![1.0], vec![DensityMatrix::basis(2, 0).unwrap()]).unwrap();
        assert!(holevo_of_ensemble(&single, &id).unwrap().abs() < 1e-12);
        let two = Ensemble::new(vec![0.5, 0.5], vec![DensityMatrix::basis(2, 0).unwrap(), DensityMatrix::basis(2, 1).unwrap()])
            .unwrap();
        assert!((holevo_of_ensemble(&two, &id).unwrap() - 1.0).abs() < 1e-12);
        assert!(Ensemble::new(vec![0.4, 0.4], two.states().to_vec()).is_err());
        let bad = Ensemble::new(vec![0.5, 0.5], vec![DensityMatrix::basis(2, 0).unwrap(), DensityMatrix::basis(3, 1).unwrap()]);
        assert!(bad.is_err());
        let wrong_dim = Ensemble::new(vec![1.0], vec![DensityMatrix::basis(3, 0).unwrap()]).unwrap();
        assert!(holevo_of_ensemble(&wrong_dim, &id).is_err());
    }

    #[test]
    fn s_min_analytic_examples() {
        let dep = s_min_analytic(AnalyticChannel::Depolarizing { d: 2, t: -1.0 / 3.0 }).unwrap();
        assert!((dep.value - H_THIRD).abs() < 1e-12);
        let tp = s_min_analytic(AnalyticChannel::TwoPauli { t: 1.0 / 3.0 }).unwrap();
        assert!((tp.value - H_THIRD).abs() < 1e-12);
        for d in 2..6 {
            assert!(s_min_analytic(AnalyticChannel::Depolarizing { d, t: 1.0 }).unwrap().value.abs() < 1e-12);
        }
        assert!(s_min_analytic(AnalyticChannel::TwoPauli { t: 1.5 }).is_err());
        assert!(s_min_analytic(AnalyticChannel::Depolarizing { d: 1, t: 0.0 }).is_err());
        assert!(s_min_analytic(AnalyticChannel::Depolarizing { d: 2, t: -0.5 }).is_err());
    }

    #[test]
    fn s_min_numeric_examples() {
        let id = s_min_numeric(&QuantumChannel::identity(2), 8, 1e-6);
        assert!(id.value < 1e-9 && id.converged);
        let dep = s_min_numeric(&make_depolarizing(2, -1.0 / 3.0).unwrap(), 8, 1e-6);
        assert!((dep.value - H_THIRD).abs() < 1e-6);
        let qc = s_min_numeric(&make_mub_qc(&standard_mub(3).unwrap(), 1).unwrap(), 16, 1e-6);
        assert!(qc.value < 1e-6, "{}", qc.value);
        // value never exceeds any sampled output entropy
        let ch = make_two_pauli(0.2).unwrap();
        let res = s_min_numeric(&ch, 16, 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let psi = random_pure_vector(2, &mut rng);
            assert!(res.value <= output_entropy(&ch, &psi) + 1e-12);
        }
        let exact = s_min_analytic(AnalyticChannel::TwoPauli { t: 0.2 }).unwrap().value;
        assert!((res.value - exact).abs() < 1e-6);
    }

    #[test]
    fn dary_capacity_examples() {
        for d in [2usize, 3, 16, 64] {
            assert!((dary_symmetric_capacity(d, 1.0).unwrap() - (d as f64).log2()).abs() < 1e-12);
            let off = 1.0 / (2.0 * d as f64);
            let mut probs = vec![off; d];
            probs[0] = 0.5 + off;
            let oracle = (d as f64).log2() - shannon(&probs);
            assert!((dary_symmetric_capacity(d, 0.0).unwrap() - oracle).abs() < 1e-12);
            assert!(oracle > 0.0);
        }
        assert!((dary_symmetric_capacity(2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(dary_symmetric_capacity(1, 0.5).is_err());
        assert!(dary_symmetric_capacity(4, 1.5).is_err());
    }

    #[test]
    fn majorization_examples() {
        let pure = Spectrum::new(vec![1.0, 0.0]);
        let mixed = Spectrum::new(vec![0.5, 0.5]);
        assert!(majorizes(&pure, &mixed).unwrap());
        assert!(!majorizes(&mixed, &pure).unwrap());
        let global = Spectrum::new(vec![0.7, 0.1, 0.1, 0.1]);
        assert!(!majorizes(&mixed, &global).unwrap());
        assert!(majorizes(&Spectrum::new(vec![1.0]), &global).unwrap());
        assert!(majorizes(&Spectrum::new(vec![-0.2, 1.2]), &global).is_err());
    }

    #[test]
    fn uncertainty_examples() {
        let pair = standard_mub(4).unwrap();
        let r = mub_uncertainty_check(&pair, &pair.basis(0)[2]).unwrap();
        assert!(r.h0.abs() < 1e-12 && (r.h1 - 2.0).abs() < 1e-12);
        let psi: Vec<C64> = vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.3, 0.0), C64::new(0.0, 0.0)];
        assert!(mub_uncertainty_check(&pair, &psi).unwrap().holds(1e-9));
        assert!(mub_uncertainty_check(&pair, &psi[..2]).is_err());
    }
}
