//! Seeded samplers for states and inputs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::qcore::{ComplexMatrix, DensityMatrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in `C^dim`.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityMatrix {
    let n = dims.iter().product();
    let psi = random_pure_vector(n, rng);
    DensityMatrix::from_trusted(dims.to_vec(), ComplexMatrix::outer(&psi, &psi))
}

/// Ginibre-distributed mixed state of the given rank.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = ComplexMatrix::from_fn(n, rank.max(1), |_, _| gaussian(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_trusted(dims.to_vec(), m.scale_real(1.0 / tr))
}

/// Random convex weights (normalized uniform draws).
pub fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Mixture of between 1 and `max_terms` random product pure states on `da ⊗ db`.
pub fn random_separable<R: Rng + ?Sized>(da: usize, db: usize, max_terms: usize, rng: &mut R) -> DensityMatrix {
    let terms = rng.random_range(1..=max_terms.max(1));
    let weights = random_weights(terms, rng);
    let mut m = ComplexMatrix::zeros(da * db, da * db);
    for w in weights {
        let a = random_pure_state(&[da], rng);
        let b = random_pure_state(&[db], rng);
        m.add_assign_scaled(a.tensor(&b).matrix(), C64::new(w, 0.0));
    }
    DensityMatrix::from_trusted(vec![da, db], m)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Haar-ish random unitary from Gram-Schmidt on Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        for u in &cols {
            let ip: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= ip * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |r, c| cols[c][r])
}
