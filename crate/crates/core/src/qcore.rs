//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Tensor products use row-major ordering with the leftmost subsystem as the
//! most significant digit, so `|01>` is basis index 1 of a two-qubit space.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for the Hermiticity, positivity and trace invariants of states.
pub const STATE_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: entries.len() });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |r, c| if r == c { C64::new(values[r], 0.0) } else { ZERO })
    }

    /// `|psi><phi|`
    pub fn outer(psi: &[C64], phi: &[C64]) -> Self {
        Self::from_fn(psi.len(), phi.len(), |r, c| psi[r] * phi[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| self.entries[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<v| M |v>`
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mv = self.matvec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * s;
        }
    }

    /// `K M K^dag`
    pub fn conjugate_by(&self, k: &Self) -> Self {
        &(k * self) * &k.adjoint()
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.entries[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.entries[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let s = a[(ar, ac)];
            if s == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = s * b[(br, bc)];
                }
            }
        }
    }
    out
}

pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Eigenvalues sorted non-increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts the given values into non-increasing order.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.last().copied().unwrap_or(0.0)
    }
}

/// Full eigendecomposition of a Hermitian matrix, eigenpairs sorted by
/// non-increasing eigenvalue.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the normalized eigenvector for `values[k]`.
    pub vectors: Vec<Vec<C64>>,
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows, got: m.cols });
    }
    let scale = m.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = m.hermitian_deviation();
    if dev > STATE_TOL * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

fn symmetrized(m: &ComplexMatrix) -> DMatrix<C64> {
    let a = m.to_nalgebra();
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

pub fn eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let n = m.rows;
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: vec![] });
    }
    let eig = SymmetricEigen::new(symmetrized(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
    Ok(HermitianEigen { values, vectors })
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum> {
    check_hermitian(m)?;
    if m.rows == 0 {
        return Ok(Spectrum(vec![]));
    }
    let values = symmetrized(m).symmetric_eigenvalues();
    Ok(Spectrum::new(values.iter().copied().collect()))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.values().iter().map(|x| x.abs()).sum())
}

/// Digits of `index` in the mixed radix given by `dims`, leftmost most significant.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub(crate) fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace at [`STATE_TOL`].
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !matrix.is_square() || matrix.rows != total {
            return Err(Error::DimensionMismatch { expected: total, got: matrix.rows });
        }
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::TraceNotOne { trace: tr.re });
        }
        let min = eig_hermitian(&matrix)?.min();
        if min < -STATE_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { dims, matrix })
    }

    /// For outputs of maps already known to be CPTP; skips the eigen check.
    pub(crate) fn from_trusted(dims: Vec<usize>, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.rows);
        Self { dims, matrix }
    }

    /// `|psi><psi|` after normalizing `psi`.
    pub fn pure(dims: Vec<usize>, psi: &[C64]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if psi.len() != total {
            return Err(Error::DimensionMismatch { expected: total, got: psi.len() });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self { dims, matrix: ComplexMatrix::outer(&v, &v) })
    }

    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::IndexOutOfRange { index: k, count: d });
        }
        let mut psi = vec![ZERO; d];
        psi[k] = ONE;
        Self::pure(vec![d], &psi)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self { dims, matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64) }
    }

    /// Convex combination; all states must share `dims`.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let n = first.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (w, s) in weights.iter().zip(states) {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch { expected: n, got: s.dim() });
            }
            m.add_assign_scaled(&s.matrix, C64::new(*w, 0.0));
        }
        Self::new(first.dims.clone(), m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Spectrum {
        eig_hermitian(&self.matrix).expect("density matrix is Hermitian")
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, matrix: tensor(&self.matrix, &other.matrix) }
    }

    /// Relabels the subsystem structure without touching the matrix.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: total });
        }
        Ok(Self { dims, matrix: self.matrix })
    }

    fn check_index(&self, sys: usize) -> Result<()> {
        if sys >= self.dims.len() {
            return Err(Error::IndexOutOfRange { index: sys, count: self.dims.len() });
        }
        Ok(())
    }

    /// Reduced state on the subsystems in `keep`, listed in ascending order.
    /// An empty `keep` gives the 1x1 matrix holding the trace.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        for &k in keep {
            self.check_index(k)?;
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let traced: Vec<usize> = (0..self.dims.len()).filter(|i| !keep.contains(i)).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&i| self.dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| self.dims[i]).collect();
        let n = self.dim();
        let split: Vec<(usize, usize)> = (0..n)
            .map(|idx| {
                let dg = digits(idx, &self.dims);
                let k: Vec<usize> = keep.iter().map(|&i| dg[i]).collect();
                let t: Vec<usize> = traced.iter().map(|&i| dg[i]).collect();
                (from_digits(&k, &kept_dims), from_digits(&t, &traced_dims))
            })
            .collect();
        let m: usize = kept_dims.iter().product();
        let mut out = ComplexMatrix::zeros(m, m);
        for r in 0..n {
            for c in 0..n {
                if split[r].1 == split[c].1 {
                    out[(split[r].0, split[c].0)] += self.matrix[(r, c)];
                }
            }
        }
        Ok(DensityMatrix { dims: kept_dims, matrix: out })
    }

    /// Transpose on subsystem `sys` only.
    pub fn partial_transpose(&self, sys: usize) -> Result<ComplexMatrix> {
        self.check_index(sys)?;
        Ok(partial_transpose_matrix(&self.matrix, &self.dims, sys))
    }
}

pub(crate) fn partial_transpose_matrix(m: &ComplexMatrix, dims: &[usize], sys: usize) -> ComplexMatrix {
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let mut dr = digits(r, dims);
        for c in 0..n {
            let mut dc = digits(c, dims);
            std::mem::swap(&mut dr[sys], &mut dc[sys]);
            out[(from_digits(&dr, dims), from_digits(&dc, dims))] = m[(r, c)];
            std::mem::swap(&mut dr[sys], &mut dc[sys]);
        }
    }
    out
}

/// Two-qubit Werner state `(q/3) P_sym + (1-q) P_anti`.
pub fn werner_state(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("werner parameter q = {q} outside [0, 1]")));
    }
    let id = ComplexMatrix::identity(4);
    let swap = ComplexMatrix::from_fn(4, 4, |r, c| {
        let (a, b) = (r / 2, r % 2);
        if c == b * 2 + a {
            ONE
        } else {
            ZERO
        }
    });
    let p_sym = (&id + &swap).scale_real(0.5);
    let p_anti = (&id - &swap).scale_real(0.5);
    let m = &p_sym.scale_real(q / 3.0) + &p_anti.scale_real(1.0 - q);
    Ok(DensityMatrix::from_trusted(vec![2, 2], m))
}

/// `(1/d) Σ_ij |ii><jj|`
pub fn max_entangled(d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("max_entangled needs d >= 2, got {d}")));
    }
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = vec![ZERO; d * d];
    for i in 0..d {
        psi[i * d + i] = amp;
    }
    Ok(DensityMatrix::from_trusted(vec![d, d], ComplexMatrix::outer(&psi, &psi)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

/// Peres-Horodecki test on the second subsystem of a bipartite state.
pub fn is_ppt(rho: &DensityMatrix) -> Result<PptReport> {
    if rho.dims.len() != 2 {
        return Err(Error::NotBipartite { count: rho.dims.len() });
    }
    let min_eigenvalue = eig_hermitian(&rho.partial_transpose(1)?)?.min();
    Ok(PptReport { ppt: min_eigenvalue >= -STATE_TOL, min_eigenvalue })
}
