//! Quantum channels stored as Kraus families.
//!
//! Maps given in action form (depolarizing, transpose depolarizing, measure
//! and prepare) are converted to Kraus form through their Choi matrix.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    digits, eigh, from_digits, is_ppt, partial_transpose_matrix, tensor, ComplexMatrix, DensityMatrix, C64, ONE,
    ZERO,
};

/// Tolerance for trace preservation and Choi positivity.
pub const CHANNEL_TOL: f64 = 1e-9;

/// Choi eigenvalues at or below this are dropped when folding into Kraus operators.
pub const KRAUS_RANK_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    label: String,
    /// Set by constructors that build the map as measure-and-prepare.
    #[serde(default)]
    measure_prepare: bool,
}

impl QuantumChannel {
    /// Checks operator shapes and `Σ K^dag K = I` within [`CHANNEL_TOL`].
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus family".into()));
        }
        for k in &kraus {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::DimensionMismatch { expected: dim_out * dim_in, got: k.rows() * k.cols() });
            }
        }
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum.add_assign_scaled(&(&k.adjoint() * k), ONE);
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if deviation > CHANNEL_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(Self { dim_in, dim_out, kraus, label: label.into(), measure_prepare: false })
    }

    /// Kraus family from a Choi matrix laid out as `Σ_ij N(|i><j|) ⊗ |i><j|`.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: &ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.rows() != n || choi.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: choi.rows() });
        }
        let eig = eigh(choi)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -CHANNEL_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let kraus: Vec<ComplexMatrix> = eig
            .values
            .iter()
            .zip(&eig.vectors)
            .filter(|(&l, _)| l > KRAUS_RANK_CUTOFF)
            .map(|(&l, v)| {
                let s = l.sqrt();
                ComplexMatrix::from_fn(dim_out, dim_in, |o, i| v[o * dim_in + i] * s)
            })
            .collect();
        Self::new(dim_in, dim_out, kraus, label)
    }

    /// Builds the channel from the action of a linear map on matrix units.
    pub fn from_action(
        dim_in: usize,
        dim_out: usize,
        action: impl Fn(&ComplexMatrix) -> ComplexMatrix,
        label: impl Into<String>,
    ) -> Result<Self> {
        Self::from_choi(dim_in, dim_out, &choi_of_action(dim_in, dim_out, action), label)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: vec![ComplexMatrix::identity(d)],
            label: format!("identity(d={d})"),
            measure_prepare: false,
        }
    }

    /// Replaces every input with `state`.
    pub fn constant(dim_in: usize, state: &DensityMatrix) -> Result<Self> {
        let sigma = state.matrix().clone();
        let d = state.dim();
        let mut ch = Self::from_action(
            dim_in,
            d,
            |x| sigma.scale(x.trace()),
            format!("constant(dim_in={dim_in},dim_out={d})"),
        )?;
        ch.measure_prepare = true;
        Ok(ch)
    }

    /// `X ↦ Σ_a tr(E_a X) σ_a`; entanglement breaking by construction.
    pub fn measure_prepare(povm: &[ComplexMatrix], outputs: &[DensityMatrix], label: impl Into<String>) -> Result<Self> {
        if povm.is_empty() || povm.len() != outputs.len() {
            return Err(Error::InvalidParameter("POVM and output lists must be non-empty and equal length".into()));
        }
        let dim_in = povm[0].rows();
        let dim_out = outputs[0].dim();
        let mut total = ComplexMatrix::zeros(dim_in, dim_in);
        for (e, s) in povm.iter().zip(outputs) {
            if e.rows() != dim_in || !e.is_square() {
                return Err(Error::DimensionMismatch { expected: dim_in, got: e.rows() });
            }
            if s.dim() != dim_out {
                return Err(Error::DimensionMismatch { expected: dim_out, got: s.dim() });
            }
            total.add_assign_scaled(e, ONE);
        }
        let deviation = total.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if deviation > CHANNEL_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        let mut ch = Self::from_action(
            dim_in,
            dim_out,
            |x| {
                let mut out = ComplexMatrix::zeros(dim_out, dim_out);
                for (e, s) in povm.iter().zip(outputs) {
                    out.add_assign_scaled(s.matrix(), (e * x).trace());
                }
                out
            },
            label,
        )?;
        ch.measure_prepare = true;
        Ok(ch)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_measure_prepare(&self) -> bool {
        self.measure_prepare
    }

    /// Linear extension `Σ K X K^dag` on an arbitrary `dim_in × dim_in` operator.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out.add_assign_scaled(&x.conjugate_by(k), ONE);
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: rho.dim() });
        }
        Ok(DensityMatrix::from_trusted(vec![self.dim_out], self.apply_matrix(rho.matrix())))
    }

    /// `(N ⊗ id)` acting on subsystem `sys` of `rho`; the output keeps the
    /// subsystem order with `dims[sys]` replaced by `dim_out`.
    pub fn apply_on_subsystem(&self, rho: &DensityMatrix, sys: usize) -> Result<DensityMatrix> {
        let dims = rho.dims();
        if sys >= dims.len() {
            return Err(Error::IndexOutOfRange { index: sys, count: dims.len() });
        }
        if dims[sys] != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: dims[sys] });
        }
        let mut out_dims = dims.to_vec();
        out_dims[sys] = self.dim_out;
        let n_in = rho.dim();
        let n_out: usize = out_dims.iter().product();
        let m = rho.matrix();
        // Precompute digit decompositions once.
        let in_digits: Vec<Vec<usize>> = (0..n_in).map(|i| digits(i, dims)).collect();
        let mut out = ComplexMatrix::zeros(n_out, n_out);
        for k in &self.kraus {
            // (K ⊗ I) rho (K ⊗ I)^dag, computed as L = (K ⊗ I) rho then L (K ⊗ I)^dag.
            let mut left = ComplexMatrix::zeros(n_out, n_in);
            for r in 0..n_in {
                let dr = &in_digits[r];
                let mut od = dr.clone();
                for o in 0..self.dim_out {
                    let kv = k[(o, dr[sys])];
                    if kv == ZERO {
                        continue;
                    }
                    od[sys] = o;
                    let orow = from_digits(&od, &out_dims);
                    for c in 0..n_in {
                        left[(orow, c)] += kv * m[(r, c)];
                    }
                }
            }
            for c in 0..n_in {
                let dc = &in_digits[c];
                let mut od = dc.clone();
                for o in 0..self.dim_out {
                    let kv = k[(o, dc[sys])].conj();
                    if kv == ZERO {
                        continue;
                    }
                    od[sys] = o;
                    let ocol = from_digits(&od, &out_dims);
                    for r in 0..n_out {
                        out[(r, ocol)] += left[(r, c)] * kv;
                    }
                }
            }
        }
        Ok(DensityMatrix::from_trusted(out_dims, out))
    }

    /// `(N ⊗ id)` applied to the unnormalized maximally entangled operator;
    /// subsystem order is (output, input).
    pub fn choi(&self) -> ComplexMatrix {
        choi_of_action(self.dim_in, self.dim_out, |x| self.apply_matrix(x))
    }
}

impl fmt::Display for QuantumChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

pub(crate) fn choi_of_action(
    dim_in: usize,
    dim_out: usize,
    action: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> ComplexMatrix {
    let mut choi = ComplexMatrix::zeros(dim_out * dim_in, dim_out * dim_in);
    for i in 0..dim_in {
        for j in 0..dim_in {
            let mut unit = ComplexMatrix::zeros(dim_in, dim_in);
            unit[(i, j)] = ONE;
            let img = action(&unit);
            for a in 0..dim_out {
                for b in 0..dim_out {
                    choi[(a * dim_in + i, b * dim_in + j)] = img[(a, b)];
                }
            }
        }
    }
    choi
}

/// `μ ↦ tμ + (1-t) I/d`, valid for `-1/(d²-1) ≤ t ≤ 1`.
pub fn make_depolarizing(d: usize, t: f64) -> Result<QuantumChannel> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("depolarizing needs d >= 2, got {d}")));
    }
    let lo = -1.0 / ((d * d - 1) as f64);
    if !(t >= lo - CHANNEL_TOL && t <= 1.0 + CHANNEL_TOL) {
        return Err(Error::InvalidParameter(format!("depolarizing t = {t} outside CP range [{lo}, 1]")));
    }
    let mix = (1.0 - t) / d as f64;
    QuantumChannel::from_action(
        d,
        d,
        |x| &x.scale_real(t) + &ComplexMatrix::identity(d).scale(x.trace() * mix),
        format!("depolarizing(d={d},t={t})"),
    )
}

/// `μ ↦ tμ^T + (1-t) I/d`, accepted for `-2/(d²-2) ≤ t ≤ 1/(d+1)`.
pub fn make_transpose_depolarizing(d: usize, t: f64) -> Result<QuantumChannel> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("transpose depolarizing needs d >= 2, got {d}")));
    }
    let lo = -2.0 / ((d * d - 2) as f64);
    let hi = 1.0 / ((d + 1) as f64);
    if !(t >= lo - CHANNEL_TOL && t <= hi + CHANNEL_TOL) {
        return Err(Error::InvalidParameter(format!("transpose depolarizing t = {t} outside [{lo}, {hi}]")));
    }
    let mix = (1.0 - t) / d as f64;
    QuantumChannel::from_action(
        d,
        d,
        |x| &x.transpose().scale_real(t) + &ComplexMatrix::identity(d).scale(x.trace() * mix),
        format!("transpose_depolarizing(d={d},t={t})"),
    )
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => ZERO,
    })
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// `μ ↦ tμ + ((1-t)/2) XμX + ((1-t)/2) ZμZ` on one qubit.
pub fn make_two_pauli(t: f64) -> Result<QuantumChannel> {
    let label = format!("two_pauli(t={t})");
    // Choi positivity of the action form decides the valid range.
    let w = (1.0 - t) / 2.0;
    let (x, z) = (pauli_x(), pauli_z());
    let choi = choi_of_action(2, 2, |m| {
        let mut out = m.scale_real(t);
        out.add_assign_scaled(&m.conjugate_by(&x), C64::new(w, 0.0));
        out.add_assign_scaled(&m.conjugate_by(&z), C64::new(w, 0.0));
        out
    });
    let min = crate::qcore::eig_hermitian(&choi)?.min();
    if min < -CHANNEL_TOL {
        return Err(Error::InvalidParameter(format!("two-Pauli t = {t} is not completely positive")));
    }
    let kraus = vec![
        ComplexMatrix::identity(2).scale_real(t.max(0.0).sqrt()),
        x.scale_real(w.max(0.0).sqrt()),
        z.scale_real(w.max(0.0).sqrt()),
    ];
    QuantumChannel::new(2, 2, kraus, label)
}

/// Two orthonormal bases of `C^d` with all cross overlaps `|<u|v>|² = 1/d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MubPair {
    d: usize,
    basis0: Vec<Vec<C64>>,
    basis1: Vec<Vec<C64>>,
}

impl MubPair {
    pub fn new(basis0: Vec<Vec<C64>>, basis1: Vec<Vec<C64>>) -> Result<Self> {
        let d = basis0.len();
        if d < 2 || basis1.len() != d || basis0.iter().chain(&basis1).any(|v| v.len() != d) {
            return Err(Error::InvalidParameter("MUB bases must be d vectors of length d, d >= 2".into()));
        }
        let inner = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
        for basis in [&basis0, &basis1] {
            for (k, u) in basis.iter().enumerate() {
                for (l, v) in basis.iter().enumerate() {
                    let target = if k == l { 1.0 } else { 0.0 };
                    if (inner(u, v) - C64::new(target, 0.0)).norm() > CHANNEL_TOL {
                        return Err(Error::InvalidParameter("MUB basis is not orthonormal".into()));
                    }
                }
            }
        }
        for u in &basis0 {
            for v in &basis1 {
                if (inner(u, v).norm_sqr() - 1.0 / d as f64).abs() > CHANNEL_TOL {
                    return Err(Error::InvalidParameter("bases are not mutually unbiased".into()));
                }
            }
        }
        Ok(Self { d, basis0, basis1 })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis(&self, i: usize) -> &[Vec<C64>] {
        if i == 0 {
            &self.basis0
        } else {
            &self.basis1
        }
    }
}

/// Computational basis and discrete Fourier basis.
pub fn standard_mub(d: usize) -> Result<MubPair> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("MUB pair needs d >= 2, got {d}")));
    }
    let basis0 = (0..d).map(|k| (0..d).map(|m| if m == k { ONE } else { ZERO }).collect()).collect();
    let amp = 1.0 / (d as f64).sqrt();
    let basis1 = (0..d)
        .map(|k| (0..d).map(|m| C64::from_polar(amp, 2.0 * PI * ((k * m) % d) as f64 / d as f64)).collect())
        .collect();
    MubPair::new(basis0, basis1)
}

/// qc-channel `σ ↦ Σ_k <v_k|σ|v_k> |k><k|` measuring in basis `i` of the pair.
pub fn make_mub_qc(pair: &MubPair, i: usize) -> Result<QuantumChannel> {
    if i > 1 {
        return Err(Error::InvalidParameter(format!("MUB index must be 0 or 1, got {i}")));
    }
    let d = pair.d;
    let kraus = pair
        .basis(i)
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let mut ket = vec![ZERO; d];
            ket[k] = ONE;
            ComplexMatrix::outer(&ket, v)
        })
        .collect();
    let mut ch = QuantumChannel::new(d, d, kraus, format!("mub_qc(d={d},i={i})"))?;
    ch.measure_prepare = true;
    Ok(ch)
}

/// `X^j Z^k` with `X|m> = |m+1 mod d>` and `Z|m> = e^{2πim/d}|m>`.
pub fn weyl_unitary(d: usize, j: usize, k: usize) -> Result<ComplexMatrix> {
    if j >= d || k >= d {
        return Err(Error::IndexOutOfRange { index: j.max(k), count: d });
    }
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        if r == (c + j) % d {
            C64::from_polar(1.0, 2.0 * PI * ((k * c) % d) as f64 / d as f64)
        } else {
            ZERO
        }
    }))
}

/// Channel on `Ã ⊗ D` (D of dimension `dim_out²`) that dephases D and applies
/// `U^{jk} m(·) U^{jk†}` controlled by the D basis label `|jk>`.
pub fn shor_extend(m: &QuantumChannel) -> QuantumChannel {
    let dout = m.dim_out;
    let dd = dout * dout;
    let mut kraus = Vec::with_capacity(dd * m.kraus.len());
    for j in 0..dout {
        for k in 0..dout {
            let u = weyl_unitary(dout, j, k).expect("indices in range");
            let mut bra = ComplexMatrix::zeros(1, dd);
            bra[(0, j * dout + k)] = ONE;
            for ka in &m.kraus {
                kraus.push(tensor(&(&u * ka), &bra));
            }
        }
    }
    QuantumChannel {
        dim_in: m.dim_in * dd,
        dim_out: dout,
        kraus,
        label: format!("shor_extend({})", m.label),
        measure_prepare: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EbVerdict {
    Yes,
    No,
    Undecided,
}

impl fmt::Display for EbVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EbVerdict::Yes => "yes",
            EbVerdict::No => "no",
            EbVerdict::Undecided => "undecided",
        })
    }
}

/// PPT test on the Choi matrix; exact when `dim_in·dim_out ≤ 6`. Measure and
/// prepare constructions are certified directly.
pub fn is_entanglement_breaking(ch: &QuantumChannel) -> EbVerdict {
    if ch.measure_prepare {
        return EbVerdict::Yes;
    }
    let n = (ch.dim_in * ch.dim_out) as f64;
    let choi = ch.choi().scale_real(1.0 / ch.dim_in as f64);
    let state = DensityMatrix::from_trusted(vec![ch.dim_out, ch.dim_in], choi);
    let ppt = is_ppt(&state).map(|r| r.ppt).unwrap_or(false);
    match (ppt, n <= 6.0) {
        (false, _) => EbVerdict::No,
        (true, true) => EbVerdict::Yes,
        (true, false) => EbVerdict::Undecided,
    }
}

/// Transpose of the first subsystem of a Choi matrix, i.e. the Choi matrix of
/// `T ∘ N`.
pub fn choi_output_transpose(ch: &QuantumChannel) -> ComplexMatrix {
    partial_transpose_matrix(&ch.choi(), &[ch.dim_out, ch.dim_in], 0)
}

/// JSON channel description used by the CLI and config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_out: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    /// Each operator is a row-major list of `[re, im]` pairs of shape `d_out × d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Depolarizing,
    TransposeDepolarizing,
    TwoPauli,
    MubQc,
    Kraus,
    Identity,
}

impl ChannelSpec {
    pub fn depolarizing(d: usize, t: f64) -> Self {
        Self { kind: ChannelKind::Depolarizing, d: Some(d), d_out: None, t: Some(t), i: None, kraus: None }
    }

    pub fn transpose_depolarizing(d: usize, t: f64) -> Self {
        Self { kind: ChannelKind::TransposeDepolarizing, ..Self::depolarizing(d, t) }
    }

    pub fn two_pauli(t: f64) -> Self {
        Self { kind: ChannelKind::TwoPauli, d: Some(2), d_out: None, t: Some(t), i: None, kraus: None }
    }

    pub fn mub_qc(d: usize, i: usize) -> Self {
        Self { kind: ChannelKind::MubQc, d: Some(d), d_out: None, t: None, i: Some(i), kraus: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("channel spec: {e}")))
    }

    fn need_d(&self) -> Result<usize> {
        self.d.ok_or_else(|| Error::InvalidParameter(format!("{:?} channel spec needs \"d\"", self.kind)))
    }

    fn need_t(&self) -> Result<f64> {
        self.t.ok_or_else(|| Error::InvalidParameter(format!("{:?} channel spec needs \"t\"", self.kind)))
    }

    pub fn build(&self) -> Result<QuantumChannel> {
        match self.kind {
            ChannelKind::Depolarizing => make_depolarizing(self.need_d()?, self.need_t()?),
            ChannelKind::TransposeDepolarizing => make_transpose_depolarizing(self.need_d()?, self.need_t()?),
            ChannelKind::TwoPauli => {
                if self.d.is_some_and(|d| d != 2) {
                    return Err(Error::InvalidParameter("two_pauli acts on a qubit (d = 2)".into()));
                }
                make_two_pauli(self.need_t()?)
            }
            ChannelKind::MubQc => make_mub_qc(&standard_mub(self.need_d()?)?, self.i.unwrap_or(0)),
            ChannelKind::Identity => Ok(QuantumChannel::identity(self.need_d()?)),
            ChannelKind::Kraus => {
                let d = self.need_d()?;
                let d_out = self.d_out.unwrap_or(d);
                let ops = self
                    .kraus
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("kraus channel spec needs \"kraus\"".into()))?;
                let kraus = ops
                    .iter()
                    .map(|k| ComplexMatrix::from_entries(d_out, d, k.iter().map(|[re, im]| C64::new(*re, *im)).collect()))
                    .collect::<Result<Vec<_>>>()?;
                QuantumChannel::new(d, d_out, kraus, format!("kraus(d={d},d_out={d_out},n={})", ops.len()))
            }
        }
    }
}
