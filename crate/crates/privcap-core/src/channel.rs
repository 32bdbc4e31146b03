//! The channel family and its surroundings.
//!
//! A channel instance couples two d-dimensional inputs: a unitary V drawn
//! from a finite ensemble acts on the second register, a controlled phase
//! P = Σ_i |i⟩⟨i| ⊗ Z^i couples the registers, the receiver gets the first
//! register plus a classical description of V, and the environment gets the
//! second register plus the same description.
//!
//! Generic completely positive maps are carried in Kraus form, which gives
//! complements, Choi states, composition, the flagged (erasure-marked)
//! extension, and its degrading map.

use num_complex::Complex64;

use crate::ensembles::UnitaryEnsemble;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::qlinalg::{
    check_dim_cap, partial_trace, tensor, CMatrix, DensityMatrix, UnitaryMatrix,
};

// ---------------------------------------------------------------------------
// Phase gates
// ---------------------------------------------------------------------------

fn omega_power(d: usize, k: i64) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let phase = two_pi * (k.rem_euclid(d as i64) as f64) / d as f64;
    Complex64::new(phase.cos(), phase.sin())
}

/// Controlled phase P = Σ_{i,j} ω^{ij} |i⟩⟨i| ⊗ |j⟩⟨j| on C^d ⊗ C^d,
/// with ω the primitive dth root of unity.
pub fn controlled_phase(d: usize) -> UnitaryMatrix {
    let entries: Vec<Complex64> = (0..d * d)
        .map(|idx| omega_power(d, ((idx / d) * (idx % d)) as i64))
        .collect();
    UnitaryMatrix::new(CMatrix::diag(&entries)).expect("diagonal phases are unitary")
}

/// The diagonal of Z^x = Z^{x_1} ⊗ ... ⊗ Z^{x_n}: entries ω^{Σ x_i j_i} over
/// the d^n basis strings j. Components must lie in 0..d−1.
pub fn z_phase_vector(x: &[i64], d: usize) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::InvalidParameter("empty exponent tuple".into()));
    }
    if x.iter().any(|&xi| xi < 0 || xi >= d as i64) {
        return Err(Error::InvalidParameter(format!(
            "exponent components must lie in 0..{}, got {:?}",
            d - 1,
            x
        )));
    }
    let n = x.len();
    let dim = d
        .checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidParameter("dimension overflow".into()))?;
    check_dim_cap(dim)?;
    let mut entries = Vec::with_capacity(dim);
    for idx in 0..dim {
        let mut rem = idx;
        let mut exp = 0i64;
        for k in (0..n).rev() {
            let jk = (rem % d) as i64;
            rem /= d;
            exp += x[k] * jk;
        }
        entries.push(omega_power(d, exp));
    }
    Ok(entries)
}

/// Z^x = Z^{x_1} ⊗ ... ⊗ Z^{x_n} on (C^d)^{⊗n} as a unitary matrix.
pub fn z_string(x: &[i64], d: usize) -> Result<UnitaryMatrix> {
    let entries = z_phase_vector(x, d)?;
    Ok(UnitaryMatrix::new(CMatrix::diag(&entries)).expect("diagonal phases are unitary"))
}

// ---------------------------------------------------------------------------
// Classical-quantum states
// ---------------------------------------------------------------------------

/// Weighted sequence of density-matrix blocks sharing one classical label
/// register: the state Σ_v w_v ρ_v ⊗ |v⟩⟨v| without materializing the labels.
#[derive(Debug, Clone)]
pub struct CQState {
    blocks: Vec<(f64, DensityMatrix)>,
}

impl CQState {
    pub fn new(blocks: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let dim = blocks
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty cq-state".into()))?
            .1
            .dim();
        if blocks.iter().any(|(_, b)| b.dim() != dim) {
            return Err(Error::DimMismatch("cq-state blocks differ in dimension".into()));
        }
        if blocks.iter().any(|&(w, _)| w <= 0.0) {
            return Err(Error::InvalidParameter("cq-state weights must be positive".into()));
        }
        let total: f64 = blocks.iter().map(|&(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "cq-state weights sum to {total}, expected 1"
            )));
        }
        Ok(CQState { blocks })
    }

    pub fn blocks(&self) -> &[(f64, DensityMatrix)] {
        &self.blocks
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].1.dim()
    }

    /// Σ_v w_v ρ_v, forgetting the classical label.
    pub fn average(&self) -> DensityMatrix {
        DensityMatrix::mixture(&self.blocks).expect("blocks validated at construction")
    }

    /// Entropy of the block register conditioned on the classical label:
    /// Σ_v w_v S(ρ_v), in bits.
    pub fn conditional_entropy(&self) -> Result<f64> {
        let mut s = 0.0;
        for (w, rho) in &self.blocks {
            s += w * crate::qlinalg::entropy_vn(rho)?;
        }
        Ok(s)
    }

    /// The full block-diagonal state on (block ⊗ label) space.
    pub fn to_full_state(&self) -> Result<DensityMatrix> {
        let m = self.blocks.len();
        let d = self.block_dim();
        check_dim_cap(d * m)?;
        let mut out = CMatrix::zeros(d * m, d * m);
        for (v, (w, rho)) in self.blocks.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    out[(i * m + v, j * m + v)] = rho.matrix()[(i, j)] * *w;
                }
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }
}

// ---------------------------------------------------------------------------
// The finite-ensemble channel
// ---------------------------------------------------------------------------

/// Stinespring isometry with its output factorization.
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    pub in_dim: usize,
    /// (receiver dim, environment dim, classical member count).
    pub out_dims: (usize, usize, usize),
    pub matrix: CMatrix,
}

impl StinespringIsometry {
    /// Max entrywise deviation of U†U from the identity.
    pub fn isometry_defect(&self) -> f64 {
        self.matrix
            .adjoint()
            .matmul(&self.matrix)
            .max_abs_diff(&CMatrix::identity(self.in_dim))
    }
}

/// The channel restricted to a finite weighted unitary ensemble. Inputs live
/// on (C^d)⊗(C^d); the receiver-side output per member v is
/// Tr_2[W_v ρ W_v†] with W_v = P (I ⊗ V_v), the environment side is
/// Tr_1[W_v ρ W_v†], and both sides carry the member label classically.
#[derive(Debug, Clone)]
pub struct FiniteVChannel {
    d: usize,
    ensemble: UnitaryEnsemble,
    /// Cached W_v = P (I ⊗ V_v), one per member.
    couplers: Vec<UnitaryMatrix>,
}

impl FiniteVChannel {
    pub fn new(ensemble: UnitaryEnsemble) -> Result<Self> {
        let d = ensemble.d();
        if d < 2 {
            return Err(Error::InvalidParameter("channel needs d >= 2".into()));
        }
        check_dim_cap(d * d)?;
        let p = controlled_phase(d);
        let id = CMatrix::identity(d);
        let couplers = ensemble
            .members()
            .iter()
            .map(|(v, _)| {
                let iv = tensor(&id, v.matrix())?;
                Ok(UnitaryMatrix::new(p.matrix().matmul(&iv))?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteVChannel {
            d,
            ensemble,
            couplers,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn in_dim(&self) -> usize {
        self.d * self.d
    }

    pub fn ensemble(&self) -> &UnitaryEnsemble {
        &self.ensemble
    }

    pub fn member_count(&self) -> usize {
        self.ensemble.len()
    }

    /// W_v for member index v.
    pub fn coupler(&self, v: usize) -> &UnitaryMatrix {
        &self.couplers[v]
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.in_dim() {
            return Err(Error::DimMismatch(format!(
                "channel input must have dim {}, got {}",
                self.in_dim(),
                rho.dim()
            )));
        }
        Ok(())
    }

    /// Receiver-side output: one block (w_v, Tr_2[W_v ρ W_v†]) per member.
    pub fn apply(&self, rho: &DensityMatrix, mode: ExecMode) -> Result<CQState> {
        self.check_input(rho)?;
        let d = self.d;
        let blocks = map_indexed(mode, self.couplers.len(), |v| {
            let out = rho.conjugated(&self.couplers[v]);
            let reduced = partial_trace(&out, &[d, d], &[0]).expect("dims validated");
            (self.ensemble.members()[v].1, reduced)
        });
        CQState::new(blocks)
    }

    /// Environment-side output: one block (w_v, Tr_1[W_v ρ W_v†]) per member.
    pub fn apply_complement(&self, rho: &DensityMatrix, mode: ExecMode) -> Result<CQState> {
        self.check_input(rho)?;
        let d = self.d;
        let blocks = map_indexed(mode, self.couplers.len(), |v| {
            let out = rho.conjugated(&self.couplers[v]);
            let reduced = partial_trace(&out, &[d, d], &[1]).expect("dims validated");
            (self.ensemble.members()[v].1, reduced)
        });
        CQState::new(blocks)
    }

    /// The full isometric extension U|ψ⟩ = Σ_v √w_v (W_v|ψ⟩) ⊗ |v⟩ ⊗ |v⟩,
    /// output factors ordered (receiver, environment, label_B, label_E).
    pub fn stinespring(&self) -> Result<StinespringIsometry> {
        let d = self.d;
        let m = self.ensemble.len();
        let out_dim = d * d * m * m;
        check_dim_cap(out_dim)?;
        let mut u = CMatrix::zeros(out_dim, d * d);
        for (v, (w, wv)) in self
            .ensemble
            .members()
            .iter()
            .map(|(_, w)| w)
            .zip(&self.couplers)
            .enumerate()
            .map(|(v, (w, wv))| (v, (w, wv)))
        {
            let amp = w.sqrt();
            for r in 0..d * d {
                // Output index ((r, v, v)) in the (d*d, m, m) factorization.
                let row = (r * m + v) * m + v;
                for c in 0..d * d {
                    u[(row, c)] = wv.matrix()[(r, c)] * amp;
                }
            }
        }
        Ok(StinespringIsometry {
            in_dim: d * d,
            out_dims: (d, d, m),
            matrix: u,
        })
    }

    /// The receiver-side map as a Kraus channel, classical label included:
    /// ρ ↦ Σ_v w_v (Tr_2 W_v ρ W_v†) ⊗ |v⟩⟨v|, output dim d·m.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let d = self.d;
        let m = self.ensemble.len();
        check_dim_cap(d * m)?;
        let mut kraus = Vec::with_capacity(d * m);
        for (v, (_, w)) in self.ensemble.members().iter().enumerate() {
            let amp = w.sqrt();
            let wv = &self.couplers[v];
            for k in 0..d {
                // (I ⊗ ⟨k|) W_v ⊗ |v⟩: rows indexed by (i, v) pairs.
                let mut op = CMatrix::zeros(d * m, d * d);
                for i in 0..d {
                    for c in 0..d * d {
                        op[(i * m + v, c)] = wv.matrix()[(i * d + k, c)] * amp;
                    }
                }
                kraus.push(op);
            }
        }
        KrausChannel::new(kraus)
    }
}

// ---------------------------------------------------------------------------
// Kraus channels
// ---------------------------------------------------------------------------

/// Completely positive map in Kraus form. Trace-preserving on the subspace
/// where Σ K†K acts as the identity; constructors reject anything that is not
/// at least trace-nonincreasing.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        let (out_dim, in_dim) = (first.rows(), first.cols());
        check_dim_cap(out_dim)?;
        check_dim_cap(in_dim)?;
        if kraus
            .iter()
            .any(|k| k.rows() != out_dim || k.cols() != in_dim)
        {
            return Err(Error::DimMismatch("Kraus operators differ in shape".into()));
        }
        let gram = gram_sum(&kraus);
        let top = crate::qlinalg::eigvalsh(&gram)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if top > 1.0 + 1e-9 {
            return Err(Error::InvalidState(format!(
                "Kraus completeness sum has eigenvalue {top} > 1"
            )));
        }
        Ok(KrausChannel {
            in_dim,
            out_dim,
            kraus,
        })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            in_dim: dim,
            out_dim: dim,
            kraus: vec![CMatrix::identity(dim)],
        }
    }

    pub fn from_unitary(u: &UnitaryMatrix) -> Self {
        KrausChannel {
            in_dim: u.dim(),
            out_dim: u.dim(),
            kraus: vec![u.matrix().clone()],
        }
    }

    /// Completely dephasing map on one tensor factor: Kraus {Π_i on factor}.
    pub fn dephasing_on_factor(dims: &[usize], target: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if target >= dims.len() {
            return Err(Error::InvalidParameter("factor index out of range".into()));
        }
        let stride: usize = dims[target + 1..].iter().product();
        let d_t = dims[target];
        let kraus = (0..d_t)
            .map(|i| {
                CMatrix::from_fn(total, total, |r, c| {
                    if r == c && (r / stride) % d_t == i {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        KrausChannel::new(kraus)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Max deviation of Σ K†K from the identity (0 for trace-preserving maps).
    pub fn trace_preserving_defect(&self) -> f64 {
        gram_sum(&self.kraus).max_abs_diff(&CMatrix::identity(self.in_dim))
    }

    /// Σ K m K† on an arbitrary matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            let term = k.matmul(m).matmul(&k.adjoint());
            out = out.add(&term);
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.in_dim {
            return Err(Error::DimMismatch(format!(
                "channel expects dim {}, got {}",
                self.in_dim,
                rho.dim()
            )));
        }
        Ok(DensityMatrix::from_matrix_unchecked(
            self.apply_matrix(rho.matrix()),
        ))
    }

    /// Output of the complementary channel: the Gram state
    /// G_ij = Tr[K_i ρ K_j†] on the Kraus-index space.
    pub fn complement_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.in_dim {
            return Err(Error::DimMismatch(format!(
                "channel expects dim {}, got {}",
                self.in_dim,
                rho.dim()
            )));
        }
        let r = self.kraus.len();
        check_dim_cap(r)?;
        let products: Vec<CMatrix> = self.kraus.iter().map(|k| k.matmul(rho.matrix())).collect();
        let mut g = CMatrix::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                // Tr[K_i ρ K_j†] = Σ_{a,b} (K_i ρ)_{a,b} conj(K_j)_{a,b}.
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, y) in products[i].data().iter().zip(self.kraus[j].data()) {
                    acc += x * y.conj();
                }
                g[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(g))
    }

    /// The complementary channel in Kraus form: (L_b)_{i,a} = (K_i)_{b,a}.
    pub fn complement_channel(&self) -> Result<KrausChannel> {
        let r = self.kraus.len();
        check_dim_cap(r)?;
        let kraus = (0..self.out_dim)
            .map(|b| CMatrix::from_fn(r, self.in_dim, |i, a| self.kraus[i][(b, a)]))
            .collect();
        KrausChannel::new(kraus)
    }

    /// Choi state (map ⊗ id)(|Ω⟩⟨Ω|) with |Ω⟩ the maximally entangled state
    /// on in_dim², laid out as (output ⊗ input copy).
    pub fn choi(&self) -> Result<DensityMatrix> {
        let n = self.in_dim;
        check_dim_cap(self.out_dim * n)?;
        let mut chi = CMatrix::zeros(self.out_dim * n, self.out_dim * n);
        for (i, j) in (0..n).flat_map(|i| (0..n).map(move |j| (i, j))) {
            let mut unit = CMatrix::zeros(n, n);
            unit[(i, j)] = Complex64::new(1.0, 0.0);
            let block = self.apply_matrix(&unit);
            for r in 0..self.out_dim {
                for c in 0..self.out_dim {
                    chi[(r * n + i, c * n + j)] += block[(r, c)] / n as f64;
                }
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(chi))
    }

    /// outer ∘ inner.
    pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
        if inner.out_dim != outer.in_dim {
            return Err(Error::DimMismatch(format!(
                "compose: inner output dim {} vs outer input dim {}",
                inner.out_dim, outer.in_dim
            )));
        }
        let mut kraus = Vec::with_capacity(outer.kraus.len() * inner.kraus.len());
        for a in &outer.kraus {
            for b in &inner.kraus {
                kraus.push(a.matmul(b));
            }
        }
        KrausChannel::new(kraus)
    }

    /// Choi trace distance to another channel; 0 iff the maps agree.
    pub fn choi_distance(&self, other: &KrausChannel) -> Result<f64> {
        if self.in_dim != other.in_dim || self.out_dim != other.out_dim {
            return Err(Error::DimMismatch("choi distance between unequal shapes".into()));
        }
        crate::qlinalg::trace_distance(&self.choi()?, &other.choi()?)
    }
}

fn gram_sum(kraus: &[CMatrix]) -> CMatrix {
    let n = kraus[0].cols();
    let mut acc = CMatrix::zeros(n, n);
    for k in kraus {
        acc = acc.add(&k.adjoint().matmul(k));
    }
    acc
}

// ---------------------------------------------------------------------------
// Flagged extension and its degrading map
// ---------------------------------------------------------------------------

/// The flagged extension of a channel and the pieces needed to reason about
/// it: M(ρ) = ½[ρ⊗|0⟩⟨0| + N(ρ)⊗|1⟩⟨1|], its explicitly constructed
/// complement M̂(ρ) = ½[|e⟩⟨e|⊗|0⟩⟨0| + N̂(ρ)⊗|1⟩⟨1|], and the register
/// dimensions involved.
#[derive(Debug, Clone)]
pub struct FlaggedChannel {
    /// First output register of M: max(in_dim, out_dim) of the base channel.
    pub reg_dim: usize,
    /// First output register of M̂: complement dim of the base channel + 1
    /// (the appended orthogonal erasure flag, at the last index).
    pub env_dim: usize,
    pub m: KrausChannel,
    pub m_complement: KrausChannel,
}

/// Build the flagged extension of `n`. The first register of M's output holds
/// the untouched input (flag |0⟩) or the channel output (flag |1⟩), both
/// embedded in a register of dimension max(in, out); the flag qubit is the
/// second tensor factor.
pub fn flagged_channel(n: &KrausChannel) -> Result<FlaggedChannel> {
    let reg = n.in_dim().max(n.out_dim());
    let e_dim = n.kraus().len() + 1;
    check_dim_cap(reg * 2)?;
    check_dim_cap(e_dim * 2)?;
    let half = 0.5f64.sqrt();

    // K ⊗ |f⟩⟨·| on the flag: rows (r, f) with stride 2.
    let with_flag = |op: &CMatrix, f: usize, rows: usize| -> CMatrix {
        let mut out = CMatrix::zeros(rows * 2, op.cols());
        for r in 0..op.rows() {
            for c in 0..op.cols() {
                out[(r * 2 + f, c)] = op[(r, c)];
            }
        }
        out
    };

    // M: identity branch (flag 0) plus channel branch (flag 1).
    let mut m_kraus = Vec::with_capacity(1 + n.kraus().len());
    let embed_in = CMatrix::from_fn(reg, n.in_dim(), |i, j| {
        if i == j {
            Complex64::new(half, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    m_kraus.push(with_flag(&embed_in, 0, reg));
    for k in n.kraus() {
        let padded = CMatrix::from_fn(reg, n.in_dim(), |i, j| {
            if i < k.rows() {
                k[(i, j)] * half
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        m_kraus.push(with_flag(&padded, 1, reg));
    }
    let m = KrausChannel::new(m_kraus)?;

    // M̂: erasure branch (flag 0) plus complementary branch (flag 1).
    let nhat = n.complement_channel()?;
    let erase_row = e_dim - 1;
    let mut mc_kraus = Vec::new();
    for a in 0..n.in_dim() {
        let mut op = CMatrix::zeros(e_dim, n.in_dim());
        op[(erase_row, a)] = Complex64::new(half, 0.0);
        mc_kraus.push(with_flag(&op, 0, e_dim));
    }
    for l in nhat.kraus() {
        let padded = CMatrix::from_fn(e_dim, n.in_dim(), |i, j| {
            if i < l.rows() {
                l[(i, j)] * half
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        mc_kraus.push(with_flag(&padded, 1, e_dim));
    }
    let m_complement = KrausChannel::new(mc_kraus)?;

    Ok(FlaggedChannel {
        reg_dim: reg,
        env_dim: e_dim,
        m,
        m_complement,
    })
}

/// The degrading map for the flagged extension of `n`: flip the flag qubit,
/// then conditioned on the flipped flag apply the complement of `n` to the
/// first register (flag now |1⟩) or reset it to the erasure state (flag
/// now |0⟩). Satisfies D ∘ M = M̂ exactly.
pub fn degrading_map(n: &KrausChannel) -> Result<KrausChannel> {
    let reg = n.in_dim().max(n.out_dim());
    let e_dim = n.kraus().len() + 1;
    let erase_row = e_dim - 1;
    let nhat = n.complement_channel()?;

    // Input rows are (r, f) pairs over reg x 2; output rows (r', f') over
    // e_dim x 2.
    let mut kraus: Vec<CMatrix> = Vec::new();

    // Flag 0 -> 1: apply the complement on the populated input block.
    for l in nhat.kraus() {
        let mut op = CMatrix::zeros(e_dim * 2, reg * 2);
        for i in 0..l.rows() {
            for j in 0..l.cols() {
                op[(i * 2 + 1, j * 2)] = l[(i, j)];
            }
        }
        kraus.push(op);
    }
    // Flag 0 -> 1: input support beyond in_dim (padding rows) is erased, so
    // the map stays trace preserving on the whole register.
    for p in n.in_dim()..reg {
        let mut op = CMatrix::zeros(e_dim * 2, reg * 2);
        op[(erase_row * 2 + 1, p * 2)] = Complex64::new(1.0, 0.0);
        kraus.push(op);
    }
    // Flag 1 -> 0: reset the first register to the erasure state.
    for k in 0..reg {
        let mut op = CMatrix::zeros(e_dim * 2, reg * 2);
        op[(erase_row * 2, k * 2 + 1)] = Complex64::new(1.0, 0.0);
        kraus.push(op);
    }
    KrausChannel::new(kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{haar_unitary, RngSeed, UnitaryEnsemble};
    use crate::exec::ExecMode;
    use crate::qlinalg::{entropy_vn, trace_distance, PureState};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_channel(d: usize, m: usize, seed: u64) -> FiniteVChannel {
        let e = UnitaryEnsemble::explicit_haar(d, m, RngSeed::new(seed)).unwrap();
        FiniteVChannel::new(e).unwrap()
    }

    #[test]
    fn controlled_phase_values() {
        let p2 = controlled_phase(2);
        let expect = CMatrix::diag(&[c(1., 0.), c(1., 0.), c(1., 0.), c(-1., 0.)]);
        assert!(p2.matrix().max_abs_diff(&expect) < 1e-15);

        // Entry at (i=1, j=2) for d=3 is ω² = exp(4πi/3).
        let p3 = controlled_phase(3);
        let idx = 1 * 3 + 2;
        let expected = Complex64::new(0.0, 4.0 * std::f64::consts::PI / 3.0).exp();
        assert!((p3.matrix()[(idx, idx)] - expected).norm() < 1e-14);
    }

    #[test]
    fn controlled_phase_is_control_target_sum() {
        // P = Σ_i |i⟩⟨i| ⊗ Z^i at d = 4.
        let d = 4;
        let p = controlled_phase(d);
        let mut sum = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(i, i)] = c(1.0, 0.0);
            let zi = z_string(&[i as i64], d).unwrap();
            sum = sum.add(&tensor(&unit, zi.matrix()).unwrap());
        }
        assert!(p.matrix().max_abs_diff(&sum) < 1e-12);
    }

    #[test]
    fn z_string_values() {
        let d = 3;
        assert!(z_string(&[0, 0], d)
            .unwrap()
            .matrix()
            .max_abs_diff(&CMatrix::identity(9))
            < 1e-15);

        // Z^1 |2⟩ = ω² |2⟩.
        let z1 = z_string(&[1], d).unwrap();
        let omega2 = Complex64::new(0.0, 4.0 * std::f64::consts::PI / 3.0).exp();
        assert!((z1.matrix()[(2, 2)] - omega2).norm() < 1e-14);

        // Z^{(1,2)} = Z^1 ⊗ Z^2.
        let z12 = z_string(&[1, 2], d).unwrap();
        let prod = tensor(
            z_string(&[1], d).unwrap().matrix(),
            z_string(&[2], d).unwrap().matrix(),
        )
        .unwrap();
        assert!(z12.matrix().max_abs_diff(&prod) < 1e-13);

        assert!(z_string(&[3], 3).is_err());
        assert!(z_string(&[-1], 3).is_err());
    }

    #[test]
    fn basis_states_transmit_without_error() {
        let d = 3;
        let ch = small_channel(d, 4, 5);
        for i in 0..d {
            let input = DensityMatrix::from_matrix_unchecked(
                tensor(
                    PureState::basis(d, i).projector().matrix(),
                    DensityMatrix::maximally_mixed(d).matrix(),
                )
                .unwrap(),
            );
            let out = ch.apply(&input, ExecMode::Serial).unwrap();
            for (_, block) in out.blocks() {
                let dist =
                    trace_distance(block, &PureState::basis(d, i).projector()).unwrap();
                assert!(dist < 1e-10, "basis state {i} distorted by {dist:.2e}");
            }
        }
    }

    #[test]
    fn maximally_mixed_first_register_dephases_to_mixed() {
        // (I/d) ⊗ σ comes out maximally mixed on every block.
        let d = 3;
        let ch = small_channel(d, 5, 6);
        let sigma = crate::ensembles::random_density(d, RngSeed::new(8)).unwrap();
        let input = DensityMatrix::from_matrix_unchecked(
            tensor(DensityMatrix::maximally_mixed(d).matrix(), sigma.matrix()).unwrap(),
        );
        let out = ch.apply(&input, ExecMode::Serial).unwrap();
        for (_, block) in out.blocks() {
            assert!(
                block
                    .matrix()
                    .max_abs_diff(DensityMatrix::maximally_mixed(d).matrix())
                    < 1e-12
            );
        }
    }

    #[test]
    fn complement_of_basis_input_is_shield_independent() {
        // Input |i⟩⟨i| ⊗ (I/d): every environment block is I/d regardless of i.
        let d = 2;
        let ch = small_channel(d, 4, 7);
        for i in 0..d {
            let input = DensityMatrix::from_matrix_unchecked(
                tensor(
                    PureState::basis(d, i).projector().matrix(),
                    DensityMatrix::maximally_mixed(d).matrix(),
                )
                .unwrap(),
            );
            let out = ch.apply_complement(&input, ExecMode::Serial).unwrap();
            for (_, block) in out.blocks() {
                assert!(
                    block
                        .matrix()
                        .max_abs_diff(DensityMatrix::maximally_mixed(d).matrix())
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn complement_with_identity_member_conjugates_by_phase_string() {
        // With V = I the environment block for |x⟩⟨x| ⊗ |φ⟩⟨φ| is
        // Z^x |φ⟩⟨φ| Z^{-x}.
        let d = 3;
        let e = UnitaryEnsemble::explicit(vec![(UnitaryMatrix::identity(d), 1.0)]).unwrap();
        let ch = FiniteVChannel::new(e).unwrap();
        let phi = crate::ensembles::haar_state(d, RngSeed::new(3)).unwrap();
        for x in 0..d {
            let input = DensityMatrix::from_matrix_unchecked(
                tensor(
                    PureState::basis(d, x).projector().matrix(),
                    phi.projector().matrix(),
                )
                .unwrap(),
            );
            let out = ch.apply_complement(&input, ExecMode::Serial).unwrap();
            let zx = z_string(&[x as i64], d).unwrap();
            let expect = phi.projector().conjugated(&zx);
            assert!(out.blocks()[0].1.matrix().max_abs_diff(expect.matrix()) < 1e-12);
            // Pure shield stays pure.
            assert!((out.blocks()[0].1.purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stinespring_is_isometry_and_reproduces_blocks() {
        let d = 2;
        let ch = small_channel(d, 3, 9);
        let iso = ch.stinespring().unwrap();
        assert!(iso.isometry_defect() < 1e-10);

        let rho = crate::ensembles::random_density(d * d, RngSeed::new(10)).unwrap();
        let m = ch.member_count();
        let lifted = DensityMatrix::from_matrix_unchecked(
            iso.matrix.matmul(rho.matrix()).matmul(&iso.matrix.adjoint()),
        );
        // Receiver side: keep (A1, label_B) = factors 0 and 2.
        let b_side = partial_trace(&lifted, &[d, d, m, m], &[0, 2]).unwrap();
        let cq = ch.apply(&rho, ExecMode::Serial).unwrap();
        let expect = cq.to_full_state().unwrap();
        assert!(b_side.matrix().max_abs_diff(expect.matrix()) < 1e-10);

        // Environment side: keep (A2, label_E) = factors 1 and 3.
        let e_side = partial_trace(&lifted, &[d, d, m, m], &[1, 3]).unwrap();
        let cq = ch.apply_complement(&rho, ExecMode::Serial).unwrap();
        let expect = cq.to_full_state().unwrap();
        assert!(e_side.matrix().max_abs_diff(expect.matrix()) < 1e-10);
    }

    #[test]
    fn phase_covariance_on_first_register() {
        // Conjugating the input by Z^a ⊗ I conjugates every receiver block
        // by Z^a.
        let d = 3;
        let ch = small_channel(d, 4, 11);
        let rho = crate::ensembles::random_density(d * d, RngSeed::new(12)).unwrap();
        let a = 2i64;
        let za = z_string(&[a], d).unwrap();
        let za_i = UnitaryMatrix::new(
            tensor(za.matrix(), &CMatrix::identity(d)).unwrap(),
        )
        .unwrap();
        let shifted = rho.conjugated(&za_i);

        let base = ch.apply(&rho, ExecMode::Serial).unwrap();
        let moved = ch.apply(&shifted, ExecMode::Serial).unwrap();
        for ((_, b0), (_, b1)) in base.blocks().iter().zip(moved.blocks()) {
            let expect = b0.conjugated(&za);
            assert!(b1.matrix().max_abs_diff(expect.matrix()) < 1e-11);
        }
    }

    #[test]
    fn cq_outputs_are_normalized() {
        let ch = small_channel(2, 6, 13);
        let rho = crate::ensembles::random_density(4, RngSeed::new(14)).unwrap();
        let out = ch.apply(&rho, ExecMode::Serial).unwrap();
        let total: f64 = out
            .blocks()
            .iter()
            .map(|(w, b)| w * b.matrix().trace().re)
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn choi_of_identity_and_depolarizing() {
        let id = KrausChannel::identity(2);
        let choi = id.choi().unwrap();
        // Maximally entangled projector.
        let omega = PureState::normalized(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
            .unwrap()
            .projector();
        assert!(choi.matrix().max_abs_diff(omega.matrix()) < 1e-14);

        // Completely depolarizing: Kraus {|i⟩⟨j|/√d}; Choi = I/d ⊗ I/d.
        let d = 2;
        let kraus = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = c(1.0 / (d as f64).sqrt(), 0.0);
                k
            })
            .collect();
        let dep = KrausChannel::new(kraus).unwrap();
        let choi = dep.choi().unwrap();
        assert!(
            choi.matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(4).matrix())
                < 1e-14
        );
    }

    #[test]
    fn choi_distance_zero_iff_same_map() {
        let u = haar_unitary(2, RngSeed::new(20)).unwrap();
        let a = KrausChannel::from_unitary(&u);
        let b = KrausChannel::from_unitary(&u);
        assert!(a.choi_distance(&b).unwrap() < 1e-12);
        let id = KrausChannel::identity(2);
        assert!(a.choi_distance(&id).unwrap() > 1e-3);
    }

    #[test]
    fn compose_identity_is_identity() {
        let ch = small_channel(2, 3, 21).to_kraus().unwrap();
        let id = KrausChannel::identity(ch.out_dim());
        let composed = KrausChannel::compose(&id, &ch).unwrap();
        assert!(composed.choi_distance(&ch).unwrap() < 1e-11);
    }

    #[test]
    fn channel_factors_through_flagged_extension() {
        // N = L ∘ M with L reading the flag: apply N on flag 0, identity on
        // flag 1. Checked on random inputs.
        let ch = small_channel(2, 4, 22);
        let n = ch.to_kraus().unwrap();
        let flagged = flagged_channel(&n).unwrap();
        let reg = flagged.reg_dim;

        let mut l_kraus = Vec::new();
        for k in n.kraus() {
            // K (in x reg padding) ⊗ ⟨0| on the flag.
            let mut op = CMatrix::zeros(n.out_dim(), reg * 2);
            for i in 0..k.rows() {
                for j in 0..k.cols() {
                    op[(i, j * 2)] = k[(i, j)];
                }
            }
            l_kraus.push(op);
        }
        // Identity on the first out_dim dims ⊗ ⟨1|.
        let mut op = CMatrix::zeros(n.out_dim(), reg * 2);
        for i in 0..n.out_dim() {
            op[(i, i * 2 + 1)] = c(1.0, 0.0);
        }
        l_kraus.push(op);
        let l = KrausChannel::new(l_kraus).unwrap();

        let composed = KrausChannel::compose(&l, &flagged.m).unwrap();
        for t in 0..50u64 {
            let rho = crate::ensembles::random_density(n.in_dim(), RngSeed::new(23).stream(t))
                .unwrap();
            let direct = n.apply(&rho).unwrap();
            let via = composed.apply(&rho).unwrap();
            assert!(direct.matrix().max_abs_diff(via.matrix()) < 1e-11);
        }
    }

    #[test]
    fn flagged_channel_structure() {
        let ch = small_channel(2, 4, 24);
        let n = ch.to_kraus().unwrap();
        let flagged = flagged_channel(&n).unwrap();
        let rho = crate::ensembles::random_density(n.in_dim(), RngSeed::new(25)).unwrap();

        let out = flagged.m.apply(&rho).unwrap();
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        // Flag-0 block of M(ρ) is ρ/2 (embedded).
        for i in 0..n.in_dim() {
            for j in 0..n.in_dim() {
                let got = out.matrix()[(i * 2, j * 2)];
                let want = rho.matrix()[(i, j)] * 0.5;
                assert!((got - want).norm() < 1e-12);
            }
        }
        // Flag marginal is exactly I/2.
        let flag = partial_trace(&out, &[flagged.reg_dim, 2], &[1]).unwrap();
        assert!(
            flag.matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
                < 1e-12
        );

        // Flag-0 block of M̂(ρ) is |e⟩⟨e|/2 for every input.
        let cout = flagged.m_complement.apply(&rho).unwrap();
        let erase = flagged.env_dim - 1;
        for i in 0..flagged.env_dim {
            for j in 0..flagged.env_dim {
                let got = cout.matrix()[(i * 2, j * 2)];
                let want = if i == erase && j == erase { 0.5 } else { 0.0 };
                assert!((got - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn explicit_complement_matches_canonical_entropy() {
        // M̂ and the canonical Kraus complement of M are unitarily related,
        // so they agree in entropy on every input.
        let ch = small_channel(2, 3, 26);
        let n = ch.to_kraus().unwrap();
        let flagged = flagged_channel(&n).unwrap();
        for t in 0..20u64 {
            let rho = crate::ensembles::random_density(n.in_dim(), RngSeed::new(27).stream(t))
                .unwrap();
            let explicit = flagged.m_complement.apply(&rho).unwrap();
            let canonical = flagged.m.complement_state(&rho).unwrap();
            let se = entropy_vn(&explicit).unwrap();
            let sc = entropy_vn(&canonical).unwrap();
            assert!((se - sc).abs() < 1e-9, "entropies {se} vs {sc}");
        }
    }

    #[test]
    fn degrading_map_degrades_small_channels() {
        // Identity channel.
        let id = KrausChannel::identity(2);
        let flagged = flagged_channel(&id).unwrap();
        let d_map = degrading_map(&id).unwrap();
        assert!(d_map.trace_preserving_defect() < 1e-12);
        let composed = KrausChannel::compose(&d_map, &flagged.m).unwrap();
        assert!(composed.choi_distance(&flagged.m_complement).unwrap() < 1e-9);

        // Completely dephasing qubit channel.
        let deph = KrausChannel::dephasing_on_factor(&[2], 0).unwrap();
        let flagged = flagged_channel(&deph).unwrap();
        let d_map = degrading_map(&deph).unwrap();
        let composed = KrausChannel::compose(&d_map, &flagged.m).unwrap();
        assert!(composed.choi_distance(&flagged.m_complement).unwrap() < 1e-9);
    }

    #[test]
    fn degrading_map_is_trace_preserving_on_random_inputs() {
        let ch = small_channel(2, 4, 28);
        let n = ch.to_kraus().unwrap();
        let d_map = degrading_map(&n).unwrap();
        assert!(d_map.trace_preserving_defect() < 1e-11);
        let flagged = flagged_channel(&n).unwrap();
        for t in 0..100u64 {
            let rho = crate::ensembles::random_density(n.in_dim(), RngSeed::new(29).stream(t))
                .unwrap();
            let out = d_map.apply(&flagged.m.apply(&rho).unwrap()).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn dephasing_commutes_with_the_channel() {
        // Dephasing the first input register before the channel equals
        // dephasing the receiver register after it.
        let d = 3;
        let ch = small_channel(d, 4, 30);
        let n = ch.to_kraus().unwrap();
        let m = ch.member_count();
        let pre = KrausChannel::dephasing_on_factor(&[d, d], 0).unwrap();
        let post = KrausChannel::dephasing_on_factor(&[d, m], 0).unwrap();
        let n_pre = KrausChannel::compose(&n, &pre).unwrap();
        let n_post = KrausChannel::compose(&post, &n).unwrap();
        for t in 0..20u64 {
            let rho = crate::ensembles::random_density(d * d, RngSeed::new(31).stream(t))
                .unwrap();
            let a = n_pre.apply(&rho).unwrap();
            let b = n_post.apply(&rho).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-11);
        }
    }
}
