//! Sources of random and exactly-averaged unitaries.
//!
//! Three ensemble kinds back the channel family: a seeded Haar sample, the
//! exact single-qudit Clifford group for d ∈ {2, 3} (enumerated modulo global
//! phase), and explicit weighted lists. The module also carries the exact
//! second-moment machinery: swap operator, symmetric/antisymmetric projectors,
//! the twirled phase-difference operator
//! S^a = Π_sym/(d+1) − Π_anti/(d−1), and ensemble twirls to compare against.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{matrix_sum_indexed, ExecMode};
use crate::qlinalg::{tensor, vec_norm, CMatrix, PureState, UnitaryMatrix};

/// Weights must sum to 1 within this tolerance.
pub const WEIGHT_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

/// Seed plus substream index. A `(seed, stream_id)` pair fully determines
/// every sample drawn, independent of thread scheduling; per-trial substreams
/// are derived by offsetting `stream_id`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        RngSeed { seed, stream_id }
    }

    /// Substream for trial/restart `index`, counter-based.
    pub fn stream(self, index: u64) -> Self {
        RngSeed {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_add(index),
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Haar sampling
// ---------------------------------------------------------------------------

/// Haar-distributed d×d unitary: QR of a Ginibre matrix with the column
/// phases fixed by multiplying column k by conj(R_kk)/|R_kk|.
pub fn haar_unitary(d: usize, seed: RngSeed) -> Result<UnitaryMatrix> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "haar_unitary needs d >= 2, got {d}"
        )));
    }
    Ok(haar_unitary_rng(d, &mut seed.rng()))
}

/// Haar unitary drawn from an already-positioned RNG stream.
pub fn haar_unitary_rng(d: usize, rng: &mut ChaCha8Rng) -> UnitaryMatrix {
    let ginibre = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let (mut q, rdiag) = crate::qlinalg::mgs_qr(&ginibre);
    for k in 0..d {
        let phase = rdiag[k].conj() / rdiag[k].norm();
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    UnitaryMatrix::new(q).expect("orthonormalized columns")
}

/// Haar-distributed pure state, i.e. U|0⟩ for Haar U; sampled directly as a
/// normalized vector of i.i.d. complex Gaussians.
pub fn haar_state(d: usize, seed: RngSeed) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "haar_state needs d >= 2, got {d}"
        )));
    }
    Ok(haar_state_rng(d, &mut seed.rng()))
}

/// Haar pure state drawn from an already-positioned RNG stream.
pub fn haar_state_rng(d: usize, rng: &mut ChaCha8Rng) -> PureState {
    let mut v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let inv = 1.0 / vec_norm(&v);
    for z in v.iter_mut() {
        *z *= inv;
    }
    PureState::new(v).expect("normalized vector")
}

/// Random density matrix from the Hilbert–Schmidt ensemble: G G†/Tr[G G†]
/// for a Ginibre matrix G.
pub fn random_density(d: usize, seed: RngSeed) -> Result<crate::qlinalg::DensityMatrix> {
    let mut rng = seed.rng();
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(&mut rng));
    let gg = g.matmul(&g.adjoint());
    let tr = gg.trace().re;
    Ok(crate::qlinalg::DensityMatrix::from_matrix_unchecked(
        gg.scale_re(1.0 / tr),
    ))
}

/// Random Hermitian matrix (G + G†)/2 for a Ginibre matrix G.
pub fn random_hermitian(d: usize, seed: RngSeed) -> CMatrix {
    let mut rng = seed.rng();
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(&mut rng));
    g.symmetrize()
}

/// Random point on the probability simplex (normalized uniforms).
pub fn random_prob_vector(len: usize, seed: RngSeed) -> Vec<f64> {
    let mut rng = seed.rng();
    let mut p: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
    let z: f64 = p.iter().sum();
    for q in p.iter_mut() {
        *q /= z;
    }
    p
}

// ---------------------------------------------------------------------------
// Clifford group enumeration
// ---------------------------------------------------------------------------

fn root_of_unity(d: usize, k: i64) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let phase = two_pi * (k.rem_euclid(d as i64) as f64) / d as f64;
    Complex64::new(phase.cos(), phase.sin())
}

/// Fourier gate F[j,k] = ω^{jk}/√d.
pub fn fourier_gate(d: usize) -> UnitaryMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    UnitaryMatrix::from_matrix_unchecked(CMatrix::from_fn(d, d, |j, k| {
        root_of_unity(d, (j * k) as i64) * norm
    }))
}

/// Phase gate: diag(1, i) for d = 2, diag(ω^{j(j−1)/2}) for odd d.
pub fn phase_gate(d: usize) -> UnitaryMatrix {
    let entries: Vec<Complex64> = if d == 2 {
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]
    } else {
        (0..d as i64)
            .map(|j| root_of_unity(d, j * (j - 1) / 2))
            .collect()
    };
    UnitaryMatrix::from_matrix_unchecked(CMatrix::diag(&entries))
}

/// Shift gate X|j⟩ = |j+1 mod d⟩.
pub fn shift_gate(d: usize) -> UnitaryMatrix {
    UnitaryMatrix::from_matrix_unchecked(CMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Clock gate Z|j⟩ = ω^j |j⟩.
pub fn clock_gate(d: usize) -> UnitaryMatrix {
    UnitaryMatrix::from_matrix_unchecked(CMatrix::diag(
        &(0..d).map(|j| root_of_unity(d, j as i64)).collect::<Vec<_>>(),
    ))
}

/// Remove the global phase: scale so the first entry with |z| > 1e-6 becomes
/// positive real. Clifford entries are 0 or at least 1/√d in magnitude, so
/// the threshold is unambiguous.
fn canonicalize_phase(m: &CMatrix) -> CMatrix {
    for z in m.data() {
        if z.norm() > 1e-6 {
            let phase = z.conj() / z.norm();
            return m.scale(phase);
        }
    }
    m.clone()
}

const CLIFFORD_EQ_TOL: f64 = 1e-9;

/// Projective order of the single-qudit Clifford group for prime d.
fn clifford_order(d: usize) -> usize {
    d.pow(3) * (d * d - 1)
}

/// Full single-qudit Clifford group modulo global phase, for d ∈ {2, 3}.
///
/// Breadth-first closure over the generators {Fourier, phase, X, Z}; each
/// member is canonicalized so its first nonzero entry is positive real.
pub fn clifford_group(d: usize) -> Result<UnitaryEnsemble> {
    if d != 2 && d != 3 {
        return Err(Error::InvalidParameter(format!(
            "clifford_group supports d in {{2, 3}}, got {d}"
        )));
    }
    let gens = [fourier_gate(d), phase_gate(d), shift_gate(d), clock_gate(d)];
    let safety_cap = 4 * clifford_order(d);

    let mut members: Vec<CMatrix> = vec![canonicalize_phase(&CMatrix::identity(d))];
    let mut frontier: Vec<usize> = vec![0];
    while let Some(idx) = frontier.pop() {
        let base = members[idx].clone();
        for g in &gens {
            let candidate = canonicalize_phase(&g.matrix().matmul(&base));
            let known = members
                .iter()
                .any(|m| m.max_abs_diff(&candidate) < CLIFFORD_EQ_TOL);
            if !known {
                members.push(candidate);
                frontier.push(members.len() - 1);
                if members.len() > safety_cap {
                    return Err(Error::InvalidState(format!(
                        "clifford closure exceeded {safety_cap} elements; \
                         canonicalization is losing members"
                    )));
                }
            }
        }
    }

    let w = 1.0 / members.len() as f64;
    let members = members
        .into_iter()
        .map(|m| (UnitaryMatrix::new(m).expect("closure members stay unitary"), w))
        .collect();
    Ok(UnitaryEnsemble {
        d,
        kind: EnsembleKind::CliffordExact,
        members,
    })
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

/// How an ensemble was produced; part of every result's provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnsembleKind {
    HaarSample { m: usize, seed: RngSeed },
    CliffordExact,
    ExplicitList,
}

impl EnsembleKind {
    pub fn label(&self) -> &'static str {
        match self {
            EnsembleKind::HaarSample { .. } => "haar",
            EnsembleKind::CliffordExact => "clifford",
            EnsembleKind::ExplicitList => "explicit",
        }
    }
}

/// Finite weighted set of d×d unitaries standing in for the distribution of
/// the mixing unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryEnsemble {
    d: usize,
    kind: EnsembleKind,
    members: Vec<(UnitaryMatrix, f64)>,
}

impl UnitaryEnsemble {
    /// `m` Haar samples with uniform weights, one RNG substream per member.
    pub fn haar(d: usize, m: usize, seed: RngSeed) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("haar ensemble needs m >= 1".into()));
        }
        let w = 1.0 / m as f64;
        let members = (0..m)
            .map(|t| haar_unitary(d, seed.stream(t as u64)).map(|u| (u, w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(UnitaryEnsemble {
            d,
            kind: EnsembleKind::HaarSample { m, seed },
            members,
        })
    }

    pub fn clifford(d: usize) -> Result<Self> {
        clifford_group(d)
    }

    /// Explicit weighted list. Weights must be positive and sum to 1.
    pub fn explicit(members: Vec<(UnitaryMatrix, f64)>) -> Result<Self> {
        let d = members
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?
            .0
            .dim();
        if members.iter().any(|(u, _)| u.dim() != d) {
            return Err(Error::DimMismatch("ensemble members differ in dimension".into()));
        }
        if members.iter().any(|&(_, w)| w <= 0.0) {
            return Err(Error::InvalidParameter("ensemble weights must be positive".into()));
        }
        let total: f64 = members.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidState(format!(
                "ensemble weights sum to {total}, expected 1"
            )));
        }
        Ok(UnitaryEnsemble {
            d,
            kind: EnsembleKind::ExplicitList,
            members,
        })
    }

    /// Uniform explicit list of `m` Haar draws: a small fixed stand-in used
    /// where an exactly known, enumerable ensemble is wanted.
    pub fn explicit_haar(d: usize, m: usize, seed: RngSeed) -> Result<Self> {
        let w = 1.0 / m as f64;
        let members = (0..m)
            .map(|t| haar_unitary(d, seed.stream(t as u64)).map(|u| (u, w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(UnitaryEnsemble {
            d,
            kind: EnsembleKind::ExplicitList,
            members,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &EnsembleKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[(UnitaryMatrix, f64)] {
        &self.members
    }

    /// Σ_{j,k} w_j w_k |Tr(U_j†U_k)|⁴. Equals 2 exactly when the ensemble is
    /// an exact unitary 2-design.
    pub fn frame_potential(&self, mode: ExecMode) -> f64 {
        let n = self.members.len();
        let row_sums = crate::exec::map_indexed(mode, n, |j| {
            let (uj, wj) = &self.members[j];
            let mut acc = 0.0;
            for (uk, wk) in &self.members {
                let mut tr = Complex64::new(0.0, 0.0);
                for (a, b) in uj.matrix().data().iter().zip(uk.matrix().data()) {
                    tr += a.conj() * b;
                }
                let t2 = tr.norm_sqr();
                acc += wj * wk * t2 * t2;
            }
            acc
        });
        row_sums.iter().sum()
    }
}

// ---------------------------------------------------------------------------
// Exact second-moment algebra
// ---------------------------------------------------------------------------

/// Swap operator F = Σ_{i,j} |i⟩|j⟩⟨j|⟨i| on C^d ⊗ C^d.
pub fn swap_operator(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        let (k, l) = (c / d, c % d);
        if i == l && j == k {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Projectors (Π_sym, Π_anti) = ((I+F)/2, (I−F)/2) onto the symmetric and
/// antisymmetric subspaces of C^d ⊗ C^d.
pub fn sym_antisym_projectors(d: usize) -> (CMatrix, CMatrix) {
    let f = swap_operator(d);
    let id = CMatrix::identity(d * d);
    let sym = id.add(&f).scale_re(0.5);
    let anti = id.sub(&f).scale_re(0.5);
    (sym, anti)
}

/// The exact second-moment average of Z^a ⊗ Z^{−a}:
/// identity when a ≡ 0 (mod d), otherwise Π_sym/(d+1) − Π_anti/(d−1).
pub fn s_operator(a: i64, d: usize) -> CMatrix {
    if a.rem_euclid(d as i64) == 0 {
        return CMatrix::identity(d * d);
    }
    let (sym, anti) = sym_antisym_projectors(d);
    sym.scale_re(1.0 / (d as f64 + 1.0))
        .sub(&anti.scale_re(1.0 / (d as f64 - 1.0)))
}

/// Ensemble average of (U†⊗U†) m (U⊗U) over the members. For any exact
/// 2-design this equals the projector closed form
/// Tr[Π_sym m]·Π_sym/d_sym + Tr[Π_anti m]·Π_anti/d_anti.
pub fn second_moment_twirl(m: &CMatrix, e: &UnitaryEnsemble, mode: ExecMode) -> Result<CMatrix> {
    let dd = e.d() * e.d();
    if m.rows() != dd || m.cols() != dd {
        return Err(Error::DimMismatch(format!(
            "twirl input must be {dd}x{dd} for d = {}, got {}x{}",
            e.d(),
            m.rows(),
            m.cols()
        )));
    }
    let members = e.members();
    Ok(matrix_sum_indexed(mode, members.len() as u64, dd, dd, |k, acc| {
        let (u, w) = &members[k as usize];
        let uu = tensor(u.matrix(), u.matrix()).expect("d^2 within cap");
        let term = uu.adjoint().matmul(m).matmul(&uu);
        acc.add_assign_scaled(&term, *w);
    }))
}

/// Ensemble average of (U†aU) ⊗ (U†bU). Same average as
/// `second_moment_twirl(a ⊗ b, ..)` but evaluated factor-by-factor, which is
/// what makes 10^5-member Monte Carlo twirls affordable.
pub fn second_moment_twirl_product(
    a: &CMatrix,
    b: &CMatrix,
    e: &UnitaryEnsemble,
    mode: ExecMode,
) -> Result<CMatrix> {
    let d = e.d();
    if a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d {
        return Err(Error::DimMismatch(format!(
            "product twirl factors must be {d}x{d}"
        )));
    }
    let members = e.members();
    Ok(matrix_sum_indexed(
        mode,
        members.len() as u64,
        d * d,
        d * d,
        |k, acc| {
            let (u, w) = &members[k as usize];
            let ua = a.conjugate_by(&u.matrix().adjoint());
            let ub = b.conjugate_by(&u.matrix().adjoint());
            let term = tensor(&ua, &ub).expect("d^2 within cap");
            acc.add_assign_scaled(&term, *w);
        },
    ))
}

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

/// {"d": d, "kind": "haar"|"clifford"|"explicit", "m": count,
///  "seed": [seed, stream], "members": [...] (explicit only)}
#[derive(Serialize, Deserialize)]
pub struct EnsembleWire {
    pub d: usize,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<(u64, u64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<UnitaryMatrix>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl UnitaryEnsemble {
    pub fn to_wire(&self) -> EnsembleWire {
        match &self.kind {
            EnsembleKind::HaarSample { m, seed } => EnsembleWire {
                d: self.d,
                kind: "haar".into(),
                m: Some(*m),
                seed: Some((seed.seed, seed.stream_id)),
                members: None,
                weights: None,
            },
            EnsembleKind::CliffordExact => EnsembleWire {
                d: self.d,
                kind: "clifford".into(),
                m: None,
                seed: None,
                members: None,
                weights: None,
            },
            EnsembleKind::ExplicitList => {
                let uniform = self
                    .members
                    .iter()
                    .all(|&(_, w)| (w - 1.0 / self.members.len() as f64).abs() < 1e-15);
                EnsembleWire {
                    d: self.d,
                    kind: "explicit".into(),
                    m: None,
                    seed: None,
                    members: Some(self.members.iter().map(|(u, _)| u.clone()).collect()),
                    weights: if uniform {
                        None
                    } else {
                        Some(self.members.iter().map(|&(_, w)| w).collect())
                    },
                }
            }
        }
    }

    pub fn from_wire(wire: EnsembleWire) -> Result<Self> {
        match wire.kind.as_str() {
            "haar" => {
                let m = wire
                    .m
                    .ok_or_else(|| Error::InvalidParameter("haar ensemble needs \"m\"".into()))?;
                let (seed, stream) = wire
                    .seed
                    .ok_or_else(|| Error::InvalidParameter("haar ensemble needs \"seed\"".into()))?;
                UnitaryEnsemble::haar(wire.d, m, RngSeed::with_stream(seed, stream))
            }
            "clifford" => UnitaryEnsemble::clifford(wire.d),
            "explicit" => {
                let members = wire.members.ok_or_else(|| {
                    Error::InvalidParameter("explicit ensemble needs \"members\"".into())
                })?;
                let n = members.len();
                let weights = wire.weights.unwrap_or_else(|| vec![1.0 / n as f64; n]);
                if weights.len() != n {
                    return Err(Error::InvalidParameter(
                        "weights length differs from members".into(),
                    ));
                }
                UnitaryEnsemble::explicit(members.into_iter().zip(weights).collect())
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown ensemble kind \"{other}\""
            ))),
        }
    }
}
