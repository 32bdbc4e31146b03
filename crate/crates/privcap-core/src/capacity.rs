//! Information quantities and bounds: coherent information on cq outputs,
//! Holevo and private information, block-diagonal standard-form inputs, a
//! multi-start projected-gradient optimizer, and the closed-form bounds
//! (the ½(log d_A + Q¹) ceiling, the harmonic-number lower bound, and its
//! Euler–Mascheroni asymptote).

use num_complex::Complex64;

use crate::channel::{flagged_channel, FiniteVChannel, KrausChannel};
use crate::ensembles::RngSeed;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::qlinalg::{
    entropy_vn, partial_trace, shannon_entropy_bits, tensor, CMatrix, DensityMatrix, PureState,
};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

// ---------------------------------------------------------------------------
// Input ensembles and Holevo information
// ---------------------------------------------------------------------------

/// Weighted set of channel input states.
#[derive(Debug, Clone)]
pub struct InputEnsemble {
    members: Vec<(f64, DensityMatrix)>,
}

impl InputEnsemble {
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("empty input ensemble".into()));
        }
        if members.iter().any(|&(p, _)| p <= 0.0) {
            return Err(Error::InvalidParameter("ensemble probabilities must be positive".into()));
        }
        let total: f64 = members.iter().map(|&(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "ensemble probabilities sum to {total}"
            )));
        }
        Ok(InputEnsemble { members })
    }

    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }

    /// The key-generation ensemble: probabilities 1/d over the basis states
    /// of the first register, maximally mixed second register.
    pub fn achievability(d: usize) -> Result<Self> {
        let shield = DensityMatrix::maximally_mixed(d);
        let members = (0..d)
            .map(|i| {
                let state = DensityMatrix::from_matrix_unchecked(
                    tensor(PureState::basis(d, i).projector().matrix(), shield.matrix())?,
                );
                Ok((1.0 / d as f64, state))
            })
            .collect::<Result<Vec<_>>>()?;
        InputEnsemble::new(members)
    }
}

/// Holevo information χ = S(Σ pᵢ ρᵢ) − Σ pᵢ S(ρᵢ) of a state ensemble, bits.
pub fn holevo_chi(outputs: &[(f64, DensityMatrix)]) -> Result<f64> {
    let avg = DensityMatrix::mixture(outputs)?;
    let mut chi = entropy_vn(&avg)?;
    for (p, rho) in outputs {
        chi -= p * entropy_vn(rho)?;
    }
    Ok(chi)
}

// ---------------------------------------------------------------------------
// Coherent and private information of the finite-ensemble channel
// ---------------------------------------------------------------------------

/// Coherent information Σ_v w_v [S(B block) − S(E block)] in bits. The label
/// register is shared by receiver and environment, so its entropy cancels and
/// only conditional block entropies remain.
pub fn coherent_information(
    ch: &FiniteVChannel,
    rho: &DensityMatrix,
    mode: ExecMode,
) -> Result<f64> {
    if rho.dim() != ch.in_dim() {
        return Err(Error::DimMismatch(format!(
            "input dim {} vs channel dim {}",
            rho.dim(),
            ch.in_dim()
        )));
    }
    let d = ch.d();
    let members = ch.ensemble().members();
    let terms = map_indexed(mode, members.len(), |v| -> Result<f64> {
        let out = rho.conjugated(ch.coupler(v));
        let b = partial_trace(&out, &[d, d], &[0])?;
        let e = partial_trace(&out, &[d, d], &[1])?;
        Ok(members[v].1 * (entropy_vn(&b)? - entropy_vn(&e)?))
    });
    terms.into_iter().try_fold(0.0, |acc, t| Ok(acc + t?))
}

/// Private information χ(N,E) − χ(N̂,E) with the classical label folded into
/// both outputs: Σ_v w_v [χ_B(v) − χ_E(v)] in bits.
pub fn private_information(
    ch: &FiniteVChannel,
    ensemble: &InputEnsemble,
    mode: ExecMode,
) -> Result<f64> {
    let d = ch.d();
    for (_, state) in ensemble.members() {
        if state.dim() != ch.in_dim() {
            return Err(Error::DimMismatch("ensemble member has wrong dimension".into()));
        }
    }
    let members = ch.ensemble().members();
    let terms = map_indexed(mode, members.len(), |v| -> Result<f64> {
        let mut b_out = Vec::with_capacity(ensemble.members().len());
        let mut e_out = Vec::with_capacity(ensemble.members().len());
        for (p, state) in ensemble.members() {
            let out = state.conjugated(ch.coupler(v));
            b_out.push((*p, partial_trace(&out, &[d, d], &[0])?));
            e_out.push((*p, partial_trace(&out, &[d, d], &[1])?));
        }
        Ok(members[v].1 * (holevo_chi(&b_out)? - holevo_chi(&e_out)?))
    });
    terms.into_iter().try_fold(0.0, |acc, t| Ok(acc + t?))
}

/// Coherent information S(N(ρ)) − S(N̂(ρ)) of a Kraus channel, bits.
pub fn coherent_information_kraus(n: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let out = entropy_vn(&n.apply(rho)?)?;
    let env = entropy_vn(&n.complement_state(rho)?)?;
    Ok(out - env)
}

/// ½[S(ρ) + S(N(ρ)) − S(N̂(ρ))]: the coherent information of the flagged
/// extension of N, evaluated without building it.
pub fn half_objective(n: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let s_in = entropy_vn(rho)?;
    let s_out = entropy_vn(&n.apply(rho)?)?;
    let s_env = entropy_vn(&n.complement_state(rho)?)?;
    Ok(0.5 * (s_in + s_out - s_env))
}

/// Coherent information of the flagged extension, computed the long way
/// (build M, apply, take the canonical complement).
pub fn flagged_coherent_information(n: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let flagged = flagged_channel(n)?;
    coherent_information_kraus(&flagged.m, rho)
}

/// The privacy ceiling ½(log₂ d_A + q1) in bits.
pub fn privacy_upper_bound(d_a: usize, q1: f64) -> f64 {
    0.5 * ((d_a as f64).log2() + q1)
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Harmonic number H_d = Σ_{k=1}^d 1/k.
pub fn harmonic(d: usize) -> f64 {
    (1..=d).map(|k| 1.0 / k as f64).sum()
}

/// Haar average of the entropy of a dephased random pure state:
/// (log₂ e)(H_d − 1) bits.
pub fn avg_dephased_entropy_closed_form(d: usize) -> f64 {
    LOG2_E * (harmonic(d) - 1.0)
}

/// Coherent information of the fixed input (I/d) ⊗ |0⟩⟨0|:
/// log₂ d − (log₂ e)(H_d − 1) bits. Tends to (1 − γ) log₂ e ≈ 0.61.
pub fn closed_form_lower_bound(d: usize) -> f64 {
    (d as f64).log2() - avg_dephased_entropy_closed_form(d)
}

// ---------------------------------------------------------------------------
// Standard-form inputs
// ---------------------------------------------------------------------------

/// Block-diagonal input over n channel uses: probabilities p over the d^n
/// basis strings of the first registers, one pure shield state on the second
/// registers per string with p > 0.
#[derive(Debug, Clone)]
pub struct StandardFormInput {
    pub d: usize,
    pub n: usize,
    /// Probability per basis string, length d^n.
    pub p: Vec<f64>,
    /// Shield per string; `None` exactly where p is zero.
    pub shields: Vec<Option<PureState>>,
}

impl StandardFormInput {
    pub fn new(d: usize, n: usize, p: Vec<f64>, shields: Vec<Option<PureState>>) -> Result<Self> {
        let strings = d.pow(n as u32);
        if p.len() != strings || shields.len() != strings {
            return Err(Error::DimMismatch(format!(
                "need {strings} probabilities and shields for d={d}, n={n}"
            )));
        }
        if p.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        let dim = strings;
        for (x, (px, shield)) in p.iter().zip(&shields).enumerate() {
            match shield {
                Some(s) if s.dim() != dim => {
                    return Err(Error::DimMismatch(format!(
                        "shield {x} has dim {}, expected {dim}",
                        s.dim()
                    )))
                }
                None if *px > 0.0 => {
                    return Err(Error::InvalidParameter(format!(
                        "string {x} has positive probability but no shield"
                    )))
                }
                _ => {}
            }
        }
        Ok(StandardFormInput { d, n, p, shields })
    }

    /// Entropy H(p) of the string distribution, bits.
    pub fn string_entropy(&self) -> f64 {
        shannon_entropy_bits(&self.p)
    }
}

/// Materialize Σ_x p_x |x⟩⟨x| ⊗ |φ^x⟩⟨φ^x| as a density matrix on
/// (d^n)·(d^n) dimensions, ordered (first registers, second registers).
pub fn standard_form_input(s: &StandardFormInput) -> Result<DensityMatrix> {
    let strings = s.d.pow(s.n as u32);
    let dim = strings * strings;
    crate::qlinalg::check_dim_cap(dim)?;
    let mut out = CMatrix::zeros(dim, dim);
    for (x, (&px, shield)) in s.p.iter().zip(&s.shields).enumerate() {
        if px == 0.0 {
            continue;
        }
        let phi = shield.as_ref().expect("validated at construction");
        for i in 0..strings {
            for j in 0..strings {
                out[(x * strings + i, x * strings + j)] +=
                    phi.amplitudes()[i] * phi.amplitudes()[j].conj() * px;
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Evaluates the coherent information of standard-form inputs through the
/// channel's n-fold product without materializing the n-fold label register:
/// H(p) − E_{v⃗} S(Σ_x p_x Z^x V⃗ |φ^x⟩⟨φ^x| V⃗† Z^{−x}).
pub struct StandardFormEvaluator {
    d: usize,
    n: usize,
    /// ω^{x·j} phase vector per string x, each of length d^n.
    phases: Vec<Vec<Complex64>>,
    /// Ensemble members as matrices with weights.
    members: Vec<(CMatrix, f64)>,
}

impl StandardFormEvaluator {
    pub fn new(ch: &FiniteVChannel, n: usize) -> Result<Self> {
        if n == 0 || n > 2 {
            return Err(Error::InvalidParameter("supported uses: n in {1, 2}".into()));
        }
        let d = ch.d();
        let strings = d.pow(n as u32);
        crate::qlinalg::check_dim_cap(strings * strings)?;
        if n == 2 && ch.member_count() > 256 {
            // Member pairs grow quadratically; exact Clifford at d=3 (216²
            // pairs) is the intended ceiling.
            if ch.member_count() > 216 {
                return Err(Error::InvalidParameter(
                    "two-use evaluation supports at most 216 members".into(),
                ));
            }
        }
        let mut phases = Vec::with_capacity(strings);
        for x in 0..strings {
            let mut v = Vec::with_capacity(strings);
            for j in 0..strings {
                // Decompose x and j over n digits base d and accumulate x·j.
                let (mut xr, mut jr, mut acc) = (x, j, 0i64);
                for _ in 0..n {
                    acc += ((xr % d) * (jr % d)) as i64;
                    xr /= d;
                    jr /= d;
                }
                let phase =
                    2.0 * std::f64::consts::PI * (acc.rem_euclid(d as i64) as f64) / d as f64;
                v.push(Complex64::new(phase.cos(), phase.sin()));
            }
            phases.push(v);
        }
        let members = ch
            .ensemble()
            .members()
            .iter()
            .map(|(u, w)| (u.matrix().clone(), *w))
            .collect();
        Ok(StandardFormEvaluator {
            d,
            n,
            phases,
            members,
        })
    }

    fn strings(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    /// Coherent information of the standard-form input, bits.
    pub fn value(&self, s: &StandardFormInput, mode: ExecMode) -> Result<f64> {
        if s.d != self.d || s.n != self.n {
            return Err(Error::DimMismatch("input shape differs from evaluator".into()));
        }
        let strings = self.strings();
        let shields: Vec<Option<&[Complex64]>> = s
            .shields
            .iter()
            .map(|o| o.as_ref().map(|ps| ps.amplitudes()))
            .collect();

        let env_entropy = match self.n {
            1 if !mode.is_parallel() => {
                // Optimizer hot path: reuse scratch buffers across members.
                let mut scratch = EnvScratch::new(strings);
                let mut acc = 0.0;
                for (u, w) in &self.members {
                    acc += w * self.env_block_entropy(u, &s.p, &shields, &mut scratch);
                }
                acc
            }
            1 => {
                let terms = map_indexed(mode, self.members.len(), |v| {
                    let (u, w) = &self.members[v];
                    w * self.env_block_entropy(u, &s.p, &shields, &mut EnvScratch::new(strings))
                });
                terms.iter().sum::<f64>()
            }
            _ => {
                let m = self.members.len();
                let terms = map_indexed(mode, m * m, |idx| {
                    let (u1, w1) = &self.members[idx / m];
                    let (u2, w2) = &self.members[idx % m];
                    let u = tensor(u1, u2).expect("d^2n within cap");
                    w1 * w2 * self.env_block_entropy(&u, &s.p, &shields, &mut EnvScratch::new(strings))
                });
                terms.iter().sum::<f64>()
            }
        };
        Ok(s.string_entropy() - env_entropy)
    }

    /// S(Σ_x p_x Z^x U |φ^x⟩⟨φ^x| U† Z^{−x}) for one member (or member pair).
    fn env_block_entropy(
        &self,
        u: &CMatrix,
        p: &[f64],
        shields: &[Option<&[Complex64]>],
        scratch: &mut EnvScratch,
    ) -> f64 {
        let strings = scratch.dim;
        scratch.mix.fill(Complex64::new(0.0, 0.0));
        for x in 0..strings {
            if p[x] == 0.0 {
                continue;
            }
            let phi = shields[x].expect("positive probability implies shield");
            let phases = &self.phases[x];
            for i in 0..strings {
                let row = u.row(i);
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..strings {
                    acc += row[j] * phi[j];
                }
                scratch.w[i] = acc * phases[i];
            }
            for i in 0..strings {
                let wi = scratch.w[i] * p[x];
                let base = i * strings;
                for j in 0..strings {
                    scratch.mix[base + j] += wi * scratch.w[j].conj();
                }
            }
        }
        crate::qlinalg::hermitian_entropy_small(strings, &scratch.mix)
    }
}

/// Reusable buffers for the environment-block evaluation.
struct EnvScratch {
    dim: usize,
    w: Vec<Complex64>,
    mix: Vec<Complex64>,
}

impl EnvScratch {
    fn new(dim: usize) -> Self {
        EnvScratch {
            dim,
            w: vec![Complex64::new(0.0, 0.0); dim],
            mix: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }
}

// ---------------------------------------------------------------------------
// Multi-start optimizer
// ---------------------------------------------------------------------------

/// Provenance-tagged bound on a capacity quantity.
#[derive(Debug, Clone)]
pub struct BoundValue {
    pub value_bits: f64,
    pub kind: BoundKind,
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    LowerCertificate,
    UpperClosedForm,
    Exact,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::LowerCertificate => "lower_certificate",
            BoundKind::UpperClosedForm => "upper_closed_form",
            BoundKind::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub fd_step: f64,
    pub rel_improvement_stop: f64,
    /// Optional explicit starting point for restart 0.
    pub init: Option<StandardFormInput>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 20,
            max_iterations: 2000,
            fd_step: 1e-5,
            rel_improvement_stop: 1e-9,
            init: None,
        }
    }
}

/// Outcome of one multi-start run.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub bound: BoundValue,
    pub input: StandardFormInput,
    /// Iterations used by each restart, in restart order.
    pub iterations: Vec<usize>,
    /// Restarts that stopped at the iteration cap rather than converging.
    pub capped_restarts: usize,
    pub seed: RngSeed,
    pub best_restart: usize,
}

struct Params {
    d: usize,
    /// Softmax logits for p, length d.
    logits: Vec<f64>,
    /// Raw (unnormalized) shield vectors, re/im interleaved, length 2d per
    /// string.
    raw_shields: Vec<f64>,
}

impl Params {
    fn len(&self) -> usize {
        self.d + self.raw_shields.len()
    }

    fn get(&self, i: usize) -> f64 {
        if i < self.d {
            self.logits[i]
        } else {
            self.raw_shields[i - self.d]
        }
    }

    fn set(&mut self, i: usize, v: f64) {
        if i < self.d {
            self.logits[i] = v;
        } else {
            self.raw_shields[i - self.d] = v;
        }
    }

    fn add_scaled(&mut self, dir: &[f64], step: f64) {
        for i in 0..self.d {
            self.logits[i] += step * dir[i];
        }
        for (i, r) in self.raw_shields.iter_mut().enumerate() {
            *r += step * dir[self.d + i];
        }
    }

    fn to_input(&self) -> StandardFormInput {
        let d = self.d;
        let max = self.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = self.logits.iter().map(|&a| (a - max).exp()).collect();
        let z: f64 = p.iter().sum();
        for q in p.iter_mut() {
            *q /= z;
        }
        let shields = (0..d)
            .map(|x| {
                let raw = &self.raw_shields[2 * d * x..2 * d * (x + 1)];
                let v: Vec<Complex64> = (0..d)
                    .map(|j| Complex64::new(raw[2 * j], raw[2 * j + 1]))
                    .collect();
                Some(PureState::normalized(v).expect("raw shields stay nonzero"))
            })
            .collect();
        StandardFormInput {
            d,
            n: 1,
            p,
            shields,
        }
    }
}

/// Multi-start projected gradient ascent of the coherent information over
/// single-use standard-form inputs. Probabilities are parameterized through a
/// softmax and shields through normalized complex vectors; gradients are
/// central finite differences with backtracking line search. The returned
/// value is a lower certificate: reproducible by direct evaluation at the
/// achieving input, with no global-optimality claim.
pub fn optimize_coherent_info(
    ch: &FiniteVChannel,
    config: &OptimizerConfig,
    seed: RngSeed,
    mode: ExecMode,
) -> Result<OptimizeResult> {
    if config.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be >= 1".into()));
    }
    let evaluator = StandardFormEvaluator::new(ch, 1)?;
    let d = ch.d();

    let runs: Vec<Result<(f64, StandardFormInput, usize, bool)>> =
        map_indexed(mode, config.restarts, |r| {
            let params = init_params(d, config, r, seed)?;
            run_single_start(&evaluator, params, config)
        });

    let mut best: Option<(usize, f64, StandardFormInput)> = None;
    let mut iterations = Vec::with_capacity(config.restarts);
    let mut capped = 0usize;
    for (r, run) in runs.into_iter().enumerate() {
        let (value, input, iters, hit_cap) = run?;
        iterations.push(iters);
        capped += hit_cap as usize;
        let better = match &best {
            None => true,
            Some((_, v, _)) => value > *v,
        };
        if better {
            best = Some((r, value, input));
        }
    }
    let (best_restart, value, input) = best.expect("restarts >= 1");

    let provenance = format!(
        "{} d={} seed=({},{})",
        ch.ensemble().kind().label(),
        d,
        seed.seed,
        seed.stream_id
    );
    Ok(OptimizeResult {
        bound: BoundValue {
            value_bits: value,
            kind: BoundKind::LowerCertificate,
            provenance,
        },
        input,
        iterations,
        capped_restarts: capped,
        seed,
        best_restart,
    })
}

fn init_params(
    d: usize,
    config: &OptimizerConfig,
    restart: usize,
    seed: RngSeed,
) -> Result<Params> {
    if restart == 0 {
        if let Some(init) = &config.init {
            if init.d != d || init.n != 1 {
                return Err(Error::DimMismatch("optimizer init has wrong shape".into()));
            }
            let logits: Vec<f64> = init.p.iter().map(|&p| p.max(1e-300).ln()).collect();
            let mut raw = vec![0.0f64; 2 * d * d];
            for x in 0..d {
                match &init.shields[x] {
                    Some(phi) => {
                        for j in 0..d {
                            raw[2 * d * x + 2 * j] = phi.amplitudes()[j].re;
                            raw[2 * d * x + 2 * j + 1] = phi.amplitudes()[j].im;
                        }
                    }
                    // Dropped shield (zero probability): keep a placeholder
                    // direction so the parameter vector stays well-formed.
                    None => raw[2 * d * x] = 1.0,
                }
            }
            return Ok(Params {
                d,
                logits,
                raw_shields: raw,
            });
        }
    }
    let mut rng = seed.stream(restart as u64).rng();
    use rand::Rng;
    use rand_distr::StandardNormal;
    let logits = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let raw_shields = (0..2 * d * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(Params {
        d,
        logits,
        raw_shields,
    })
}

fn run_single_start(
    evaluator: &StandardFormEvaluator,
    mut params: Params,
    config: &OptimizerConfig,
) -> Result<(f64, StandardFormInput, usize, bool)> {
    // Objective evaluations inside one restart run serially; parallelism
    // lives at the restart level.
    let eval = |p: &Params| -> Result<f64> {
        evaluator.value(&p.to_input(), ExecMode::Serial)
    };
    let mut value = eval(&params)?;
    let n_params = params.len();
    let mut grad = vec![0.0f64; n_params];
    let mut step = 1.0f64;
    let mut iters = 0usize;
    let mut hit_cap = true;

    for _ in 0..config.max_iterations {
        iters += 1;
        // Central finite differences.
        let mut grad_norm_sq = 0.0;
        for i in 0..n_params {
            let orig = params.get(i);
            params.set(i, orig + config.fd_step);
            let up = eval(&params)?;
            params.set(i, orig - config.fd_step);
            let down = eval(&params)?;
            params.set(i, orig);
            let g = (up - down) / (2.0 * config.fd_step);
            grad[i] = g;
            grad_norm_sq += g * g;
        }
        if grad_norm_sq < 1e-24 {
            hit_cap = false;
            break;
        }

        // Backtracking line search on the ascent direction.
        let mut alpha = step * 2.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut candidate = Params {
                d: params.d,
                logits: params.logits.clone(),
                raw_shields: params.raw_shields.clone(),
            };
            candidate.add_scaled(&grad, alpha);
            let v = eval(&candidate)?;
            if v >= value + 1e-4 * alpha * grad_norm_sq {
                let improvement = v - value;
                params = candidate;
                value = v;
                step = alpha;
                accepted = true;
                if improvement <= config.rel_improvement_stop * value.abs().max(1.0) {
                    hit_cap = false;
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            hit_cap = false;
            break;
        }
        if !hit_cap {
            break;
        }
    }
    Ok((value, params.to_input(), iters, hit_cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::UnitaryEnsemble;

    fn clifford_channel(d: usize) -> FiniteVChannel {
        FiniteVChannel::new(UnitaryEnsemble::clifford(d).unwrap()).unwrap()
    }

    #[test]
    fn holevo_frozen_values() {
        // Identical outputs carry no information.
        let rho = DensityMatrix::maximally_mixed(2);
        let chi = holevo_chi(&[(0.5, rho.clone()), (0.5, rho)]).unwrap();
        assert!(chi.abs() < 1e-12);

        // Orthogonal pure outputs, uniform over d.
        let outs: Vec<_> = (0..3)
            .map(|i| (1.0 / 3.0, PureState::basis(3, i).projector()))
            .collect();
        let chi = holevo_chi(&outs).unwrap();
        assert!((chi - 3.0f64.log2()).abs() < 1e-12);

        // {I/2, |0⟩⟨0|} at p = (1/2, 1/2): S(diag(3/4, 1/4)) − 1/2.
        let chi = holevo_chi(&[
            (0.5, DensityMatrix::maximally_mixed(2)),
            (0.5, PureState::basis(2, 0).projector()),
        ])
        .unwrap();
        let expect = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2()) - 0.5;
        assert!((chi - expect).abs() < 1e-12);
        assert!((chi - 0.31127812445913283).abs() < 1e-12);
    }

    #[test]
    fn coherent_information_of_basis_ensemble_input() {
        // Input |i⟩⟨i| ⊗ (I/d): receiver block pure, environment block I/d,
        // so the value is −log₂ d.
        let d = 2;
        let ch = clifford_channel(d);
        let input = DensityMatrix::from_matrix_unchecked(
            tensor(
                PureState::basis(d, 0).projector().matrix(),
                DensityMatrix::maximally_mixed(d).matrix(),
            )
            .unwrap(),
        );
        let v = coherent_information(&ch, &input, ExecMode::Serial).unwrap();
        assert!((v + 1.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn coherent_information_single_member_oracle() {
        // One-member ensemble: the value is S(B) − S(E) for that member.
        let e = UnitaryEnsemble::explicit(vec![(
            crate::qlinalg::UnitaryMatrix::identity(2),
            1.0,
        )])
        .unwrap();
        let ch = FiniteVChannel::new(e).unwrap();
        let rho = crate::ensembles::random_density(4, RngSeed::new(40)).unwrap();
        let got = coherent_information(&ch, &rho, ExecMode::Serial).unwrap();

        let out = rho.conjugated(ch.coupler(0));
        let b = partial_trace(&out, &[2, 2], &[0]).unwrap();
        let env = partial_trace(&out, &[2, 2], &[1]).unwrap();
        let expect = entropy_vn(&b).unwrap() - entropy_vn(&env).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn achievability_reaches_log_d_for_every_kind() {
        for d in [2usize, 3] {
            let ensembles = vec![
                UnitaryEnsemble::clifford(d).unwrap(),
                UnitaryEnsemble::haar(d, 32, RngSeed::new(50)).unwrap(),
                UnitaryEnsemble::explicit_haar(d, 4, RngSeed::new(51)).unwrap(),
            ];
            for e in ensembles {
                let kind = e.kind().label();
                let ch = FiniteVChannel::new(e).unwrap();
                let inp = InputEnsemble::achievability(d).unwrap();
                let p1 = private_information(&ch, &inp, ExecMode::Serial).unwrap();
                assert!(
                    (p1 - (d as f64).log2()).abs() < 1e-9,
                    "kind {kind} d={d}: {p1}"
                );
            }
        }
    }

    #[test]
    fn single_member_input_ensemble_gives_zero() {
        let ch = clifford_channel(2);
        let inp = InputEnsemble::new(vec![(
            1.0,
            crate::ensembles::random_density(4, RngSeed::new(52)).unwrap(),
        )])
        .unwrap();
        let p1 = private_information(&ch, &inp, ExecMode::Serial).unwrap();
        assert!(p1.abs() < 1e-10);
    }

    #[test]
    fn closed_forms_frozen() {
        assert!((avg_dephased_entropy_closed_form(2) - 0.7213475204444817).abs() < 1e-12);
        assert!((avg_dephased_entropy_closed_form(4) - 1.5629196276297099).abs() < 1e-12);
        assert!((avg_dephased_entropy_closed_form(8) - 2.4783439809556831).abs() < 1e-12);
        assert!((closed_form_lower_bound(2) - 0.2786524795555183).abs() < 1e-12);
        let d3 = 3f64.log2() - LOG2_E * (11.0 / 6.0 - 1.0);
        assert!((closed_form_lower_bound(3) - d3).abs() < 1e-12);
        assert!((closed_form_lower_bound(3) - 0.3827166333136867).abs() < 1e-12);
        // Asymptote.
        let gamma = 0.5772156649015329;
        let limit = (1.0 - gamma) * LOG2_E;
        assert!((limit - 0.6099488636120962).abs() < 1e-12);
        assert!((closed_form_lower_bound(1024) - limit).abs() < 0.001);
    }

    #[test]
    fn closed_form_sequence_is_monotone() {
        // The dephased-entropy average increases in d and its gap to log₂ d
        // approaches (1 − γ) log₂ e from below.
        let mut prev = avg_dephased_entropy_closed_form(2);
        let mut prev_gap = closed_form_lower_bound(2);
        for d in 3..=64 {
            let cur = avg_dephased_entropy_closed_form(d);
            assert!(cur > prev);
            let gap = closed_form_lower_bound(d);
            assert!(gap > prev_gap);
            prev = cur;
            prev_gap = gap;
        }
    }

    #[test]
    fn privacy_upper_bound_values() {
        assert!((privacy_upper_bound(4, 1.0) - 1.5).abs() < 1e-15);
        assert!((privacy_upper_bound(16, 1.0) - 2.5).abs() < 1e-15);
        assert!((privacy_upper_bound(16, 0.0) - 2.0).abs() < 1e-15);
        // The achievable rate 2 bits at d = 4 sits under the ceiling 2.5.
        assert!(2.0 <= privacy_upper_bound(16, 1.0));
    }

    #[test]
    fn standard_form_materialization() {
        // Uniform p with |0⟩ shields at d = 2 is (I/2) ⊗ |0⟩⟨0|.
        let s = StandardFormInput::new(
            2,
            1,
            vec![0.5, 0.5],
            vec![Some(PureState::basis(2, 0)), Some(PureState::basis(2, 0))],
        )
        .unwrap();
        let rho = standard_form_input(&s).unwrap();
        let expect = tensor(
            DensityMatrix::maximally_mixed(2).matrix(),
            PureState::basis(2, 0).projector().matrix(),
        )
        .unwrap();
        assert!(rho.matrix().max_abs_diff(&expect) < 1e-15);

        // A single string is the product state.
        let phi = crate::ensembles::haar_state(2, RngSeed::new(60)).unwrap();
        let s = StandardFormInput::new(2, 1, vec![0.0, 1.0], vec![None, Some(phi.clone())])
            .unwrap();
        let rho = standard_form_input(&s).unwrap();
        let expect = tensor(
            PureState::basis(2, 1).projector().matrix(),
            phi.projector().matrix(),
        )
        .unwrap();
        assert!(rho.matrix().max_abs_diff(&expect) < 1e-15);

        // Dephasing the first register leaves it fixed.
        let dephased = crate::qlinalg::dephase_factor(&rho, &[2, 2], 0).unwrap();
        assert!(dephased.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn receiver_conditional_entropy_is_string_entropy() {
        // S(B|label) of a standard-form input equals H(p).
        let d = 3;
        let ch = clifford_channel(d);
        let seed = RngSeed::new(61);
        let p = vec![0.5, 0.3, 0.2];
        let shields: Vec<_> = (0..d)
            .map(|x| Some(crate::ensembles::haar_state(d, seed.stream(x as u64)).unwrap()))
            .collect();
        let s = StandardFormInput::new(d, 1, p.clone(), shields).unwrap();
        let rho = standard_form_input(&s).unwrap();
        let out = ch.apply(&rho, ExecMode::Serial).unwrap();
        let cond = out.conditional_entropy().unwrap();
        assert!((cond - shannon_entropy_bits(&p)).abs() < 1e-10);
    }

    #[test]
    fn evaluator_matches_generic_path() {
        let d = 3;
        let e = UnitaryEnsemble::explicit_haar(d, 6, RngSeed::new(62)).unwrap();
        let ch = FiniteVChannel::new(e).unwrap();
        let seed = RngSeed::new(63);
        let mut p = vec![0.2, 0.5, 0.3];
        let shields: Vec<_> = (0..d)
            .map(|x| Some(crate::ensembles::haar_state(d, seed.stream(x as u64)).unwrap()))
            .collect();
        let s = StandardFormInput::new(d, 1, std::mem::take(&mut p), shields).unwrap();

        let fast = StandardFormEvaluator::new(&ch, 1)
            .unwrap()
            .value(&s, ExecMode::Serial)
            .unwrap();
        let generic =
            coherent_information(&ch, &standard_form_input(&s).unwrap(), ExecMode::Serial)
                .unwrap();
        assert!((fast - generic).abs() < 1e-9, "fast {fast} generic {generic}");
    }

    #[test]
    fn two_use_evaluator_matches_single_use_products() {
        // For product inputs p = p1 ⊗ p1 and product shields, the two-use
        // value is twice the single-use value.
        let d = 2;
        let e = UnitaryEnsemble::explicit_haar(d, 5, RngSeed::new(64)).unwrap();
        let ch = FiniteVChannel::new(e).unwrap();
        let phi = crate::ensembles::haar_state(d, RngSeed::new(65)).unwrap();
        let s1 = StandardFormInput::new(
            d,
            1,
            vec![0.6, 0.4],
            vec![Some(phi.clone()), Some(phi.clone())],
        )
        .unwrap();
        let v1 = StandardFormEvaluator::new(&ch, 1)
            .unwrap()
            .value(&s1, ExecMode::Serial)
            .unwrap();

        let phi2 = phi.tensor(&phi).unwrap();
        let p2 = vec![0.36, 0.24, 0.24, 0.16];
        let shields2 = vec![Some(phi2.clone()), Some(phi2.clone()), Some(phi2.clone()), Some(phi2)];
        let s2 = StandardFormInput::new(d, 2, p2, shields2).unwrap();
        let v2 = StandardFormEvaluator::new(&ch, 2)
            .unwrap()
            .value(&s2, ExecMode::Serial)
            .unwrap();
        assert!((v2 - 2.0 * v1).abs() < 1e-9, "v2 {v2} vs 2*v1 {}", 2.0 * v1);
    }

    #[test]
    fn fixed_input_value_matches_closed_form_in_expectation() {
        // (I/d) ⊗ |0⟩⟨0| through a Haar ensemble: log₂ d − E S(dephased
        // random state); modest sample size, generous tolerance.
        let d = 2;
        let e = UnitaryEnsemble::haar(d, 4000, RngSeed::new(66)).unwrap();
        let ch = FiniteVChannel::new(e).unwrap();
        let input = DensityMatrix::from_matrix_unchecked(
            tensor(
                DensityMatrix::maximally_mixed(d).matrix(),
                PureState::basis(d, 0).projector().matrix(),
            )
            .unwrap(),
        );
        let v = coherent_information(&ch, &input, ExecMode::Serial).unwrap();
        let expect = closed_form_lower_bound(d);
        assert!((v - expect).abs() < 0.03, "value {v} closed form {expect}");
    }

    #[test]
    fn half_objective_equals_flagged_coherent_information() {
        let ch = FiniteVChannel::new(
            UnitaryEnsemble::explicit_haar(2, 4, RngSeed::new(67)).unwrap(),
        )
        .unwrap();
        let n = ch.to_kraus().unwrap();
        for t in 0..10u64 {
            let rho = crate::ensembles::random_density(4, RngSeed::new(68).stream(t)).unwrap();
            let lhs = half_objective(&n, &rho).unwrap();
            let rhs = flagged_coherent_information(&n, &rho).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "t={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn half_objective_trivial_cases() {
        // Pure input through the identity: all three entropies vanish.
        let id = KrausChannel::identity(2);
        let pure = PureState::basis(2, 0).projector();
        assert!(half_objective(&id, &pure).unwrap().abs() < 1e-12);
        // Maximally mixed input through the identity: the environment term
        // vanishes and the two log₂ d halves add to log₂ d.
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((half_objective(&id, &mixed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimizer_certificate_is_sound_and_bounded() {
        let d = 2;
        let ch = clifford_channel(d);
        let config = OptimizerConfig {
            restarts: 4,
            max_iterations: 400,
            ..Default::default()
        };
        let result =
            optimize_coherent_info(&ch, &config, RngSeed::new(70), ExecMode::Serial).unwrap();
        // Certificate reproduces by direct evaluation.
        let direct = coherent_information(
            &ch,
            &standard_form_input(&result.input).unwrap(),
            ExecMode::Serial,
        )
        .unwrap();
        assert!(
            (result.bound.value_bits - direct).abs() < 1e-9,
            "certificate {} direct {direct}",
            result.bound.value_bits
        );
        // Exact 2-design ceiling at one use.
        assert!(result.bound.value_bits <= 1.0 + 1e-6);
        assert!(result.bound.value_bits >= 0.0);
        assert_eq!(result.iterations.len(), 4);
    }

    #[test]
    fn optimizer_beats_the_fixed_input_floor() {
        // The fixed input (I/d) ⊗ |0⟩⟨0| is feasible, so the optimizer must
        // reach at least its value minus slack.
        let d = 2;
        let e = UnitaryEnsemble::haar(d, 64, RngSeed::new(71)).unwrap();
        let ch = FiniteVChannel::new(e).unwrap();
        let input = DensityMatrix::from_matrix_unchecked(
            tensor(
                DensityMatrix::maximally_mixed(d).matrix(),
                PureState::basis(d, 0).projector().matrix(),
            )
            .unwrap(),
        );
        let floor = coherent_information(&ch, &input, ExecMode::Serial).unwrap();
        let config = OptimizerConfig {
            restarts: 6,
            max_iterations: 400,
            ..Default::default()
        };
        let result =
            optimize_coherent_info(&ch, &config, RngSeed::new(72), ExecMode::Serial).unwrap();
        assert!(
            result.bound.value_bits >= floor - 0.05,
            "optimizer {} floor {floor}",
            result.bound.value_bits
        );
    }

    #[test]
    fn optimizer_handles_degenerate_init() {
        // Start from p = (1, 0): deterministic string, pure environment
        // blocks, value 0. Must not produce NaN and must stay >= 0.
        let d = 2;
        let ch = clifford_channel(d);
        let init = StandardFormInput::new(
            d,
            1,
            vec![1.0, 0.0],
            vec![Some(PureState::basis(2, 0)), None],
        )
        .unwrap();
        let config = OptimizerConfig {
            restarts: 1,
            max_iterations: 50,
            init: Some(init),
            ..Default::default()
        };
        let result =
            optimize_coherent_info(&ch, &config, RngSeed::new(73), ExecMode::Serial).unwrap();
        assert!(result.bound.value_bits.is_finite());
        assert!(result.bound.value_bits >= -1e-12);
    }

    #[test]
    fn dephasing_first_register_never_hurts() {
        // The first-register dephasing of any input has coherent information
        // at least as large: checked over random inputs in exact mode.
        let d = 2;
        let ch = clifford_channel(d);
        for t in 0..25u64 {
            let rho = crate::ensembles::random_density(4, RngSeed::new(74).stream(t)).unwrap();
            let base = coherent_information(&ch, &rho, ExecMode::Serial).unwrap();
            let dephased = crate::qlinalg::dephase_factor(&rho, &[d, d], 0).unwrap();
            let better = coherent_information(&ch, &dephased, ExecMode::Serial).unwrap();
            assert!(
                better >= base - 1e-9,
                "t={t}: dephased {better} < base {base}"
            );
        }
    }
}
