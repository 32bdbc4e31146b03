//! Experiment harness: each closed-form identity or operator bound becomes a
//! pass/fail record, either exact (tensor-contraction or group-average
//! algebra, zero standard error) or Monte Carlo (seeded trials, 3σ rule).

use num_complex::Complex64;
use std::time::Instant;

use crate::capacity::{
    avg_dephased_entropy_closed_form, closed_form_lower_bound, private_information,
    InputEnsemble,
};
use crate::channel::{degrading_map, flagged_channel, z_phase_vector, FiniteVChannel, KrausChannel};
use crate::ensembles::{
    haar_state_rng, haar_unitary_rng, random_hermitian, s_operator, second_moment_twirl,
    second_moment_twirl_product, RngSeed, UnitaryEnsemble,
};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, mc_scalar, ExecMode};
use crate::qlinalg::{
    entropy_vn, inner, op_inf_norm, partial_trace, shannon_entropy_bits, tensor, CMatrix,
    DensityMatrix, PureState,
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Direction of the estimate-vs-bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Le,
    Ge,
    Eq,
}

impl Comparison {
    pub fn symbol(&self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
            Comparison::Eq => "=",
        }
    }
}

/// Pass rule: the bound is shifted by `sigma` standard errors plus an
/// absolute slack. Exact experiments carry zero standard error, so only the
/// slack applies there.
#[derive(Debug, Clone, Copy)]
pub struct PassRule {
    pub sigma: f64,
    pub tol_abs: f64,
}

impl Default for PassRule {
    fn default() -> Self {
        PassRule {
            sigma: 3.0,
            tol_abs: 1e-10,
        }
    }
}

impl PassRule {
    pub fn with_tol_abs(self, tol_abs: f64) -> Self {
        PassRule { tol_abs, ..self }
    }

    pub fn decide(&self, comparison: Comparison, estimate: f64, std_error: f64, bound: f64) -> bool {
        let slack = self.sigma * std_error + self.tol_abs;
        match comparison {
            Comparison::Le => estimate <= bound + slack,
            Comparison::Ge => estimate >= bound - slack,
            Comparison::Eq => (estimate - bound).abs() <= slack,
        }
    }
}

/// One verification result. `pass` is a pure function of the estimate,
/// standard error, bound, comparison, and the rule parameters recorded in
/// `params`.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    /// Ordered key-value parameters (d, n, mode, trials, rule settings, ...).
    pub params: Vec<(String, String)>,
    pub estimate: f64,
    pub std_error: f64,
    pub bound_or_target: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub seed: RngSeed,
    pub wall_ms: u64,
}

impl ExperimentReport {
    #[allow(clippy::too_many_arguments)]
    fn build(
        name: &str,
        mut params: Vec<(String, String)>,
        estimate: f64,
        std_error: f64,
        bound: f64,
        comparison: Comparison,
        rule: PassRule,
        seed: RngSeed,
        started: Instant,
    ) -> Self {
        params.push(("sigma".into(), format!("{}", rule.sigma)));
        params.push(("tol_abs".into(), format!("{:e}", rule.tol_abs)));
        let pass = rule.decide(comparison, estimate, std_error, bound);
        ExperimentReport {
            name: name.to_string(),
            params,
            estimate,
            std_error,
            bound_or_target: bound,
            comparison,
            pass,
            seed,
            wall_ms: started.elapsed().as_millis() as u64,
        }
    }
}

fn kv(k: &str, v: impl std::fmt::Display) -> (String, String) {
    (k.to_string(), v.to_string())
}

// ---------------------------------------------------------------------------
// Hamming patterns and the pairwise-overlap bound
// ---------------------------------------------------------------------------

/// A pair of basis strings with their Hamming distance.
#[derive(Debug, Clone)]
pub struct HammingPattern {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
}

impl HammingPattern {
    pub fn new(x: Vec<i64>, y: Vec<i64>, d: usize) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::InvalidParameter("pattern tuples must have equal nonzero length".into()));
        }
        let in_range = |t: &[i64]| t.iter().all(|&c| c >= 0 && c < d as i64);
        if !in_range(&x) || !in_range(&y) {
            return Err(Error::InvalidParameter(format!(
                "pattern components must lie in 0..{}",
                d - 1
            )));
        }
        Ok(HammingPattern { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Number of positions where x and y differ.
    pub fn hamming_distance(&self) -> usize {
        self.x.iter().zip(&self.y).filter(|(a, b)| a != b).count()
    }
}

/// Exact ensemble-averaged overlap E_V Tr[ρ_E^{x,V} ρ_E^{y,V}] via the
/// second-moment contraction ⟨φ^y|⟨φ^x| ⊗ᵢ S^{xᵢ−yᵢ} |φ^x⟩|φ^y⟩, valid for
/// any exact 2-design stand-in of the per-use unitaries.
pub fn exact_pair_overlap(
    d: usize,
    pattern: &HammingPattern,
    phi_x: &PureState,
    phi_y: &PureState,
) -> Result<f64> {
    let n = pattern.n();
    let strings = d.pow(n as u32);
    if phi_x.dim() != strings || phi_y.dim() != strings {
        return Err(Error::DimMismatch(format!(
            "shields must live on {strings} dims for d={d}, n={n}"
        )));
    }
    crate::qlinalg::check_dim_cap(strings * strings)?;

    // Per-use factors S^{a_i}, each d²×d².
    let factors: Vec<CMatrix> = pattern
        .x
        .iter()
        .zip(&pattern.y)
        .map(|(&xi, &yi)| s_operator(xi - yi, d))
        .collect();

    // The operator acts on pairs (slot1 use i, slot2 use i); assemble it on
    // (slot1^n ⊗ slot2^n) by digit bookkeeping.
    let dim = strings * strings;
    let digits = |mut v: usize| -> Vec<usize> {
        let mut out = vec![0usize; n];
        for k in (0..n).rev() {
            out[k] = v % d;
            v /= d;
        }
        out
    };
    let mut op = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        let (r1, r2) = (digits(r / strings), digits(r % strings));
        for c in 0..dim {
            let (c1, c2) = (digits(c / strings), digits(c % strings));
            let mut val = Complex64::new(1.0, 0.0);
            for i in 0..n {
                val *= factors[i][(r1[i] * d + r2[i], c1[i] * d + c2[i])];
                if val.norm_sqr() == 0.0 {
                    break;
                }
            }
            op[(r, c)] = val;
        }
    }

    // bra = φ^y ⊗ φ^x on (slot1, slot2), ket = φ^x ⊗ φ^y.
    let mut bra = Vec::with_capacity(dim);
    let mut ket = Vec::with_capacity(dim);
    for i in 0..strings {
        for j in 0..strings {
            bra.push(phi_y.amplitudes()[i] * phi_x.amplitudes()[j]);
            ket.push(phi_x.amplitudes()[i] * phi_y.amplitudes()[j]);
        }
    }
    Ok(inner(&bra, &op.matvec(&ket)).re)
}

/// Monte Carlo estimate of the same overlap with per-use Haar unitaries.
fn sampled_pair_overlap(
    d: usize,
    pattern: &HammingPattern,
    phi_x: &PureState,
    phi_y: &PureState,
    trials: u64,
    seed: RngSeed,
    mode: ExecMode,
) -> crate::exec::McStats {
    let n = pattern.n();
    let zx = z_phase_vector(&pattern.x, d).expect("validated pattern");
    let zy = z_phase_vector(&pattern.y, d).expect("validated pattern");
    mc_scalar(mode, trials, move |t| {
        let mut rng = seed.stream(t).rng();
        let mut u = haar_unitary_rng(d, &mut rng).matrix().clone();
        for _ in 1..n {
            let v = haar_unitary_rng(d, &mut rng);
            u = tensor(&u, v.matrix()).expect("within cap");
        }
        let mut wx = u.matvec(phi_x.amplitudes());
        let mut wy = u.matvec(phi_y.amplitudes());
        for (w, p) in wx.iter_mut().zip(&zx) {
            *w *= p;
        }
        for (w, p) in wy.iter_mut().zip(&zy) {
            *w *= p;
        }
        inner(&wy, &wx).norm_sqr()
    })
}

/// Estimation mode for the overlap and purity experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    Exact,
    Haar { trials: u64 },
}

impl EstimateMode {
    fn label(&self) -> String {
        match self {
            EstimateMode::Exact => "exact".into(),
            EstimateMode::Haar { .. } => "haar".into(),
        }
    }

    fn trials(&self) -> u64 {
        match self {
            EstimateMode::Exact => 0,
            EstimateMode::Haar { trials } => *trials,
        }
    }
}

/// Pairwise-overlap bound: the ensemble-averaged overlap of the conditional
/// environment states for strings x ≠ y is at most (d−1)^{−d_H(x,y)}.
#[allow(clippy::too_many_arguments)]
pub fn verify_lemma2(
    d: usize,
    pattern: &HammingPattern,
    phi_x: &PureState,
    phi_y: &PureState,
    mode: EstimateMode,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    if d < 2 {
        return Err(Error::InvalidParameter("d must be >= 2".into()));
    }
    let n = pattern.n();
    let dh = pattern.hamming_distance();
    let bound = 1.0 / ((d - 1) as f64).powi(dh as i32);

    let (estimate, std_error) = match mode {
        EstimateMode::Exact => (exact_pair_overlap(d, pattern, phi_x, phi_y)?, 0.0),
        EstimateMode::Haar { trials } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be >= 1".into()));
            }
            let stats = sampled_pair_overlap(d, pattern, phi_x, phi_y, trials, seed, exec);
            (stats.mean, stats.std_error)
        }
    };

    let mut params = vec![
        kv("d", d),
        kv("n", n),
        kv("d_hamming", dh),
        kv("mode", mode.label()),
        kv("trials", mode.trials()),
    ];
    // At d = 2 (or x = y) the bound is 1 and holds vacuously.
    if bound >= 1.0 {
        params.push(kv("status", "trivial-bound"));
    }
    Ok(ExperimentReport::build(
        "lemma2",
        params,
        estimate,
        std_error,
        bound,
        Comparison::Le,
        rule,
        seed,
        started,
    ))
}

// ---------------------------------------------------------------------------
// Mixture purity bound
// ---------------------------------------------------------------------------

/// Mixture-purity bound: for a standard-form input with string distribution
/// p, the expected purity of the environment block is at most 2^n Σ_x p_x².
#[allow(clippy::too_many_arguments)]
pub fn verify_lemma3_purity(
    d: usize,
    n: usize,
    p: &[f64],
    shields: &[Option<PureState>],
    mode: EstimateMode,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let strings = d.pow(n as u32);
    if p.len() != strings || shields.len() != strings {
        return Err(Error::DimMismatch(format!(
            "need {strings} probabilities and shields"
        )));
    }
    if matches!(mode, EstimateMode::Exact) && (n > 2 || d > 4) {
        return Err(Error::InvalidParameter(
            "exact purity mode is limited to n <= 2, d <= 4".into(),
        ));
    }
    let bound = 2f64.powi(n as i32) * p.iter().map(|q| q * q).sum::<f64>();

    let digits = |mut v: usize| -> Vec<i64> {
        let mut out = vec![0i64; n];
        for k in (0..n).rev() {
            out[k] = (v % d) as i64;
            v /= d;
        }
        out
    };

    let (estimate, std_error) = match mode {
        EstimateMode::Exact => {
            let mut total = 0.0;
            for x in 0..strings {
                if p[x] == 0.0 {
                    continue;
                }
                for y in 0..strings {
                    if p[y] == 0.0 {
                        continue;
                    }
                    let pattern = HammingPattern::new(digits(x), digits(y), d)?;
                    let phi_x = shields[x].as_ref().expect("p > 0 implies shield");
                    let phi_y = shields[y].as_ref().expect("p > 0 implies shield");
                    total += p[x] * p[y] * exact_pair_overlap(d, &pattern, phi_x, phi_y)?;
                }
            }
            (total, 0.0)
        }
        EstimateMode::Haar { trials } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be >= 1".into()));
            }
            let phases: Vec<Vec<Complex64>> = (0..strings)
                .map(|x| z_phase_vector(&digits(x), d).expect("valid digits"))
                .collect();
            let shield_amps: Vec<Option<&[Complex64]>> = shields
                .iter()
                .map(|o| o.as_ref().map(|s| s.amplitudes()))
                .collect();
            let stats = mc_scalar(exec, trials, |t| {
                let mut rng = seed.stream(t).rng();
                let mut u = haar_unitary_rng(d, &mut rng).matrix().clone();
                for _ in 1..n {
                    let v = haar_unitary_rng(d, &mut rng);
                    u = tensor(&u, v.matrix()).expect("within cap");
                }
                let mut mix = CMatrix::zeros(strings, strings);
                for x in 0..strings {
                    if p[x] == 0.0 {
                        continue;
                    }
                    let mut w = u.matvec(shield_amps[x].expect("p > 0 implies shield"));
                    for (wi, ph) in w.iter_mut().zip(&phases[x]) {
                        *wi *= ph;
                    }
                    for i in 0..strings {
                        let wi = w[i] * p[x];
                        for j in 0..strings {
                            mix[(i, j)] += wi * w[j].conj();
                        }
                    }
                }
                // Purity of a Hermitian matrix: Σ |entries|².
                mix.data().iter().map(|z| z.norm_sqr()).sum()
            });
            (stats.mean, stats.std_error)
        }
    };

    let params = vec![
        kv("d", d),
        kv("n", n),
        kv("mode", mode.label()),
        kv("trials", mode.trials()),
        kv("support", p.iter().filter(|&&q| q > 0.0).count()),
    ];
    Ok(ExperimentReport::build(
        "lemma3-purity",
        params,
        estimate,
        std_error,
        bound,
        Comparison::Le,
        rule,
        seed,
        started,
    ))
}

// ---------------------------------------------------------------------------
// Haar-average dephased entropy
// ---------------------------------------------------------------------------

/// Monte Carlo check of E_φ S(dephase(|φ⟩⟨φ|)) = (log₂ e)(H_d − 1) over Haar
/// random pure states.
pub fn verify_avg_dephased_entropy(
    d: usize,
    trials: u64,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    if trials < 1000 {
        return Err(Error::InvalidParameter(
            "avg-entropy needs at least 10^3 trials".into(),
        ));
    }
    if d < 2 {
        return Err(Error::InvalidParameter("d must be >= 2".into()));
    }
    let stats = mc_scalar(exec, trials, |t| {
        let mut rng = seed.stream(t).rng();
        let phi = haar_state_rng(d, &mut rng);
        // Dephased entropy depends only on the diagonal |⟨k|φ⟩|².
        let probs: Vec<f64> = phi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
        shannon_entropy_bits(&probs)
    });
    let target = avg_dephased_entropy_closed_form(d);
    let params = vec![kv("d", d), kv("mode", "haar"), kv("trials", trials)];
    Ok(ExperimentReport::build(
        "avg-entropy",
        params,
        stats.mean,
        stats.std_error,
        target,
        Comparison::Eq,
        rule,
        seed,
        started,
    ))
}

// ---------------------------------------------------------------------------
// Degradability of the flagged extension
// ---------------------------------------------------------------------------

/// Choi distance between D ∘ M and M̂ for the flagged extension of a channel
/// built from `ensemble`.
pub fn verify_degradability(
    d: usize,
    ensemble: UnitaryEnsemble,
    seed: RngSeed,
    rule: PassRule,
) -> Result<ExperimentReport> {
    if d > 3 || ensemble.len() > 24 {
        return Err(Error::InvalidParameter(
            "degradability check is limited to d <= 3 with <= 24 members".into(),
        ));
    }
    let kind = ensemble.kind().label().to_string();
    let members = ensemble.len();
    let ch = FiniteVChannel::new(ensemble)?;
    let n = ch.to_kraus()?;
    verify_degradability_of(&n, &format!("{kind} d={d} members={members}"), seed, rule)
}

/// Same check for an arbitrary Kraus channel.
pub fn verify_degradability_of(
    n: &KrausChannel,
    label: &str,
    seed: RngSeed,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let flagged = flagged_channel(n)?;
    let d_map = degrading_map(n)?;
    let composed = KrausChannel::compose(&d_map, &flagged.m)?;
    let estimate = composed.choi_distance(&flagged.m_complement)?;
    let params = vec![
        kv("channel", label),
        kv("mode", "exact"),
        kv("in_dim", n.in_dim()),
        kv("out_dim", n.out_dim()),
    ];
    Ok(ExperimentReport::build(
        "degradability",
        params,
        estimate,
        0.0,
        1e-9,
        Comparison::Le,
        rule.with_tol_abs(0.0),
        seed,
        started,
    ))
}

// ---------------------------------------------------------------------------
// Bilinear form bound
// ---------------------------------------------------------------------------

/// Randomized check of |⟨ψ|H|φ⟩| ≤ ‖H‖_∞ for Hermitian H and unit vectors:
/// the estimate is the worst excess over all trials.
pub fn verify_bilinear_bound(
    dim: usize,
    trials: u64,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidParameter("dim must be >= 2".into()));
    }
    let excesses = map_indexed(exec, trials as usize, |t| {
        let sub = seed.stream(t as u64);
        let h = random_hermitian(dim, sub);
        let mut rng = sub.stream(1 << 32).rng();
        let psi = haar_state_rng(dim, &mut rng);
        let phi = haar_state_rng(dim, &mut rng);
        let form = inner(psi.amplitudes(), &h.matvec(phi.amplitudes())).norm();
        form - op_inf_norm(&h).expect("hermitian by construction")
    });
    let estimate = excesses.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let params = vec![kv("dim", dim), kv("mode", "haar"), kv("trials", trials)];
    Ok(ExperimentReport::build(
        "bilinear-bound",
        params,
        estimate,
        0.0,
        1e-12,
        Comparison::Le,
        rule.with_tol_abs(0.0),
        seed,
        started,
    ))
}

// ---------------------------------------------------------------------------
// Twirl vs closed form
// ---------------------------------------------------------------------------

/// Twirl estimation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwirlMode {
    CliffordExact,
    Haar { trials: u64 },
}

/// Deviation of the ensemble second-moment average of Z^a ⊗ Z^{−a} from the
/// projector closed form, maximized over a = 1..d−1.
pub fn verify_twirl(
    d: usize,
    mode: TwirlMode,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let (ensemble, bound, label, trials) = match mode {
        TwirlMode::CliffordExact => (UnitaryEnsemble::clifford(d)?, 1e-10, "clifford", 0u64),
        TwirlMode::Haar { trials } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be >= 1".into()));
            }
            let e = UnitaryEnsemble::haar(d, trials as usize, seed)?;
            let bound = 5.0 * (d * d) as f64 / (trials as f64).sqrt();
            (e, bound, "haar", trials)
        }
    };

    let mut worst: f64 = 0.0;
    for a in 1..d as i64 {
        let za = crate::channel::z_string(&[a], d)?;
        let zma = crate::channel::z_string(&[(d as i64 - a) % d as i64], d)?;
        let twirled = match mode {
            TwirlMode::CliffordExact => {
                let m = tensor(za.matrix(), zma.matrix())?;
                second_moment_twirl(&m, &ensemble, exec)?
            }
            TwirlMode::Haar { .. } => {
                second_moment_twirl_product(za.matrix(), zma.matrix(), &ensemble, exec)?
            }
        };
        worst = worst.max(twirled.max_abs_diff(&s_operator(a, d)));
    }

    let params = vec![kv("d", d), kv("mode", label), kv("trials", trials)];
    Ok(ExperimentReport::build(
        "twirl-check",
        params,
        worst,
        0.0,
        bound,
        Comparison::Le,
        rule.with_tol_abs(0.0),
        seed,
        started,
    ))
}

// ---------------------------------------------------------------------------
// Frame potential
// ---------------------------------------------------------------------------

/// Frame potential against the 2-design value 2. Exact for the Clifford
/// group; for Haar samples the estimate carries a jackknife standard error
/// and the known finite-sample bias (d⁴−2)/m as absolute slack.
pub fn verify_frame_potential(
    d: usize,
    mode: TwirlMode,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    match mode {
        TwirlMode::CliffordExact => {
            let e = UnitaryEnsemble::clifford(d)?;
            let f = e.frame_potential(exec);
            let params = vec![kv("d", d), kv("mode", "clifford"), kv("members", e.len())];
            Ok(ExperimentReport::build(
                "frame-potential",
                params,
                f,
                0.0,
                2.0,
                Comparison::Eq,
                rule.with_tol_abs(1e-9),
                seed,
                started,
            ))
        }
        TwirlMode::Haar { trials } => {
            let m = trials as usize;
            if m < 2 {
                return Err(Error::InvalidParameter("haar frame potential needs m >= 2".into()));
            }
            let e = UnitaryEnsemble::haar(d, m, seed)?;
            // Row sums of |Tr(U_j†U_k)|⁴ feed both the estimate and a
            // delete-one-member jackknife for its standard error.
            let rows: Vec<f64> = map_indexed(exec, m, |j| {
                let (uj, _) = &e.members()[j];
                let mut acc = 0.0;
                for (uk, _) in e.members() {
                    let mut tr = Complex64::new(0.0, 0.0);
                    for (a, b) in uj.matrix().data().iter().zip(uk.matrix().data()) {
                        tr += a.conj() * b;
                    }
                    let t2 = tr.norm_sqr();
                    acc += t2 * t2;
                }
                acc
            });
            let total: f64 = rows.iter().sum();
            let f = total / (m * m) as f64;
            let d4 = ((d * d) * (d * d)) as f64;
            let leave_one: Vec<f64> = rows
                .iter()
                .map(|&r| (total - 2.0 * r + d4) / ((m - 1) * (m - 1)) as f64)
                .collect();
            let jmean = leave_one.iter().sum::<f64>() / m as f64;
            let var_jack = (m as f64 - 1.0) / m as f64
                * leave_one.iter().map(|v| (v - jmean) * (v - jmean)).sum::<f64>();
            let se = var_jack.sqrt();
            let bias = (d4 - 2.0) / m as f64;
            let params = vec![kv("d", d), kv("mode", "haar"), kv("trials", m)];
            Ok(ExperimentReport::build(
                "frame-potential",
                params,
                f,
                se,
                2.0,
                Comparison::Eq,
                rule.with_tol_abs(bias + rule.tol_abs),
                seed,
                started,
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Achievability and the fixed-input floor
// ---------------------------------------------------------------------------

/// Private information of the key-generation ensemble equals log₂ d exactly,
/// for any ensemble kind.
pub fn verify_achievability(
    ensemble: UnitaryEnsemble,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let d = ensemble.d();
    let kind = ensemble.kind().label().to_string();
    let members = ensemble.len();
    let ch = FiniteVChannel::new(ensemble)?;
    let inputs = InputEnsemble::achievability(d)?;
    let estimate = private_information(&ch, &inputs, exec)?;
    let params = vec![kv("d", d), kv("mode", kind), kv("members", members)];
    Ok(ExperimentReport::build(
        "achievability",
        params,
        estimate,
        0.0,
        (d as f64).log2(),
        Comparison::Eq,
        rule.with_tol_abs(1e-9),
        seed,
        started,
    ))
}

/// Coherent information of the fixed input (I/d) ⊗ |0⟩⟨0|. With a Haar
/// ensemble the per-member terms are i.i.d. samples whose mean must sit
/// within the 3σ band of log₂ d − (log₂ e)(H_d − 1); for exact ensembles the
/// value is reported against the trivial floor 0.
pub fn verify_coherent_info_floor(
    ensemble: UnitaryEnsemble,
    seed: RngSeed,
    exec: ExecMode,
    rule: PassRule,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let d = ensemble.d();
    let kind = ensemble.kind().label().to_string();
    let members = ensemble.len();
    let is_haar = matches!(
        ensemble.kind(),
        crate::ensembles::EnsembleKind::HaarSample { .. }
    );
    let ch = FiniteVChannel::new(ensemble)?;
    let input = DensityMatrix::from_matrix_unchecked(tensor(
        DensityMatrix::maximally_mixed(d).matrix(),
        PureState::basis(d, 0).projector().matrix(),
    )?);

    // Per-member coherent-information terms S(B_v) − S(E_v).
    let terms: Vec<f64> = map_indexed(exec, ch.member_count(), |v| {
        let out = input.conjugated(ch.coupler(v));
        let b = partial_trace(&out, &[d, d], &[0]).expect("dims fixed");
        let e = partial_trace(&out, &[d, d], &[1]).expect("dims fixed");
        entropy_vn(&b).expect("valid block") - entropy_vn(&e).expect("valid block")
    });
    let weights: Vec<f64> = ch.ensemble().members().iter().map(|&(_, w)| w).collect();
    let estimate: f64 = terms.iter().zip(&weights).map(|(t, w)| t * w).sum();

    let (bound, comparison, se) = if is_haar {
        let m = terms.len() as f64;
        let mean = estimate;
        let var = terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (m - 1.0);
        (
            closed_form_lower_bound(d),
            Comparison::Eq,
            (var / m).sqrt(),
        )
    } else {
        (0.0, Comparison::Ge, 0.0)
    };

    let params = vec![kv("d", d), kv("mode", kind), kv("members", members)];
    Ok(ExperimentReport::build(
        "coherent-info",
        params,
        estimate,
        se,
        bound,
        comparison,
        rule,
        seed,
        started,
    ))
}
