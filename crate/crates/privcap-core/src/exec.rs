//! Serial and data-parallel execution of independent trials.
//!
//! Reproducibility contract: every trial draws from its own counter-based RNG
//! substream, so trial values are identical no matter how work is scheduled.
//! In [`ExecMode::Serial`] the reduction sums in ascending trial order and is
//! bitwise reproducible. In [`ExecMode::Parallel`] trials are reduced in fixed
//! chunks (combined in ascending chunk order), which is deterministic for a
//! given build but may differ from the serial sum in the last bit.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::qlinalg::CMatrix;

/// How trial loops execute. `Parallel` requires the `parallel` feature; it
/// falls back to serial execution when the feature is compiled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Serial,
    Parallel,
}

impl ExecMode {
    /// Pick a mode from a requested thread count.
    pub fn from_threads(threads: usize) -> ExecMode {
        if threads > 1 && cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Serial
        }
    }

    pub fn is_parallel(self) -> bool {
        matches!(self, ExecMode::Parallel) && cfg!(feature = "parallel")
    }
}

/// Sample mean and standard error of i.i.d. trial values.
#[derive(Debug, Clone, Copy)]
pub struct McStats {
    pub trials: u64,
    pub mean: f64,
    pub std_error: f64,
}

fn stats_from_moments(trials: u64, sum: f64, sumsq: f64) -> McStats {
    let n = trials as f64;
    let mean = sum / n;
    let std_error = if trials > 1 {
        let var = ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    McStats {
        trials,
        mean,
        std_error,
    }
}

const SCALAR_CHUNK: u64 = 8192;
const MATRIX_CHUNK: u64 = 512;

/// Mean and standard error of `eval(t)` over `t = 0..trials`.
pub fn mc_scalar(mode: ExecMode, trials: u64, eval: impl Fn(u64) -> f64 + Sync + Send) -> McStats {
    assert!(trials > 0);
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        let chunks = trials.div_ceil(SCALAR_CHUNK);
        let partials: Vec<(f64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * SCALAR_CHUNK;
                let hi = (lo + SCALAR_CHUNK).min(trials);
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for t in lo..hi {
                    let v = eval(t);
                    sum += v;
                    sumsq += v * v;
                }
                (sum, sumsq)
            })
            .collect();
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for (s, ss) in partials {
            sum += s;
            sumsq += ss;
        }
        return stats_from_moments(trials, sum, sumsq);
    }
    let _ = mode;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for t in 0..trials {
        let v = eval(t);
        sum += v;
        sumsq += v * v;
    }
    stats_from_moments(trials, sum, sumsq)
}

/// Sum of matrix-valued contributions over `0..n`. `eval(i, acc)` adds unit
/// `i`'s contribution into `acc`.
pub fn matrix_sum_indexed(
    mode: ExecMode,
    n: u64,
    rows: usize,
    cols: usize,
    eval: impl Fn(u64, &mut CMatrix) + Sync + Send,
) -> CMatrix {
    assert!(n > 0);
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        let chunks = n.div_ceil(MATRIX_CHUNK);
        let partials: Vec<CMatrix> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * MATRIX_CHUNK;
                let hi = (lo + MATRIX_CHUNK).min(n);
                let mut acc = CMatrix::zeros(rows, cols);
                for t in lo..hi {
                    eval(t, &mut acc);
                }
                acc
            })
            .collect();
        let mut acc = CMatrix::zeros(rows, cols);
        for p in partials {
            acc = acc.add(&p);
        }
        return acc;
    }
    let _ = mode;
    let mut acc = CMatrix::zeros(rows, cols);
    for t in 0..n {
        eval(t, &mut acc);
    }
    acc
}

/// Mean of matrix-valued trials. `eval(t, acc)` adds trial `t`'s contribution
/// into `acc`; the final accumulator is divided by the trial count.
pub fn mc_matrix_mean(
    mode: ExecMode,
    trials: u64,
    rows: usize,
    cols: usize,
    eval: impl Fn(u64, &mut CMatrix) + Sync + Send,
) -> CMatrix {
    matrix_sum_indexed(mode, trials, rows, cols, eval).scale_re(1.0 / trials as f64)
}

/// Map `f` over `0..n`, returning results in index order. Each unit is
/// self-contained, so serial and parallel runs produce identical vectors.
pub fn map_indexed<T: Send>(mode: ExecMode, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_stats_match_hand_computation() {
        let s = mc_scalar(ExecMode::Serial, 4, |t| t as f64);
        assert!((s.mean - 1.5).abs() < 1e-15);
        // Sample variance of {0,1,2,3} is 5/3.
        assert!((s.std_error - (5.0 / 3.0f64 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_serial_closely() {
        let f = |t: u64| ((t * 2654435761 + 1) % 1000) as f64 / 1000.0;
        let a = mc_scalar(ExecMode::Serial, 100_000, f);
        let b = mc_scalar(ExecMode::Parallel, 100_000, f);
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.std_error - b.std_error).abs() < 1e-12);

        let m1 = mc_matrix_mean(ExecMode::Serial, 1000, 2, 2, |t, acc| {
            acc[(0, 0)] += num_complex::Complex64::new(t as f64, 0.0)
        });
        let m2 = mc_matrix_mean(ExecMode::Parallel, 1000, 2, 2, |t, acc| {
            acc[(0, 0)] += num_complex::Complex64::new(t as f64, 0.0)
        });
        assert!(m1.max_abs_diff(&m2) < 1e-9);
    }

    #[test]
    fn map_indexed_is_order_stable() {
        let v = map_indexed(ExecMode::Serial, 5, |i| i * i);
        assert_eq!(v, vec![0, 1, 4, 9, 16]);
        #[cfg(feature = "parallel")]
        {
            let w = map_indexed(ExecMode::Parallel, 5, |i| i * i);
            assert_eq!(v, w);
        }
    }
}
