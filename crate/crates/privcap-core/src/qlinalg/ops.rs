//! Tensor structure and entropy primitives.
//!
//! All entropies are reported in bits (base-2 logarithms), with the usual
//! 0·log 0 := 0 convention.

use num_complex::Complex64;

use super::eig::eigvalsh;
use super::matrix::{check_dim_cap, CMatrix};
use super::types::{DensityMatrix, EIG_CLAMP_TOL};
use crate::error::{Error, Result};

/// Kronecker product a ⊗ b.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_dim_cap(a.rows() * b.rows())?;
    check_dim_cap(a.cols() * b.cols())?;
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i1 in 0..a.rows() {
        for j1 in 0..a.cols() {
            let z = a[(i1, j1)];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            for i2 in 0..b.rows() {
                for j2 in 0..b.cols() {
                    out[(i1 * b.rows() + i2, j1 * b.cols() + j2)] = z * b[(i2, j2)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a sequence, left to right.
pub fn tensor_many(factors: &[&CMatrix]) -> Result<CMatrix> {
    let mut iter = factors.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty tensor product".into()))?;
    let mut acc = (*first).clone();
    for f in iter {
        acc = tensor(&acc, f)?;
    }
    Ok(acc)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn for_each_multi_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        let mut k = dims.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Trace out all tensor factors not listed in `keep`.
///
/// `dims` gives the factor dimensions in row-major order; their product must
/// equal the state dimension. Kept factors stay in their original order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "factor dims {:?} multiply to {total}, state has dim {}",
            dims,
            rho.dim()
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidParameter(format!(
            "keep index out of range for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let all_strides = strides(dims);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let kept_strides: Vec<usize> = keep.iter().map(|&k| all_strides[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let traced_strides: Vec<usize> = traced.iter().map(|&k| all_strides[k]).collect();

    let out_dim: usize = kept_dims.iter().product::<usize>().max(1);
    let mut out = CMatrix::zeros(out_dim, out_dim);

    let mut trace_offsets = Vec::with_capacity(traced_dims.iter().product::<usize>().max(1));
    for_each_multi_index(&traced_dims, |t| {
        trace_offsets.push(
            t.iter()
                .zip(&traced_strides)
                .map(|(i, s)| i * s)
                .sum::<usize>(),
        )
    });

    let mut kept_offsets = Vec::with_capacity(out_dim);
    for_each_multi_index(&kept_dims, |k| {
        kept_offsets.push(
            k.iter()
                .zip(&kept_strides)
                .map(|(i, s)| i * s)
                .sum::<usize>(),
        )
    });

    let m = rho.matrix();
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (c, &co) in kept_offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &to in &trace_offsets {
                acc += m[(ro + to, co + to)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Zero every off-diagonal entry (completely dephasing map on the whole space).
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        out[(i, i)] = rho.matrix()[(i, i)];
    }
    DensityMatrix::from_matrix_unchecked(out)
}

/// Dephase one tensor factor: entries whose `target` factor indices differ are
/// zeroed, everything else is preserved exactly. Idempotent.
pub fn dephase_factor(
    rho: &DensityMatrix,
    dims: &[usize],
    target: usize,
) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "factor dims {:?} multiply to {total}, state has dim {}",
            dims,
            rho.dim()
        )));
    }
    if target >= dims.len() {
        return Err(Error::InvalidParameter(format!(
            "factor index {target} out of range for {} factors",
            dims.len()
        )));
    }
    let s = strides(dims);
    let (stride, d_t) = (s[target], dims[target]);
    let out = CMatrix::from_fn(total, total, |i, j| {
        if (i / stride) % d_t == (j / stride) % d_t {
            rho.matrix()[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Shannon entropy of a probability vector, in bits.
pub fn shannon_entropy_bits(probs: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in probs {
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    s.max(0.0)
}

/// Von Neumann entropy −Σ λ log₂ λ in bits.
///
/// Eigenvalues in [−1e−9, 0) are clamped to zero; anything more negative is an
/// invalid state and errors out.
pub fn entropy_vn(rho: &DensityMatrix) -> Result<f64> {
    let vals = eigvalsh(rho.matrix())?;
    let mut probs = Vec::with_capacity(vals.len());
    for l in vals {
        if l < -EIG_CLAMP_TOL {
            return Err(Error::InvalidState(format!(
                "eigenvalue {l:.3e} below -{EIG_CLAMP_TOL:.0e}"
            )));
        }
        probs.push(l.max(0.0));
    }
    Ok(shannon_entropy_bits(&probs))
}

/// Rényi-2 entropy −log₂ Tr ρ² in bits.
pub fn entropy_renyi2(rho: &DensityMatrix) -> f64 {
    (-rho.purity().log2()).max(0.0)
}

/// Operator (spectral) norm of a Hermitian matrix: largest |eigenvalue|.
/// The input is symmetrized as (H + H†)/2 before the eigensolve.
pub fn op_inf_norm(h: &CMatrix) -> Result<f64> {
    if !h.is_square() {
        return Err(Error::DimMismatch(format!(
            "operator norm needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let vals = eigvalsh(h)?;
    Ok(vals.into_iter().map(f64::abs).fold(0.0, f64::max))
}

/// Trace distance ½‖a − b‖₁ via eigenvalues of the Hermitian difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(format!(
            "trace distance between dims {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a.matrix().sub(b.matrix());
    let vals = eigvalsh(&diff)?;
    Ok(0.5 * vals.into_iter().map(f64::abs).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::types::PureState;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tensor_identities() {
        let i2 = CMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2).unwrap(), CMatrix::identity(4));

        let z = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let zz = tensor(&z, &z).unwrap();
        let expect = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(zz, expect);
    }

    #[test]
    fn tensor_respects_dim_cap() {
        let big = CMatrix::identity(100);
        // 100 * 100 = 10_000 exceeds the default cap of 4096.
        assert!(matches!(
            tensor(&big, &big),
            Err(crate::error::Error::DimCapExceeded { .. })
        ));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = DensityMatrix::from_probs(&[0.75, 0.25]).unwrap();
        let sigma = DensityMatrix::maximally_mixed(3);
        let joint = DensityMatrix::from_matrix_unchecked(
            tensor(rho.matrix(), sigma.matrix()).unwrap(),
        );
        let back = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-14);
        let other = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(other.matrix().max_abs_diff(sigma.matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_pair_is_maximally_mixed() {
        let bell = PureState::normalized(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
            .unwrap()
            .projector();
        let reduced = partial_trace(&bell, &[2, 2], &[0]).unwrap();
        assert!(reduced
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
            < 1e-14);
    }

    #[test]
    fn partial_trace_dim_mismatch_errors() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
    }

    #[test]
    fn dephase_fixed_point_and_uniform_coherence() {
        let diag = DensityMatrix::from_probs(&[0.4, 0.6]).unwrap();
        assert_eq!(dephase(&diag), diag);

        let plus = PureState::normalized(vec![c(1., 0.), c(1., 0.)])
            .unwrap()
            .projector();
        let dephased = dephase(&plus);
        assert!(dephased
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
            < 1e-14);
        // Idempotent on stored entries.
        assert_eq!(dephase(&dephased), dephased);
    }

    #[test]
    fn dephase_factor_out_of_range() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(dephase_factor(&rho, &[2, 2], 2).is_err());
    }

    #[test]
    fn entropy_frozen_values() {
        // Pure state.
        let e = entropy_vn(&PureState::basis(2, 0).projector()).unwrap();
        assert!(e.abs() < 1e-12);
        // Maximally mixed on 4 dims.
        let e = entropy_vn(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
        // Hand evaluation: −(1/2)log(1/2) − 2·(1/4)log(1/4) = 1.5 bits.
        let e = entropy_vn(&DensityMatrix::from_probs(&[0.5, 0.25, 0.25]).unwrap()).unwrap();
        assert!((e - 1.5).abs() < 1e-12);
    }

    #[test]
    fn renyi2_frozen_values() {
        let e = entropy_renyi2(&DensityMatrix::maximally_mixed(8));
        assert!((e - 3.0).abs() < 1e-12);
        let e = entropy_renyi2(&PureState::basis(5, 2).projector());
        assert!(e.abs() < 1e-12);
        // diag(3/4, 1/4): purity 10/16.
        let e = entropy_renyi2(&DensityMatrix::from_probs(&[0.75, 0.25]).unwrap());
        assert!((e - (-(10.0f64 / 16.0).log2())).abs() < 1e-12);
        assert!((e - 0.6780719051126377).abs() < 1e-12);
    }

    #[test]
    fn op_norm_cases() {
        assert!((op_inf_norm(&CMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        let d = CMatrix::diag(&[c(0.3, 0.0), c(-0.9, 0.0)]);
        assert!((op_inf_norm(&d).unwrap() - 0.9).abs() < 1e-14);
        let rect = CMatrix::zeros(2, 3);
        assert!(op_inf_norm(&rect).is_err());
    }

    #[test]
    fn trace_distance_cases() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-14);
        let a = PureState::basis(2, 0).projector();
        let b = PureState::basis(2, 1).projector();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        let c_ = DensityMatrix::from_probs(&[0.75, 0.25]).unwrap();
        assert!((trace_distance(&rho, &c_).unwrap() - 0.25).abs() < 1e-14);
    }
}
