//! Hermitian eigensolver (cyclic Jacobi with complex rotations) and a
//! re-orthogonalized Gram–Schmidt QR used by the Haar sampler.
//!
//! Matrices here are small (3x3 in the optimizer hot loop, a few hundred for
//! Choi states), where Jacobi is simple, accurate, and fast enough.

use num_complex::Complex64;

use super::matrix::{vec_norm, CMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues of a Hermitian matrix, ascending. Input is symmetrized first.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    let (vals, _) = jacobi(m, false)?;
    Ok(vals)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (vals, vecs) = jacobi(m, true)?;
    Ok((vals, vecs.expect("vectors requested")))
}

fn jacobi(m: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    if !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.symmetrize();
    let mut v = if want_vectors {
        Some(CMatrix::identity(n))
    } else {
        None
    };

    let scale = a.max_abs().max(1.0);
    let tol = 1e-15 * scale;

    for sweep in 0..=MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            let mut vals: Vec<(f64, usize)> =
                (0..n).map(|i| (a[(i, i)].re, i)).collect();
            vals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
            let order: Vec<usize> = vals.iter().map(|&(_, i)| i).collect();
            let eigenvalues: Vec<f64> = vals.iter().map(|&(l, _)| l).collect();
            let vectors = v.map(|vm| {
                CMatrix::from_fn(n, n, |i, j| vm[(i, order[j])])
            });
            return Ok((eigenvalues, vectors));
        }
        if sweep == MAX_SWEEPS {
            break;
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= tol * 1e-2 {
                    continue;
                }
                // Phase factor turning the pivot into a real 2x2 problem.
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;

                // Stable rotation angle for [[app, mag], [mag, aqq]].
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary J: J[p][p]=c, J[p][q]=s, J[q][p]=-s*conj(phase),
                // J[q][q]=c*conj(phase). Update A <- J† A J, V <- V J.
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                // Pivot is now real-diagonal by construction; clear round-off.
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let vkp = vm[(k, p)];
                        let vkq = vm[(k, q)];
                        vm[(k, p)] = vkp * jpp + vkq * jqp;
                        vm[(k, q)] = vkp * jpq + vkq * jqq;
                    }
                }
            }
        }
    }
    Err(Error::EigNoConvergence(MAX_SWEEPS))
}

/// Eigenvalues of a 2x2 Hermitian matrix given as a flat row-major slice,
/// ascending. No allocation beyond the output array.
pub fn eigvalsh2(m: &[Complex64]) -> [f64; 2] {
    debug_assert_eq!(m.len(), 4);
    let a = m[0].re;
    let b = m[3].re;
    let off = 0.5 * (m[1] + m[2].conj());
    let mid = 0.5 * (a + b);
    let rad = (0.25 * (a - b) * (a - b) + off.norm_sqr()).sqrt();
    [mid - rad, mid + rad]
}

/// Eigenvalues of a 3x3 Hermitian matrix given as a flat row-major slice,
/// ascending, via the trigonometric solution of the characteristic cubic.
pub fn eigvalsh3(m: &[Complex64]) -> [f64; 3] {
    debug_assert_eq!(m.len(), 9);
    let a00 = m[0].re;
    let a11 = m[4].re;
    let a22 = m[8].re;
    let a01 = 0.5 * (m[1] + m[3].conj());
    let a02 = 0.5 * (m[2] + m[6].conj());
    let a12 = 0.5 * (m[5] + m[7].conj());

    let p1 = a01.norm_sqr() + a02.norm_sqr() + a12.norm_sqr();
    let q = (a00 + a11 + a22) / 3.0;
    let d0 = a00 - q;
    let d1 = a11 - q;
    let d2 = a22 - q;
    let p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    if p2 <= 0.0 {
        return [q, q, q];
    }
    let p = (p2 / 6.0).sqrt();
    // det(B) for B = (A - qI)/p, real for Hermitian input.
    let inv = 1.0 / p;
    let b00 = d0 * inv;
    let b11 = d1 * inv;
    let b22 = d2 * inv;
    let b01 = a01 * inv;
    let b02 = a02 * inv;
    let b12 = a12 * inv;
    // det(B) = b00 b11 b22 − b00|b12|² − b22|b01|² − b11|b02|²
    //          + 2 Re(b01 b12 conj(b02))   (real for Hermitian B).
    let det = b00 * b11 * b22 - b00 * b12.norm_sqr() - b22 * b01.norm_sqr()
        - b11 * b02.norm_sqr()
        + 2.0 * (b01 * b12 * b02.conj()).re;
    let r = (det / 2.0).clamp(-1.0, 1.0);
    // Near |r| = 1 the spectrum is (almost) degenerate and acos loses
    // precision quadratically; hand those cases to the iterative solver.
    if r.abs() > 1.0 - 1e-8 {
        let m = CMatrix::from_vec(3, 3, m.to_vec()).expect("square slice");
        let vals = eigvalsh(&m).expect("hermitian input");
        return [vals[0], vals[1], vals[2]];
    }
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

/// Entropy −Σ λ log₂ λ of a small flat Hermitian matrix (its eigenvalues
/// clamped at zero), dispatching to the closed-form eigensolvers when the
/// dimension allows.
pub fn hermitian_entropy_small(dim: usize, flat: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    let mut add = |l: f64| {
        if l > 0.0 {
            acc -= l * l.log2();
        }
    };
    match dim {
        1 => add(flat[0].re),
        2 => {
            for l in eigvalsh2(flat) {
                add(l);
            }
        }
        3 => {
            for l in eigvalsh3(flat) {
                add(l);
            }
        }
        _ => {
            let m = CMatrix::from_vec(dim, dim, flat.to_vec()).expect("square slice");
            for l in eigvalsh(&m).expect("hermitian input") {
                add(l);
            }
        }
    }
    acc.max(0.0)
}

/// Orthonormalize the columns of `m` by modified Gram–Schmidt, run twice for
/// full orthogonality, returning (Q, diag(R)). The R diagonal comes out real
/// and positive, which pins the QR phase convention.
pub fn mgs_qr(m: &CMatrix) -> (CMatrix, Vec<Complex64>) {
    assert!(m.is_square());
    let n = m.rows();
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)]).collect())
        .collect();
    let mut rdiag = vec![Complex64::new(0.0, 0.0); n];

    for k in 0..n {
        for _ in 0..2 {
            for j in 0..k {
                let proj = super::matrix::inner(&cols[j], &cols[k]);
                let (qj, vk) = {
                    let (a, b) = cols.split_at_mut(k);
                    (&a[j], &mut b[0])
                };
                for i in 0..n {
                    vk[i] -= proj * qj[i];
                }
            }
        }
        let norm = vec_norm(&cols[k]);
        rdiag[k] = Complex64::new(norm, 0.0);
        let inv = 1.0 / norm;
        for z in cols[k].iter_mut() {
            *z *= inv;
        }
    }

    let q = CMatrix::from_fn(n, n, |i, j| cols[j][i]);
    (q, rdiag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_of_diagonal_is_sorted_diagonal() {
        let m = CMatrix::diag(&[c(0.3, 0.0), c(-0.9, 0.0), c(0.1, 0.0)]);
        let vals = eigvalsh(&m).unwrap();
        assert_eq!(vals, vec![-0.9, 0.1, 0.3]);
    }

    #[test]
    fn eig_of_pauli_x_and_y() {
        let x = CMatrix::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let vals = eigvalsh(&x).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);

        let y = CMatrix::from_vec(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let vals = eigvalsh(&y).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_the_matrix() {
        // Fixed pseudo-random Hermitian 5x5.
        let n = 5;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let raw = CMatrix::from_fn(n, n, |_, _| c(rnd(), rnd()));
        let h = raw.symmetrize();
        let (vals, vecs) = eigh(&h).unwrap();
        let lam = CMatrix::diag(&vals.iter().map(|&l| c(l, 0.0)).collect::<Vec<_>>());
        let rebuilt = vecs.matmul(&lam).matmul(&vecs.adjoint());
        assert!(rebuilt.max_abs_diff(&h) < 1e-12);
        assert!(vecs.unitarity_defect() < 1e-12);
    }

    #[test]
    fn analytic_small_eigensolvers_match_jacobi() {
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut rnd = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for dim in [2usize, 3] {
            for _ in 0..2000 {
                let raw = CMatrix::from_fn(dim, dim, |_, _| c(rnd(), rnd()));
                let h = raw.symmetrize();
                let slow = eigvalsh(&h).unwrap();
                let fast: Vec<f64> = match dim {
                    2 => eigvalsh2(h.data()).to_vec(),
                    _ => eigvalsh3(h.data()).to_vec(),
                };
                for (a, b) in slow.iter().zip(&fast) {
                    assert!(
                        (a - b).abs() < 1e-12 * (1.0 + h.max_abs()),
                        "dim {dim}: {slow:?} vs {fast:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn analytic_eigensolver_degenerate_cases() {
        // Multiple of the identity.
        let m = CMatrix::identity(3).scale_re(0.25);
        assert_eq!(eigvalsh3(m.data()), [0.25, 0.25, 0.25]);
        // Rank-one projector.
        let mut p = CMatrix::zeros(3, 3);
        p[(1, 1)] = Complex64::new(1.0, 0.0);
        let vals = eigvalsh3(p.data());
        assert!(vals[0].abs() < 1e-15 && vals[1].abs() < 1e-15);
        assert!((vals[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_entropy_matches_generic_route() {
        let mut seed = 0xdeadbeefcafeu64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for dim in [2usize, 3, 4] {
            for _ in 0..50 {
                // Random mixture of projectors: a valid density matrix.
                let mut m = CMatrix::zeros(dim, dim);
                let mut total = 0.0;
                let mut weights = vec![0.0; dim];
                for w in weights.iter_mut() {
                    *w = rnd();
                    total += *w;
                }
                for k in 0..dim {
                    let v: Vec<Complex64> = (0..dim).map(|_| c(rnd() - 0.5, rnd() - 0.5)).collect();
                    let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    for i in 0..dim {
                        for j in 0..dim {
                            m[(i, j)] += v[i] * v[j].conj() * (weights[k] / total / (nrm * nrm));
                        }
                    }
                }
                let fast = hermitian_entropy_small(dim, m.data());
                let rho = crate::qlinalg::DensityMatrix::from_matrix_unchecked(m);
                let slow = crate::qlinalg::entropy_vn(&rho).unwrap();
                assert!((fast - slow).abs() < 1e-11, "dim {dim}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn mgs_qr_produces_unitary_q_with_positive_diag() {
        let m = CMatrix::from_vec(
            2,
            2,
            vec![c(1.0, 1.0), c(2.0, -0.5), c(0.0, 3.0), c(-1.0, 0.25)],
        )
        .unwrap();
        let (q, rdiag) = mgs_qr(&m);
        assert!(q.unitarity_defect() < 1e-13);
        assert!(rdiag.iter().all(|r| r.re > 0.0 && r.im == 0.0));
        // Q reproduces the column span: Q† M is upper triangular.
        let r = q.adjoint().matmul(&m);
        assert!(r[(1, 0)].norm() < 1e-13);
    }
}
