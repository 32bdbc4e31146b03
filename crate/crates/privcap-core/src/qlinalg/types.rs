//! Validated wrappers: pure states, density matrices, unitaries.
//!
//! Construction checks the defining property at a fixed tolerance and returns
//! an error on violation, so downstream code can assume well-formed values.
//! Hot paths that produce states valid by construction (isometric conjugation,
//! convex mixtures of valid states) use the `_unchecked` constructors.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use super::eig::eigvalsh;
use super::matrix::{check_dim_cap, vec_norm, CMatrix};
use crate::error::{Error, Result};

/// Entrywise tolerance for Hermiticity and unit trace.
pub const HERM_TOL: f64 = 1e-10;
/// Pure-state normalization tolerance.
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues in [-EIG_CLAMP_TOL, 0) are treated as round-off and clamped.
pub const EIG_CLAMP_TOL: f64 = 1e-9;
/// Entrywise tolerance for U†U = I.
pub const UNITARY_TOL: f64 = 1e-10;

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim_cap(amplitudes.len())?;
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} deviates from 1 by more than {NORM_TOL}"
            )));
        }
        Ok(PureState { amplitudes })
    }

    /// Rescale an arbitrary nonzero vector onto the unit sphere.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if norm < 1e-300 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        let inv = 1.0 / norm;
        PureState::new(amplitudes.into_iter().map(|z| z * inv).collect())
    }

    /// Computational basis state |k⟩ in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        PureState { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Projector |ψ⟩⟨ψ|.
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(CMatrix::outer(&self.amplitudes, &self.amplitudes))
    }

    /// |ψ⟩ ⊗ |χ⟩.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        check_dim_cap(self.dim() * other.dim())?;
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(PureState { amplitudes })
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimMismatch(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_dim_cap(matrix.rows())?;
        let herm = matrix.hermiticity_defect();
        if herm > HERM_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {herm:.3e} exceeds {HERM_TOL:.0e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > HERM_TOL || tr.im.abs() > HERM_TOL {
            return Err(Error::InvalidState(format!(
                "trace {tr} deviates from 1 by more than {HERM_TOL:.0e}"
            )));
        }
        let min_eig = eigvalsh(&matrix)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIG_CLAMP_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e} below -{EIG_CLAMP_TOL:.0e}"
            )));
        }
        Ok(DensityMatrix { matrix })
    }

    /// Wrap a matrix that is valid by construction, skipping the eigencheck.
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(matrix.is_square());
        debug_assert!(matrix.hermiticity_defect() <= 1e-8);
        DensityMatrix { matrix }
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    /// Diagonal state from a probability vector.
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -1e-12) || (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "probability vector sums to {sum}"
            )));
        }
        Ok(DensityMatrix {
            matrix: CMatrix::diag(
                &probs
                    .iter()
                    .map(|&p| Complex64::new(p.max(0.0), 0.0))
                    .collect::<Vec<_>>(),
            ),
        })
    }

    /// Convex mixture Σ wᵢ ρᵢ of equal-dimension states.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let dim = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?
            .1
            .dim();
        let mut acc = CMatrix::zeros(dim, dim);
        let mut total = 0.0;
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimMismatch("mixture blocks differ in dimension".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidParameter("negative mixture weight".into()));
            }
            acc.add_assign_scaled(rho.matrix(), *w);
            total += w;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
        }
        Ok(DensityMatrix { matrix: acc })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.matrix.trace_of_product(&self.matrix).re
    }

    /// U ρ U† for unitary U; valid by construction.
    pub fn conjugated(&self, u: &UnitaryMatrix) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.matrix.conjugate_by(u.matrix()))
    }
}

/// Matrix with U†U = I.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimMismatch(format!(
                "unitary must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_dim_cap(matrix.rows())?;
        let defect = matrix.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::InvalidState(format!(
                "unitarity defect {defect:.3e} exceeds {UNITARY_TOL:.0e}"
            )));
        }
        Ok(UnitaryMatrix { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(matrix.unitarity_defect() <= UNITARY_TOL);
        UnitaryMatrix { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix {
            matrix: CMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dagger(&self) -> UnitaryMatrix {
        UnitaryMatrix {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn matmul(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix {
            matrix: self.matrix.matmul(&other.matrix),
        }
    }

    /// U |ψ⟩.
    pub fn apply_state(&self, psi: &PureState) -> PureState {
        PureState {
            amplitudes: self.matrix.matvec(psi.amplitudes()),
        }
    }
}

fn serialize_kinded<S: Serializer>(
    kind: &str,
    m: &CMatrix,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut s = serializer.serialize_struct("Matrix", 4)?;
    s.serialize_field("kind", kind)?;
    s.serialize_field("rows", &m.rows())?;
    s.serialize_field("cols", &m.cols())?;
    s.serialize_field(
        "data",
        &m.data().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
    )?;
    s.end()
}

#[derive(Deserialize)]
struct KindedWire {
    kind: String,
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl KindedWire {
    fn into_matrix(self, expect: &str) -> Result<CMatrix> {
        if self.kind != expect {
            return Err(Error::InvalidParameter(format!(
                "expected kind \"{expect}\", got \"{}\"",
                self.kind
            )));
        }
        CMatrix::from_vec(
            self.rows,
            self.cols,
            self.data
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_kinded("density", &self.matrix, serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = KindedWire::deserialize(deserializer)?;
        let m = wire.into_matrix("density").map_err(D::Error::custom)?;
        DensityMatrix::new(m).map_err(D::Error::custom)
    }
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_kinded("unitary", &self.matrix, serializer)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = KindedWire::deserialize(deserializer)?;
        let m = wire.into_matrix("unitary").map_err(D::Error::custom)?;
        UnitaryMatrix::new(m).map_err(D::Error::custom)
    }
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let col = CMatrix::from_vec(self.dim(), 1, self.amplitudes.clone())
            .expect("amplitude vector is a valid column");
        serialize_kinded("pure", &col, serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = KindedWire::deserialize(deserializer)?;
        if wire.cols != 1 {
            return Err(D::Error::custom("pure state must be a column vector"));
        }
        let m = wire.into_matrix("pure").map_err(D::Error::custom)?;
        PureState::new(m.data().to_vec()).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2).scale_re(0.5)).is_ok());
        // Not unit trace.
        assert!(DensityMatrix::new(CMatrix::identity(2)).is_err());
        // Not Hermitian.
        let m = CMatrix::from_vec(2, 2, vec![c(0.5, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0)])
            .unwrap();
        assert!(DensityMatrix::new(m).is_err());
        // Negative eigenvalue beyond the clamp window.
        let m = CMatrix::diag(&[c(1.5, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn pure_state_validation_and_projector() {
        assert!(PureState::new(vec![c(1.0, 0.0), c(0.1, 0.0)]).is_err());
        let plus = PureState::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let proj = plus.projector();
        assert!((proj.purity() - 1.0).abs() < 1e-12);
        assert!((proj.matrix()[(0, 1)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kinded_serde_round_trip() {
        let rho = DensityMatrix::maximally_mixed(2);
        let json = serde_json::to_string(&rho).unwrap();
        assert!(json.starts_with(r#"{"kind":"density","rows":2,"cols":2"#));
        let back: DensityMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rho);

        let psi = PureState::basis(3, 1);
        let json = serde_json::to_string(&psi).unwrap();
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, psi);
    }
}
