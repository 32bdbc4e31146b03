//! Dense complex linear algebra and entropy primitives.

mod eig;
mod matrix;
mod ops;
mod types;

pub use eig::{eigh, eigvalsh, eigvalsh2, eigvalsh3, hermitian_entropy_small, mgs_qr};
pub use matrix::{check_dim_cap, dim_cap, inner, set_dim_cap, vec_norm, CMatrix};
pub use ops::{
    dephase, dephase_factor, entropy_renyi2, entropy_vn, op_inf_norm, partial_trace,
    shannon_entropy_bits, tensor, tensor_many, trace_distance,
};
pub use types::{DensityMatrix, PureState, UnitaryMatrix, EIG_CLAMP_TOL, HERM_TOL, NORM_TOL, UNITARY_TOL};
