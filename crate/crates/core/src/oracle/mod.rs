//! Brute-force validation layer.
//!
//! Everything here works with explicit `2^N`-dimensional matrices or explicit
//! enumeration, independently of the closed forms in [`crate::fidelity`] and
//! [`crate::optimal_states`], and is meant for `N <= 10`.

mod basis;
mod dense;
mod enumeration;
mod povm;
mod quadrature;

pub use basis::{build_coupled_basis, CoupledBasis, CoupledBlock};
pub use dense::{
    casimir, collective_jplus, collective_jz, permutation_residual, product_state_diagonal,
    schur_to_dense, sector_weights_of_product, transposition_matrix, DenseState,
    ProductDecomposition, ProductSector,
};
pub use enumeration::{best_known_pair, best_unknown_vertex};
pub use povm::{
    covariant_povm_fidelity, estimate_map_bloch, povm_completeness_residual, verify_covariance,
    CovarianceReport, PovmFidelity,
};
pub use quadrature::{gauss_legendre, SphereQuadrature};

/// Largest qubit count handled by the dense oracle.
pub const MAX_DENSE_QUBITS: u32 = 10;

pub(crate) fn check_dense_size(n: u32) -> crate::Result<()> {
    if n == 0 {
        return Err(crate::Error::Domain("qubit count must be positive".into()));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(crate::Error::Resource(format!(
            "dense oracle supports n <= {MAX_DENSE_QUBITS}, got {n}"
        )));
    }
    Ok(())
}
