//! Complex-domain machinery: personalized charges, phase perturbation,
//! magnetic Laplacians and spectral entropy diagnostics.

pub mod charge;
pub mod eigh;
pub mod entropy;
pub mod hermitian;
pub mod laplacian;

pub use charge::{
    node_uncertainty, personalized_charge, sample_perturbed_phase, sample_phase_factor, ChargeField,
    PerturbationSpec, PhaseField, MAX_CHARGE,
};
pub use eigh::{hermitian_eigenvalues, hermitian_eigh, jacobi_eigh, HermitianEigen};
pub use entropy::{
    entropy_at, entropy_variation, verify_bounded_variation, verify_monotonic_response, von_neumann_entropy,
    BoundedReport, MonotonicReport, SpectralReport, Verdict, DEFAULT_BETA, FORMULA_TOL, MIN_EIGENGAP,
};
pub use hermitian::{HermitianMatrix, C64};
pub use laplacian::{
    build_magnetic_laplacian, build_phase, laplacian_with_phase, magnetic_laplacian, perturbed_laplacian,
    personalized_laplacian, phase_exponential, symmetrize,
};
