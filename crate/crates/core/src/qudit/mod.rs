//! Dense complex linear algebra over labelled qudit registers.

mod container;
mod ensemble;
mod gates;
mod info;
mod kernel;
mod measure;
mod random;
mod register;
mod state;

pub use container::{read_container, write_container, Container, ContainerHeader, ContainerKind};
pub use ensemble::Ensemble;
pub use gates::{
    bell_basis, clock_matrix, controlled, fourier, gen_pauli_x, gen_pauli_z, identity, max_entangled, shift_matrix,
    weyl_matrix, Circuit, Unitary,
};
pub use info::{
    entropy_of_spectrum, fidelity, hermitian_eigen, negativity, operator_norm, trace_distance, von_neumann_entropy,
};
pub use measure::{measure_projective, measure_projective_pure, MeasurementBranch, PureBranch};
pub use random::{random_density, random_isometry, random_pure, random_unitary};
pub use register::{Dim, Register};
pub use state::{DensityOperator, PureState};

pub type C64 = nalgebra::Complex<f64>;
pub type Matrix = nalgebra::DMatrix<C64>;
pub type Vector = nalgebra::DVector<C64>;

/// Tolerance for freshly constructed objects (norms, unitarity of gates).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for hermiticity and trace of density operators.
pub const STATE_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted as numerical noise.
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance for derived equalities (completeness of measurements etc.).
pub const DERIVED_TOL: f64 = 1e-9;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// ω^k with ω = exp(2πi/d).
pub(crate) fn root_of_unity(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / d as f64)
}

/// max |a_ij - b_ij|
pub(crate) fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
