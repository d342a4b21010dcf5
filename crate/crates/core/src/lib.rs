//! Learning multimode Gaussian optical states by transducing each mode into a
//! qubit with a Jaynes-Cummings interaction, estimating qubit Pauli
//! expectations with classical shadows and inverting the transduction map
//! iteratively.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `f64`
//! aliases below are what the experiment runner uses.

pub mod error;
pub mod estimator;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod pauli;
pub mod protocol;
pub mod random;
pub mod scalar;
pub mod shadows;
pub mod transduction;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// Double-precision aliases.
pub type GaussianState = gaussian::GaussianState<f64>;
pub type MomentVector = gaussian::MomentVector<f64>;
pub type StatePrepParams = gaussian::StatePrepParams<f64>;
pub type PairMap = transduction::PairMap<f64>;
pub type PauliVector = transduction::PauliVector<f64>;
pub type FockOperator = fock::FockOperator<f64>;
pub type EstimatorConfig = estimator::EstimatorConfig<f64>;
pub type GlobalEstimate = protocol::GlobalEstimate<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type GaussianState = crate::gaussian::GaussianState<f32>;
    pub type MomentVector = crate::gaussian::MomentVector<f32>;
    pub type StatePrepParams = crate::gaussian::StatePrepParams<f32>;
    pub type PairMap = crate::transduction::PairMap<f32>;
    pub type PauliVector = crate::transduction::PauliVector<f32>;
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
