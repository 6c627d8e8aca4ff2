//! Numerical construction of multipeak cluster solutions for the
//! Schrödinger–Bopp–Podolsky system via Lyapunov–Schmidt reduction.

pub mod ansatz;
pub mod bpfield;
pub mod energy;
pub mod error;
pub mod fft3;
pub mod fields;
pub mod groundstate;
pub mod krylov;
pub mod reduction;
pub mod scalar;

pub use error::{Result, SbpError};
pub use scalar::Real;

pub type Profile = groundstate::RadialProfile<f64>;
pub type Constants = groundstate::GroundStateConstants<f64>;
pub type Grid = fields::UniformGrid<f64>;
pub type Field = fields::ScalarField3D<f64>;
pub type Potential = ansatz::PotentialSpec<f64>;
pub type Params = ansatz::ReductionParams<f64>;
pub type Config = ansatz::PeakConfig<f64>;
pub type Context = energy::EnergyContext<f64>;
