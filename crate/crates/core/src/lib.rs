//! Models for magnon-cavity hybrid systems: microwave transmission and
//! reflection, microwave-to-optical conversion through one or more magnon
//! modes, Walker magnetostatic mode frequencies of a sphere, derived
//! coupling parameters, and least-squares extraction of system parameters
//! from measured spectra.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the `*F64` aliases below name the double-precision
//! instantiations used by the command-line tool.

// `!(x > 0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod fit;
pub(crate) mod linalg;
pub mod magnetostatics;
pub mod model;
pub mod roots;
pub mod scalar;
pub mod scattering;

pub use error::{Error, Result};
pub use model::{
    dressing_factor, susceptibility_cavity, susceptibility_magnon, CavityParams, FieldMap,
    HybridSystem, MagnonMode, MaterialParams, OpticalDrive, ResolvedMode, ResolvedSystem,
};
pub use scalar::Real;
pub use scattering::{ComplexSpectrum, Observable, Response, SweepMap};

pub use num_complex::Complex;

pub type CavityParamsF64 = CavityParams<f64>;
pub type MagnonModeF64 = MagnonMode<f64>;
pub type MaterialParamsF64 = MaterialParams<f64>;
pub type OpticalDriveF64 = OpticalDrive<f64>;
pub type HybridSystemF64 = HybridSystem<f64>;
pub type ComplexSpectrumF64 = ComplexSpectrum<f64>;
pub type SweepMapF64 = SweepMap<f64>;
pub type FitProblemF64 = fit::FitProblem<f64>;
pub type FitResultF64 = fit::FitResult<f64>;

pub type HybridSystemF32 = HybridSystem<f32>;
pub type ComplexSpectrumF32 = ComplexSpectrum<f32>;
