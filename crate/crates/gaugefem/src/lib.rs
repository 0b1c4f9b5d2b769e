//! Finite element solver for the Yang-Mills equations in temporal gauge on 2D
//! domains (unit square or flat torus), with Lie algebra-valued differential
//! forms, a leapfrog time integrator, and a hybrid post-processing step whose
//! auxiliary flux variable satisfies an exact per-element charge conservation
//! law. Includes the diagnostics that contrast the conserved hybrid charge
//! with the drifting standard charge expression.
//!
//! All numerical kernels are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the concrete aliases below pin the `f64` instantiation
//! used by the command line driver and the acceptance tests.

pub mod assembly;
pub mod calculus;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod femspace;
pub mod hybrid;
pub mod lie;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};

/// `f64` instantiations of the core types.
pub type LieAlgebra64 = lie::LieAlgebra<f64>;
pub type LieVector64 = lie::LieVector<f64>;
pub type Mesh64 = mesh::Mesh<f64>;
pub type FormSpace64 = femspace::FormSpace<f64>;
pub type Field64 = femspace::Field<f64>;
pub type QuadratureRule64 = quadrature::QuadratureRule<f64>;
pub type Model64 = dynamics::Model<f64>;
pub type SimState64 = dynamics::SimState<f64>;
pub type DiagnosticsRecord64 = diagnostics::DiagnosticsRecord<f64>;
