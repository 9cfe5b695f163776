//! Simulation of forward, adiabatic-reverse and iterated-reverse quantum
//! annealing for the ferromagnetic p-spin model in the two-block
//! total-spin sector.
//!
//! Every numerical routine is generic over [`Real`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below fix the scalar.

pub mod dynamics;
pub mod error;
pub mod ira;
pub mod linalg;
pub mod scalar;
pub mod schedule;
pub mod sector;
pub mod semiclassical;
pub mod spectrum;
pub mod state;
pub mod statics;

pub use error::{Error, Result};
pub use scalar::{HalfInt, Real};

pub type ModelParams64 = sector::ModelParams<f64>;
pub type OperatorMatrix64 = sector::OperatorMatrix<f64>;
pub type HamiltonianTerms64 = sector::HamiltonianTerms<f64>;
pub type StateVector64 = state::StateVector<f64>;
pub type Schedule64 = schedule::Schedule<f64>;
pub type MeanField64 = statics::MeanField<f64>;
pub type Semiclassical64 = semiclassical::Semiclassical<f64>;
pub type TransitionMatrix64 = ira::TransitionMatrix<f64>;
pub type ProbabilityVector64 = ira::ProbabilityVector<f64>;

pub type ModelParams32 = sector::ModelParams<f32>;
pub type OperatorMatrix32 = sector::OperatorMatrix<f32>;
pub type StateVector32 = state::StateVector<f32>;
pub type Schedule32 = schedule::Schedule<f32>;
