//! Higher-order photon correlations of `N` independent emitters on a
//! line, observed in the far field.
//!
//! * [`model`]: geometry, optical phases, the N-slit grating factor.
//! * [`analytic`]: closed forms, visibilities, peak width.
//! * [`quantum`]: exact state-vector and permanent engines for two-level atoms.
//! * [`stochastic`]: thermal/coherent speckle Monte Carlo and exact oracles.
//! * [`estimator`]: synthetic camera frames, frame correlation, curve fits and metrics.
//! * [`io`]: frame-stack and curve file formats.
//! * [`cli`]: the `superrad` command-line front end.
//!
//! Every engine is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix it to `f64`.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod io;
pub mod model;
pub mod quantum;
pub mod scalar;
pub mod stochastic;

pub use error::{Error, Result};
pub use scalar::Real;

pub type EmitterChain = model::EmitterChain<f64>;
pub type SourceModel = model::SourceModel<f64>;
pub type DetectorSet = model::DetectorSet<f64>;
pub type CorrelationCurve = model::CorrelationCurve<f64>;
pub type QuantumState = quantum::QuantumState<f64>;
pub type PathMatrix = quantum::PathMatrix<f64>;
pub type FieldRealization = stochastic::FieldRealization<f64>;
pub type FrameStack = estimator::FrameStack<f64>;
pub type FitResult = estimator::FitResult<f64>;
pub type ModelPrediction = analytic::ModelPrediction<f64>;

pub type EmitterChainF32 = model::EmitterChain<f32>;
pub type CorrelationCurveF32 = model::CorrelationCurve<f32>;
