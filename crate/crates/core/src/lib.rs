//! Truncated Fock-space simulation of Kerr cat-state force sensing.
//!
//! The crate is split along the measurement pipeline:
//!
//! * [`fock`]: states, ladder operators, Kerr and displacement propagators,
//!   homodyne quadrature statistics.
//! * [`protocol`]: the lossless Kerr / kick / inverse-Kerr pipeline and its
//!   closed-form signal expressions.
//! * [`loss`]: transfer parameters, thermal kick statistics, the two-mode
//!   loss channel, damped Kerr propagators and emission trajectories.
//! * [`montecarlo`]: shot-level simulation, coin estimation and sweeps.

pub mod error;
pub mod fock;
pub mod loss;
pub mod montecarlo;
pub mod protocol;
pub mod quadrature;

pub use error::{Error, Result};
pub use fock::{FockOperator, FockVector, OperatorKind, QuadratureResult};
pub use loss::{KickStats, LossBudget, LossParams, LossRates};
pub use montecarlo::{Engine, ExperimentConfig, ForceShape, ForceSpec, SignalEstimate, SweepAxis};
pub use protocol::{CoinSignal, PhysicalForce, ProtocolParams};

pub use num_complex::Complex64;
