//! Finite-chain tools for short-range entanglement of gapped ground states.

pub mod analysis;
pub mod appendix;
pub mod disentangler;
pub mod eigensolver;
pub mod error;
pub mod filter;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod random;
pub mod scalar;
pub mod schmidt;
pub mod state;
pub mod uhlmann;

pub use error::{Error, Result};
pub use geometry::{Interval, Region};
pub use scalar::{CMat, CVec, Real, C};
pub use state::{DensityOperator, LocalOperator, PureState, SiteSpec};

/// Double-precision aliases used by the CLI.
pub type State = PureState<f64>;
pub type Density = DensityOperator<f64>;
pub type Operator = LocalOperator<f64>;
pub type Matrix = CMat<f64>;
pub type Vector = CVec<f64>;
pub type Interaction = model::Interaction<f64>;
pub type Cut = disentangler::CutResult<f64>;
pub type Unitary = disentangler::AnchoredUnitary<f64>;

/// Single-precision aliases.
pub type State32 = PureState<f32>;
pub type Matrix32 = CMat<f32>;
pub type Vector32 = CVec<f32>;
