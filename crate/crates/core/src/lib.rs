//! Numerics for the driven Harper model: classical phase-space transport,
//! quantum wave-packet propagation, one-period (Floquet) operators and the
//! static Aubry-André chain.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classical;
pub mod error;
pub mod floquet;
pub mod params;
pub mod quantum;
pub mod static_harper;
pub mod stats;
mod stepping;

pub use error::{Error, Result};
pub use params::{
    derive_params, frequency_split, golden_beta, BetaClass, DerivedParams, ModelParams,
};
