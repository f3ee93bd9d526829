//! Ability discovery: ranking users by latent ability from multiple-choice
//! responses.
//!
//! The central method, HITSnDIFFs, power-iterates the difference-space
//! update operator `S U T` where `U = C^row (C^col)ᵀ` and recovers user scores
//! by cumulative summation. When the responses admit a consecutive-ones row
//! order, the recovered ranking is that order.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod c1p;
pub mod error;
pub mod eval;
pub mod io;
pub mod irt;
pub mod matrix;
pub mod rankers;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{Response, ResponseMatrix};

pub use rankers::{AnswerKey, Method, RankConfig, ScoreVector};
pub use spectral::{PowerConfig, SpectralResult};
