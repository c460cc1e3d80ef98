//! Certified Calderón–Zygmund and frame-operator bounds for wavelet
//! analyzer/synthesizer pairs given in the frequency domain.
//!
//! The pipeline: build [`funcexpr::FrequencyFunction`]s for the synthesizer,
//! analyzer and a perfect-reconstruction reference pair; compute the
//! frequency-domain norm quantities σ₁–σ₃, τ₁–τ₃ ([`czconst`]); turn them into
//! kernel constants C₁–C₃; combine with an L² deviation bound and the Hardy
//! space constants ([`hardy`]) into N₁, N∞ and M₁, M∞; and decide
//! bijectivity of the frame operator on H¹, Lᵖ and BMO ([`certify`]).

pub mod certify;
pub mod cli;
pub mod czconst;
pub mod error;
pub mod funcexpr;
pub mod hardy;
pub mod jets;
pub mod kernellab;
pub mod mexhat;
pub mod quad;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use funcexpr::{Expr, FrequencyFunction};
pub use jets::Jet3;
pub use quad::BoundWithError;
