//! Collapsed latent position cluster model for binary networks.
//!
//! Actors have latent positions drawn from a finite mixture of spherical
//! Gaussians, and tie probabilities fall off with latent distance through a
//! logit link. The mixture weights, means and precisions are integrated out
//! analytically, leaving a posterior over positions `Z`, the intercept
//! `beta`, the allocation vector `K` and the number of components `G`.
//!
//! - [`model`]: log-likelihood and the collapsed posterior terms.
//! - [`sampler`]: Metropolis-within-Gibbs sampler with trans-model moves.
//! - [`postprocess`]: Procrustes alignment, label relabelling and summaries.
//! - [`bic`]: two-stage BIC approximation used as a baseline.
//! - [`synth`]: networks simulated from the generative model.
//! - [`io`]: network and draw file formats.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

pub mod bic;
pub mod error;
pub mod hyper;
pub mod io;
pub mod model;
pub mod network;
pub mod positions;
pub mod postprocess;
pub mod sampler;
pub mod scalar;
pub mod special;
pub mod state;
pub mod synth;

pub use error::{Error, Result};
pub use hyper::Hyperparams;
pub use model::ClusterStats;
pub use network::Network;
pub use positions::Positions;
pub use sampler::{ChainOutput, DrawRecord, Init, MoveCounters, RunConfig, Tally};
pub use scalar::Real;
pub use state::ChainState;

pub type Hyperparams64 = Hyperparams<f64>;
pub type Positions64 = Positions<f64>;
pub type ChainState64 = ChainState<f64>;
pub type ClusterStats64 = ClusterStats<f64>;
pub type DrawRecord64 = DrawRecord<f64>;
pub type RunConfig64 = RunConfig<f64>;
pub type ChainOutput64 = ChainOutput<f64>;
