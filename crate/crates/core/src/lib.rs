//! Transmission success probability and expected delay of safety messages
//! over a three-hop wireless chain: pedestrian to base station, vehicle to
//! base station, and base station to cloud.
//!
//! Each hop is a disk with uniformly placed co-channel transmitters,
//! exponential power fading and power-law path loss. The success probability
//! `Pr(SINR >= theta)` is computed analytically by inverting the Laplace
//! transform of the normalised interference-plus-noise variable
//! ([`linkmodel`], [`inversion`]) and checked against Monte Carlo oracles
//! ([`montecarlo`]). [`delay`] turns hop probabilities into expected ARQ
//! delays and [`cli`] drives threshold sweeps that write CSV.

pub mod cli;
pub mod delay;
pub mod geometry;
pub mod inversion;
pub mod linkmodel;
pub mod montecarlo;
pub mod quadrature;

pub use delay::{end_to_end, ChainResult, DelayError, DelayParams};
pub use geometry::{DiskRegion, Distance};
pub use inversion::{euler_params_for_digits, invert_cdf, EulerParams, TransformHandle};
pub use linkmodel::{InterferenceMode, LinkTier, TierModel};
pub use montecarlo::{McEstimate, SpatialParams};
