//! Detection of which known speakers uttered which known keywords in a
//! multi-speaker mixture.
//!
//! Each (speaker, keyword) pair has a density model over MFCC frames. A
//! mixture is explained by a speaker mass `beta` and a per-speaker keyword
//! mass `delta`, estimated by EM with the density models held fixed. The
//! joint matrix `beta_k * delta_kl` is then decoded into at most one keyword
//! per active speaker.
//!
//! Modules follow the processing chain: [`features`] turns audio into
//! frames, [`models`] fits the per-cell mixture densities, [`lvem`] runs the
//! latent-variable EM and decoding, [`mixer`] builds evaluation mixtures and
//! synthetic corpora, and [`eval`] scores and tabulates detections.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod lvem;
pub mod math;
pub mod mixer;
pub mod models;

pub use error::{Error, Result};
