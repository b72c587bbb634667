//! Experiment harness: reproducible pipelines that noise data forward,
//! denoise it back, estimate KL divergences along the way, and evaluate the
//! composite total-variation bound, writing CSV tables and SVG plots.

pub mod config;

pub use config::{DataSpec, ExperimentConfig, PerturbationKind};
