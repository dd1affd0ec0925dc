//! Bounded pragmatic listener: a resource-bounded Bayesian belief-updating
//! model over news claims, with a heterogeneous agent population, corpus
//! ingestion, an evaluation harness, and a pluggable generative-model
//! grounding layer.

pub mod eval;
pub mod features;
pub mod folds;
pub mod grounding;
pub mod inference;
pub mod ingest;
pub mod logistic;
pub mod metrics;
pub mod population;
pub mod synth;
