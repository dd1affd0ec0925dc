//! Pluggable generative-model grounding: salience rating, verbal schema
//! priors, simulated recall, and literal plausibility.
//!
//! Three client implementations share one trait so the inference chain never
//! changes structure when the backing is swapped: a deterministic offline
//! [`StubClient`], a provider-agnostic [`HttpClient`], and a
//! [`CachedClient`] wrapper that replays any client through a persistent
//! [`ResponseCache`].

mod cache;
mod http;
mod stub;

pub use cache::{CacheEntry, CachedClient, ResponseCache};
pub use http::{HttpClient, HttpConfig, PromptTemplates};
pub use stub::StubClient;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{compress_prior, CompressedPrior, RecallItem};

#[derive(Debug, Error)]
pub enum GroundingError {
    #[error("malformed response ({reason}); raw: {raw}")]
    MalformedResponse { reason: String, raw: String },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("cache i/o failure: {0}")]
    Cache(String),
    #[error("missing credential: environment variable {0} is not set")]
    MissingCredential(String),
}

/// Four-dimension salience rating of a claim, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SalienceProfile {
    pub emotional_intensity: f64,
    pub novelty: f64,
    pub memorability: f64,
    pub sharability: f64,
}

impl SalienceProfile {
    pub fn validate(&self) -> Result<(), GroundingError> {
        for (name, v) in [
            ("emotional_intensity", self.emotional_intensity),
            ("novelty", self.novelty),
            ("memorability", self.memorability),
            ("sharability", self.sharability),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(GroundingError::MalformedResponse {
                    reason: format!("{name} = {v} outside [0, 1]"),
                    raw: format!("{self:?}"),
                });
            }
        }
        Ok(())
    }
}

/// Verbal prototype for a source-topic pair: an inspectable realization of
/// the compression bottleneck.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub text: String,
    pub p_true: f64,
    pub confidence: f64,
}

impl Schema {
    pub fn validate(&self) -> Result<(), GroundingError> {
        if self.text.trim().is_empty() {
            return Err(GroundingError::MalformedResponse {
                reason: "schema text is empty".to_string(),
                raw: format!("{self:?}"),
            });
        }
        for (name, v) in [("p_true", self.p_true), ("confidence", self.confidence)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(GroundingError::MalformedResponse {
                    reason: format!("{name} = {v} outside [0, 1]"),
                    raw: format!("{self:?}"),
                });
            }
        }
        Ok(())
    }
}

/// A grounding backend. Every call returns a fully validated value or a
/// structured error, never a partial record.
pub trait GroundingClient: Sync {
    fn rate_salience(&self, claim_text: &str) -> Result<SalienceProfile, GroundingError>;
    fn make_schema(&self, source: &str, topic: &str) -> Result<Schema, GroundingError>;
    fn simulate_recall(&self, claim_text: &str, n: usize) -> Result<Vec<RecallItem>, GroundingError>;
    fn plausibility(&self, claim_text: &str) -> Result<f64, GroundingError>;
}

/// Availability weight from a salience profile: 1 + the four ratings, so the
/// range is [1, 5] and matches the feature-mode lower bound at all zeros.
pub fn phi_from_salience(s: &SalienceProfile) -> f64 {
    1.0 + s.emotional_intensity + s.novelty + s.memorability + s.sharability
}

/// Compressed prior from a verbal schema: the schema confidence scales the
/// effective compression weight, replacing the hand-crafted credibility
/// tables. Loss is measured against the schema's own truth estimate.
pub fn schema_prior(schema: &Schema, beta: f64) -> Result<CompressedPrior, GroundingError> {
    schema.validate()?;
    let beta_eff = beta * schema.confidence.max(0.01);
    compress_prior(schema.p_true, beta_eff, 1.0).map_err(|e| GroundingError::MalformedResponse {
        reason: e.to_string(),
        raw: format!("{schema:?}"),
    })
}
