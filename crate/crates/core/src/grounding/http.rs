//! Provider-agnostic HTTP grounding client.
//!
//! Each operation renders its prompt template, checks the response cache,
//! and on a miss sends one POST to the configured endpoint as
//! `{"model": <model>, "prompt": <rendered>}`. The endpoint must reply with
//! `{"text": "<model output>"}` where the output is the strict JSON the
//! template asks for. Out-of-range or miscounted values are rejected, never
//! repaired.

use std::time::Duration;

use serde::Deserialize;

use crate::inference::{RecallItem, Veracity};

use super::cache::ResponseCache;
use super::{GroundingClient, GroundingError, SalienceProfile, Schema};

/// Prompt templates with named placeholders {claim}, {source}, {topic}, {n}.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    pub salience: String,
    pub schema: String,
    pub recall: String,
    pub plausibility: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            salience: include_str!("../../data/templates/salience.txt").to_string(),
            schema: include_str!("../../data/templates/schema.txt").to_string(),
            recall: include_str!("../../data/templates/recall.txt").to_string(),
            plausibility: include_str!("../../data/templates/plausibility.txt").to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer credential, if any.
    pub api_key_env: Option<String>,
    pub templates: PromptTemplates,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub timeout_ms: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: None,
            templates: PromptTemplates::default(),
            max_retries: 3,
            backoff_ms: 250,
            timeout_ms: 30_000,
        }
    }
}

fn render(template: &str, pairs: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in pairs {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

#[derive(Deserialize)]
struct Envelope {
    text: String,
}

pub struct HttpClient {
    cfg: HttpConfig,
    cache: Option<ResponseCache>,
    http: reqwest::blocking::Client,
    api_key: Option<String>,
}

impl HttpClient {
    pub fn new(cfg: HttpConfig, cache: Option<ResponseCache>) -> Result<HttpClient, GroundingError> {
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(
                std::env::var(var).map_err(|_| GroundingError::MissingCredential(var.clone()))?,
            ),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| GroundingError::Transport(e.to_string()))?;
        Ok(HttpClient { cfg, cache, http, api_key })
    }

    /// One cached round trip: returns the model's text output for a prompt.
    fn complete(&self, operation: &str, prompt: &str) -> Result<String, GroundingError> {
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(operation, prompt) {
                return hit
                    .as_str()
                    .map(|s| s.to_string())
                    .ok_or_else(|| GroundingError::MalformedResponse {
                        reason: "cached completion is not a string".to_string(),
                        raw: hit.to_string(),
                    });
            }
        }

        let body = serde_json::json!({ "model": self.cfg.model, "prompt": prompt });
        let mut attempt = 0u32;
        let text = loop {
            attempt += 1;
            let mut req = self.http.post(&self.cfg.endpoint).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let envelope: Envelope =
                            resp.json().map_err(|e| GroundingError::MalformedResponse {
                                reason: format!("response envelope is not {{\"text\": ...}}: {e}"),
                                raw: String::new(),
                            })?;
                        break envelope.text;
                    }
                    let retryable = status.as_u16() == 429 || status.is_server_error();
                    if !retryable || attempt > self.cfg.max_retries {
                        if status.as_u16() == 429 {
                            return Err(GroundingError::RateLimited { attempts: attempt });
                        }
                        return Err(GroundingError::Transport(format!(
                            "endpoint returned {status}"
                        )));
                    }
                }
                Err(e) => {
                    if attempt > self.cfg.max_retries {
                        return Err(GroundingError::Transport(e.to_string()));
                    }
                }
            }
            std::thread::sleep(Duration::from_millis(self.cfg.backoff_ms * u64::from(attempt)));
        };

        if let Some(cache) = &self.cache {
            cache.put(operation, prompt, &text, serde_json::json!(text.clone()))?;
        }
        Ok(text)
    }
}

fn parse_strict<T: serde::de::DeserializeOwned>(raw: &str, what: &str) -> Result<T, GroundingError> {
    serde_json::from_str(raw.trim()).map_err(|e| GroundingError::MalformedResponse {
        reason: format!("{what}: {e}"),
        raw: raw.to_string(),
    })
}

#[derive(Deserialize)]
struct PlausibilityPayload {
    plausibility: f64,
}

#[derive(Deserialize)]
struct RecallPayload {
    text: String,
    veracity: String,
    phi: f64,
}

impl GroundingClient for HttpClient {
    fn rate_salience(&self, claim_text: &str) -> Result<SalienceProfile, GroundingError> {
        let prompt = render(&self.cfg.templates.salience, &[("claim", claim_text)]);
        let raw = self.complete("salience", &prompt)?;
        let profile: SalienceProfile = parse_strict(&raw, "salience payload")?;
        profile.validate()?;
        Ok(profile)
    }

    fn make_schema(&self, source: &str, topic: &str) -> Result<Schema, GroundingError> {
        let prompt = render(
            &self.cfg.templates.schema,
            &[("source", source), ("topic", topic)],
        );
        let raw = self.complete("schema", &prompt)?;
        let schema: Schema = parse_strict(&raw, "schema payload")?;
        schema.validate()?;
        Ok(schema)
    }

    fn simulate_recall(&self, claim_text: &str, n: usize) -> Result<Vec<RecallItem>, GroundingError> {
        let n_str = n.to_string();
        let prompt = render(
            &self.cfg.templates.recall,
            &[("claim", claim_text), ("n", &n_str)],
        );
        let raw = self.complete("recall", &prompt)?;
        let payload: Vec<RecallPayload> = parse_strict(&raw, "recall payload")?;
        if payload.len() != n {
            return Err(GroundingError::MalformedResponse {
                reason: format!("expected {n} recall items, got {}", payload.len()),
                raw,
            });
        }
        payload
            .into_iter()
            .map(|item| {
                let veracity = match item.veracity.to_lowercase().as_str() {
                    "true" => Veracity::True,
                    "false" => Veracity::False,
                    other => {
                        return Err(GroundingError::MalformedResponse {
                            reason: format!("veracity '{other}' is not true/false"),
                            raw: raw.clone(),
                        })
                    }
                };
                if !(item.phi >= 1.0 && item.phi.is_finite()) {
                    return Err(GroundingError::MalformedResponse {
                        reason: format!("phi = {} below 1", item.phi),
                        raw: raw.clone(),
                    });
                }
                Ok(RecallItem { text: item.text, veracity, phi: item.phi })
            })
            .collect()
    }

    fn plausibility(&self, claim_text: &str) -> Result<f64, GroundingError> {
        let prompt = render(&self.cfg.templates.plausibility, &[("claim", claim_text)]);
        let raw = self.complete("plausibility", &prompt)?;
        let payload: PlausibilityPayload = parse_strict(&raw, "plausibility payload")?;
        if !(0.0..=1.0).contains(&payload.plausibility) || !payload.plausibility.is_finite() {
            return Err(GroundingError::MalformedResponse {
                reason: format!("plausibility = {} outside [0, 1]", payload.plausibility),
                raw,
            });
        }
        Ok(payload.plausibility)
    }
}
