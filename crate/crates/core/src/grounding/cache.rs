//! Persistent response cache: JSON-lines of (key, request, raw response,
//! parsed value). Hits bypass the client entirely; writes are append-only
//! within a run and serialized behind a mutex.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::inference::RecallItem;

use super::{GroundingClient, GroundingError, SalienceProfile, Schema};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub operation: String,
    pub request: String,
    pub raw_response: String,
    pub parsed: serde_json::Value,
    pub timestamp: u64,
}

/// Cache key: hash of the operation name and the canonicalized request text,
/// so template edits invalidate entries naturally.
pub fn cache_key(operation: &str, request: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(operation.as_bytes());
    hasher.update([0x0a]);
    hasher.update(request.as_bytes());
    format!("{:x}", hasher.finalize())
}

struct CacheState {
    entries: HashMap<String, CacheEntry>,
    file: File,
}

pub struct ResponseCache {
    path: PathBuf,
    state: Mutex<CacheState>,
}

impl ResponseCache {
    /// Open (creating if needed) a cache file and load its entries.
    pub fn open(path: &Path) -> Result<ResponseCache, GroundingError> {
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(
                File::open(path).map_err(|e| GroundingError::Cache(e.to_string()))?,
            );
            for line in reader.lines() {
                let line = line.map_err(|e| GroundingError::Cache(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(&line)
                    .map_err(|e| GroundingError::Cache(format!("bad cache line: {e}")))?;
                entries.insert(entry.key.clone(), entry);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GroundingError::Cache(e.to_string()))?;
        Ok(ResponseCache {
            path: path.to_path_buf(),
            state: Mutex::new(CacheState { entries, file }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, operation: &str, request: &str) -> Option<serde_json::Value> {
        let key = cache_key(operation, request);
        self.state
            .lock()
            .unwrap()
            .entries
            .get(&key)
            .map(|e| e.parsed.clone())
    }

    pub fn put(
        &self,
        operation: &str,
        request: &str,
        raw_response: &str,
        parsed: serde_json::Value,
    ) -> Result<(), GroundingError> {
        let entry = CacheEntry {
            key: cache_key(operation, request),
            operation: operation.to_string(),
            request: request.to_string(),
            raw_response: raw_response.to_string(),
            parsed,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mut state = self.state.lock().unwrap();
        let line =
            serde_json::to_string(&entry).map_err(|e| GroundingError::Cache(e.to_string()))?;
        writeln!(state.file, "{line}").map_err(|e| GroundingError::Cache(e.to_string()))?;
        state.entries.insert(entry.key.clone(), entry);
        Ok(())
    }
}

fn reparse<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
    op: &str,
) -> Result<T, GroundingError> {
    serde_json::from_value(value.clone()).map_err(|e| GroundingError::MalformedResponse {
        reason: format!("cached {op} value does not deserialize: {e}"),
        raw: value.to_string(),
    })
}

/// Write-through cache wrapper for any grounding client. The request key is
/// the operation name plus its canonical input rendering.
pub struct CachedClient<'a> {
    inner: &'a dyn GroundingClient,
    cache: &'a ResponseCache,
}

impl<'a> CachedClient<'a> {
    pub fn new(inner: &'a dyn GroundingClient, cache: &'a ResponseCache) -> CachedClient<'a> {
        CachedClient { inner, cache }
    }
}

impl GroundingClient for CachedClient<'_> {
    fn rate_salience(&self, claim_text: &str) -> Result<SalienceProfile, GroundingError> {
        if let Some(v) = self.cache.get("salience", claim_text) {
            let profile: SalienceProfile = reparse(v, "salience")?;
            profile.validate()?;
            return Ok(profile);
        }
        let profile = self.inner.rate_salience(claim_text)?;
        let value = serde_json::to_value(&profile).unwrap();
        self.cache.put("salience", claim_text, &value.to_string(), value.clone())?;
        Ok(profile)
    }

    fn make_schema(&self, source: &str, topic: &str) -> Result<Schema, GroundingError> {
        let request = format!("{source}\u{1f}{topic}");
        if let Some(v) = self.cache.get("schema", &request) {
            let schema: Schema = reparse(v, "schema")?;
            schema.validate()?;
            return Ok(schema);
        }
        let schema = self.inner.make_schema(source, topic)?;
        let value = serde_json::to_value(&schema).unwrap();
        self.cache.put("schema", &request, &value.to_string(), value.clone())?;
        Ok(schema)
    }

    fn simulate_recall(&self, claim_text: &str, n: usize) -> Result<Vec<RecallItem>, GroundingError> {
        let request = format!("{claim_text}\u{1f}{n}");
        if let Some(v) = self.cache.get("recall", &request) {
            let items: Vec<RecallItem> = reparse(v, "recall")?;
            if items.len() != n {
                return Err(GroundingError::MalformedResponse {
                    reason: format!("expected {n} recall items, cached {}", items.len()),
                    raw: request,
                });
            }
            return Ok(items);
        }
        let items = self.inner.simulate_recall(claim_text, n)?;
        let value = serde_json::to_value(&items).unwrap();
        self.cache.put("recall", &request, &value.to_string(), value.clone())?;
        Ok(items)
    }

    fn plausibility(&self, claim_text: &str) -> Result<f64, GroundingError> {
        if let Some(v) = self.cache.get("plausibility", claim_text) {
            return v.as_f64().ok_or_else(|| GroundingError::MalformedResponse {
                reason: "cached plausibility is not a number".to_string(),
                raw: v.to_string(),
            });
        }
        let p = self.inner.plausibility(claim_text)?;
        self.cache.put("plausibility", claim_text, &p.to_string(), serde_json::json!(p))?;
        Ok(p)
    }
}
