//! Per-claim input symbol extraction: valence, epistemic depth, repetition,
//! recency, speaker prior, and source credibility.
//!
//! Everything here is a deliberately simple surface heuristic; the constants
//! live in [`FeatureConfig`] and the lexicon/credibility tables are shipped
//! as editable data files.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Claim, Dataset, SpeakerHistory};

/// Extracted inference inputs for one claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimFeatures {
    /// Emotional valence in [0, 1].
    pub valence: f64,
    /// Attribution nesting proxy, capped at 2.
    pub depth: u8,
    /// Repetition count proxy.
    pub repetition: u32,
    /// Recency in [0, 1]; 0 unless a sidecar provides it.
    pub recency: f64,
    /// Speaker prior probability that the claim is true.
    pub prior_true: f64,
    /// Source credibility in [0, 1].
    pub credibility: f64,
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("bad lexicon line {line}: {reason}")]
    BadLexiconLine { line: usize, reason: String },
    #[error("bad credibility line {line}: {reason}")]
    BadCredibilityLine { line: usize, reason: String },
    #[error("marker list is empty")]
    EmptyMarkers,
}

/// Weighted term list for the valence heuristic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValenceLexicon {
    terms: Vec<(String, f64)>,
}

impl ValenceLexicon {
    /// The bundled 23-term default.
    pub fn shipped_default() -> ValenceLexicon {
        Self::from_tsv(include_str!("../data/valence_lexicon.tsv"))
            .expect("bundled lexicon is valid")
    }

    /// Parse `term<TAB>weight` lines; `#` comments and blank lines skipped.
    pub fn from_tsv(text: &str) -> Result<ValenceLexicon, FeatureError> {
        let mut terms = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let term = parts.next().unwrap_or("").trim().to_lowercase();
            let weight: f64 = parts
                .next()
                .unwrap_or("1.0")
                .trim()
                .parse()
                .map_err(|e| FeatureError::BadLexiconLine {
                    line: idx + 1,
                    reason: format!("{e}"),
                })?;
            if term.is_empty() || !(weight > 0.0 && weight <= 1.0) {
                return Err(FeatureError::BadLexiconLine {
                    line: idx + 1,
                    reason: "term empty or weight outside (0, 1]".to_string(),
                });
            }
            terms.push((term, weight));
        }
        if terms.is_empty() {
            return Err(FeatureError::EmptyLexicon);
        }
        Ok(ValenceLexicon { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.terms.iter().map(|(t, w)| (t.as_str(), *w))
    }
}

/// Domain-to-gamma lookup; missing domains resolve to `default_gamma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CredibilityTable {
    entries: HashMap<String, f64>,
    pub default_gamma: f64,
}

impl CredibilityTable {
    pub fn shipped_default() -> CredibilityTable {
        Self::from_tsv(include_str!("../data/credibility.tsv"), 0.5)
            .expect("bundled credibility table is valid")
    }

    pub fn from_tsv(text: &str, default_gamma: f64) -> Result<CredibilityTable, FeatureError> {
        let mut entries = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let domain = parts.next().unwrap_or("").trim().to_lowercase();
            let gamma: f64 = parts
                .next()
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| FeatureError::BadCredibilityLine {
                    line: idx + 1,
                    reason: format!("{e}"),
                })?;
            if domain.is_empty() || !(0.0..=1.0).contains(&gamma) {
                return Err(FeatureError::BadCredibilityLine {
                    line: idx + 1,
                    reason: "domain empty or gamma outside [0, 1]".to_string(),
                });
            }
            entries.insert(domain, gamma);
        }
        Ok(CredibilityTable {
            entries,
            default_gamma,
        })
    }

    /// Never fails: unknown domains get the default.
    pub fn lookup(&self, domain: Option<&str>) -> f64 {
        domain
            .and_then(|d| self.entries.get(&d.to_lowercase()))
            .copied()
            .unwrap_or(self.default_gamma)
    }
}

/// Default attribution markers for the depth heuristic.
pub const DEFAULT_MARKERS: [&str; 10] = [
    "says",
    "said",
    "claims",
    "claimed",
    "believes",
    "according to",
    "reports",
    "alleges",
    "everyone knows",
    "thinks",
];

/// Everything feature extraction needs; proxy constants are exposed here so
/// they can be overridden from the config file and recorded in run metadata.
#[derive(Debug, Clone)]
pub struct FeatureConfig {
    pub lexicon: ValenceLexicon,
    pub markers: Vec<String>,
    pub credibility: CredibilityTable,
    /// MultiFC inverse-length repetition constant.
    pub multifc_repetition_constant: f64,
    /// LIAR credibility proxy divisor: gamma = min(1, total_history / divisor).
    pub liar_gamma_divisor: f64,
    /// Optional per-claim recency overrides keyed by claim id.
    pub recency: HashMap<String, f64>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            lexicon: ValenceLexicon::shipped_default(),
            markers: DEFAULT_MARKERS.iter().map(|m| m.to_string()).collect(),
            credibility: CredibilityTable::shipped_default(),
            multifc_repetition_constant: 200.0,
            liar_gamma_divisor: 20.0,
            recency: HashMap::new(),
        }
    }
}

/// Lowercased alphanumeric tokens with a single trailing `s` stripped, so
/// marker forms like "believes" also match "believe" in claim text.
fn normalized_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let lower = t.to_lowercase();
            match lower.strip_suffix('s') {
                Some(stem) if !stem.is_empty() => stem.to_string(),
                _ => lower,
            }
        })
        .collect()
}

fn count_sequence(tokens: &[String], needle: &[String]) -> u32 {
    if needle.is_empty() || tokens.len() < needle.len() {
        return 0;
    }
    let mut count = 0;
    for start in 0..=(tokens.len() - needle.len()) {
        if tokens[start..start + needle.len()] == *needle {
            count += 1;
        }
    }
    count
}

/// Total attribution marker occurrences in `text`, uncapped.
pub fn marker_count(text: &str, markers: &[String]) -> u32 {
    let tokens = normalized_tokens(text);
    markers
        .iter()
        .map(|m| count_sequence(&tokens, &normalized_tokens(m)))
        .sum()
}

/// Epistemic depth proxy: marker occurrences capped at 2.
///
/// Case-insensitive and word-boundary matched; empty text gives 0.
pub fn epistemic_depth(text: &str, markers: &[String]) -> Result<u8, FeatureError> {
    if markers.is_empty() {
        return Err(FeatureError::EmptyMarkers);
    }
    Ok(marker_count(text, markers).min(2) as u8)
}

/// Lexicon valence: min(1, sum of matched term weights / 2). Each lexicon
/// term counts once no matter how often it occurs.
pub fn valence(text: &str, lexicon: &ValenceLexicon) -> f64 {
    let tokens: std::collections::HashSet<String> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect();
    let total: f64 = lexicon
        .terms()
        .filter(|(t, _)| tokens.contains(*t))
        .map(|(_, w)| w)
        .sum();
    (total / 2.0).min(1.0)
}

/// Repetition proxy. LIAR: sum of false-leaning history counts. MultiFC:
/// inverse claim length, max(0, round(c / words) - 1).
pub fn repetition(claim: &Claim, cfg: &FeatureConfig) -> u32 {
    match claim.dataset {
        Dataset::Liar => claim.history.map(|h| h.false_leaning()).unwrap_or(0),
        Dataset::MultiFc => {
            let words = claim.text.split_whitespace().count().max(1) as f64;
            let ratio = (cfg.multifc_repetition_constant / words).round() - 1.0;
            ratio.max(0.0) as u32
        }
    }
}

/// Laplace-smoothed empirical accuracy from history counts; 0.5 without
/// history. Smoothing keeps the prior strictly inside (0, 1) so the
/// compression loss stays finite.
pub fn speaker_prior(history: Option<&SpeakerHistory>) -> f64 {
    match history {
        Some(h) => {
            let total = f64::from(h.total());
            (f64::from(h.true_leaning()) + 1.0) / (total + 2.0)
        }
        None => 0.5,
    }
}

/// Source credibility gamma. MultiFC: table lookup by domain. LIAR: history
/// volume proxy min(1, total / divisor), since more history means a more
/// informative prior.
pub fn source_credibility(claim: &Claim, cfg: &FeatureConfig) -> f64 {
    match claim.dataset {
        Dataset::MultiFc => cfg.credibility.lookup(claim.domain.as_deref()),
        Dataset::Liar => {
            let total = f64::from(claim.history.map(|h| h.total()).unwrap_or(0));
            (total / cfg.liar_gamma_divisor).min(1.0)
        }
    }
}

/// Extract all six input symbols for a claim.
pub fn extract(claim: &Claim, cfg: &FeatureConfig) -> ClaimFeatures {
    ClaimFeatures {
        valence: valence(&claim.text, &cfg.lexicon),
        depth: epistemic_depth(&claim.text, &cfg.markers).unwrap_or(0),
        repetition: repetition(claim, cfg),
        recency: cfg.recency.get(&claim.id).copied().unwrap_or(0.0).clamp(0.0, 1.0),
        prior_true: speaker_prior(claim.history.as_ref()),
        credibility: source_credibility(claim, cfg),
    }
}
