//! Deterministic offline grounding client.
//!
//! Every output is derived from a stable hash of (operation, input text,
//! seed). Salience ratings mix the lexicon valence of the claim with hash
//! noise, so the stub intentionally embeds a positive correlation between
//! its availability weights and lexical valence. Recall items come from a
//! bundled synthetic corpus.

use sha2::{Digest, Sha256};

use crate::features::{valence, ValenceLexicon};
use crate::inference::{RecallItem, Veracity};

use super::{GroundingClient, GroundingError, SalienceProfile, Schema};

/// Bundled synthetic recall corpus: (text, veracity). Falsehood-flavoured
/// items carry lexicon terms so their availability weights vary.
const STUB_CORPUS: [(&str, bool); 24] = [
    ("A shocking scandal about vaccine trials was exposed last week", false),
    ("The moon landing footage was staged in a studio", false),
    ("Drinking bleach cures seasonal flu according to one blog", false),
    ("Immigrants caused the outrageous crime wave in the capital", false),
    ("A secret lab created the virus as a bioweapon", false),
    ("The election machines flipped millions of votes", false),
    ("Cell towers spread illness through invisible radiation", false),
    ("A celebrity endorsed a miracle weight loss pill scam", false),
    ("The government hides proof of alien visitors", false),
    ("Wind turbines cause cancer in nearby towns", false),
    ("Chemtrails control the population's mood", false),
    ("A fabricated quote spread fear about the new tax plan", false),
    ("Unemployment fell for the third consecutive quarter", true),
    ("The city council approved a new public transit line", true),
    ("Researchers published a peer reviewed study on sleep", true),
    ("The national census begins next spring", true),
    ("A bridge renovation finished two months ahead of schedule", true),
    ("The central bank held interest rates steady", true),
    ("Local schools extended the lunch program to weekends", true),
    ("The museum opened a new wing for modern art", true),
    ("Scientists mapped another stretch of the ocean floor", true),
    ("The drought eased after steady autumn rain", true),
    ("Exports of grain rose modestly last year", true),
    ("The library digitized its historical newspaper archive", true),
];

/// Offline client with hash-derived outputs; same inputs and seed always
/// produce the same values.
pub struct StubClient {
    seed: u64,
    lexicon: ValenceLexicon,
}

impl StubClient {
    pub fn new(seed: u64) -> StubClient {
        StubClient {
            seed,
            lexicon: ValenceLexicon::shipped_default(),
        }
    }

    /// Uniform value in [0, 1) from a stable hash of the given parts.
    fn unit(&self, op: &str, text: &str, salt: u64) -> f64 {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update([0u8]);
        hasher.update(op.as_bytes());
        hasher.update([0u8]);
        hasher.update(text.as_bytes());
        hasher.update([0u8]);
        hasher.update(salt.to_le_bytes());
        let digest = hasher.finalize();
        let raw = u64::from_le_bytes(digest[..8].try_into().unwrap());
        (raw >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl GroundingClient for StubClient {
    fn rate_salience(&self, claim_text: &str) -> Result<SalienceProfile, GroundingError> {
        let v = valence(claim_text, &self.lexicon);
        let profile = SalienceProfile {
            emotional_intensity: (0.7 * v + 0.3 * self.unit("salience", claim_text, 0)).clamp(0.0, 1.0),
            novelty: (0.2 + 0.6 * self.unit("salience", claim_text, 1)).clamp(0.0, 1.0),
            memorability: (0.5 * v + 0.5 * self.unit("salience", claim_text, 2)).clamp(0.0, 1.0),
            sharability: (0.6 * v + 0.4 * self.unit("salience", claim_text, 3)).clamp(0.0, 1.0),
        };
        profile.validate()?;
        Ok(profile)
    }

    fn make_schema(&self, source: &str, topic: &str) -> Result<Schema, GroundingError> {
        let key = format!("{source}\u{1f}{topic}");
        let schema = Schema {
            text: format!(
                "Claims from {} about {} tend to need independent verification.",
                if source.is_empty() { "unnamed sources" } else { source },
                if topic.is_empty() { "general topics" } else { topic },
            ),
            p_true: 0.3 + 0.4 * self.unit("schema", &key, 0),
            confidence: 0.3 + 0.6 * self.unit("schema", &key, 1),
        };
        schema.validate()?;
        Ok(schema)
    }

    fn simulate_recall(&self, claim_text: &str, n: usize) -> Result<Vec<RecallItem>, GroundingError> {
        let items = (0..n)
            .map(|i| {
                let pick = (self.unit("recall", claim_text, i as u64)
                    * STUB_CORPUS.len() as f64) as usize;
                let (text, truthy) = STUB_CORPUS[pick.min(STUB_CORPUS.len() - 1)];
                let v = valence(text, &self.lexicon);
                RecallItem {
                    text: text.to_string(),
                    veracity: if truthy { Veracity::True } else { Veracity::False },
                    phi: 1.0 + 2.0 * v + 2.0 * self.unit("recall-phi", text, 0),
                }
            })
            .collect();
        Ok(items)
    }

    fn plausibility(&self, claim_text: &str) -> Result<f64, GroundingError> {
        let v = valence(claim_text, &self.lexicon);
        Ok((0.55 - 0.2 * v + 0.2 * (self.unit("plausibility", claim_text, 0) - 0.5)).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::phi_from_salience;

    #[test]
    fn same_claim_same_seed_is_deterministic() {
        let a = StubClient::new(7);
        let b = StubClient::new(7);
        let claim = "A shocking scandal engulfed the ministry";
        assert_eq!(a.rate_salience(claim).unwrap(), b.rate_salience(claim).unwrap());
        assert_eq!(a.plausibility(claim).unwrap(), b.plausibility(claim).unwrap());
        assert_eq!(
            a.simulate_recall(claim, 5).unwrap(),
            b.simulate_recall(claim, 5).unwrap()
        );
        let c = StubClient::new(8);
        assert_ne!(a.rate_salience(claim).unwrap(), c.rate_salience(claim).unwrap());
    }

    #[test]
    fn outputs_stay_in_declared_ranges() {
        let client = StubClient::new(3);
        for text in ["plain words", "outrage fraud scandal crisis", ""] {
            let s = client.rate_salience(text).unwrap();
            s.validate().unwrap();
            let phi = phi_from_salience(&s);
            assert!((1.0..=5.0).contains(&phi));
            let p = client.plausibility(text).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
        let schema = client.make_schema("a blog", "economy").unwrap();
        schema.validate().unwrap();
    }

    #[test]
    fn recall_returns_requested_cardinality_with_labels() {
        let client = StubClient::new(11);
        let items = client.simulate_recall("some claim", 3).unwrap();
        assert_eq!(items.len(), 3);
        for item in &items {
            assert!(item.phi >= 1.0);
            assert!(!item.text.is_empty());
        }
    }

    #[test]
    fn salience_tracks_lexical_valence() {
        let client = StubClient::new(1);
        let calm = client.rate_salience("the committee met on tuesday").unwrap();
        let spicy = client
            .rate_salience("shocking outrage fraud scandal crisis disaster")
            .unwrap();
        assert!(phi_from_salience(&spicy) > phi_from_salience(&calm));
    }
}
