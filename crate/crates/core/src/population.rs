//! The canonical nine-agent population, per-claim summary statistics, and
//! predicted disagreement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::ClaimFeatures;
use crate::inference::{
    availability_weight, derive_seed, feature_posterior_excluding, AgentProfile, ChainConfig,
    InferenceError, PosteriorResult, RecallItem, Veracity,
};
use crate::ingest::Claim;

#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("belief list is empty")]
    EmptyBeliefs,
    #[error("expected {expected} posterior results, got {actual}")]
    WrongCount { expected: usize, actual: usize },
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// Number of canonical agents.
pub const POPULATION_SIZE: usize = 9;

/// The 3x3 grid of canonical agents: k in {0, 1, 2} crossed with
/// (beta, N) in {(0.2, 5), (1, 25), (50, 500)}. Spans the maximally bounded
/// agent (0, 0.2, 5) through the near-rational baseline (2, 50, 500), with
/// the reference configuration (1, 1, 25) at the centre.
pub fn canonical_population(seed: u64) -> Vec<AgentProfile> {
    let grid_bn = [(0.2, 5usize), (1.0, 25), (50.0, 500)];
    let mut agents = Vec::with_capacity(POPULATION_SIZE);
    for k in 0u8..=2 {
        for (beta, n) in grid_bn {
            let idx = agents.len() as u32;
            agents.push(AgentProfile::new(k, beta, n).with_seed(derive_seed(seed, "agent", idx)));
        }
    }
    agents
}

/// Predicted disagreement: population variance of beliefs (divide by M).
pub fn disagreement(beliefs: &[f64]) -> Result<f64, PopulationError> {
    if beliefs.is_empty() {
        return Err(PopulationError::EmptyBeliefs);
    }
    let m = beliefs.len() as f64;
    let mean = beliefs.iter().sum::<f64>() / m;
    Ok(beliefs.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / m)
}

/// The nine population-level statistics for one claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub mean_belief: f64,
    pub belief_variance: f64,
    pub min_belief: f64,
    pub max_belief: f64,
    pub median_belief: f64,
    pub mean_susceptibility: f64,
    pub susceptibility_variance: f64,
    pub mean_compression_loss: f64,
    pub fraction_above_half: f64,
}

impl PopulationSummary {
    pub const COLUMNS: [&'static str; 9] = [
        "mean_belief",
        "belief_variance",
        "min_belief",
        "max_belief",
        "median_belief",
        "mean_susceptibility",
        "susceptibility_variance",
        "mean_compression_loss",
        "fraction_above_half",
    ];

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.mean_belief,
            self.belief_variance,
            self.min_belief,
            self.max_belief,
            self.median_belief,
            self.mean_susceptibility,
            self.susceptibility_variance,
            self.mean_compression_loss,
            self.fraction_above_half,
        ]
    }
}

fn population_variance(values: &[f64]) -> f64 {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m
}

/// Reduce the nine per-agent posteriors for one claim to the summary vector.
pub fn summarize(results: &[PosteriorResult]) -> Result<PopulationSummary, PopulationError> {
    if results.len() != POPULATION_SIZE {
        return Err(PopulationError::WrongCount {
            expected: POPULATION_SIZE,
            actual: results.len(),
        });
    }
    let beliefs: Vec<f64> = results.iter().map(|r| r.belief).collect();
    let suscept: Vec<f64> = results.iter().map(|r| r.susceptibility).collect();
    let losses: Vec<f64> = results.iter().map(|r| r.compression_loss).collect();

    let mut sorted = beliefs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(PopulationSummary {
        mean_belief: beliefs.iter().sum::<f64>() / 9.0,
        belief_variance: population_variance(&beliefs),
        min_belief: sorted[0],
        max_belief: sorted[8],
        median_belief: sorted[4],
        mean_susceptibility: suscept.iter().sum::<f64>() / 9.0,
        susceptibility_variance: population_variance(&suscept),
        mean_compression_loss: losses.iter().sum::<f64>() / 9.0,
        fraction_above_half: beliefs.iter().filter(|b| **b > 0.5).count() as f64 / 9.0,
    })
}

/// Per-claim output of a population run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimPopulation {
    pub claim_id: String,
    pub results: Vec<PosteriorResult>,
    pub summary: PopulationSummary,
    pub disagreement: f64,
}

/// Build the feature-mode recall corpus: every claim with a binary label
/// becomes a recall item carrying its ground-truth veracity and its
/// feature-derived availability weight. Returns the items plus, per input
/// claim, the index of its own entry (to exclude during sampling).
pub fn build_recall_corpus(
    claims: &[Claim],
    features: &[ClaimFeatures],
) -> (Vec<RecallItem>, Vec<Option<usize>>) {
    let mut corpus = Vec::new();
    let mut self_index = vec![None; claims.len()];
    for (i, (claim, f)) in claims.iter().zip(features).enumerate() {
        if let Some(binary) = claim.mapped.as_binary() {
            self_index[i] = Some(corpus.len());
            corpus.push(RecallItem {
                text: claim.text.clone(),
                veracity: if binary == 1 { Veracity::True } else { Veracity::False },
                phi: availability_weight(f.valence, f.repetition, f.recency),
            });
        }
    }
    (corpus, self_index)
}

/// Run a set of agents over every claim in feature mode.
///
/// Per-claim seeds are derived from (global seed, claim id, agent index) so
/// parallel and serial execution produce identical output. Claims are
/// processed in parallel; the result order matches the input order.
pub fn run_population(
    claims: &[Claim],
    features: &[ClaimFeatures],
    agents: &[AgentProfile],
    global_seed: u64,
    cfg: &ChainConfig,
) -> Result<Vec<ClaimPopulation>, PopulationError> {
    for agent in agents {
        agent.validate()?;
    }
    let (corpus, self_index) = build_recall_corpus(claims, features);

    let rows: Result<Vec<ClaimPopulation>, PopulationError> = claims
        .par_iter()
        .enumerate()
        .map(|(i, claim)| {
            let mut results = Vec::with_capacity(agents.len());
            for (agent_idx, agent) in agents.iter().enumerate() {
                let seeded = agent
                    .with_seed(derive_seed(global_seed, &claim.id, agent_idx as u32));
                let r = feature_posterior_excluding(
                    &features[i],
                    &seeded,
                    &corpus,
                    self_index[i],
                    cfg,
                )?;
                results.push(r);
            }
            let beliefs: Vec<f64> = results.iter().map(|r| r.belief).collect();
            let summary = if results.len() == POPULATION_SIZE {
                summarize(&results)?
            } else {
                // Single-agent runs still need a filled summary row.
                PopulationSummary {
                    mean_belief: beliefs.iter().sum::<f64>() / beliefs.len() as f64,
                    belief_variance: population_variance(&beliefs),
                    min_belief: beliefs.iter().cloned().fold(f64::INFINITY, f64::min),
                    max_belief: beliefs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    median_belief: beliefs[beliefs.len() / 2],
                    mean_susceptibility: results.iter().map(|r| r.susceptibility).sum::<f64>()
                        / beliefs.len() as f64,
                    susceptibility_variance: population_variance(
                        &results.iter().map(|r| r.susceptibility).collect::<Vec<_>>(),
                    ),
                    mean_compression_loss: results
                        .iter()
                        .map(|r| r.compression_loss)
                        .sum::<f64>()
                        / beliefs.len() as f64,
                    fraction_above_half: beliefs.iter().filter(|b| **b > 0.5).count() as f64
                        / beliefs.len() as f64,
                }
            };
            Ok(ClaimPopulation {
                claim_id: claim.id.clone(),
                disagreement: disagreement(&beliefs)?,
                results,
                summary,
            })
        })
        .collect();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn canonical_grid_contains_named_profiles() {
        let pop = canonical_population(0);
        assert_eq!(pop.len(), 9);
        let has = |k: u8, beta: f64, n: usize| {
            pop.iter()
                .any(|a| a.k == k && (a.beta - beta).abs() < 1e-12 && a.sample_size == n)
        };
        assert!(has(0, 0.2, 5), "maximally-bounded endpoint missing");
        assert!(has(2, 50.0, 500), "near-rational endpoint missing");
        assert!(has(1, 1.0, 25), "centre configuration missing");
    }

    #[test]
    fn disagreement_examples() {
        assert!(disagreement(&[0.4, 0.4, 0.4]).unwrap().abs() < 1e-30);
        assert_relative_eq!(disagreement(&[0.0, 1.0]).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(
            disagreement(&[0.2, 0.4, 0.6]).unwrap(),
            0.08 / 3.0,
            epsilon = 1e-12
        );
        assert!(disagreement(&[]).is_err());
    }

    fn constant_results(belief: f64, loss: f64) -> Vec<PosteriorResult> {
        (0..9)
            .map(|_| PosteriorResult {
                belief,
                susceptibility: belief * (1.0 + loss),
                compression_loss: loss,
                effective_k: 0,
                depth_trace: vec![[1.0 - belief, belief]],
                speaker_likelihoods: [0.5, 0.5],
            })
            .collect()
    }

    #[test]
    fn summarize_constant_population() {
        let s = summarize(&constant_results(0.5, 0.0)).unwrap();
        assert_eq!(
            s.as_array(),
            [0.5, 0.0, 0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn summarize_counts_fraction_above_half() {
        let mut results = constant_results(0.1, 0.0);
        for r in results.iter_mut().take(5) {
            r.belief = 0.9;
        }
        let s = summarize(&results).unwrap();
        assert_relative_eq!(s.fraction_above_half, 5.0 / 9.0, epsilon = 1e-15);
        assert!(s.min_belief <= s.median_belief && s.median_belief <= s.max_belief);
    }

    #[test]
    fn summarize_rejects_wrong_count() {
        let err = summarize(&constant_results(0.5, 0.0)[..4]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('9') && msg.contains('4'), "{msg}");
    }

    #[test]
    fn summary_is_permutation_invariant() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut results = constant_results(0.3, 0.1);
        for (i, r) in results.iter_mut().enumerate() {
            r.belief = 0.1 + 0.08 * i as f64;
            r.susceptibility = r.belief * (1.0 + r.compression_loss);
        }
        let base = summarize(&results).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            results.shuffle(&mut rng);
            let s = summarize(&results).unwrap();
            for (a, b) in base.as_array().iter().zip(s.as_array()) {
                assert_relative_eq!(*a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bernoulli_disagreement_is_p_times_one_minus_p() {
        for ones in 0..=9usize {
            let beliefs: Vec<f64> = (0..9)
                .map(|i| if i < ones { 1.0 } else { 0.0 })
                .collect();
            let p = ones as f64 / 9.0;
            assert_relative_eq!(
                disagreement(&beliefs).unwrap(),
                p * (1.0 - p),
                epsilon = 1e-12
            );
            assert!(disagreement(&beliefs).unwrap() <= 0.25 + 1e-15);
        }
    }
}
