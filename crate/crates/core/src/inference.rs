//! The bounded listener inference chain: compressed prior, depth-bounded
//! listener/speaker recursion, availability-adjusted speaker likelihoods,
//! posterior belief, and the susceptibility score.
//!
//! Likelihood pairs are ordered `[world = false, world = true]` throughout.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::ClaimFeatures;
use crate::grounding::{schema_prior, GroundingClient, GroundingError};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("agent parameter out of range: {0}")]
    BadAgent(String),
    #[error("both likelihoods are zero; listener input is degenerate")]
    DegenerateLikelihoods,
    #[error("recall corpus is empty")]
    EmptyRecallCorpus,
    #[error("grounded mode requires a grounding client")]
    MissingGrounding,
    #[error(transparent)]
    Grounding(#[from] GroundingError),
}

/// Speaker behaviour at the deception-aware recursion level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SpeakerType {
    Honest,
    Deceptive,
    /// Mixture with the given deception probability.
    General { deception_prob: f64 },
}

/// How the level-2 speaker type is chosen per claim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SpeakerPolicy {
    Fixed(SpeakerType),
    /// Default: deception probability tied to source credibility, pi = 1 - gamma.
    CredibilityLinked,
}

impl SpeakerPolicy {
    pub fn resolve(&self, credibility: f64) -> SpeakerType {
        match self {
            SpeakerPolicy::Fixed(t) => *t,
            SpeakerPolicy::CredibilityLinked => SpeakerType::General {
                deception_prob: (1.0 - credibility).clamp(0.0, 1.0),
            },
        }
    }
}

/// One bounded agent: recursion depth k, prior compression beta, availability
/// sample size N, plus the design parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub k: u8,
    pub beta: f64,
    pub sample_size: usize,
    pub alpha: f64,
    pub lambda_mix: f64,
    pub speaker_policy: SpeakerPolicy,
    pub apply_depth_cap: bool,
    pub seed: u64,
}

impl AgentProfile {
    /// Profile with design-parameter defaults: alpha 1, lambda 0.5,
    /// credibility-linked speaker, depth cap off.
    pub fn new(k: u8, beta: f64, sample_size: usize) -> AgentProfile {
        AgentProfile {
            k,
            beta,
            sample_size,
            alpha: 1.0,
            lambda_mix: 0.5,
            speaker_policy: SpeakerPolicy::CredibilityLinked,
            apply_depth_cap: false,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> AgentProfile {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.k > 2 {
            return Err(InferenceError::BadAgent(format!("k = {} > 2", self.k)));
        }
        if !(self.beta > 0.0) {
            return Err(InferenceError::NonPositiveBeta(self.beta));
        }
        if self.sample_size == 0 {
            return Err(InferenceError::BadAgent("sample_size = 0".to_string()));
        }
        if !(self.alpha > 0.0) {
            return Err(InferenceError::BadAgent(format!("alpha = {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.lambda_mix) {
            return Err(InferenceError::BadAgent(format!(
                "lambda_mix = {} outside [0, 1]",
                self.lambda_mix
            )));
        }
        if let SpeakerPolicy::Fixed(SpeakerType::General { deception_prob }) = self.speaker_policy {
            if !(0.0..=1.0).contains(&deception_prob) {
                return Err(InferenceError::BadAgent(format!(
                    "deception_prob = {deception_prob} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Compressed prior over the binary world plus the information lost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressedPrior {
    /// Compressed probability that the claim is true.
    pub p_true: f64,
    /// KL(P || compressed P) in nats.
    pub loss: f64,
}

impl CompressedPrior {
    pub fn as_pair(&self) -> [f64; 2] {
        [1.0 - self.p_true, self.p_true]
    }
}

/// Veracity tag on a recalled item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Veracity {
    False,
    True,
}

/// One item in the availability recall corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallItem {
    pub text: String,
    pub veracity: Veracity,
    /// Availability weight, >= 1 by construction.
    pub phi: f64,
}

/// Full output of one posterior evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorResult {
    pub belief: f64,
    pub susceptibility: f64,
    pub compression_loss: f64,
    pub effective_k: u8,
    /// Listener distribution `[p(false), p(true)]` per level, starting at the
    /// literal level.
    pub depth_trace: Vec<[f64; 2]>,
    /// The likelihood pair that fed the top-level listener.
    pub speaker_likelihoods: [f64; 2],
}

/// Chain-level constants shared by every agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Clamp band applied to literal plausibility.
    pub clamp_lo: f64,
    pub clamp_hi: f64,
    /// Feature-mode literal rule: base - slope * valence.
    pub literal_base: f64,
    pub literal_slope: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            clamp_lo: 0.05,
            clamp_hi: 0.95,
            literal_base: 0.55,
            literal_slope: 0.25,
        }
    }
}

/// Interpolate the raw prior toward uniform with weight beta / (beta + 1),
/// then toward agnosticism with source credibility gamma. With a binary
/// world the two components already sum to one, so no renormalization.
pub fn compress_prior(
    prior_true: f64,
    beta: f64,
    gamma: f64,
) -> Result<CompressedPrior, InferenceError> {
    if !(beta > 0.0) {
        return Err(InferenceError::NonPositiveBeta(beta));
    }
    let gamma = gamma.clamp(0.0, 1.0);
    let p = prior_true.clamp(0.0, 1.0);
    let w = beta / (beta + 1.0);
    let p_true = gamma * (w * p + (1.0 - w) * 0.5) + (1.0 - gamma) * 0.5;
    Ok(CompressedPrior {
        p_true,
        loss: kl_divergence_binary(p, p_true),
    })
}

/// KL(P || Q) over a binary variable, in nats, with the 0 ln 0 = 0 convention.
pub fn kl_divergence_binary(p_true: f64, q_true: f64) -> f64 {
    let term = |p: f64, q: f64| -> f64 {
        if p <= 0.0 {
            0.0
        } else {
            p * (p / q).ln()
        }
    };
    (term(p_true, q_true) + term(1.0 - p_true, 1.0 - q_true)).max(0.0)
}

/// Availability weight: 1 + valence + ln(1 + repetition) + recency.
pub fn availability_weight(valence: f64, repetition: u32, recency: f64) -> f64 {
    1.0 + valence + (1.0 + f64::from(repetition)).ln() + recency
}

/// Feature-mode literal plausibility of the true world, before the prior.
pub fn literal_plausibility_feature(valence: f64, cfg: &ChainConfig) -> f64 {
    (cfg.literal_base - cfg.literal_slope * valence).clamp(cfg.clamp_lo, cfg.clamp_hi)
}

/// Bayes step: likelihood pair times prior, normalized over the two worlds.
pub fn listener(
    likelihoods: [f64; 2],
    prior: &CompressedPrior,
) -> Result<[f64; 2], InferenceError> {
    let joint = [
        likelihoods[0] * (1.0 - prior.p_true),
        likelihoods[1] * prior.p_true,
    ];
    let z = joint[0] + joint[1];
    if !(z > 0.0) {
        return Err(InferenceError::DegenerateLikelihoods);
    }
    Ok([joint[0] / z, joint[1] / z])
}

/// Two-alternative softmax speaker over {utter, negate}. Returns the
/// likelihood pair (S(u | false), S(u | true)).
pub fn speaker(listener_true: f64, alpha: f64, speaker_type: &SpeakerType) -> [f64; 2] {
    let lt = listener_true.clamp(0.0, 1.0);
    let lf = 1.0 - lt;
    let (pt, pf) = (lt.powf(alpha), lf.powf(alpha));
    let z = pt + pf;
    // z > 0 unless lt is NaN; inputs are produced by listener() which
    // normalizes, so divide directly.
    let honest = [pf / z, pt / z];
    match speaker_type {
        SpeakerType::Honest => honest,
        SpeakerType::Deceptive => [honest[1], honest[0]],
        SpeakerType::General { deception_prob } => {
            let pi = deception_prob.clamp(0.0, 1.0);
            [
                (1.0 - pi) * honest[0] + pi * honest[1],
                (1.0 - pi) * honest[1] + pi * honest[0],
            ]
        }
    }
}

/// Draw `n` items with replacement, probability proportional to phi.
pub fn sample_recall<'a, R: Rng>(
    corpus: &'a [RecallItem],
    n: usize,
    rng: &mut R,
) -> Result<Vec<&'a RecallItem>, InferenceError> {
    if corpus.is_empty() {
        return Err(InferenceError::EmptyRecallCorpus);
    }
    let dist = WeightedIndex::new(corpus.iter().map(|it| it.phi.max(f64::MIN_POSITIVE)))
        .map_err(|_| InferenceError::EmptyRecallCorpus)?;
    Ok((0..n).map(|_| &corpus[dist.sample(rng)]).collect())
}

/// Like [`sample_recall`] but skips one corpus index via rejection, used to
/// keep the claim under evaluation out of its own recall sample.
fn sample_recall_excluding<'a, R: Rng>(
    corpus: &'a [RecallItem],
    exclude: Option<usize>,
    dist: &WeightedIndex<f64>,
    n: usize,
    rng: &mut R,
) -> Vec<&'a RecallItem> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let idx = dist.sample(rng);
        if Some(idx) == exclude {
            continue;
        }
        out.push(&corpus[idx]);
    }
    out
}

/// Salience-weighted recalled-veracity fractions over a sample:
/// (w(false), w(true)). Empty sample falls back to (0.5, 0.5).
pub fn recall_likelihood(sample: &[&RecallItem]) -> [f64; 2] {
    let mut mass = [0.0f64; 2];
    for item in sample {
        match item.veracity {
            Veracity::False => mass[0] += item.phi,
            Veracity::True => mass[1] += item.phi,
        }
    }
    let z = mass[0] + mass[1];
    if z <= 0.0 {
        [0.5, 0.5]
    } else {
        [mass[0] / z, mass[1] / z]
    }
}

/// Convex mixture of the base speaker likelihood with the recalled-veracity
/// fractions, componentwise.
pub fn availability_adjust(s_base: [f64; 2], w_recall: [f64; 2], lambda_mix: f64) -> [f64; 2] {
    let l = lambda_mix.clamp(0.0, 1.0);
    [
        (1.0 - l) * s_base[0] + l * w_recall[0],
        (1.0 - l) * s_base[1] + l * w_recall[1],
    ]
}

/// Susceptibility: posterior belief amplified by compression loss.
pub fn susceptibility(belief: f64, loss: f64) -> f64 {
    belief * (1.0 + loss)
}

/// Stable per-run seed derivation so parallel and serial runs agree.
pub fn derive_seed(global_seed: u64, claim_id: &str, agent_index: u32) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global_seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(claim_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(agent_index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Claim fields the grounding client needs.
#[derive(Debug, Clone, Copy)]
pub struct ClaimRef<'a> {
    pub id: &'a str,
    pub text: &'a str,
    pub source: &'a str,
    pub topic: &'a str,
}

/// Where the chain components come from.
pub enum InferenceMode<'a> {
    /// Heuristic features drive every component.
    Feature,
    /// Prior, literal plausibility and recall come from a grounding client.
    Grounded {
        client: &'a dyn GroundingClient,
        claim: ClaimRef<'a>,
    },
}

struct ChainInputs {
    prior: CompressedPrior,
    literal_true: f64,
    recall: Vec<RecallItem>,
}

fn resolve_inputs(
    features: &ClaimFeatures,
    agent: &AgentProfile,
    recall_corpus: &[RecallItem],
    mode: &InferenceMode<'_>,
    cfg: &ChainConfig,
) -> Result<(ChainInputs, Option<usize>), InferenceError> {
    match mode {
        InferenceMode::Feature => Ok((
            ChainInputs {
                prior: compress_prior(features.prior_true, agent.beta, features.credibility)?,
                literal_true: literal_plausibility_feature(features.valence, cfg),
                recall: recall_corpus.to_vec(),
            },
            None,
        )),
        InferenceMode::Grounded { client, claim } => {
            let schema = client.make_schema(claim.source, claim.topic)?;
            let prior = schema_prior(&schema, agent.beta)?;
            let literal_true = client
                .plausibility(claim.text)?
                .clamp(cfg.clamp_lo, cfg.clamp_hi);
            let recall = client.simulate_recall(claim.text, agent.sample_size)?;
            for item in &recall {
                debug_assert!(item.phi >= 1.0, "client returned phi < 1");
            }
            Ok((ChainInputs { prior, literal_true, recall }, None))
        }
    }
}

/// Run the full inference chain for one claim and one agent.
///
/// Chain: compress the prior, form the literal listener, then for each
/// recursion level build the speaker from the previous listener, mix in a
/// fresh availability sample, and apply Bayes with the compressed prior.
/// The effective depth is min(k, d + 1) when the agent's depth cap is on.
pub fn bpl_posterior(
    features: &ClaimFeatures,
    agent: &AgentProfile,
    recall_corpus: &[RecallItem],
    mode: &InferenceMode<'_>,
    cfg: &ChainConfig,
) -> Result<PosteriorResult, InferenceError> {
    agent.validate()?;
    let (inputs, exclude) = resolve_inputs(features, agent, recall_corpus, mode, cfg)?;
    run_chain(&inputs, features, agent, exclude)
}

fn run_chain(
    inputs: &ChainInputs,
    features: &ClaimFeatures,
    agent: &AgentProfile,
    exclude: Option<usize>,
) -> Result<PosteriorResult, InferenceError> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(agent.seed);

    let effective_k = if agent.apply_depth_cap {
        agent.k.min(features.depth + 1)
    } else {
        agent.k
    };

    let prior = inputs.prior;
    let literal = [1.0 - inputs.literal_true, inputs.literal_true];
    let mut trace = Vec::with_capacity(usize::from(effective_k) + 1);
    let mut current = listener(literal, &prior)?;
    trace.push(current);

    let recall_dist = if inputs.recall.is_empty() {
        None
    } else {
        Some(
            WeightedIndex::new(inputs.recall.iter().map(|it| it.phi.max(f64::MIN_POSITIVE)))
                .map_err(|_| InferenceError::EmptyRecallCorpus)?,
        )
    };

    let mut top_likelihoods = literal;
    for level in 1..=effective_k {
        let speaker_type = if level == 1 {
            SpeakerType::Honest
        } else {
            agent.speaker_policy.resolve(features.credibility)
        };
        let s_base = speaker(current[1], agent.alpha, &speaker_type);
        let w_recall = match &recall_dist {
            Some(dist) => {
                let sample = sample_recall_excluding(
                    &inputs.recall,
                    exclude,
                    dist,
                    agent.sample_size,
                    &mut rng,
                );
                recall_likelihood(&sample)
            }
            // Empty corpus: uninformative recall for both worlds.
            None => [0.5, 0.5],
        };
        let adjusted = availability_adjust(s_base, w_recall, agent.lambda_mix);
        current = listener(adjusted, &prior)?;
        trace.push(current);
        top_likelihoods = adjusted;
    }

    let belief = current[1];
    Ok(PosteriorResult {
        belief,
        susceptibility: susceptibility(belief, prior.loss),
        compression_loss: prior.loss,
        effective_k,
        depth_trace: trace,
        speaker_likelihoods: top_likelihoods,
    })
}

/// Convenience wrapper used by the population runner: feature mode with a
/// shared recall corpus and one excluded index.
pub(crate) fn feature_posterior_excluding(
    features: &ClaimFeatures,
    agent: &AgentProfile,
    recall: &[RecallItem],
    exclude: Option<usize>,
    cfg: &ChainConfig,
) -> Result<PosteriorResult, InferenceError> {
    agent.validate()?;
    let inputs = ChainInputs {
        prior: compress_prior(features.prior_true, agent.beta, features.credibility)?,
        literal_true: literal_plausibility_feature(features.valence, cfg),
        recall: recall.to_vec(),
    };
    run_chain(&inputs, features, agent, exclude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn features(prior: f64, gamma: f64, valence: f64, depth: u8) -> ClaimFeatures {
        ClaimFeatures {
            valence,
            depth,
            repetition: 0,
            recency: 0.0,
            prior_true: prior,
            credibility: gamma,
        }
    }

    #[test]
    fn compress_prior_uniform_fixed_point() {
        for beta in [0.1, 1.0, 50.0] {
            let c = compress_prior(0.5, beta, 1.0).unwrap();
            assert_relative_eq!(c.p_true, 0.5, epsilon = 1e-15);
            assert!(c.loss.abs() < 1e-15);
        }
    }

    #[test]
    fn compress_prior_matches_hand_evaluation() {
        // 0.5 * 0.8 + 0.5 * 0.5 = 0.65
        let c = compress_prior(0.8, 1.0, 1.0).unwrap();
        assert_relative_eq!(c.p_true, 0.65, epsilon = 1e-12);

        // zero credibility collapses to agnosticism
        let c0 = compress_prior(0.8, 1.0, 0.0).unwrap();
        assert_relative_eq!(c0.p_true, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn kl_loss_matches_independent_numeric_evaluation() {
        // P = (0.2, 0.8), Q = (0.35, 0.65)
        let expected = 0.2 * (0.2f64 / 0.35).ln() + 0.8 * (0.8f64 / 0.65).ln();
        let c = compress_prior(0.8, 1.0, 1.0).unwrap();
        assert_relative_eq!(c.loss, expected, epsilon = 1e-12);
        assert!((c.loss - 0.0542).abs() < 5e-5);
    }

    #[test]
    fn compress_prior_rejects_bad_beta() {
        assert!(compress_prior(0.5, 0.0, 1.0).is_err());
        assert!(compress_prior(0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn compression_monotone_in_beta_and_argmax_invariant() {
        let p = 0.8;
        let mut last = 0.5;
        for beta in [0.01, 0.1, 0.5, 1.0, 5.0, 50.0, 1e4] {
            let c = compress_prior(p, beta, 1.0).unwrap();
            assert!(c.p_true > last, "not strictly increasing at beta {beta}");
            assert!(c.p_true > 0.5 && c.p_true <= p);
            assert_eq!(c.p_true > 0.5, p > 0.5, "argmax changed");
            last = c.p_true;
        }
    }

    #[test]
    fn kl_loss_nonnegative_and_nonincreasing_in_beta() {
        let p = 0.9;
        let mut last = f64::INFINITY;
        for beta in [0.01, 0.1, 1.0, 10.0, 100.0, 1e6] {
            let c = compress_prior(p, beta, 1.0).unwrap();
            assert!(c.loss >= 0.0);
            assert!(c.loss <= last + 1e-15, "loss increased at beta {beta}");
            last = c.loss;
        }
        assert!(last < 1e-10, "loss should vanish as beta grows");
    }

    #[test]
    fn availability_weight_examples() {
        assert_relative_eq!(availability_weight(0.0, 0, 0.0), 1.0);
        assert_relative_eq!(
            availability_weight(0.5, 3, 0.2),
            1.0 + 0.5 + 4.0f64.ln() + 0.2,
            epsilon = 1e-12
        );
        assert_relative_eq!(availability_weight(1.0, 0, 1.0), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn phi_is_one_iff_all_factors_zero() {
        assert_eq!(availability_weight(0.0, 0, 0.0), 1.0);
        for (v, r, rho) in [(0.1, 0, 0.0), (0.0, 1, 0.0), (0.0, 0, 0.1)] {
            assert!(availability_weight(v, r, rho) > 1.0);
        }
    }

    #[test]
    fn literal_plausibility_rule_and_clamp() {
        let cfg = ChainConfig::default();
        assert_relative_eq!(literal_plausibility_feature(0.0, &cfg), 0.55);
        assert_relative_eq!(literal_plausibility_feature(1.0, &cfg), 0.30);
        let wide = ChainConfig {
            literal_slope: 5.0,
            ..ChainConfig::default()
        };
        assert_eq!(literal_plausibility_feature(1.0, &wide), 0.05);
    }

    #[test]
    fn listener_examples() {
        let prior = |p: f64| CompressedPrior { p_true: p, loss: 0.0 };
        let l = listener([0.5, 0.5], &prior(0.7)).unwrap();
        assert_relative_eq!(l[1], 0.7, epsilon = 1e-12);

        let l = listener([0.2, 0.8], &prior(0.5)).unwrap();
        assert_relative_eq!(l[1], 0.8, epsilon = 1e-12);

        let l = listener([0.2, 0.8], &prior(0.65)).unwrap();
        assert_relative_eq!(l[1], 0.8 * 0.65 / (0.8 * 0.65 + 0.2 * 0.35), epsilon = 1e-12);
        assert!((l[1] - 0.8814).abs() < 5e-5);
    }

    #[test]
    fn listener_rejects_degenerate_input() {
        let prior = CompressedPrior { p_true: 0.5, loss: 0.0 };
        assert!(listener([0.0, 0.0], &prior).is_err());
    }

    #[test]
    fn speaker_examples() {
        let s = speaker(0.8, 1.0, &SpeakerType::Honest);
        assert_relative_eq!(s[0], 0.2, epsilon = 1e-12);
        assert_relative_eq!(s[1], 0.8, epsilon = 1e-12);

        let d = speaker(0.8, 1.0, &SpeakerType::Deceptive);
        assert_relative_eq!(d[0], 0.8, epsilon = 1e-12);
        assert_relative_eq!(d[1], 0.2, epsilon = 1e-12);

        let s2 = speaker(0.8, 2.0, &SpeakerType::Honest);
        assert_relative_eq!(s2[1], 0.64 / 0.68, epsilon = 1e-12);
    }

    #[test]
    fn deceptive_speaker_symmetry_at_alpha_one() {
        for lt in [0.1, 0.3, 0.5, 0.77, 0.95] {
            let h = speaker(lt, 1.0, &SpeakerType::Honest);
            let d = speaker(lt, 1.0, &SpeakerType::Deceptive);
            assert_relative_eq!(d[0], 1.0 - h[0], epsilon = 1e-12);
            assert_relative_eq!(d[1], 1.0 - h[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn recall_likelihood_examples() {
        let all_false = vec![
            RecallItem { text: "a".into(), veracity: Veracity::False, phi: 1.0 },
            RecallItem { text: "b".into(), veracity: Veracity::False, phi: 2.0 },
        ];
        let refs: Vec<&RecallItem> = all_false.iter().collect();
        assert_relative_eq!(recall_likelihood(&refs)[0], 1.0);

        assert_eq!(recall_likelihood(&[]), [0.5, 0.5]);

        let mixed = vec![
            RecallItem { text: "a".into(), veracity: Veracity::False, phi: 1.0 },
            RecallItem { text: "b".into(), veracity: Veracity::True, phi: 3.0 },
        ];
        let refs: Vec<&RecallItem> = mixed.iter().collect();
        assert_relative_eq!(recall_likelihood(&refs)[1], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn availability_adjust_endpoints_and_midpoint() {
        let base = [0.8, 0.2];
        let recall = [0.4, 0.6];
        assert_eq!(availability_adjust(base, recall, 0.0), base);
        assert_eq!(availability_adjust(base, recall, 1.0), recall);
        let mid = availability_adjust(base, recall, 0.5);
        assert_relative_eq!(mid[0], 0.6, epsilon = 1e-12);
    }

    #[test]
    fn sample_recall_single_item_and_determinism() {
        let corpus = vec![RecallItem { text: "only".into(), veracity: Veracity::True, phi: 2.0 }];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_recall(&corpus, 5, &mut rng).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|it| it.text == "only"));

        let corpus2 = vec![
            RecallItem { text: "a".into(), veracity: Veracity::False, phi: 1.0 },
            RecallItem { text: "b".into(), veracity: Veracity::True, phi: 3.0 },
        ];
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let s1: Vec<String> = sample_recall(&corpus2, 20, &mut r1).unwrap().iter().map(|i| i.text.clone()).collect();
        let s2: Vec<String> = sample_recall(&corpus2, 20, &mut r2).unwrap().iter().map(|i| i.text.clone()).collect();
        assert_eq!(s1, s2);
    }

    #[test]
    fn sample_recall_frequencies_match_weights() {
        let corpus = vec![
            RecallItem { text: "light".into(), veracity: Veracity::False, phi: 1.0 },
            RecallItem { text: "heavy".into(), veracity: Veracity::True, phi: 3.0 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 10_000usize;
        let sample = sample_recall(&corpus, n, &mut rng).unwrap();
        let heavy = sample.iter().filter(|i| i.text == "heavy").count() as f64;
        let expect = 0.75 * n as f64;
        let sigma = (n as f64 * 0.75 * 0.25).sqrt();
        assert!(
            (heavy - expect).abs() < 3.0 * sigma,
            "heavy draws {heavy} outside 3 sigma of {expect}"
        );
    }

    #[test]
    fn sample_recall_empty_corpus_is_signalled() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_recall(&[], 3, &mut rng),
            Err(InferenceError::EmptyRecallCorpus)
        ));
    }

    #[test]
    fn susceptibility_examples() {
        assert_eq!(susceptibility(0.5, 0.0), 0.5);
        assert_eq!(susceptibility(0.0, 3.2), 0.0);
        assert!((susceptibility(0.6, 0.0542) - 0.63252).abs() < 1e-12);
    }

    #[test]
    fn zero_recursion_belief_equals_literal_listener() {
        let agent = AgentProfile::new(0, 1.0, 25);
        let f = features(0.8, 1.0, 0.0, 0);
        let cfg = ChainConfig::default();
        let r = bpl_posterior(&f, &agent, &[], &InferenceMode::Feature, &cfg).unwrap();
        let prior = compress_prior(0.8, 1.0, 1.0).unwrap();
        let expect = listener([0.45, 0.55], &prior).unwrap()[1];
        assert_relative_eq!(r.belief, expect, epsilon = 1e-15);
        assert_eq!(r.effective_k, 0);
        assert_eq!(r.depth_trace.len(), 1);
    }

    #[test]
    fn golden_chain_trace() {
        // prior 0.8, beta 1, gamma 1 -> compressed 0.65; valence 0 -> literal
        // 0.55; belief = 0.55 * 0.65 / (0.55 * 0.65 + 0.45 * 0.35)
        let agent = AgentProfile::new(0, 1.0, 25);
        let f = features(0.8, 1.0, 0.0, 0);
        let r = bpl_posterior(&f, &agent, &[], &InferenceMode::Feature, &ChainConfig::default())
            .unwrap();
        assert!((r.belief - 143.0 / 206.0).abs() < 1e-12);
        assert!((r.belief - 0.6941).abs() < 1e-4);
    }

    #[test]
    fn depth_cap_limits_effective_k() {
        let mut agent = AgentProfile::new(2, 1.0, 10);
        agent.apply_depth_cap = true;
        let f = features(0.6, 1.0, 0.0, 0);
        let corpus = vec![RecallItem { text: "x".into(), veracity: Veracity::True, phi: 1.0 }];
        let r = bpl_posterior(&f, &agent, &corpus, &InferenceMode::Feature, &ChainConfig::default())
            .unwrap();
        assert_eq!(r.effective_k, 1);

        agent.apply_depth_cap = false;
        let r = bpl_posterior(&f, &agent, &corpus, &InferenceMode::Feature, &ChainConfig::default())
            .unwrap();
        assert_eq!(r.effective_k, 2);
        assert_eq!(r.depth_trace.len(), 3);
    }

    #[test]
    fn trace_distributions_are_normalized() {
        let agent = AgentProfile::new(2, 0.7, 15).with_seed(5);
        let f = features(0.72, 0.6, 0.5, 1);
        let corpus: Vec<RecallItem> = (0..30)
            .map(|i| RecallItem {
                text: format!("c{i}"),
                veracity: if i % 3 == 0 { Veracity::False } else { Veracity::True },
                phi: 1.0 + (i as f64) * 0.1,
            })
            .collect();
        let r = bpl_posterior(&f, &agent, &corpus, &InferenceMode::Feature, &ChainConfig::default())
            .unwrap();
        for level in &r.depth_trace {
            assert!((level[0] + level[1] - 1.0).abs() < 1e-12);
        }
        assert!((r.susceptibility - r.belief * (1.0 + r.compression_loss)).abs() < 1e-15);
    }

    #[test]
    fn posterior_is_deterministic_for_fixed_seed() {
        let agent = AgentProfile::new(2, 1.0, 25).with_seed(99);
        let f = features(0.65, 0.8, 0.5, 1);
        let corpus: Vec<RecallItem> = (0..50)
            .map(|i| RecallItem {
                text: format!("c{i}"),
                veracity: if i % 2 == 0 { Veracity::False } else { Veracity::True },
                phi: 1.0 + (i % 7) as f64 * 0.3,
            })
            .collect();
        let cfg = ChainConfig::default();
        let a = bpl_posterior(&f, &agent, &corpus, &InferenceMode::Feature, &cfg).unwrap();
        let b = bpl_posterior(&f, &agent, &corpus, &InferenceMode::Feature, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_violations_rejected_before_inference() {
        let f = features(0.5, 1.0, 0.0, 0);
        let cfg = ChainConfig::default();
        let bad = AgentProfile { k: 3, ..AgentProfile::new(1, 1.0, 5) };
        assert!(bpl_posterior(&f, &bad, &[], &InferenceMode::Feature, &cfg).is_err());
        let bad = AgentProfile { lambda_mix: 1.5, ..AgentProfile::new(1, 1.0, 5) };
        assert!(bpl_posterior(&f, &bad, &[], &InferenceMode::Feature, &cfg).is_err());
        let bad = AgentProfile { sample_size: 0, ..AgentProfile::new(1, 1.0, 5) };
        assert!(bpl_posterior(&f, &bad, &[], &InferenceMode::Feature, &cfg).is_err());
    }

    #[test]
    fn derive_seed_is_stable_and_separates_inputs() {
        let a = derive_seed(42, "claim-1", 0);
        assert_eq!(a, derive_seed(42, "claim-1", 0));
        assert_ne!(a, derive_seed(42, "claim-1", 1));
        assert_ne!(a, derive_seed(42, "claim-2", 0));
        assert_ne!(a, derive_seed(43, "claim-1", 0));
    }

    #[test]
    fn raising_phi_of_false_recall_weakly_lowers_belief() {
        // Mechanism-level check: with a fixed sample, inflating the weight of
        // recalled-false items raises w(false), and after the mixture and
        // Bayes step the belief cannot increase when lambda > 0.
        let prior = compress_prior(0.6, 1.0, 1.0).unwrap();
        let s_base = speaker(0.6, 1.0, &SpeakerType::Honest);
        let mut items = vec![
            RecallItem { text: "f".into(), veracity: Veracity::False, phi: 1.0 },
            RecallItem { text: "t".into(), veracity: Veracity::True, phi: 2.0 },
        ];
        let mut beliefs = Vec::new();
        for boost in [1.0, 2.0, 5.0, 20.0] {
            items[0].phi = boost;
            let refs: Vec<&RecallItem> = items.iter().collect();
            let w = recall_likelihood(&refs);
            let adjusted = availability_adjust(s_base, w, 0.5);
            beliefs.push(listener(adjusted, &prior).unwrap()[1]);
        }
        for pair in beliefs.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15, "belief increased: {beliefs:?}");
        }
    }
}
