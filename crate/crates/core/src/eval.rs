//! Evaluation harness: cross-validated classification over the five feature
//! sets, the six-configuration ablation, depth-stratified error analysis,
//! and the disagreement-ambiguity correlation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{marker_count, ClaimFeatures, FeatureConfig};
use crate::folds::{stratified_kfold, FoldError};
use crate::inference::{derive_seed, feature_posterior_excluding, AgentProfile, ChainConfig, InferenceError};
use crate::ingest::{Claim, Dataset};
use crate::logistic::{fit_logistic, LogisticError, Standardizer};
use crate::metrics::{
    cohens_d, f1_score, mann_whitney_u, pearson_r, permutation_p_positive, roc_auc, MetricError,
};
use crate::population::{build_recall_corpus, ClaimPopulation, PopulationError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("feature set {0:?} requires population outputs")]
    MissingPopulation(FeatureSetKind),
    #[error("population outputs cover {got} claims, corpus has {want}")]
    PopulationMismatch { got: usize, want: usize },
    #[error("no claims with binary labels")]
    NoBinaryLabels,
    #[error("corpus needs both depth-0 and depth-1 claims")]
    MissingDepthStrata,
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Logistic(#[from] LogisticError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

/// Index of the reference agent (k=1, beta=1, N=25) in canonical order;
/// supplies the single-scalar belief and susceptibility features.
pub const CENTER_AGENT: usize = 4;

/// The five evaluated feature sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSetKind {
    Susceptibility,
    Belief,
    BplFull,
    Surface,
    BplPlusSurface,
}

impl FeatureSetKind {
    pub const ALL: [FeatureSetKind; 5] = [
        FeatureSetKind::Susceptibility,
        FeatureSetKind::Belief,
        FeatureSetKind::BplFull,
        FeatureSetKind::Surface,
        FeatureSetKind::BplPlusSurface,
    ];

    pub fn column_count(&self) -> usize {
        match self {
            FeatureSetKind::Susceptibility | FeatureSetKind::Belief => 1,
            FeatureSetKind::BplFull => 9,
            FeatureSetKind::Surface => 4,
            FeatureSetKind::BplPlusSurface => 13,
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            FeatureSetKind::Susceptibility => "BPL Susceptibility",
            FeatureSetKind::Belief => "BPL Belief",
            FeatureSetKind::BplFull => "BPL Full",
            FeatureSetKind::Surface => "Surface Baseline",
            FeatureSetKind::BplPlusSurface => "BPL + Surface",
        }
    }
}

/// Surface feature vector: token count, valence, attribution marker count,
/// and speaker historical false rate (LIAR) or domain credibility (MultiFC).
pub fn surface_features(claim: &Claim, feats: &ClaimFeatures, cfg: &FeatureConfig) -> [f64; 4] {
    let tokens = claim.text.split_whitespace().count() as f64;
    let markers = f64::from(marker_count(&claim.text, &cfg.markers));
    let metadata = match claim.dataset {
        Dataset::Liar => claim
            .history
            .filter(|h| h.total() > 0)
            .map(|h| f64::from(h.false_leaning()) / f64::from(h.total()))
            .unwrap_or(0.5),
        Dataset::MultiFc => feats.credibility,
    };
    [tokens, feats.valence, markers, metadata]
}

pub const SURFACE_COLUMNS: [&str; 4] = ["token_count", "valence", "marker_count", "history_false_rate_or_gamma"];

/// Assemble the design matrix for one feature set, restricted to claims
/// with binary labels. Returns (rows, labels, column names, claim ids).
pub fn build_matrix(
    claims: &[Claim],
    feats: &[ClaimFeatures],
    pops: Option<&[ClaimPopulation]>,
    set: FeatureSetKind,
    cfg: &FeatureConfig,
) -> Result<(Vec<Vec<f64>>, Vec<u8>, Vec<String>, Vec<String>), EvalError> {
    let needs_pop = !matches!(set, FeatureSetKind::Surface);
    if needs_pop {
        match pops {
            None => return Err(EvalError::MissingPopulation(set)),
            Some(p) if p.len() != claims.len() => {
                return Err(EvalError::PopulationMismatch { got: p.len(), want: claims.len() })
            }
            _ => {}
        }
    }

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (i, claim) in claims.iter().enumerate() {
        let Some(label) = claim.mapped.as_binary() else {
            continue;
        };
        let row = match set {
            FeatureSetKind::Susceptibility => {
                vec![pops.unwrap()[i].results[CENTER_AGENT].susceptibility]
            }
            FeatureSetKind::Belief => vec![pops.unwrap()[i].results[CENTER_AGENT].belief],
            FeatureSetKind::BplFull => pops.unwrap()[i].summary.as_array().to_vec(),
            FeatureSetKind::Surface => surface_features(claim, &feats[i], cfg).to_vec(),
            FeatureSetKind::BplPlusSurface => {
                let mut row = pops.unwrap()[i].summary.as_array().to_vec();
                row.extend(surface_features(claim, &feats[i], cfg));
                row
            }
        };
        rows.push(row);
        labels.push(label);
        ids.push(claim.id.clone());
    }
    if rows.is_empty() {
        return Err(EvalError::NoBinaryLabels);
    }

    let names: Vec<String> = match set {
        FeatureSetKind::Susceptibility => vec!["susceptibility".into()],
        FeatureSetKind::Belief => vec!["belief".into()],
        FeatureSetKind::BplFull => crate::population::PopulationSummary::COLUMNS
            .iter()
            .map(|c| c.to_string())
            .collect(),
        FeatureSetKind::Surface => SURFACE_COLUMNS.iter().map(|c| c.to_string()).collect(),
        FeatureSetKind::BplPlusSurface => crate::population::PopulationSummary::COLUMNS
            .iter()
            .chain(SURFACE_COLUMNS.iter())
            .map(|c| c.to_string())
            .collect(),
    };
    debug_assert_eq!(names.len(), set.column_count());
    Ok((rows, labels, names, ids))
}

/// Optimizer and CV settings; defaults are the reported configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvalParams {
    pub k_folds: usize,
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub f1_threshold: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            k_folds: 5,
            l2: 1.0,
            max_iter: 1000,
            tol: 1e-8,
            f1_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub auc: f64,
    pub f1: f64,
    pub f1_degenerate: bool,
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvResult {
    pub per_fold: Vec<FoldMetrics>,
    pub auc_mean: f64,
    pub auc_sd: f64,
    pub f1_mean: f64,
    pub f1_sd: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// K-fold cross validation of a logistic model over a prepared matrix.
/// Standardization statistics come from the training fold only.
pub fn cv_evaluate(
    rows: &[Vec<f64>],
    labels: &[u8],
    params: &EvalParams,
    seed: u64,
) -> Result<CvResult, EvalError> {
    let assignment = stratified_kfold(labels, params.k_folds, seed)?;
    let mut per_fold = Vec::with_capacity(params.k_folds);

    for fold in 0..params.k_folds {
        let train_idx: Vec<usize> = (0..rows.len()).filter(|i| assignment[*i] != fold).collect();
        let test_idx: Vec<usize> = (0..rows.len()).filter(|i| assignment[*i] == fold).collect();
        let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| rows[i].clone()).collect();
        let standardizer = Standardizer::fit(&train_rows)?;
        let train_std: Vec<Vec<f64>> = train_rows.iter().map(|r| standardizer.apply(r)).collect();
        let train_labels: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();

        let model = fit_logistic(&train_std, &train_labels, params.l2, params.max_iter, params.tol)?;

        let scores: Vec<f64> = test_idx
            .iter()
            .map(|&i| model.predict_proba(&standardizer.apply(&rows[i])))
            .collect();
        let test_labels: Vec<u8> = test_idx.iter().map(|&i| labels[i]).collect();

        let auc = roc_auc(&scores, &test_labels)?;
        let f1 = f1_score(&scores, &test_labels, params.f1_threshold)?;
        per_fold.push(FoldMetrics {
            fold,
            auc,
            f1: f1.value,
            f1_degenerate: f1.degenerate,
            train_size: train_idx.len(),
            test_size: test_idx.len(),
        });
    }

    let (auc_mean, auc_sd) = mean_sd(&per_fold.iter().map(|f| f.auc).collect::<Vec<_>>());
    let (f1_mean, f1_sd) = mean_sd(&per_fold.iter().map(|f| f.f1).collect::<Vec<_>>());
    Ok(CvResult { per_fold, auc_mean, auc_sd, f1_mean, f1_sd })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureEvalRow {
    pub set: FeatureSetKind,
    pub name: String,
    pub columns: Vec<String>,
    pub cv: CvResult,
}

/// Cross-validated classification for one feature set.
pub fn run_feature_eval(
    claims: &[Claim],
    feats: &[ClaimFeatures],
    pops: Option<&[ClaimPopulation]>,
    set: FeatureSetKind,
    cfg: &FeatureConfig,
    params: &EvalParams,
    seed: u64,
) -> Result<FeatureEvalRow, EvalError> {
    let (rows, labels, columns, _) = build_matrix(claims, feats, pops, set, cfg)?;
    let cv = cv_evaluate(&rows, &labels, params, seed)?;
    Ok(FeatureEvalRow {
        set,
        name: set.display_name().to_string(),
        columns,
        cv,
    })
}

/// The six ablation configurations, in the canonical reporting order.
pub const ABLATION_CONFIGS: [(&str, u8, f64, usize); 6] = [
    ("BPL Full", 1, 1.0, 25),
    ("No depth bound", 2, 1.0, 25),
    ("No compression", 1, 100.0, 25),
    ("No availability", 1, 1.0, 1000),
    ("RSA Literal", 0, 100.0, 1000),
    ("Max bounded", 0, 0.1, 3),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    pub k: u8,
    pub beta: f64,
    pub sample_size: usize,
    pub pearson_r: f64,
    /// Change versus the full configuration; None for the full row itself.
    pub delta_r: Option<f64>,
}

/// Single-agent beliefs for one configuration over every binary-labelled
/// claim. Per-claim seeds are shared across configurations so differences
/// reflect parameters, not sampling realizations.
fn config_beliefs(
    claims: &[Claim],
    feats: &[ClaimFeatures],
    corpus: &[crate::inference::RecallItem],
    self_index: &[Option<usize>],
    agent_base: AgentProfile,
    chain: &ChainConfig,
    seed: u64,
) -> Result<Vec<(f64, u8)>, EvalError> {
    let out: Result<Vec<Option<(f64, u8)>>, InferenceError> = claims
        .par_iter()
        .enumerate()
        .map(|(i, claim)| {
            let Some(label) = claim.mapped.as_binary() else {
                return Ok(None);
            };
            let agent = agent_base.with_seed(derive_seed(seed, &claim.id, 0));
            let r = feature_posterior_excluding(&feats[i], &agent, corpus, self_index[i], chain)?;
            Ok(Some((r.belief, label)))
        })
        .collect();
    Ok(out?.into_iter().flatten().collect())
}

/// The six-configuration ablation. Configurations run with the effective
/// depth cap engaged, so relaxing the depth bound only affects claims that
/// carry attribution structure.
pub fn run_ablation(
    claims: &[Claim],
    feats: &[ClaimFeatures],
    chain: &ChainConfig,
    seed: u64,
) -> Result<Vec<AblationRow>, EvalError> {
    let (corpus, self_index) = build_recall_corpus(claims, feats);
    let mut rows = Vec::with_capacity(6);
    let mut full_r = None;
    for (name, k, beta, n) in ABLATION_CONFIGS {
        let mut agent = AgentProfile::new(k, beta, n);
        agent.apply_depth_cap = true;
        let beliefs = config_beliefs(claims, feats, &corpus, &self_index, agent, chain, seed)?;
        let xs: Vec<f64> = beliefs.iter().map(|(b, _)| *b).collect();
        let ys: Vec<f64> = beliefs.iter().map(|(_, y)| f64::from(*y)).collect();
        let r = pearson_r(&xs, &ys)?;
        if full_r.is_none() {
            full_r = Some(r);
        }
        rows.push(AblationRow {
            name: name.to_string(),
            k,
            beta,
            sample_size: n,
            pearson_r: r,
            delta_r: if rows.is_empty() { None } else { Some(r - full_r.unwrap()) },
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthAgentRow {
    pub k: u8,
    pub depth0_error: Option<f64>,
    pub depth1_error: Option<f64>,
    /// Informational: mean error on claims with depth >= 2, when present.
    pub depth2_error: Option<f64>,
    pub cohens_d: Option<f64>,
    pub mann_whitney_p: Option<f64>,
    pub depth0_n: usize,
    pub depth1_n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthReport {
    pub agents: Vec<DepthAgentRow>,
    pub skipped: Vec<String>,
}

/// Depth-stratified mean prediction error |belief - label| for agents at
/// k in {0, 1, 2} with beta = 1 and N = 25 held fixed; depth cap off so
/// every agent runs its full recursion on every claim.
pub fn depth_stratified_eval(
    claims: &[Claim],
    feats: &[ClaimFeatures],
    chain: &ChainConfig,
    seed: u64,
) -> Result<DepthReport, EvalError> {
    let (corpus, self_index) = build_recall_corpus(claims, feats);
    let has_depth = |d: u8| {
        claims
            .iter()
            .zip(feats)
            .any(|(c, f)| c.mapped.as_binary().is_some() && f.depth == d)
    };
    if !has_depth(0) || !has_depth(1) {
        return Err(EvalError::MissingDepthStrata);
    }

    let mut agents = Vec::with_capacity(3);
    let mut skipped = Vec::new();
    for k in 0u8..=2 {
        let agent = AgentProfile::new(k, 1.0, 25);
        let results: Result<Vec<Option<(u8, f64)>>, InferenceError> = claims
            .par_iter()
            .enumerate()
            .map(|(i, claim)| {
                let Some(label) = claim.mapped.as_binary() else {
                    return Ok(None);
                };
                let seeded = agent.with_seed(derive_seed(seed, &claim.id, 0));
                let r =
                    feature_posterior_excluding(&feats[i], &seeded, &corpus, self_index[i], chain)?;
                Ok(Some((feats[i].depth, (r.belief - f64::from(label)).abs())))
            })
            .collect();
        let mut by_depth: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for entry in results?.into_iter().flatten() {
            by_depth[entry.0.min(2) as usize].push(entry.1);
        }

        let mean = |v: &[f64]| {
            if v.is_empty() {
                None
            } else {
                Some(v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        let (d, p) = if by_depth[0].len() >= 2 && by_depth[1].len() >= 2 {
            (
                cohens_d(&by_depth[0], &by_depth[1]).ok(),
                mann_whitney_u(&by_depth[0], &by_depth[1]).ok().map(|m| m.p),
            )
        } else {
            skipped.push(format!(
                "agent k={k}: a depth stratum is too small for statistics"
            ));
            (None, None)
        };

        agents.push(DepthAgentRow {
            k,
            depth0_error: mean(&by_depth[0]),
            depth1_error: mean(&by_depth[1]),
            depth2_error: mean(&by_depth[2]),
            cohens_d: d,
            mann_whitney_p: p,
            depth0_n: by_depth[0].len(),
            depth1_n: by_depth[1].len(),
        });
    }
    Ok(DepthReport { agents, skipped })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisagreementReport {
    pub pearson_r: f64,
    pub permutation_p: f64,
    pub shuffles: usize,
    pub n: usize,
}

/// Pearson correlation between per-claim predicted disagreement and the
/// dataset ambiguity proxy, with a one-sided permutation test for a
/// positive association.
pub fn disagreement_correlation(
    claims: &[Claim],
    pops: &[ClaimPopulation],
    shuffles: usize,
    seed: u64,
) -> Result<DisagreementReport, EvalError> {
    if pops.len() != claims.len() {
        return Err(EvalError::PopulationMismatch { got: pops.len(), want: claims.len() });
    }
    let deltas: Vec<f64> = pops.iter().map(|p| p.disagreement).collect();
    let ambiguity: Vec<f64> = claims.iter().map(|c| c.mapped.ambiguity).collect();
    let (r, p) = permutation_p_positive(&deltas, &ambiguity, shuffles, seed)?;
    Ok(DisagreementReport {
        pearson_r: r,
        permutation_p: p,
        shuffles,
        n: claims.len(),
    })
}
