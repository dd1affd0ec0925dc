//! Evaluation metrics: rank-based AUC, F1, Pearson correlation, Cohen's d,
//! and the Mann-Whitney U test with both an exact permutation path and a
//! tie-corrected normal approximation.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("labels contain only one class")]
    SingleClass,
    #[error("input vectors have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("input vector has zero variance")]
    ZeroVariance,
    #[error("group is empty")]
    EmptyGroup,
    #[error("pooled standard deviation is zero")]
    ZeroPooledSd,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("need at least {0} observations")]
    TooFew(usize),
}

fn check_finite(values: &[f64]) -> Result<(), MetricError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    Ok(())
}

/// Midranks of the pooled values (average rank across ties), 1-based.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

/// Rank-based (Mann-Whitney) AUC; tied score pairs contribute one half.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch(scores.len(), labels.len()));
    }
    check_finite(scores)?;
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::SingleClass);
    }
    let ranks = midranks(scores);
    let rank_sum_pos: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 1)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// F1 with a degenerate-denominator policy: no predicted or actual
/// positives gives 0 and sets the warning flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Score {
    pub value: f64,
    pub degenerate: bool,
}

pub fn f1_score(scores: &[f64], labels: &[u8], threshold: f64) -> Result<F1Score, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch(scores.len(), labels.len()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(MetricError::SingleClass);
    }
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (s, &l) in scores.iter().zip(labels) {
        let predicted = *s >= threshold;
        match (predicted, l == 1) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fn_ += 1.0,
            (false, false) => {}
        }
    }
    if tp + fp == 0.0 || tp + fn_ == 0.0 || tp == 0.0 {
        return Ok(F1Score { value: 0.0, degenerate: true });
    }
    let precision = tp / (tp + fp);
    let recall = tp / (tp + fn_);
    Ok(F1Score {
        value: 2.0 * precision * recall / (precision + recall),
        degenerate: false,
    })
}

/// Product-moment correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricError::TooFew(2));
    }
    check_finite(x)?;
    check_finite(y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx <= 0.0 || vy <= 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    Ok((cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value for a Pearson correlation via the t distribution.
pub fn pearson_p(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    let r = r.clamp(-0.999_999_999, 0.999_999_999);
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * dist.cdf(-t.abs())).min(1.0)
}

/// Cohen's d with the pooled standard deviation weighted by (n - 1).
pub fn cohens_d(group_a: &[f64], group_b: &[f64]) -> Result<f64, MetricError> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(MetricError::TooFew(2));
    }
    check_finite(group_a)?;
    check_finite(group_b)?;
    let (na, nb) = (group_a.len() as f64, group_b.len() as f64);
    let ma = group_a.iter().sum::<f64>() / na;
    let mb = group_b.iter().sum::<f64>() / nb;
    let va = group_a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / (na - 1.0);
    let vb = group_b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / (nb - 1.0);
    let pooled = (((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0)).sqrt();
    if pooled <= 0.0 {
        return Err(MetricError::ZeroPooledSd);
    }
    Ok((ma - mb) / pooled)
}

/// Mann-Whitney U result. `exact` records which path produced the p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

/// Mann-Whitney U with midrank ties. The p-value is exact (permutation
/// distribution by dynamic programming over doubled midranks) when
/// `n_a * n_b <= 400`, otherwise a tie-corrected normal approximation with
/// continuity correction.
pub fn mann_whitney_u(group_a: &[f64], group_b: &[f64]) -> Result<MannWhitney, MetricError> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(MetricError::EmptyGroup);
    }
    check_finite(group_a)?;
    check_finite(group_b)?;

    let (na, nb) = (group_a.len(), group_b.len());
    let pooled: Vec<f64> = group_a.iter().chain(group_b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..na].iter().sum();
    let u = rank_sum_a - (na * (na + 1)) as f64 / 2.0;

    let exact = na * nb <= 400;
    let p = if exact {
        exact_two_sided_p(&ranks, na, u)
    } else {
        normal_approx_p(&pooled, &ranks, na, nb, u)
    };
    Ok(MannWhitney { u, p, exact })
}

/// Exact two-sided p: P(|U - mean| >= |u_obs - mean|) over all C(n, na)
/// assignments of the pooled midranks to group A. Midranks are doubled to
/// integers and counted with a subset-sum table.
fn exact_two_sided_p(ranks: &[f64], na: usize, u_obs: f64) -> f64 {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = {
        let mut sorted = doubled.clone();
        sorted.sort_unstable();
        sorted[n - na..].iter().sum()
    };

    // counts[k][s] = number of k-subsets of the processed ranks with doubled
    // rank sum s.
    let mut counts = vec![vec![0.0f64; max_sum + 1]; na + 1];
    counts[0][0] = 1.0;
    for &r in &doubled {
        for k in (0..na).rev() {
            for s in 0..=max_sum.saturating_sub(r) {
                if counts[k][s] > 0.0 {
                    counts[k + 1][s + r] += counts[k][s];
                }
            }
        }
    }

    let mean_u = (na * (n - na)) as f64 / 2.0;
    let dev = (u_obs - mean_u).abs();
    let offset = (na * (na + 1)) as f64 / 2.0;
    let mut extreme = 0.0;
    let mut total = 0.0;
    for (s2, count) in counts[na].iter().enumerate() {
        if *count == 0.0 {
            continue;
        }
        total += count;
        let u = s2 as f64 / 2.0 - offset;
        if (u - mean_u).abs() >= dev - 1e-9 {
            extreme += count;
        }
    }
    (extreme / total).min(1.0)
}

/// Normal approximation with tie correction and continuity correction.
fn normal_approx_p(pooled: &[f64], _ranks: &[f64], na: usize, nb: usize, u: f64) -> f64 {
    let n = (na + nb) as f64;
    let mean_u = na as f64 * nb as f64 / 2.0;

    let mut sorted = pooled.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }

    let var_u = (na as f64 * nb as f64 / 12.0) * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var_u <= 0.0 {
        return 1.0;
    }
    let z = ((u - mean_u).abs() - 0.5).max(0.0) / var_u.sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    (2.0 * normal.cdf(-z)).min(1.0)
}

/// One-sided permutation test for a positive Pearson correlation: shuffles
/// `y` and counts permuted correlations at least as large as the observed
/// one. Returns (r_observed, p).
pub fn permutation_p_positive(
    x: &[f64],
    y: &[f64],
    shuffles: usize,
    seed: u64,
) -> Result<(f64, f64), MetricError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let r_obs = pearson_r(x, y)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = y.to_vec();
    let mut at_least = 0usize;
    for _ in 0..shuffles {
        shuffled.shuffle(&mut rng);
        if let Ok(r) = pearson_r(x, &shuffled) {
            if r >= r_obs {
                at_least += 1;
            }
        }
    }
    Ok((r_obs, (at_least + 1) as f64 / (shuffles + 1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn auc_examples() {
        // positives {0.9, 0.3}, negatives {0.5, 0.1}: 3 of 4 pairs ranked right
        let scores = [0.9, 0.3, 0.5, 0.1];
        let labels = [1, 1, 0, 0];
        assert_relative_eq!(roc_auc(&scores, &labels).unwrap(), 0.75);

        let perfect = roc_auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(perfect, 1.0);

        let ties = roc_auc(&[0.5, 0.5, 0.5, 0.5], &[1, 1, 0, 0]).unwrap();
        assert_relative_eq!(ties, 0.5);
    }

    #[test]
    fn auc_rejects_single_class() {
        assert!(roc_auc(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn auc_complement_identity_for_tie_free_scores() {
        let scores = [0.11, 0.42, 0.27, 0.93, 0.05, 0.66];
        let labels = [0, 1, 0, 1, 0, 1];
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = roc_auc(&scores, &labels).unwrap();
        let b = roc_auc(&neg, &labels).unwrap();
        assert_relative_eq!(a + b, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn f1_examples() {
        let perfect = f1_score(&[0.9, 0.8, 0.1, 0.2], &[1, 1, 0, 0], 0.5).unwrap();
        assert_eq!(perfect.value, 1.0);
        assert!(!perfect.degenerate);

        let none = f1_score(&[0.1, 0.2, 0.3, 0.4], &[1, 1, 0, 0], 0.5).unwrap();
        assert_eq!(none.value, 0.0);
        assert!(none.degenerate);

        // TP=2, FP=1, FN=1 -> 2/3
        let mixed = f1_score(&[0.9, 0.8, 0.1, 0.7], &[1, 1, 1, 0], 0.5).unwrap();
        assert_relative_eq!(mixed.value, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert_relative_eq!(pearson_r(&x, &y).unwrap(), 1.0, epsilon = 1e-12);

        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_relative_eq!(pearson_r(&x, &neg).unwrap(), -1.0, epsilon = 1e-12);

        assert_relative_eq!(
            pearson_r(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(),
            0.5,
            epsilon = 1e-12
        );

        assert!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn cohens_d_examples() {
        assert_relative_eq!(
            cohens_d(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap(),
            -2.0,
            epsilon = 1e-12
        );
        assert_eq!(cohens_d(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let ab = cohens_d(&[1.0, 2.0, 5.0], &[2.0, 4.0, 4.5]).unwrap();
        let ba = cohens_d(&[2.0, 4.0, 4.5], &[1.0, 2.0, 5.0]).unwrap();
        assert_relative_eq!(ab, -ba, epsilon = 1e-12);
    }

    #[test]
    fn mann_whitney_separated_groups() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.exact);
        // 2 extreme assignments out of C(6,3) = 20
        assert_relative_eq!(r.p, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn mann_whitney_identical_groups() {
        let r = mann_whitney_u(&[5.0, 6.0, 7.0], &[5.0, 6.0, 7.0]).unwrap();
        assert!(r.p > 0.9, "p = {}", r.p);
    }

    #[test]
    fn mann_whitney_exact_and_approx_agree() {
        // Same data forced through both paths by construction of sizes.
        let a = [1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0];
        let exact = mann_whitney_u(&a, &b).unwrap();
        assert!(exact.exact);
        let approx_p = normal_approx_p(
            &a.iter().chain(&b).copied().collect::<Vec<_>>(),
            &[],
            7,
            7,
            exact.u,
        );
        assert!((exact.p - approx_p).abs() < 0.02);
    }

    #[test]
    fn mann_whitney_large_samples_use_approximation() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 0.5).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(!r.exact);
        assert!(r.p > 0.0 && r.p <= 1.0);
    }

    #[test]
    fn mann_whitney_handles_ties() {
        let r = mann_whitney_u(&[1.0, 2.0, 2.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!(r.u >= 0.0);
        assert!(r.p > 0.0 && r.p <= 1.0);
    }

    #[test]
    fn pearson_p_decreases_with_stronger_correlation() {
        let weak = pearson_p(0.1, 50);
        let strong = pearson_p(0.8, 50);
        assert!(strong < weak);
        assert!(strong < 0.001);
    }

    #[test]
    fn permutation_test_detects_positive_association() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 0.1 * ((v * 37.0).sin())).collect();
        let (r, p) = permutation_p_positive(&x, &y, 500, 7).unwrap();
        assert!(r > 0.9);
        assert!(p < 0.01);
    }
}
