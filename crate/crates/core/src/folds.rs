//! Deterministic stratified k-fold assignment.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FoldError {
    #[error("class {class} has {count} members, fewer than {k} folds")]
    ClassTooSmall { class: u8, count: usize, k: usize },
    #[error("k_folds must be at least 2, got {0}")]
    BadK(usize),
}

/// Assign each index a fold in 0..k_folds, preserving per-class proportions
/// within one item and keeping fold sizes within one of each other.
pub fn stratified_kfold(labels: &[u8], k_folds: usize, seed: u64) -> Result<Vec<usize>, FoldError> {
    if k_folds < 2 {
        return Err(FoldError::BadK(k_folds));
    }
    let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    for (&class, members) in &by_class {
        if members.len() < k_folds {
            return Err(FoldError::ClassTooSmall {
                class,
                count: members.len(),
                k: k_folds,
            });
        }
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    // Round-robin within each shuffled class, rotating the starting fold
    // between classes so remainders spread across folds.
    let mut start = 0usize;
    for members in by_class.values() {
        let mut members = members.clone();
        members.shuffle(&mut rng);
        for (pos, idx) in members.iter().enumerate() {
            assignment[*idx] = (start + pos) % k_folds;
        }
        start = (start + members.len()) % k_folds;
    }
    Ok(assignment)
}
