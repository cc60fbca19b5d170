use rand::seq::SliceRandom;

use super::{CorpusError, LabeledExample};
use crate::rng;

/// Disjoint train/validation partition of a labeled set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPair {
    pub train: Vec<LabeledExample>,
    pub validation: Vec<LabeledExample>,
    pub seed: u64,
}

/// Stratified, seeded split. `round(train_fraction * N)` examples go to the
/// training side; each label is divided in the same proportion. Both sides
/// keep the input order.
pub fn split_dataset(examples: &[LabeledExample], train_fraction: f64, seed: u64) -> Result<SplitPair, CorpusError> {
    let n = examples.len();
    if n < 2 {
        return Err(CorpusError::Validation(format!(
            "cannot split {n} example(s); need at least 2"
        )));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::Config(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    let mut pos: Vec<usize> = (0..n).filter(|&i| examples[i].label == 1).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| examples[i].label != 1).collect();
    let mut rng = rng::seeded(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let n_train = (train_fraction * n as f64).round() as usize;
    let mut n_pos = ((train_fraction * pos.len() as f64).round() as usize).min(pos.len());
    if n_pos > n_train {
        n_pos = n_train;
    }
    let mut n_neg = n_train - n_pos;
    if n_neg > neg.len() {
        n_neg = neg.len();
        n_pos = n_train - n_neg;
    }

    let mut in_train = vec![false; n];
    for &i in pos.iter().take(n_pos).chain(neg.iter().take(n_neg)) {
        in_train[i] = true;
    }
    let (train, validation): (Vec<_>, Vec<_>) = examples.iter().zip(in_train).partition(|(_, t)| *t);
    Ok(SplitPair {
        train: train.into_iter().map(|(e, _)| e.clone()).collect(),
        validation: validation.into_iter().map(|(e, _)| e.clone()).collect(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentenceRecord;

    fn examples(labels: &[u8]) -> Vec<LabeledExample> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| LabeledExample {
                record: SentenceRecord::new(format!("d#{i}"), "d", "", &format!("sentence {i}")),
                label: l,
            })
            .collect()
    }

    #[test]
    fn eighty_twenty_is_deterministic() {
        let ex = examples(&[1, 0, 1, 0, 1, 0, 1, 0, 1, 0]);
        let a = split_dataset(&ex, 0.8, 7).unwrap();
        let b = split_dataset(&ex, 0.8, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.train.len(), 8);
        assert_eq!(a.validation.len(), 2);
    }

    #[test]
    fn stratified_half_split() {
        let ex = examples(&[1, 1, 1, 0, 0, 0]);
        let s = split_dataset(&ex, 0.5, 3).unwrap();
        for side in [&s.train, &s.validation] {
            assert!(side.iter().any(|e| e.label == 1));
            assert!(side.iter().any(|e| e.label == 0));
        }
    }

    #[test]
    fn rejects_tiny_or_bad_fraction() {
        assert!(split_dataset(&examples(&[1]), 0.5, 0).is_err());
        assert!(split_dataset(&examples(&[1, 0]), 1.0, 0).is_err());
    }
}
