use serde::{Deserialize, Serialize};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Confusion counts and the scores derived from them.
///
/// Recall, precision and F1 are reported as 0 when their denominator is 0;
/// `zero_denominator` is then set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub threshold: f64,
    pub zero_denominator: bool,
}

fn ratio(num: f64, den: f64, undefined: &mut bool) -> f64 {
    if den == 0.0 {
        *undefined = true;
        0.0
    } else {
        num / den
    }
}

impl Metrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64, tn: u64, threshold: f64) -> Self {
        let mut undefined = false;
        let total = (tp + fp + fn_ + tn) as f64;
        let accuracy = ratio((tp + tn) as f64, total, &mut undefined);
        let recall = ratio(tp as f64, (tp + fn_) as f64, &mut undefined);
        let precision = ratio(tp as f64, (tp + fp) as f64, &mut undefined);
        let f1 = ratio(2.0 * recall * precision, recall + precision, &mut undefined);
        Metrics {
            tp,
            fp,
            fn_,
            tn,
            accuracy,
            recall,
            precision,
            f1,
            threshold,
            zero_denominator: undefined,
        }
    }

    /// Count outcomes with "positive iff score > threshold".
    pub fn from_scores(scores: &[f64], labels: &[u8], threshold: f64) -> Self {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (&s, &l) in scores.iter().zip(labels) {
            match (s > threshold, l == 1) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        Self::from_counts(tp, fp, fn_, tn, threshold)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_example() {
        let m = Metrics::from_counts(3, 1, 2, 4, 0.5);
        assert_abs_diff_eq!(m.accuracy, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(m.recall, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(m.precision, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f1, 2.0 / 3.0, epsilon = 1e-15);
        assert!(!m.zero_denominator);
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = Metrics::from_scores(&[0.9, 0.1, 0.7], &[1, 0, 1], 0.5);
        assert_eq!((m.accuracy, m.recall, m.precision, m.f1), (1.0, 1.0, 1.0, 1.0));
        let m = Metrics::from_scores(&[0.5, 0.2], &[0, 0], 0.5);
        assert_eq!(m.tn, 2);
        assert_eq!((m.recall, m.precision, m.f1), (0.0, 0.0, 0.0));
        assert!(m.zero_denominator);
    }

    #[test]
    fn json_keys() {
        let v = serde_json::to_value(Metrics::from_counts(1, 0, 0, 1, 0.5)).unwrap();
        for k in [
            "tp",
            "fp",
            "fn",
            "tn",
            "accuracy",
            "recall",
            "precision",
            "f1",
            "threshold",
        ] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }
}
