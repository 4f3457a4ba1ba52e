//! Balanced accuracy and its weighted-minus-unweighted difference (IBA).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts with the minority label as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fn_: u64, tn: u64, fp: u64) -> Self {
        Self { tp, fn_, tn, fp }
    }

    pub fn from_predictions(truth: &[u8], predicted: &[u8], positive: u8) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                found: predicted.len(),
            });
        }
        let mut c = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t == positive, p == positive) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fp += 1,
            }
        }
        Ok(c)
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.positives() == 0 {
            return Err(Error::UndefinedMetric(
                "no positive samples in the test set".into(),
            ));
        }
        if self.negatives() == 0 {
            return Err(Error::UndefinedMetric(
                "no negative samples in the test set".into(),
            ));
        }
        Ok(())
    }

    pub fn sensitivity(&self) -> Result<f64> {
        self.require_both_classes()?;
        Ok(self.tp as f64 / self.positives() as f64)
    }

    pub fn specificity(&self) -> Result<f64> {
        self.require_both_classes()?;
        Ok(self.tn as f64 / self.negatives() as f64)
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / (self.positives() + self.negatives()) as f64
    }

    /// Swaps the roles of the two classes.
    pub fn flipped(&self) -> Self {
        Self::new(self.tn, self.fp, self.tp, self.fn_)
    }
}

/// `½ (TP / (TP + FN) + TN / (TN + FP))`.
///
/// Evaluated as a single division of integer products, so the result is
/// correctly rounded (0.7 for 50/50/90/10, 0.5 for an always-negative
/// predictor).
pub fn balanced_accuracy(c: &ConfusionCounts) -> Result<f64> {
    c.require_both_classes()?;
    let (p, n) = (c.positives() as u128, c.negatives() as u128);
    let numerator = c.tp as u128 * n + c.tn as u128 * p;
    let denominator = 2 * p * n;
    Ok(numerator as f64 / denominator as f64)
}

/// Increase in balanced accuracy due to EAT weights: `weighted - unweighted`.
pub fn iba(ba_weighted: f64, ba_unweighted: f64) -> f64 {
    ba_weighted - ba_unweighted
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formula_examples() {
        assert_eq!(
            balanced_accuracy(&ConfusionCounts::new(50, 50, 90, 10)).unwrap(),
            0.7
        );
        assert_eq!(
            balanced_accuracy(&ConfusionCounts::new(30, 0, 70, 0)).unwrap(),
            1.0
        );
        assert_eq!(
            balanced_accuracy(&ConfusionCounts::new(0, 30, 70, 0)).unwrap(),
            0.5
        );
        assert_eq!(
            balanced_accuracy(&ConfusionCounts::new(30, 0, 0, 70)).unwrap(),
            0.5
        );
    }

    #[test]
    fn missing_class_is_undefined() {
        assert!(matches!(
            balanced_accuracy(&ConfusionCounts::new(0, 0, 5, 5)),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(balanced_accuracy(&ConfusionCounts::new(5, 5, 0, 0)).is_err());
    }

    #[test]
    fn iba_examples() {
        assert!((iba(0.878, 0.804) - 0.074).abs() < 1e-12);
        assert!((iba(0.822, 0.743) - 0.079).abs() < 1e-12);
        assert_eq!(iba(0.7, 0.7), 0.0);
    }

    #[test]
    fn counts_from_predictions() {
        let c = ConfusionCounts::from_predictions(&[1, 1, 0, 0, 0], &[1, 0, 0, 1, 0], 1).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 1, 2, 1));
        let swapped =
            ConfusionCounts::from_predictions(&[1, 1, 0, 0, 0], &[1, 0, 0, 1, 0], 0).unwrap();
        assert_eq!(swapped, c.flipped());
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"tp":1,"fn":1,"tn":2,"fp":1}"#
        );
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(tp in 0u64..500, fn_ in 0u64..500, tn in 0u64..500, fp in 0u64..500) {
            let c = ConfusionCounts::new(tp, fn_, tn, fp);
            prop_assume!(c.positives() > 0 && c.negatives() > 0);
            let ba = balanced_accuracy(&c).unwrap();
            prop_assert!((0.0..=1.0).contains(&ba));
            prop_assert_eq!(ba, balanced_accuracy(&c.flipped()).unwrap());
            let direct = 0.5 * (c.sensitivity().unwrap() + c.specificity().unwrap());
            prop_assert!((ba - direct).abs() < 1e-15);
        }

        #[test]
        fn equals_accuracy_when_balanced(n in 1u64..500, tp_frac in 0.0f64..=1.0, tn_frac in 0.0f64..=1.0) {
            let tp = (tp_frac * n as f64) as u64;
            let tn = (tn_frac * n as f64) as u64;
            let c = ConfusionCounts::new(tp, n - tp, tn, n - tn);
            prop_assert!((balanced_accuracy(&c).unwrap() - c.accuracy()).abs() < 1e-12);
        }
    }
}
