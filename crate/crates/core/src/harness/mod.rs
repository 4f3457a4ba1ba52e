//! Experiment pipeline: split → oversample the training split → fit →
//! score balanced accuracy on the untouched test split.

mod sweep;
mod synth;

use serde::{Deserialize, Serialize};

pub use sweep::{
    best_point, interpret, run_sweep, InterpretationKey, InterpretationLabel, SweepReport,
    SweepRow, SweepSettings,
};
pub use synth::{generate_synthetic, GeneratorSpec};

use crate::classifiers::{fit, ClassifierKind, FittedModel, Hyperparameters};
use crate::dataset::{partition_by_class, LabeledDataset};
use crate::error::Result;
use crate::metrics::{balanced_accuracy, ConfusionCounts};
use crate::oversample::{balance, Method, OversamplerConfig, SyntheticSet};
use crate::weights::WeightSchema;

/// Everything that defines one train/evaluate run apart from the data,
/// the weight schema and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    /// `None` trains on the training split as is.
    pub method: Option<Method>,
    pub k: usize,
    pub sigma: f64,
    pub invert_density: bool,
    pub classifier: ClassifierKind,
    pub hyper: Hyperparameters,
}

impl Pipeline {
    pub fn new(method: Option<Method>, classifier: ClassifierKind) -> Self {
        Self {
            method,
            k: 5,
            sigma: 0.1,
            invert_density: false,
            classifier,
            hyper: Hyperparameters::default(),
        }
    }

    pub fn with_method(&self, method: Option<Method>) -> Self {
        Self {
            method,
            ..self.clone()
        }
    }

    fn oversampler(&self, method: Method, seed: u64) -> OversamplerConfig {
        OversamplerConfig {
            k: self.k,
            sigma: self.sigma,
            invert_density: self.invert_density,
            ..OversamplerConfig::new(method, seed)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub ba: f64,
    pub confusion: ConfusionCounts,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Synthetic rows added to the training split.
    pub generated: usize,
    pub fallback_count: usize,
    pub model: FittedModel,
}

/// Oversamples `train` according to `pipeline`; returns it unchanged when
/// no method is set.
pub fn oversample_train(
    train: &LabeledDataset,
    pipeline: &Pipeline,
    schema: Option<&WeightSchema>,
    seed: u64,
) -> Result<(LabeledDataset, Option<SyntheticSet>)> {
    match pipeline.method {
        None => Ok((train.clone(), None)),
        Some(method) => {
            let part = partition_by_class(train)?;
            let out = balance(train, &part, &pipeline.oversampler(method, seed), schema)?;
            Ok((out.dataset, Some(out.synthetic)))
        }
    }
}

/// One run: oversample `train` only, fit, and score on `test`. The minority
/// label of `train` is the positive class.
pub fn run_once(
    train: &LabeledDataset,
    test: &LabeledDataset,
    pipeline: &Pipeline,
    schema: Option<&WeightSchema>,
    seed: u64,
) -> Result<RunOutcome> {
    let positive = partition_by_class(train)?.minority_label;
    let (resampled, synthetic) = oversample_train(train, pipeline, schema, seed)?;
    let model = fit(pipeline.classifier, &resampled, &pipeline.hyper)?;
    let predicted = model.predict(test.features())?;
    let confusion = ConfusionCounts::from_predictions(test.labels(), &predicted, positive)?;
    Ok(RunOutcome {
        ba: balanced_accuracy(&confusion)?,
        sensitivity: confusion.sensitivity()?,
        specificity: confusion.specificity()?,
        confusion,
        generated: synthetic.as_ref().map_or(0, SyntheticSet::len),
        fallback_count: synthetic.as_ref().map_or(0, SyntheticSet::fallback_count),
        model,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for grid point `index` under a base seed. Index 0 is the unweighted
/// baseline; 1..=20 are the alpha grid points.
pub fn derive_seed(base: u64, index: usize) -> u64 {
    splitmix64(splitmix64(base) ^ (index as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::train_test_split;
    use std::collections::HashSet;

    fn data() -> LabeledDataset {
        let spec = GeneratorSpec {
            majority: 210,
            minority: vec![15, 15],
            ..GeneratorSpec::default()
        };
        generate_synthetic(&spec, 3).unwrap()
    }

    #[test]
    fn no_method_is_plain_baseline() {
        let ds = data();
        let (train, test) = train_test_split(&ds, 0.7, 1).unwrap();
        let p = Pipeline::new(None, ClassifierKind::Gnb);
        let out = run_once(&train, &test, &p, None, 9).unwrap();
        assert_eq!(out.generated, 0);
        let direct = fit(ClassifierKind::Gnb, &train, &Hyperparameters::default()).unwrap();
        assert_eq!(direct, out.model);
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = data();
        let (train, test) = train_test_split(&ds, 0.7, 2).unwrap();
        let schema = WeightSchema::high_low(0.3).unwrap();
        let p = Pipeline::new(Some(Method::EatSmote), ClassifierKind::Tree);
        let a = run_once(&train, &test, &p, Some(&schema), 5).unwrap();
        let b = run_once(&train, &test, &p, Some(&schema), 5).unwrap();
        assert_eq!(a.ba, b.ba);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn test_rows_never_leak_into_training() {
        // first feature becomes a unique row id
        let ds = data();
        let mut x = ds.features().to_owned();
        for (i, mut row) in x.outer_iter_mut().enumerate() {
            row[0] = 1000.0 + i as f64;
        }
        let tagged = LabeledDataset::new(x, ds.labels().to_vec(), ds.feature_names().to_vec())
            .unwrap()
            .with_categories("category", ds.categories().unwrap().to_vec())
            .unwrap();
        let (train, test) = train_test_split(&tagged, 0.7, 4).unwrap();
        let test_ids: HashSet<u64> = test
            .features()
            .column(0)
            .iter()
            .map(|v| v.to_bits())
            .collect();
        let schema = WeightSchema::high_low(0.6).unwrap();
        for method in [Method::EatRos, Method::Ros] {
            let p = Pipeline::new(Some(method), ClassifierKind::Gnb);
            let (over, _) = oversample_train(&train, &p, Some(&schema), 1).unwrap();
            assert!(over
                .features()
                .column(0)
                .iter()
                .all(|v| !test_ids.contains(&v.to_bits())));
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: HashSet<u64> = (0..=20).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 21);
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
        assert_ne!(derive_seed(1, 3), derive_seed(2, 3));
    }
}
