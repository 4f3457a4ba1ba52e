//! Minority-class oversamplers: ROS, SMOTE, ADASYN and their accident-triangle
//! weighted counterparts.
//!
//! All samplers draw from a single ChaCha8 stream seeded by the caller, so
//! the output is a pure function of the inputs and the seed. Indices in
//! [`Provenance`] refer to positions within the minority matrix `D`, not to
//! rows of the surrounding dataset.

mod adasyn;
mod ros;
mod smote;

use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use adasyn::{adasyn, adasyn_allocation, eat_adasyn, minority_density};
pub use ros::{eat_ros, ros};
pub use smote::{eat_smote, smote};

use crate::dataset::{ClassPartition, LabeledDataset};
use crate::error::{Error, Result};
use crate::weights::{assign_weights, SampleWeights, WeightSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ros,
    Smote,
    Adasyn,
    EatRos,
    EatSmote,
    EatAdasyn,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Ros,
        Method::Smote,
        Method::Adasyn,
        Method::EatRos,
        Method::EatSmote,
        Method::EatAdasyn,
    ];

    pub fn is_eat(self) -> bool {
        matches!(self, Method::EatRos | Method::EatSmote | Method::EatAdasyn)
    }

    /// The unweighted method an EAT method extends (identity for baselines).
    pub fn baseline(self) -> Method {
        match self {
            Method::EatRos => Method::Ros,
            Method::EatSmote => Method::Smote,
            Method::EatAdasyn => Method::Adasyn,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ros => "ros",
            Method::Smote => "smote",
            Method::Adasyn => "adasyn",
            Method::EatRos => "eat-ros",
            Method::EatSmote => "eat-smote",
            Method::EatAdasyn => "eat-adasyn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversamplerConfig {
    pub method: Method,
    /// Neighbour count for the SMOTE and ADASYN families.
    pub k: usize,
    /// Standard deviation of the Gaussian interpolation factor.
    pub sigma: f64,
    /// `None` means `|majority| - |minority|`.
    pub n_to_generate: Option<usize>,
    pub seed: u64,
    /// Allocate ADASYN synthetics by the fraction of *majority* neighbours
    /// (the classic ADASYN rule) instead of minority neighbours.
    pub invert_density: bool,
}

impl OversamplerConfig {
    pub fn new(method: Method, seed: u64) -> Self {
        Self {
            method,
            k: 5,
            sigma: 0.1,
            n_to_generate: None,
            seed,
            invert_density: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma = {} must be finite and >= 0",
                self.sigma
            )));
        }
        if self.n_to_generate == Some(0) {
            return Err(Error::NothingToGenerate);
        }
        Ok(())
    }
}

/// Where a synthetic row came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: usize,
    /// `None` for plain copies (ROS and fallbacks).
    pub neighbor: Option<usize>,
    /// Interpolation factor in `[0, 1]`; `None` for copies.
    pub t: Option<f64>,
    /// Set when the sampler had to copy the seed sample because no usable
    /// neighbour existed.
    pub fallback: bool,
}

/// Generated minority rows plus per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub rows: Array2<f64>,
    pub provenance: Vec<Provenance>,
}

impl SyntheticSet {
    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn fallback_count(&self) -> usize {
        self.provenance.iter().filter(|p| p.fallback).count()
    }

    /// Number of synthetics seeded by each of the `n_minority` samples.
    pub fn seed_counts(&self, n_minority: usize) -> Vec<usize> {
        let mut counts = vec![0; n_minority];
        for p in &self.provenance {
            counts[p.seed] += 1;
        }
        counts
    }
}

/// Accumulates rows and provenance while a sampler runs.
struct Builder<'a> {
    minority: ArrayView2<'a, f64>,
    values: Vec<f64>,
    provenance: Vec<Provenance>,
}

impl<'a> Builder<'a> {
    fn new(minority: ArrayView2<'a, f64>, capacity: usize) -> Self {
        Self {
            minority,
            values: Vec::with_capacity(capacity * minority.ncols()),
            provenance: Vec::with_capacity(capacity),
        }
    }

    fn copy(&mut self, seed: usize, fallback: bool) {
        self.values.extend(self.minority.row(seed).iter());
        self.provenance.push(Provenance {
            seed,
            neighbor: None,
            t: None,
            fallback,
        });
    }

    fn interpolate(&mut self, seed: usize, neighbor: usize, t: f64) {
        let a = self.minority.row(seed);
        let b = self.minority.row(neighbor);
        self.values
            .extend(a.iter().zip(b.iter()).map(|(x, y)| interpolate(*x, *y, t)));
        self.provenance.push(Provenance {
            seed,
            neighbor: Some(neighbor),
            t: Some(t),
            fallback: false,
        });
    }

    fn finish(self) -> SyntheticSet {
        let n = self.provenance.len();
        let rows = Array2::from_shape_vec((n, self.minority.ncols()), self.values)
            .expect("row buffer matches provenance length");
        SyntheticSet {
            rows,
            provenance: self.provenance,
        }
    }
}

/// `a + t * (b - a)`, the single formula every interpolating sampler uses.
#[inline]
pub fn interpolate(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// How the factor `t` on the seed→neighbour segment is drawn.
#[derive(Debug, Clone, Copy)]
enum Interpolation<'w> {
    /// `t ~ Uniform[0, 1)`.
    Uniform,
    /// `t ~ Normal(w_i / (w_i + w_j), sigma^2)` clipped to `[0, 1]`.
    Weighted { weights: &'w [f64], sigma: f64 },
}

impl Interpolation<'_> {
    fn draw<R: Rng>(&self, rng: &mut R, seed: usize, neighbor: usize) -> Result<f64> {
        match *self {
            Interpolation::Uniform => Ok(rng.random::<f64>()),
            Interpolation::Weighted { weights, sigma } => {
                let total = weights[seed] + weights[neighbor];
                if total <= 0.0 {
                    return Err(Error::DegeneratePair { seed, neighbor });
                }
                let mean = weights[seed] / total;
                let z: f64 = rng.sample(StandardNormal);
                Ok((mean + sigma * z).clamp(0.0, 1.0))
            }
        }
    }
}

fn check_weights(minority: ArrayView2<'_, f64>, weights: &SampleWeights) -> Result<()> {
    if weights.len() != minority.nrows() {
        return Err(Error::InvalidConfig(format!(
            "{} weights for {} minority samples",
            weights.len(),
            minority.nrows()
        )));
    }
    Ok(())
}

fn check_common(minority: ArrayView2<'_, f64>, n: usize) -> Result<()> {
    if minority.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if n == 0 {
        return Err(Error::NothingToGenerate);
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "sigma = {sigma} must be finite and >= 0"
        )))
    }
}

/// Runs the configured sampler on already-extracted minority rows `d` and
/// other-class rows `c`. `weights` is required for EAT methods.
pub fn generate(
    d: ArrayView2<'_, f64>,
    c: ArrayView2<'_, f64>,
    weights: Option<&SampleWeights>,
    config: &OversamplerConfig,
    n: usize,
) -> Result<SyntheticSet> {
    config.validate()?;
    let need = || {
        weights.ok_or_else(|| Error::InvalidConfig(format!("{} needs EAT weights", config.method)))
    };
    let (k, sigma, seed) = (config.k, config.sigma, config.seed);
    match config.method {
        Method::Ros => ros(d, n, seed),
        Method::EatRos => eat_ros(d, need()?, n, seed),
        Method::Smote => smote(d, k, n, seed),
        Method::EatSmote => eat_smote(d, need()?, k, sigma, n, seed),
        Method::Adasyn => adasyn::run(d, c, None, k, n, seed, config.invert_density),
        Method::EatAdasyn => adasyn::run(
            d,
            c,
            Some((need()?, sigma)),
            k,
            n,
            seed,
            config.invert_density,
        ),
    }
}

/// A dataset with synthetic minority rows appended.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub dataset: LabeledDataset,
    pub synthetic: SyntheticSet,
    /// The `N` handed to the sampler.
    pub requested: usize,
}

/// Oversamples the minority class of `ds` towards a 1:1 ratio.
///
/// Appended rows get the minority label, the seed sample's category and a
/// `synthetic` flag. ROS and SMOTE families add exactly `N` rows; ADASYN
/// families add `Σ g_i`, which can differ from `N` through rounding.
pub fn balance(
    ds: &LabeledDataset,
    part: &ClassPartition,
    config: &OversamplerConfig,
    schema: Option<&WeightSchema>,
) -> Result<Resampled> {
    config.validate()?;
    let n = config
        .n_to_generate
        .unwrap_or(part.majority.len().saturating_sub(part.minority.len()));
    if n == 0 {
        return Err(Error::NothingToGenerate);
    }
    let weights = if config.method.is_eat() {
        let schema = schema.ok_or_else(|| {
            Error::InvalidConfig(format!("{} requires a weight schema", config.method))
        })?;
        Some(assign_weights(ds, part, schema)?)
    } else {
        None
    };

    let d = ds.features().select(Axis(0), &part.minority);
    let c = ds.features().select(Axis(0), &part.majority);
    let synthetic = generate(d.view(), c.view(), weights.as_ref(), config, n)?;

    let features = concatenate(Axis(0), &[ds.features(), synthetic.rows.view()])
        .map_err(|e| Error::Schema(e.to_string()))?;
    let mut labels = ds.labels().to_vec();
    labels.extend(std::iter::repeat_n(part.minority_label, synthetic.len()));
    let mut flags = ds
        .synthetic()
        .map_or_else(|| vec![false; ds.len()], <[bool]>::to_vec);
    flags.extend(std::iter::repeat_n(true, synthetic.len()));

    let mut out = LabeledDataset::new(features, labels, ds.feature_names().to_vec())?
        .with_label(ds.label_name(), ds.label_tokens().clone());
    if let (Some(name), Some(cats)) = (ds.category_name(), ds.categories()) {
        let mut cats = cats.to_vec();
        cats.extend(
            synthetic
                .provenance
                .iter()
                .map(|p| cats_of(ds, part, p.seed).to_string()),
        );
        out = out.with_categories(name, cats)?;
    }
    let dataset = out.with_synthetic(flags)?;
    Ok(Resampled {
        dataset,
        synthetic,
        requested: n,
    })
}

fn cats_of<'a>(ds: &'a LabeledDataset, part: &ClassPartition, seed: usize) -> &'a str {
    &ds.categories().expect("checked by caller")[part.minority[seed]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::partition_by_class;
    use ndarray::Array2;

    fn shaped(minority: usize, majority: usize) -> LabeledDataset {
        let n = minority + majority;
        let x = Array2::from_shape_fn((n, 2), |(i, j)| {
            let base = if i < minority { 3.0 } else { 0.0 };
            base + ((i * 7 + j * 13) % 17) as f64 / 17.0
        });
        let labels = (0..n).map(|i| u8::from(i < minority)).collect();
        let cats = (0..n)
            .map(|i| match i {
                i if i < minority / 2 => "L2",
                i if i < minority => "L3",
                _ => "none",
            })
            .map(String::from)
            .collect();
        LabeledDataset::new(x, labels, vec!["a".into(), "b".into()])
            .unwrap()
            .with_categories("severity", cats)
            .unwrap()
    }

    #[test]
    fn method_tokens_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert!("EAT-ROS".parse::<Method>().is_err());
        assert_eq!(Method::EatAdasyn.baseline(), Method::Adasyn);
    }

    #[test]
    fn smd_shape_balances_exactly_for_ros() {
        let ds = shaped(120, 878);
        let part = partition_by_class(&ds).unwrap();
        let schema = WeightSchema::smd(0.7).unwrap();
        let out = balance(
            &ds,
            &part,
            &OversamplerConfig::new(Method::EatRos, 7),
            Some(&schema),
        )
        .unwrap();
        assert_eq!(out.synthetic.len(), 758);
        assert_eq!(out.dataset.class_counts(), [878, 878]);
        let flags = out.dataset.synthetic().unwrap();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 758);
        assert!(flags[..998].iter().all(|&f| !f));
        // categories follow the seed sample
        let cats = out.dataset.categories().unwrap();
        for (p, cat) in out.synthetic.provenance.iter().zip(&cats[998..]) {
            assert_eq!(cat, if p.seed < 60 { "L2" } else { "L3" });
        }
    }

    #[test]
    fn eat_adasyn_within_rounding_band() {
        let ds = shaped(120, 878);
        let part = partition_by_class(&ds).unwrap();
        let schema = WeightSchema::smd(0.3).unwrap();
        let out = balance(
            &ds,
            &part,
            &OversamplerConfig::new(Method::EatAdasyn, 1),
            Some(&schema),
        )
        .unwrap();
        let minority = out.dataset.class_counts()[1];
        assert!((818..=938).contains(&minority), "{minority}");
    }

    #[test]
    fn balanced_input_is_a_no_op_error() {
        let ds = shaped(10, 10);
        let part = partition_by_class(&ds).unwrap();
        let err = balance(&ds, &part, &OversamplerConfig::new(Method::Ros, 0), None).unwrap_err();
        assert!(matches!(err, Error::NothingToGenerate));
    }

    #[test]
    fn eat_method_without_schema() {
        let ds = shaped(10, 30);
        let part = partition_by_class(&ds).unwrap();
        let err = balance(
            &ds,
            &part,
            &OversamplerConfig::new(Method::EatSmote, 0),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn config_validation() {
        let mut c = OversamplerConfig::new(Method::Smote, 0);
        c.k = 0;
        assert!(c.validate().is_err());
        c.k = 5;
        c.sigma = -1.0;
        assert!(c.validate().is_err());
        c.sigma = 0.1;
        c.n_to_generate = Some(0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_oversampling() {
        let ds = shaped(20, 100);
        let part = partition_by_class(&ds).unwrap();
        let mut cfg = OversamplerConfig::new(Method::Smote, 3);
        cfg.n_to_generate = Some(15);
        let out = balance(&ds, &part, &cfg, None).unwrap();
        assert_eq!(out.dataset.class_counts(), [100, 35]);
    }
}
