//! Accident-triangle weighted oversampling for imbalanced tabular safety data.
//!
//! Minority-class samples carry a domain category (injury severity, accident
//! frequency, accident type). A [`WeightSchema`] maps each category to one of
//! two weights `alpha`/`beta` with `alpha + beta = 1`, and the weighted
//! samplers use those weights either to pick which sample is duplicated
//! (EAT-ROS) or where on the seed/neighbour segment a synthetic point lands
//! (EAT-SMOTE, EAT-ADASYN). Unweighted ROS, SMOTE and ADASYN are provided as
//! baselines, together with three small reference classifiers and a sweep
//! harness that scores every weight pair by balanced accuracy.
//!
//! Distances are plain Euclidean on raw feature values. Standardize features
//! beforehand if their scales differ by orders of magnitude.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod knn;
pub mod metrics;
pub mod oversample;
pub mod weights;

pub use classifiers::{ClassifierKind, FittedModel, Hyperparameters};
pub use dataset::{ClassPartition, LabeledDataset};
pub use error::{Error, Result};
pub use knn::{k_nearest, Neighbor, NeighborList};
pub use metrics::ConfusionCounts;
pub use oversample::{balance, Method, OversamplerConfig, Provenance, Resampled, SyntheticSet};
pub use weights::{alpha_grid, AlphaPair, SampleWeights, WeightSchema, WeightSlot};
