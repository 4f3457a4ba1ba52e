//! Reference binary classifiers: Gaussian naive Bayes, logistic regression
//! and a CART decision tree.
//!
//! All three are deterministic. Models serialize to JSON tagged by `kind`.

mod gnb;
mod logreg;
mod tree;

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use gnb::{GaussianNb, GnbParams};
pub use logreg::{train_logistic, LogRegParams, LogisticModel};
pub use tree::{DecisionTree, Node, TreeParams};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Gnb,
    Logreg,
    Tree,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::Gnb,
        ClassifierKind::Logreg,
        ClassifierKind::Tree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Gnb => "gnb",
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Tree => "tree",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub gnb: GnbParams,
    pub logreg: LogRegParams,
    pub tree: TreeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedModel {
    Gnb(GaussianNb),
    Logreg(LogisticModel),
    Tree(DecisionTree),
}

impl FittedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            FittedModel::Gnb(_) => ClassifierKind::Gnb,
            FittedModel::Logreg(_) => ClassifierKind::Logreg,
            FittedModel::Tree(_) => ClassifierKind::Tree,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Gnb(m) => m.n_features(),
            FittedModel::Logreg(m) => m.n_features(),
            FittedModel::Tree(m) => m.n_features(),
        }
    }

    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
        if rows.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: rows.ncols(),
            });
        }
        Ok(rows
            .outer_iter()
            .map(|row| {
                let row = row.as_slice().map_or_else(|| row.to_vec(), <[f64]>::to_vec);
                match self {
                    FittedModel::Gnb(m) => m.predict_row(&row),
                    FittedModel::Logreg(m) => m.predict_row(&row),
                    FittedModel::Tree(m) => m.predict_row(&row),
                }
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Trains a classifier of the requested kind on `train`.
pub fn fit(
    kind: ClassifierKind,
    train: &LabeledDataset,
    hyper: &Hyperparameters,
) -> Result<FittedModel> {
    let [zeros, ones] = train.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::SingleClass);
    }
    let x = train.features();
    if let Some(((row, feature), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { row, feature });
    }
    let y = train.labels();
    Ok(match kind {
        ClassifierKind::Gnb => FittedModel::Gnb(GaussianNb::fit(x, y, &hyper.gnb)),
        ClassifierKind::Logreg => FittedModel::Logreg(train_logistic(x, y, &hyper.logreg).0),
        ClassifierKind::Tree => FittedModel::Tree(DecisionTree::fit(x, y, &hyper.tree)),
    })
}

/// Predicts labels for `rows`.
pub fn predict(model: &FittedModel, rows: ArrayView2<'_, f64>) -> Result<Vec<u8>> {
    model.predict(rows)
}
