//! Tabular dataset loading, splitting and class partitioning.
//!
//! CSV files are UTF-8, comma-delimited, with a mandatory header row. Every
//! column other than the label, the optional category column and an optional
//! `synthetic` provenance column must be numeric.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Name of the provenance column written by [`crate::oversample::balance`].
pub const SYNTHETIC_COLUMN: &str = "synthetic";

/// Numeric feature matrix with a binary label and optional EAT category.
///
/// Label `1` is the positive class. When loaded from CSV the rarer raw label
/// token becomes `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<u8>,
    categories: Option<Vec<String>>,
    feature_names: Vec<String>,
    label_name: String,
    category_name: Option<String>,
    /// Raw token for encoded label 0 and 1.
    label_tokens: [String; 2],
    synthetic: Option<Vec<bool>>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Schema(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.ncols() != feature_names.len() {
            return Err(Error::Schema(format!(
                "{} feature columns but {} feature names",
                features.ncols(),
                feature_names.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Schema(format!("label {bad} is not 0 or 1")));
        }
        check_finite(features.view())?;
        Ok(Self {
            features,
            labels,
            categories: None,
            feature_names,
            label_name: "label".to_string(),
            category_name: None,
            label_tokens: ["0".to_string(), "1".to_string()],
            synthetic: None,
        })
    }

    pub fn with_categories(
        mut self,
        name: impl Into<String>,
        categories: Vec<String>,
    ) -> Result<Self> {
        if categories.len() != self.labels.len() {
            return Err(Error::Schema(format!(
                "{} categories but {} rows",
                categories.len(),
                self.labels.len()
            )));
        }
        self.category_name = Some(name.into());
        self.categories = Some(categories);
        Ok(self)
    }

    pub fn with_label(mut self, name: impl Into<String>, tokens: [String; 2]) -> Self {
        self.label_name = name.into();
        self.label_tokens = tokens;
        self
    }

    pub(crate) fn with_synthetic(mut self, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != self.labels.len() {
            return Err(Error::Schema(format!(
                "{} synthetic flags but {} rows",
                flags.len(),
                self.labels.len()
            )));
        }
        self.synthetic = Some(flags);
        Ok(self)
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn categories(&self) -> Option<&[String]> {
        self.categories.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn category_name(&self) -> Option<&str> {
        self.category_name.as_deref()
    }

    pub fn label_tokens(&self) -> &[String; 2] {
        &self.label_tokens
    }

    /// Per-row flag marking rows appended by an oversampler, when known.
    pub fn synthetic(&self) -> Option<&[bool]> {
        self.synthetic.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Count of label 0 and label 1 rows.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// New dataset holding `rows` in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            categories: self
                .categories
                .as_ref()
                .map(|c| rows.iter().map(|&r| c[r].clone()).collect()),
            feature_names: self.feature_names.clone(),
            label_name: self.label_name.clone(),
            category_name: self.category_name.clone(),
            label_tokens: self.label_tokens.clone(),
            synthetic: self
                .synthetic
                .as_ref()
                .map(|s| rows.iter().map(|&r| s[r]).collect()),
        }
    }

    /// Writes the dataset as CSV: features, label, category (if any), then
    /// the `synthetic` column when provenance flags are present.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_name);
        if let Some(name) = &self.category_name {
            header.push(name);
        }
        if self.synthetic.is_some() {
            header.push(SYNTHETIC_COLUMN);
        }
        out.write_record(&header)?;

        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for (i, row) in self.features.outer_iter().enumerate() {
            record.clear();
            record.extend(row.iter().map(|v| v.to_string()));
            record.push(self.label_tokens[self.labels[i] as usize].clone());
            if let Some(c) = &self.categories {
                record.push(c[i].clone());
            }
            if let Some(s) = &self.synthetic {
                record.push(if s[i] { "1" } else { "0" }.to_string());
            }
            out.write_record(&record)?;
        }
        out.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn check_finite(features: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, feature), v) in features.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, feature });
        }
    }
    Ok(())
}

/// Loads a labeled dataset from a CSV file.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_col: &str,
    category_col: Option<&str>,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_col, category_col)
}

/// Reads a labeled dataset from any CSV source. Row numbers in errors are
/// 1-based data rows (the header is not counted).
pub fn read_csv<R: Read>(
    reader: R,
    label_col: &str,
    category_col: Option<&str>,
) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column '{name}'")))
    };
    let label_idx = find(label_col)?;
    let category_idx = category_col.map(find).transpose()?;
    let synthetic_idx = headers
        .iter()
        .position(|h| h == SYNTHETIC_COLUMN)
        .filter(|&i| i != label_idx && Some(i) != category_idx);

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && Some(i) != category_idx && Some(i) != synthetic_idx)
        .collect();

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut categories = Vec::new();
    let mut synthetic = Vec::new();

    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        let cell = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        for &c in &feature_cols {
            let text = cell(c);
            if text.is_empty() {
                return Err(Error::Parse {
                    row,
                    column: headers[c].clone(),
                    message: "missing value".to_string(),
                });
            }
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                row,
                column: headers[c].clone(),
                message: format!("'{text}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[c].clone(),
                    message: format!("'{text}' is not finite"),
                });
            }
            values.push(v);
        }
        let label = cell(label_idx);
        if label.is_empty() {
            return Err(Error::Parse {
                row,
                column: headers[label_idx].clone(),
                message: "missing label".to_string(),
            });
        }
        raw_labels.push(label.to_string());
        if let Some(ci) = category_idx {
            categories.push(cell(ci).to_string());
        }
        if let Some(si) = synthetic_idx {
            synthetic.push(match cell(si) {
                "1" | "true" => true,
                "0" | "false" | "" => false,
                other => {
                    return Err(Error::Parse {
                        row,
                        column: SYNTHETIC_COLUMN.to_string(),
                        message: format!("'{other}' is not a 0/1 flag"),
                    })
                }
            });
        }
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &raw_labels {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    if counts.len() != 2 {
        return Err(Error::UnsupportedTarget {
            column: label_col.to_string(),
            found: counts.len(),
        });
    }
    // BTreeMap order is lexicographic; on a tie the later token becomes 1.
    let mut entries: Vec<(&str, usize)> = counts.into_iter().collect();
    let (zero, one) = if entries[0].1 < entries[1].1 {
        (entries.remove(1), entries.remove(0))
    } else {
        (entries.remove(0), entries.remove(0))
    };
    let tokens = [zero.0.to_string(), one.0.to_string()];
    let labels: Vec<u8> = raw_labels
        .iter()
        .map(|l| u8::from(*l == tokens[1]))
        .collect();

    let n = labels.len();
    let features = Array2::from_shape_vec((n, feature_cols.len()), values)
        .map_err(|e| Error::Schema(e.to_string()))?;
    let names = feature_cols.iter().map(|&c| headers[c].clone()).collect();

    let mut ds = LabeledDataset::new(features, labels, names)?.with_label(label_col, tokens);
    if let Some(name) = category_col {
        ds = ds.with_categories(name, categories)?;
    }
    if synthetic_idx.is_some() {
        ds = ds.with_synthetic(synthetic)?;
    }
    Ok(ds)
}

/// Shuffles row indices with a seeded ChaCha8 stream and assigns the first
/// `floor(train_fraction * n)` permuted rows to the training set.
pub fn train_test_split(
    ds: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    let n = ds.len();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidSplit(format!(
            "fraction {train_fraction} of {n} rows leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    Ok((ds.select(&order[..n_train]), ds.select(&order[n_train..])))
}

/// Row indices of the rarer (minority) and commoner (majority) class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    pub minority: Vec<usize>,
    pub majority: Vec<usize>,
    /// Encoded label value (0 or 1) that the minority rows carry.
    pub minority_label: u8,
}

impl ClassPartition {
    pub fn majority_label(&self) -> u8 {
        1 - self.minority_label
    }

    /// True when label 0 turned out to be the rarer class.
    pub fn swapped(&self) -> bool {
        self.minority_label == 0
    }
}

/// Splits row indices by class, preserving index order. On equal counts
/// label 1 is treated as the minority.
pub fn partition_by_class(ds: &LabeledDataset) -> Result<ClassPartition> {
    let (ones, zeros): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| ds.labels[i] == 1);
    if ones.is_empty() || zeros.is_empty() {
        return Err(Error::SingleClass);
    }
    Ok(if ones.len() <= zeros.len() {
        ClassPartition {
            minority: ones,
            majority: zeros,
            minority_label: 1,
        }
    } else {
        ClassPartition {
            minority: zeros,
            majority: ones,
            minority_label: 0,
        }
    })
}

/// |minority| / |majority|.
pub fn imbalance_ratio(part: &ClassPartition) -> f64 {
    part.minority.len() as f64 / part.majority.len() as f64
}
