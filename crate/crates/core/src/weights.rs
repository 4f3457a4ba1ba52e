//! Accident-triangle weights: category → weight slot mapping, per-sample
//! weight assignment and normalization.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassPartition, LabeledDataset};
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Which of the two weights a category receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSlot {
    Alpha,
    Beta,
    Zero,
}

/// Maps EAT categories to `alpha`, `beta` or zero, with `alpha + beta = 1`.
///
/// JSON form: `{"alpha": 0.75, "beta": 0.25, "categories": {"L2": "alpha", "L3": "beta"}}`.
/// Category matching is exact and case-sensitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSchema {
    alpha: f64,
    beta: f64,
    #[serde(rename = "categories")]
    category_map: BTreeMap<String, WeightSlot>,
}

impl WeightSchema {
    pub fn new(alpha: f64, beta: f64, category_map: BTreeMap<String, WeightSlot>) -> Result<Self> {
        let schema = Self {
            alpha,
            beta,
            category_map,
        };
        schema.validate()?;
        Ok(schema)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidSchema(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        if (self.alpha + self.beta - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidSchema(format!(
                "alpha + beta = {} (must be 1)",
                self.alpha + self.beta
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: Self = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let schema: Self = serde_json::from_reader(file)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schema serializes")
    }

    /// Same category map with `alpha` replaced and `beta = 1 - alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0 - alpha, self.category_map.clone())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn category_map(&self) -> &BTreeMap<String, WeightSlot> {
        &self.category_map
    }

    /// Raw weight for a category, or `None` when unmapped.
    pub fn weight_of(&self, category: &str) -> Option<f64> {
        self.category_map.get(category).map(|slot| match slot {
            WeightSlot::Alpha => self.alpha,
            WeightSlot::Beta => self.beta,
            WeightSlot::Zero => 0.0,
        })
    }

    /// Construction safety management data: L2 (major) accidents get alpha,
    /// L3 (minor) accidents get beta.
    pub fn smd(alpha: f64) -> Result<Self> {
        Self::from_slots(
            alpha,
            &[("L2", WeightSlot::Alpha), ("L3", WeightSlot::Beta)],
        )
    }

    /// Trucking safety climate survey: drivers reporting more than one
    /// accident get alpha, drivers reporting exactly one get beta.
    pub fn scd(alpha: f64) -> Result<Self> {
        Self::from_slots(
            alpha,
            &[
                ("multiple", WeightSlot::Alpha),
                ("single", WeightSlot::Beta),
            ],
        )
    }

    /// National construction injury records: high fatality-risk accident
    /// types get alpha, low fatality-risk types get beta.
    pub fn nsd(alpha: f64) -> Result<Self> {
        const HIGH: [&str; 7] = [
            "Struck by Moving Objects",
            "Caught in/between Objects",
            "Collapse/Failure of Structures",
            "Fires & Explosion",
            "Falls from Heights",
            "Struck by Falling Objects",
            "Striking against Objects",
        ];
        const LOW: [&str; 12] = [
            "Over-exertion/Strenuous Movements",
            "Exposure to Hazardous Substances",
            "Others",
            "Exposure to Extreme Temperatures",
            "Exposure to Biological Materials",
            "Stepping on Objects",
            "Others-Traffic Accident",
            "Slips, Trips & Falls",
            "Cut/Stabbed by Objects",
            "Physical Assault",
            "Exposure to Electric current",
            "low-fatality-risk",
        ];
        let slots: Vec<(&str, WeightSlot)> = HIGH
            .iter()
            .chain(&["high-fatality-risk"])
            .map(|c| (*c, WeightSlot::Alpha))
            .chain(LOW.iter().map(|c| (*c, WeightSlot::Beta)))
            .collect();
        Self::from_slots(alpha, &slots)
    }

    /// Categories `high` → alpha and `low` → beta, as emitted by the
    /// synthetic generator.
    pub fn high_low(alpha: f64) -> Result<Self> {
        Self::from_slots(
            alpha,
            &[("high", WeightSlot::Alpha), ("low", WeightSlot::Beta)],
        )
    }

    /// Built-in schema by name: `smd`, `scd`, `nsd` or `high-low`.
    pub fn preset(name: &str, alpha: f64) -> Result<Self> {
        match name {
            "smd" => Self::smd(alpha),
            "scd" => Self::scd(alpha),
            "nsd" => Self::nsd(alpha),
            "high-low" => Self::high_low(alpha),
            other => Err(Error::InvalidSchema(format!("unknown preset '{other}'"))),
        }
    }

    fn from_slots(alpha: f64, slots: &[(&str, WeightSlot)]) -> Result<Self> {
        let map = slots.iter().map(|(c, s)| (c.to_string(), *s)).collect();
        Self::new(alpha, 1.0 - alpha, map)
    }
}

/// Raw and normalized weights aligned with the minority index list.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWeights {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl SampleWeights {
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        let normalized = normalize(&raw)?;
        Ok(Self { raw, normalized })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_raw(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

/// Scales a non-negative vector to sum to one.
pub fn normalize(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::DegenerateWeights("no weights given".into()));
    }
    if let Some((i, w)) = raw
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::DegenerateWeights(format!("weight {i} is {w}")));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights("all weights are zero".into()));
    }
    Ok(raw.iter().map(|w| w / total).collect())
}

/// Looks up each minority sample's category in `schema`. Weight `i`
/// belongs to `part.minority[i]`.
pub fn assign_weights(
    ds: &LabeledDataset,
    part: &ClassPartition,
    schema: &WeightSchema,
) -> Result<SampleWeights> {
    let categories = ds.categories().ok_or(Error::MissingCategories)?;
    let raw = part
        .minority
        .iter()
        .map(|&row| {
            let category = &categories[row];
            schema
                .weight_of(category)
                .ok_or_else(|| Error::UnknownCategory {
                    index: row,
                    category: category.clone(),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    SampleWeights::from_raw(raw)
}

/// One point of the weight sweep: `alpha = index / 21`, `beta = 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPair {
    /// 1..=20
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaPair {
    pub fn alpha_rounded(&self) -> f64 {
        round3(self.alpha)
    }

    pub fn beta_rounded(&self) -> f64 {
        round3(self.beta)
    }
}

pub const GRID_STEPS: usize = 21;

/// The 20 interior multiples of 1/21 (spacing ≈ 0.048); the endpoints 0 and
/// 1 are excluded since either would silence one subgroup completely.
pub fn alpha_grid() -> Vec<AlphaPair> {
    (1..GRID_STEPS)
        .map(|k| {
            let alpha = k as f64 / GRID_STEPS as f64;
            AlphaPair {
                index: k,
                alpha,
                beta: 1.0 - alpha,
            }
        })
        .collect()
}

pub(crate) fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}
