use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Gaussian-blob generator with an imbalanced binary label.
///
/// The majority class is centred at the origin. The two minority subgroups,
/// tagged `high` and `low`, sit `separation` away along feature 0 and
/// feature 1 respectively, so each subgroup occupies its own region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub majority: usize,
    /// Sizes of the `high` and `low` subgroups.
    pub minority: Vec<usize>,
    pub dim: usize,
    /// Per-coordinate standard deviation around each centre.
    pub noise: f64,
    pub separation: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            majority: 878,
            minority: vec![60, 60],
            dim: 4,
            noise: 1.0,
            separation: 2.0,
        }
    }
}

pub const SUBGROUP_TAGS: [&str; 2] = ["high", "low"];
pub const MAJORITY_TAG: &str = "none";

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.majority == 0 {
            return Err(Error::InvalidConfig(
                "majority count must be positive".into(),
            ));
        }
        if self.minority.len() != 2 || self.minority.contains(&0) {
            return Err(Error::InvalidConfig(
                "exactly two positive minority subgroup counts are required".into(),
            ));
        }
        if self.dim < 2 {
            return Err(Error::InvalidConfig("dimension must be at least 2".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidConfig("noise must be finite and >= 0".into()));
        }
        if !self.separation.is_finite() {
            return Err(Error::InvalidConfig("separation must be finite".into()));
        }
        Ok(())
    }

    /// Centre of the majority class (`None`) or of subgroup 0/1.
    pub fn centre(&self, subgroup: Option<usize>) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        if let Some(g) = subgroup {
            c[g] = self.separation;
        }
        c
    }
}

/// Rows are ordered majority, `high`, `low`. Label 1 marks the minority.
pub fn generate_synthetic(spec: &GeneratorSpec, seed: u64) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<(Option<usize>, usize)> = std::iter::once((None, spec.majority))
        .chain(spec.minority.iter().enumerate().map(|(g, &n)| (Some(g), n)))
        .collect();
    let n: usize = groups.iter().map(|(_, c)| c).sum();

    let mut x = Array2::zeros((n, spec.dim));
    let mut labels = Vec::with_capacity(n);
    let mut categories = Vec::with_capacity(n);
    let mut row = 0;
    for (group, count) in groups {
        let centre = spec.centre(group);
        for _ in 0..count {
            for (f, c) in centre.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                x[[row, f]] = c + spec.noise * z;
            }
            labels.push(u8::from(group.is_some()));
            categories.push(group.map_or(MAJORITY_TAG, |g| SUBGROUP_TAGS[g]).to_string());
            row += 1;
        }
    }
    let names = (0..spec.dim).map(|i| format!("f{i}")).collect();
    LabeledDataset::new(x, labels, names)?.with_categories("category", categories)
}
