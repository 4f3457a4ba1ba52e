use ndarray::ArrayView2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_common, check_weights, Builder, SyntheticSet};
use crate::error::{Error, Result};
use crate::weights::SampleWeights;

/// Copies `n` minority rows, each drawn i.i.d. from the categorical
/// distribution given by the normalized weights.
pub fn eat_ros(
    d: ArrayView2<'_, f64>,
    weights: &SampleWeights,
    n: usize,
    seed: u64,
) -> Result<SyntheticSet> {
    check_common(d, n)?;
    check_weights(d, weights)?;
    let picker = WeightedIndex::new(&weights.normalized)
        .map_err(|e| Error::DegenerateWeights(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Builder::new(d, n);
    for _ in 0..n {
        out.copy(picker.sample(&mut rng), false);
    }
    Ok(out.finish())
}

/// Random oversampling: [`eat_ros`] with uniform weights.
pub fn ros(d: ArrayView2<'_, f64>, n: usize, seed: u64) -> Result<SyntheticSet> {
    check_common(d, n)?;
    eat_ros(d, &SampleWeights::uniform(d.nrows())?, n, seed)
}
