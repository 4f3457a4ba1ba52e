use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_common, check_sigma, check_weights, Builder, Interpolation, SyntheticSet};
use crate::error::Result;
use crate::knn::k_nearest;
use crate::weights::SampleWeights;

/// EAT-SMOTE. Seeds cycle deterministically (`i = remaining % |D|`, with
/// `remaining` counting down from `n`); the neighbour is drawn uniformly
/// from the seed's `k` nearest minority neighbours, and the interpolation
/// factor from `Normal(w_i / (w_i + w_j), sigma^2)` clipped to `[0, 1]`.
pub fn eat_smote(
    d: ArrayView2<'_, f64>,
    weights: &SampleWeights,
    k: usize,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<SyntheticSet> {
    check_weights(d, weights)?;
    check_sigma(sigma)?;
    run(
        d,
        Interpolation::Weighted {
            weights: &weights.normalized,
            sigma,
        },
        k,
        n,
        seed,
    )
}

/// Standard SMOTE with `t ~ Uniform[0, 1)` and the same seed schedule.
pub fn smote(d: ArrayView2<'_, f64>, k: usize, n: usize, seed: u64) -> Result<SyntheticSet> {
    run(d, Interpolation::Uniform, k, n, seed)
}

fn run(
    d: ArrayView2<'_, f64>,
    how: Interpolation<'_>,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<SyntheticSet> {
    check_common(d, n)?;
    let size = d.nrows();
    let mut out = Builder::new(d, n);
    if size == 1 {
        for _ in 0..n {
            out.copy(0, true);
        }
        return Ok(out.finish());
    }

    let own: Vec<usize> = (0..size).collect();
    let neighbors = k_nearest(d, d, k, Some(&own))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for remaining in (1..=n).rev() {
        let i = remaining % size;
        let j = neighbors[i][rng.random_range(0..k)].index;
        let t = how.draw(&mut rng, i, j)?;
        out.interpolate(i, j, t);
    }
    Ok(out.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use ndarray::array;

    #[test]
    fn zero_sigma_collapses_to_mean() {
        let d = array![[0.0, 0.0], [2.0, 2.0]];
        let w = SampleWeights::from_raw(vec![0.5, 0.5]).unwrap();
        let s = eat_smote(d.view(), &w, 1, 0.0, 6, 1).unwrap();
        for row in s.rows.outer_iter() {
            assert_eq!(row.to_vec(), vec![1.0, 1.0]);
        }
    }

    #[test]
    fn seed_schedule() {
        let d = array![[0.0], [1.0], [3.0]];
        let s = smote(d.view(), 1, 4, 0).unwrap();
        let seeds: Vec<usize> = s.provenance.iter().map(|p| p.seed).collect();
        assert_eq!(seeds, vec![1, 0, 2, 1]);
    }

    #[test]
    fn gaussian_mean_tracks_weight_ratio() {
        // seeds alternate between 0 and 1; keep the 10 000 draws seeded at 0
        let d = array![[0.0], [1.0]];
        let w = SampleWeights::from_raw(vec![0.9, 0.1]).unwrap();
        let s = eat_smote(d.view(), &w, 1, 0.05, 20_000, 5).unwrap();
        let ts: Vec<f64> = s
            .provenance
            .iter()
            .filter(|p| p.seed == 0)
            .map(|p| p.t.unwrap())
            .collect();
        assert_eq!(ts.len(), 10_000);
        let mean = ts.iter().sum::<f64>() / ts.len() as f64;
        assert!((mean - 0.9).abs() < 0.01, "{mean}");
    }

    #[test]
    fn uniform_mean_near_half() {
        // 3 sigma of the mean of 10 000 Uniform(0,1) draws: 3 * 0.2887 / 100 ≈ 0.0087
        let d = array![[0.0], [1.0], [5.0]];
        let s = smote(d.view(), 2, 10_000, 21).unwrap();
        let mean = s.provenance.iter().map(|p| p.t.unwrap()).sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.015, "{mean}");
    }

    #[test]
    fn identical_points_give_identical_synthetics() {
        let d = array![[4.0, -1.0], [4.0, -1.0]];
        let s = smote(d.view(), 1, 10, 2).unwrap();
        assert!(s.rows.outer_iter().all(|r| r.to_vec() == vec![4.0, -1.0]));
    }

    #[test]
    fn single_sample_falls_back_to_copies() {
        let d = array![[7.0]];
        let s = eat_smote(d.view(), &SampleWeights::uniform(1).unwrap(), 5, 0.1, 3, 0).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.fallback_count(), 3);
    }

    #[test]
    fn degenerate_pair_and_large_k() {
        let d = array![[0.0], [1.0], [2.0]];
        let w = SampleWeights::from_raw(vec![0.0, 0.0, 1.0]).unwrap();
        // seeds: 2 % 3 = 2 first (fine), then 1 whose only neighbour (k=1) is 0
        let err = eat_smote(d.view(), &w, 1, 0.1, 2, 0).unwrap_err();
        assert!(matches!(err, Error::DegeneratePair { .. }));
        assert!(matches!(
            smote(d.view(), 3, 2, 0),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let d = array![[0.0, 1.0], [1.0, 3.0], [2.0, 0.5], [4.0, 4.0]];
        let w = SampleWeights::from_raw(vec![0.2, 0.8, 0.2, 0.8]).unwrap();
        assert_eq!(
            eat_smote(d.view(), &w, 2, 0.1, 30, 8).unwrap(),
            eat_smote(d.view(), &w, 2, 0.1, 30, 8).unwrap()
        );
    }
}
