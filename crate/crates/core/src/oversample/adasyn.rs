use ndarray::{concatenate, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_common, check_sigma, check_weights, Builder, Interpolation, SyntheticSet};
use crate::error::{Error, Result};
use crate::knn::k_nearest;
use crate::weights::SampleWeights;

/// Density `d_i` of every minority sample and the minority members of its
/// neighbourhood.
///
/// Neighbours are searched in `D ∪ C` (self excluded). By default
/// `d_i = |K_i ∩ D| / k`; with `invert` it is the majority fraction
/// `|K_i ∩ C| / k` used by classic ADASYN. The returned neighbour lists hold
/// indices into `D`, ascending by distance.
pub fn minority_density(
    d: ArrayView2<'_, f64>,
    c: ArrayView2<'_, f64>,
    k: usize,
    invert: bool,
) -> Result<(Vec<f64>, Vec<Vec<usize>>)> {
    if d.ncols() != c.ncols() && c.nrows() > 0 {
        return Err(Error::DimensionMismatch {
            expected: d.ncols(),
            found: c.ncols(),
        });
    }
    // pool rows 0..|D| are the minority samples themselves
    let pool = concatenate(Axis(0), &[d, c]).map_err(|e| Error::Schema(e.to_string()))?;
    let own: Vec<usize> = (0..d.nrows()).collect();
    let neighbors = k_nearest(d, pool.view(), k, Some(&own))?;
    let minority: Vec<Vec<usize>> = neighbors
        .iter()
        .map(|list| {
            list.iter()
                .map(|nb| nb.index)
                .filter(|&p| p < d.nrows())
                .collect()
        })
        .collect();
    let density = minority
        .iter()
        .map(|m| {
            let hits = if invert { k - m.len() } else { m.len() };
            hits as f64 / k as f64
        })
        .collect();
    Ok((density, minority))
}

/// `g_i = floor(n * d_i / Σd + 0.5)`. When `Σd = 0` every sample gets
/// `floor(n / |D| + 0.5)` and the second value is `true`.
pub fn adasyn_allocation(density: &[f64], n: usize) -> (Vec<usize>, bool) {
    let total: f64 = density.iter().sum();
    if total > 0.0 {
        let g = density
            .iter()
            .map(|d| (n as f64 * d / total + 0.5).floor() as usize)
            .collect();
        (g, false)
    } else {
        let each = (n as f64 / density.len() as f64 + 0.5).floor() as usize;
        (vec![each; density.len()], true)
    }
}

/// EAT-ADASYN: density-driven allocation with the Gaussian weighted
/// interpolation factor of EAT-SMOTE.
pub fn eat_adasyn(
    d: ArrayView2<'_, f64>,
    c: ArrayView2<'_, f64>,
    weights: &SampleWeights,
    k: usize,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<SyntheticSet> {
    run(d, c, Some((weights, sigma)), k, n, seed, false)
}

/// ADASYN with the same allocation rule and `t ~ Uniform[0, 1)`.
pub fn adasyn(
    d: ArrayView2<'_, f64>,
    c: ArrayView2<'_, f64>,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<SyntheticSet> {
    run(d, c, None, k, n, seed, false)
}

pub(super) fn run(
    d: ArrayView2<'_, f64>,
    c: ArrayView2<'_, f64>,
    weighted: Option<(&SampleWeights, f64)>,
    k: usize,
    n: usize,
    seed: u64,
    invert: bool,
) -> Result<SyntheticSet> {
    check_common(d, n)?;
    let how = match weighted {
        Some((w, sigma)) => {
            check_weights(d, w)?;
            check_sigma(sigma)?;
            Interpolation::Weighted {
                weights: &w.normalized,
                sigma,
            }
        }
        None => Interpolation::Uniform,
    };
    let (density, minority_neighbors) = minority_density(d, c, k, invert)?;
    let (allocation, uniform_fallback) = adasyn_allocation(&density, n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Builder::new(d, allocation.iter().sum());
    for (i, &g) in allocation.iter().enumerate() {
        let candidates = &minority_neighbors[i];
        for _ in 0..g {
            if candidates.is_empty() {
                out.copy(i, true);
                continue;
            }
            let j = candidates[rng.random_range(0..candidates.len())];
            let t = how.draw(&mut rng, i, j)?;
            out.interpolate(i, j, t);
            if uniform_fallback {
                out.provenance.last_mut().expect("just pushed").fallback = true;
            }
        }
    }
    Ok(out.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn density_ratio() {
        // minority at x = 0, 1, 2; majority at 10.. far away
        let d = array![[0.0], [0.1], [0.2]];
        let c = array![[0.3], [0.4], [0.5], [9.0]];
        let (density, _) = minority_density(d.view(), c.view(), 5, false).unwrap();
        // sample 0 neighbours: 0.1 0.2 0.3 0.4 0.5 → 2 minority
        assert!((density[0] - 0.4).abs() < 1e-15);
        let (inverted, _) = minority_density(d.view(), c.view(), 5, true).unwrap();
        assert!((inverted[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn allocation_arithmetic() {
        assert_eq!(adasyn_allocation(&[0.2, 0.8], 7), (vec![1, 6], false));
        assert_eq!(adasyn_allocation(&[0.5, 0.5], 10), (vec![5, 5], false));
        assert_eq!(
            adasyn_allocation(&[0.0, 0.0, 0.0], 10),
            (vec![3, 3, 3], true)
        );
    }

    #[test]
    fn isolated_sample_gets_nothing() {
        // sample 2 is surrounded by majority points only
        let d = array![[0.0], [0.1], [50.0]];
        let c = array![[49.9], [50.1], [50.2], [100.0]];
        let s = adasyn(d.view(), c.view(), 2, 10, 3).unwrap();
        let counts = s.seed_counts(3);
        assert_eq!(counts[2], 0);
        assert_eq!(counts[0], counts[1]);
        assert_eq!(s.len(), 10);
    }

    #[test]
    fn no_minority_neighbours_anywhere() {
        let d = array![[0.0], [10.0]];
        let c = array![[0.1], [0.2], [10.1], [10.2]];
        let w = SampleWeights::uniform(2).unwrap();
        let s = eat_adasyn(d.view(), c.view(), &w, 2, 0.1, 5, 0).unwrap();
        // floor(5/2 + 0.5) = 3 each, all self copies
        assert_eq!(s.seed_counts(2), vec![3, 3]);
        assert_eq!(s.fallback_count(), 6);
        assert_eq!(
            s.rows.column(0).to_vec(),
            vec![0.0, 0.0, 0.0, 10.0, 10.0, 10.0]
        );
    }

    #[test]
    fn k_too_large() {
        let d = array![[0.0]];
        let c = array![[1.0]];
        assert!(matches!(
            adasyn(d.view(), c.view(), 2, 3, 0),
            Err(Error::KTooLarge { .. })
        ));
    }

    proptest! {
        #[test]
        fn rounding_deviation_bounded(seed in any::<u64>(), nd in 2usize..30, nc in 1usize..60, n in 1usize..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = Array2::from_shape_fn((nd, 2), |_| rng.random_range(0.0..1.0));
            let c = Array2::from_shape_fn((nc, 2), |_| rng.random_range(0.3..1.3));
            let k = 3.min(nd + nc - 1);
            let s = adasyn(d.view(), c.view(), k, n, seed).unwrap();
            let (density, _) = minority_density(d.view(), c.view(), k, false).unwrap();
            let total: f64 = density.iter().sum();
            let direct: usize = if total > 0.0 {
                density.iter().map(|x| (n as f64 * x / total + 0.5).floor() as usize).sum()
            } else {
                nd * (n as f64 / nd as f64 + 0.5).floor() as usize
            };
            prop_assert_eq!(s.len(), direct);
            prop_assert!((s.len() as f64 - n as f64).abs() <= nd as f64 / 2.0);
        }
    }
}
