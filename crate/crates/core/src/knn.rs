//! Exact brute-force k-nearest-neighbour search (Euclidean).

use ndarray::ArrayView2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// For each query row, `k` neighbours ascending by distance; ties go to the
/// lower pool index.
pub type NeighborList = Vec<Vec<Neighbor>>;

/// Squared Euclidean distance between two equally long slices.
#[inline]
pub(crate) fn squared_distance<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Finds the `k` nearest pool rows for every query row.
///
/// `self_indices[q]`, when given, is the pool index of query `q` itself;
/// that point is skipped so a sample is never its own neighbour.
pub fn k_nearest(
    queries: ArrayView2<'_, f64>,
    pool: ArrayView2<'_, f64>,
    k: usize,
    self_indices: Option<&[usize]>,
) -> Result<NeighborList> {
    if queries.ncols() != pool.ncols() {
        return Err(Error::DimensionMismatch {
            expected: pool.ncols(),
            found: queries.ncols(),
        });
    }
    if let Some(s) = self_indices {
        if s.len() != queries.nrows() {
            return Err(Error::InvalidConfig(format!(
                "{} self indices for {} queries",
                s.len(),
                queries.nrows()
            )));
        }
        if let Some(&bad) = s.iter().find(|&&i| i >= pool.nrows()) {
            return Err(Error::InvalidConfig(format!(
                "self index {bad} outside pool"
            )));
        }
    }
    let available = pool.nrows() - usize::from(self_indices.is_some());
    if k == 0 || k > available {
        return Err(Error::KTooLarge { k, available });
    }

    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(pool.nrows());
    let mut out = Vec::with_capacity(queries.nrows());
    for (q, query) in queries.outer_iter().enumerate() {
        let skip = self_indices.map(|s| s[q]);
        scratch.clear();
        scratch.extend(
            pool.outer_iter()
                .enumerate()
                .filter(|(p, _)| Some(*p) != skip)
                .map(|(p, row)| (squared_distance(query.iter(), row.iter()), p)),
        );
        let by_distance =
            |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < scratch.len() {
            scratch.select_nth_unstable_by(k - 1, by_distance);
            scratch.truncate(k);
        }
        scratch.sort_unstable_by(by_distance);
        out.push(
            scratch
                .iter()
                .map(|&(d2, index)| Neighbor {
                    index,
                    distance: d2.sqrt(),
                })
                .collect(),
        );
    }
    Ok(out)
}
