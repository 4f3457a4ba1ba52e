use std::f64::consts::PI;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    /// Added to every per-class variance, as a fraction of the largest
    /// feature variance in the training data.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        Self {
            var_smoothing: 1e-9,
        }
    }
}

/// Per-class feature means, smoothed variances and class priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub priors: [f64; 2],
}

fn mean_var(
    rows: impl Iterator<Item = usize> + Clone,
    x: ArrayView2<'_, f64>,
    f: usize,
) -> (f64, f64) {
    let n = rows.clone().count() as f64;
    let mean = rows.clone().map(|r| x[[r, f]]).sum::<f64>() / n;
    let var = rows.map(|r| (x[[r, f]] - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

impl GaussianNb {
    pub(super) fn fit(x: ArrayView2<'_, f64>, y: &[u8], params: &GnbParams) -> Self {
        let max_var = x
            .var_axis(Axis(0), 0.0)
            .iter()
            .copied()
            .fold(0.0_f64, f64::max);
        let epsilon = (params.var_smoothing * max_var).max(1e-12);
        let n = y.len() as f64;

        let mut means: [Vec<f64>; 2] = Default::default();
        let mut variances: [Vec<f64>; 2] = Default::default();
        let mut priors = [0.0; 2];
        for class in 0..2u8 {
            let rows = (0..y.len()).filter(move |&r| y[r] == class);
            let c = class as usize;
            priors[c] = rows.clone().count() as f64 / n;
            for f in 0..x.ncols() {
                let (m, v) = mean_var(rows.clone(), x, f);
                means[c].push(m);
                variances[c].push(v + epsilon);
            }
        }
        Self {
            means,
            variances,
            priors,
        }
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    /// Unnormalized log posterior `log P(c) + Σ log N(x_f; μ_cf, σ²_cf)`.
    pub fn joint_log_likelihood(&self, row: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = self.priors[c].ln()
                + row
                    .iter()
                    .zip(self.means[c].iter().zip(&self.variances[c]))
                    .map(|(x, (m, v))| -0.5 * (2.0 * PI * v).ln() - (x - m).powi(2) / (2.0 * v))
                    .sum::<f64>();
        }
        out
    }

    pub fn posterior(&self, row: &[f64]) -> [f64; 2] {
        let jll = self.joint_log_likelihood(row);
        let top = jll[0].max(jll[1]);
        let e = [(jll[0] - top).exp(), (jll[1] - top).exp()];
        let z = e[0] + e[1];
        [e[0] / z, e[1] / z]
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let jll = self.joint_log_likelihood(row);
        u8::from(jll[1] > jll[0])
    }
}
