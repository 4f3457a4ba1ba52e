use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub max_iter: usize,
    /// Stop once the absolute change in mean log-loss falls below this.
    pub tolerance: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iter: 2000,
            tolerance: 1e-6,
        }
    }
}

/// Linear model on standardized features: `p = σ(w · (x - mean) / scale + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^a)` without overflow.
fn softplus(a: f64) -> f64 {
    a.max(0.0) + (-a.abs()).exp().ln_1p()
}

fn mean_log_loss(z: &Array1<f64>, y: &[u8]) -> f64 {
    z.iter()
        .zip(y)
        .map(|(&z, &y)| if y == 1 { softplus(-z) } else { softplus(z) })
        .sum::<f64>()
        / y.len() as f64
}

impl LogisticModel {
    /// Model acting directly on raw features.
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        let n = weights.len();
        Self {
            weights,
            bias,
            feature_means: vec![0.0; n],
            feature_scales: vec![1.0; n],
        }
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.bias
            + row
                .iter()
                .zip(&self.weights)
                .zip(self.feature_means.iter().zip(&self.feature_scales))
                .map(|((x, w), (m, s))| w * (x - m) / s)
                .sum::<f64>()
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        u8::from(self.probability(row) >= 0.5)
    }
}

/// Full-batch gradient descent on mean log-loss. Returns the model and the
/// loss after every iteration (entry 0 is the loss at zero weights).
///
/// The step is `min(learning_rate, 4 / (d + 1))`; on standardized features
/// that keeps it under the reciprocal Lipschitz bound of the gradient, so
/// the recorded loss never increases.
pub fn train_logistic(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    params: &LogRegParams,
) -> (LogisticModel, Vec<f64>) {
    let (n, d) = x.dim();
    let means = x.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(d));
    let scales = x
        .std_axis(Axis(0), 0.0)
        .mapv(|s| if s > 0.0 { s } else { 1.0 });
    let z: Array2<f64> = (&x - &means) / &scales;
    let targets: Array1<f64> = y.iter().map(|&v| f64::from(v)).collect();

    let step = params.learning_rate.min(4.0 / (d as f64 + 1.0));
    let mut w = Array1::<f64>::zeros(d);
    let mut b = 0.0;
    let mut logits = z.dot(&w) + b;
    let mut history = vec![mean_log_loss(&logits, y)];

    for _ in 0..params.max_iter {
        let residual = logits.mapv(sigmoid) - &targets;
        let grad_w = z.t().dot(&residual) / n as f64;
        let grad_b = residual.sum() / n as f64;
        w.scaled_add(-step, &grad_w);
        b -= step * grad_b;
        logits = z.dot(&w) + b;
        let loss = mean_log_loss(&logits, y);
        let prev = *history.last().expect("non-empty");
        history.push(loss);
        if (prev - loss).abs() < params.tolerance {
            break;
        }
    }

    let model = LogisticModel {
        weights: w.to_vec(),
        bias: b,
        feature_means: means.to_vec(),
        feature_scales: scales.to_vec(),
    };
    (model, history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_blobs_fit_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut x = Array2::zeros((100, 2));
        let mut y = vec![0u8; 100];
        for i in 0..100 {
            let (cx, cy) = if i < 50 { (-3.0, -3.0) } else { (3.0, 3.0) };
            x[[i, 0]] = cx + rng.random_range(-1.0..1.0);
            x[[i, 1]] = cy + rng.random_range(-1.0..1.0);
            y[i] = u8::from(i >= 50);
        }
        let (m, _) = train_logistic(x.view(), &y, &LogRegParams::default());
        let acc = x
            .outer_iter()
            .zip(&y)
            .filter(|(r, &t)| m.predict_row(r.as_slice().unwrap()) == t)
            .count();
        assert_eq!(acc, 100);
    }

    #[test]
    fn zero_weights_sit_on_the_boundary() {
        let m = LogisticModel::new(vec![0.0, 0.0], 0.0);
        for row in [[1.0, 2.0], [-5.0, 3.0], [100.0, -100.0]] {
            assert_eq!(m.probability(&row), 0.5);
            assert_eq!(m.predict_row(&row), 1);
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
    }

    proptest! {
        #[test]
        fn loss_never_increases(seed in any::<u64>(), n in 4usize..60, d in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-50.0..50.0));
            let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            y[0] = 0;
            y[1] = 1;
            let params = LogRegParams { max_iter: 300, ..LogRegParams::default() };
            let (_, history) = train_logistic(x.view(), &y, &params);
            for w in history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
            }
        }
    }
}
