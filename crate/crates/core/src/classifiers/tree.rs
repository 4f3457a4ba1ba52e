use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: Some(12),
            min_samples_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        class: u8,
        samples: usize,
        impurity: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        samples: usize,
        impurity: f64,
    },
}

impl Node {
    pub fn samples(&self) -> usize {
        match self {
            Node::Leaf { samples, .. } | Node::Split { samples, .. } => *samples,
        }
    }

    pub fn impurity(&self) -> f64 {
        match self {
            Node::Leaf { impurity, .. } | Node::Split { impurity, .. } => *impurity,
        }
    }
}

/// CART classification tree grown greedily on Gini impurity. Node 0 is the
/// root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    n_features: usize,
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (a, b) = (counts[0] as f64 / n, counts[1] as f64 / n);
    1.0 - a * a - b * b
}

struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

struct Grower<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [u8],
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> [usize; 2] {
        let ones = rows.iter().filter(|&&r| self.y[r] == 1).count();
        [rows.len() - ones, ones]
    }

    /// Lowest weighted child Gini; ties keep the lowest feature index and
    /// then the lowest threshold.
    fn best_split(&self, rows: &[usize], counts: [usize; 2]) -> Option<Candidate> {
        let m = rows.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<Candidate> = None;
        let mut sorted = rows.to_vec();
        for f in 0..self.x.ncols() {
            sorted.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
            let mut left = [0usize; 2];
            for i in 1..m {
                left[self.y[sorted[i - 1]] as usize] += 1;
                let (lo, hi) = (self.x[[sorted[i - 1], f]], self.x[[sorted[i], f]]);
                if lo == hi || i < min_leaf || m - i < min_leaf {
                    continue;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let impurity = (i as f64 * gini(left) + (m - i) as f64 * gini(right)) / m as f64;
                if best.as_ref().is_none_or(|b| impurity < b.impurity - 1e-12) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(Candidate {
                        feature: f,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let impurity = gini(counts);
        let id = self.nodes.len();
        let leaf = Node::Leaf {
            class: u8::from(counts[1] > counts[0]),
            samples: rows.len(),
            impurity,
        };
        self.nodes.push(leaf.clone());

        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if !depth_ok || impurity == 0.0 {
            return id;
        }
        let Some(split) = self.best_split(&rows, counts) else {
            return id;
        };
        if split.impurity > impurity {
            return id;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&row| self.x[[row, split.feature]] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            samples: rows.len(),
            impurity,
        };
        id
    }
}

impl DecisionTree {
    pub(super) fn fit(x: ArrayView2<'_, f64>, y: &[u8], params: &TreeParams) -> Self {
        let mut grower = Grower {
            x,
            y,
            params,
            nodes: Vec::new(),
        };
        grower.grow((0..y.len()).collect(), 0);
        Self {
            nodes: grower.nodes,
            n_features: x.ncols(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { class, .. } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stump_finds_the_only_split() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_leaf: 1,
        };
        let t = DecisionTree::fit(x.view(), &[0, 0, 1, 1], &params);
        match &t.nodes[0] {
            Node::Split {
                threshold,
                left,
                right,
                ..
            } => {
                assert!(*threshold > 1.0 && *threshold < 2.0);
                assert_eq!(t.nodes[*left].impurity(), 0.0);
                assert_eq!(t.nodes[*right].impurity(), 0.0);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn tie_break_prefers_lowest_feature() {
        // both features separate the classes equally well
        let x = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_leaf: 1,
        };
        let t = DecisionTree::fit(x.view(), &[0, 0, 1, 1], &params);
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn unlimited_depth_memorizes_consistent_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Array2::from_shape_fn((120, 3), |_| rng.random::<f64>());
        let y: Vec<u8> = (0..120).map(|_| rng.random_range(0..2)).collect();
        let params = TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
        };
        let t = DecisionTree::fit(x.view(), &y, &params);
        for (row, &label) in x.outer_iter().zip(&y) {
            assert_eq!(t.predict_row(row.as_slice().unwrap()), label);
        }
    }

    #[test]
    fn respects_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((300, 2), |_| rng.random::<f64>());
        let y: Vec<u8> = (0..300).map(|_| rng.random_range(0..2)).collect();
        let t = DecisionTree::fit(x.view(), &y, &TreeParams::default());
        assert!(t.depth() <= 12);
        assert!(t
            .nodes
            .iter()
            .all(|n| !matches!(n, Node::Leaf { samples, .. } if *samples < 2)));
    }

    proptest! {
        #[test]
        fn accepted_splits_never_raise_impurity(seed in any::<u64>(), n in 4usize..80) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(0..6) as f64);
            let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let t = DecisionTree::fit(x.view(), &y, &TreeParams::default());
            for node in &t.nodes {
                if let Node::Split { left, right, samples, impurity, .. } = node {
                    let (l, r) = (&t.nodes[*left], &t.nodes[*right]);
                    prop_assert_eq!(l.samples() + r.samples(), *samples);
                    let weighted = (l.samples() as f64 * l.impurity() + r.samples() as f64 * r.impurity())
                        / *samples as f64;
                    prop_assert!(weighted <= impurity + 1e-12);
                }
            }
        }

        #[test]
        fn row_order_does_not_matter(seed in any::<u64>(), n in 4usize..60) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>());
            let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let rev: Vec<usize> = (0..n).rev().collect();
            let xr = x.select(ndarray::Axis(0), &rev);
            let yr: Vec<u8> = rev.iter().map(|&i| y[i]).collect();
            let a = DecisionTree::fit(x.view(), &y, &TreeParams::default());
            let b = DecisionTree::fit(xr.view(), &yr, &TreeParams::default());
            for row in x.outer_iter() {
                let r = row.as_slice().unwrap();
                prop_assert_eq!(a.predict_row(r), b.predict_row(r));
            }
        }
    }
}
