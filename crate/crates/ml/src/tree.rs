//! Regression trees grown on gradient statistics.
//!
//! A node holding rows with gradient sum `G`, hessian sum `H` gets the leaf
//! value `-G / (H + λ)` and a split scores
//! `½ [G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ`.
//! With `g = −w·y`, `h = w` and `λ = γ = 0` this is weighted CART with
//! squared-error (variance) reduction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<u32>,
    pub min_samples_leaf: u32,
    /// Features tried per node; `None` tries all.
    pub max_features: Option<usize>,
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
            lambda: 0.0,
            gamma: 0.0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MlError::InvalidHyperparams(m.into()));
        if self.max_depth == Some(0) {
            return bad("max_depth must be at least 1");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1");
        }
        if self.max_features == Some(0) {
            return bad("max_features must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) || !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("lambda and gamma must be finite and non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    /// Plain CART on unit weights.
    pub fn fit(x: &[f64], p: usize, y: &[f64], params: &TreeParams) -> Result<Self> {
        params.validate()?;
        if y.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        if x.len() != y.len() * p {
            return Err(MlError::Shape(format!("{} values for {} rows of {} features", x.len(), y.len(), p)));
        }
        let pre = Presorted::new(x, p);
        let g: Vec<f64> = y.iter().map(|v| -v).collect();
        let ones = vec![1.0; y.len()];
        Ok(pre.grow(&g, &ones, &ones, params, None))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature as usize] <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Column-major copy of a matrix with every column's row order sorted by
/// value (ties by row index). Built once and shared across trees.
#[derive(Debug, Clone)]
pub struct Presorted {
    n: usize,
    cols: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &[f64], p: usize) -> Self {
        let n = x.len().checked_div(p).unwrap_or(0);
        let cols: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| x[i * p + j]).collect()).collect();
        let order = cols
            .iter()
            .map(|c| {
                let mut o: Vec<u32> = (0..n as u32).collect();
                o.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]));
                o
            })
            .collect();
        Self { n, cols, order }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.cols[feature][row]
    }

    /// Grows one tree. Rows with `w == 0` are ignored; `w` also counts
    /// towards `min_samples_leaf`. `rng` drives per-node feature sampling.
    pub fn grow(&self, g: &[f64], h: &[f64], w: &[f64], params: &TreeParams, rng: Option<&mut ChaCha8Rng>) -> RegressionTree {
        Grower::new(self, g, h, w, params, rng).run()
    }
}

struct Task {
    node: usize,
    start: usize,
    end: usize,
    depth: u32,
}

struct Grower<'a> {
    pre: &'a Presorted,
    g: &'a [f64],
    h: &'a [f64],
    w: &'a [f64],
    params: &'a TreeParams,
    rng: Option<&'a mut ChaCha8Rng>,
    /// Active rows: `p` segments of length `m`, each in its column's order.
    idx: Vec<u32>,
    scratch: Vec<u32>,
    m: usize,
    left: Vec<bool>,
    nodes: Vec<Node>,
    features: Vec<usize>,
}

struct Best {
    feature: usize,
    threshold: f64,
    n_left: usize,
}

impl<'a> Grower<'a> {
    fn new(
        pre: &'a Presorted,
        g: &'a [f64],
        h: &'a [f64],
        w: &'a [f64],
        params: &'a TreeParams,
        rng: Option<&'a mut ChaCha8Rng>,
    ) -> Self {
        let p = pre.n_features();
        let m = w.iter().filter(|&&v| v > 0.0).count();
        let mut idx = Vec::with_capacity(p * m);
        for order in &pre.order {
            idx.extend(order.iter().copied().filter(|&i| w[i as usize] > 0.0));
        }
        Self {
            pre,
            g,
            h,
            w,
            params,
            rng,
            scratch: vec![0; idx.len()],
            idx,
            m,
            left: vec![false; pre.n],
            nodes: Vec::new(),
            features: (0..p).collect(),
        }
    }

    fn run(mut self) -> RegressionTree {
        self.nodes.push(Node::Leaf { value: 0.0 });
        let mut stack = vec![Task {
            node: 0,
            start: 0,
            end: self.m,
            depth: 0,
        }];
        while let Some(task) = stack.pop() {
            let (gs, hs, ws) = self.sums(task.start, task.end);
            let best = if self.params.max_depth.is_some_and(|d| task.depth >= d) {
                None
            } else {
                self.best_split(task.start, task.end, gs, hs, ws)
            };
            match best {
                None => {
                    let denom = hs + self.params.lambda;
                    let value = if denom > 0.0 { -gs / denom } else { 0.0 };
                    self.nodes[task.node] = Node::Leaf { value: value + 0.0 };
                }
                Some(b) => {
                    self.partition(task.start, task.end, &b);
                    let left = self.nodes.len();
                    self.nodes.push(Node::Leaf { value: 0.0 });
                    self.nodes.push(Node::Leaf { value: 0.0 });
                    self.nodes[task.node] = Node::Split {
                        feature: b.feature as u32,
                        threshold: b.threshold,
                        left: left as u32,
                        right: left as u32 + 1,
                    };
                    let mid = task.start + b.n_left;
                    stack.push(Task {
                        node: left + 1,
                        start: mid,
                        end: task.end,
                        depth: task.depth + 1,
                    });
                    stack.push(Task {
                        node: left,
                        start: task.start,
                        end: mid,
                        depth: task.depth + 1,
                    });
                }
            }
        }
        RegressionTree { nodes: self.nodes }
    }

    fn sums(&self, start: usize, end: usize) -> (f64, f64, f64) {
        let (mut gs, mut hs, mut ws) = (0.0, 0.0, 0.0);
        for &i in &self.idx[start..end] {
            let i = i as usize;
            gs += self.g[i];
            hs += self.h[i];
            ws += self.w[i];
        }
        (gs, hs, ws)
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.features.len();
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(k), Some(rng)) if k < p => {
                for i in 0..k {
                    let j = rng.random_range(i..p);
                    self.features.swap(i, j);
                }
                let mut chosen = self.features[..k].to_vec();
                chosen.sort_unstable();
                chosen
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, start: usize, end: usize, gs: f64, hs: f64, ws: f64) -> Option<Best> {
        let min_leaf = self.params.min_samples_leaf as f64;
        if end - start < 2 || ws < 2.0 * min_leaf {
            return None;
        }
        let lambda = self.params.lambda;
        let parent = gs * gs / (hs + lambda);
        let mut best: Option<(f64, usize, usize)> = None;
        for f in self.candidate_features() {
            let col = &self.pre.cols[f];
            let seg = &self.idx[f * self.m + start..f * self.m + end];
            let (mut gl, mut hl, mut wl) = (0.0, 0.0, 0.0);
            for k in 0..seg.len() - 1 {
                let i = seg[k] as usize;
                gl += self.g[i];
                hl += self.h[i];
                wl += self.w[i];
                let (v, next) = (col[i], col[seg[k + 1] as usize]);
                if v == next || wl < min_leaf || ws - wl < min_leaf {
                    continue;
                }
                let (gr, hr) = (gs - gl, hs - hl);
                let score = gl * gl / (hl + lambda) + gr * gr / (hr + lambda);
                if best.is_none_or(|(s, _, _)| score > s) {
                    best = Some((score, f, k));
                }
            }
        }
        let (score, feature, k) = best?;
        let gain = 0.5 * (score - parent) - self.params.gamma;
        // Gains at rounding level are not real improvements.
        if !(gain > 1e-12 * (score.abs() + parent.abs()) && gain > 0.0) {
            return None;
        }
        let seg = &self.idx[feature * self.m + start..feature * self.m + end];
        let col = &self.pre.cols[feature];
        let (a, b) = (col[seg[k] as usize], col[seg[k + 1] as usize]);
        let mut threshold = a + (b - a) / 2.0;
        if threshold >= b {
            threshold = a;
        }
        Some(Best {
            feature,
            threshold,
            n_left: k + 1,
        })
    }

    fn partition(&mut self, start: usize, end: usize, best: &Best) {
        let m = self.m;
        for (k, &i) in self.idx[best.feature * m + start..best.feature * m + end].iter().enumerate() {
            self.left[i as usize] = k < best.n_left;
        }
        for f in 0..self.pre.n_features() {
            let seg = &self.idx[f * m + start..f * m + end];
            let out = &mut self.scratch[f * m + start..f * m + end];
            let mut l = 0;
            let mut r = best.n_left;
            for &i in seg {
                if self.left[i as usize] {
                    out[l] = i;
                    l += 1;
                } else {
                    out[r] = i;
                    r += 1;
                }
            }
            debug_assert_eq!(l, best.n_left);
        }
        for f in 0..self.pre.n_features() {
            let range = f * m + start..f * m + end;
            self.idx[range.clone()].copy_from_slice(&self.scratch[range]);
        }
    }
}
