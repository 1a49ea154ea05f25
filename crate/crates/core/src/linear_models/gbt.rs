use serde::{Deserialize, Serialize};

use super::{accuracy_of, bce_logit, check_training, sigmoid, Classifier};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub rounds: usize,
    pub eta: f64,
    pub max_depth: usize,
    /// Unused: split search is exhaustive and deterministic.
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            rounds: 100,
            eta: 0.1,
            max_depth: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn eval(&self, x: &SparseVector) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x.get(feature) <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostedTreesModel {
    pub n_features: usize,
    pub init_log_odds: f64,
    pub eta: f64,
    pub max_depth: usize,
    pub trees: Vec<Tree>,
    /// Mean training log-loss before the first round and after each round.
    pub loss_trace: Vec<f64>,
    pub train_accuracy: f64,
}

struct Columns {
    /// Per feature, the nonzero `(row, value)` pairs sorted by value then row.
    cols: Vec<Vec<(usize, f64)>>,
}

impl Columns {
    fn new(x: &[SparseVector], dim: usize) -> Self {
        let mut cols = vec![Vec::new(); dim];
        for (i, r) in x.iter().enumerate() {
            for (j, v) in r.iter() {
                cols[j].push((i, v));
            }
        }
        for c in &mut cols {
            c.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        }
        Columns { cols }
    }
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Exhaustive variance-reduction search. `gain = sL^2/nL + sR^2/nR - s^2/n`;
/// ties keep the lower feature index, then the lower threshold.
fn best_split(cols: &Columns, rows: &[usize], in_node: &[bool], resid: &[f64]) -> Option<Best> {
    let n = rows.len() as f64;
    let total: f64 = rows.iter().map(|&i| resid[i]).sum();
    let base = total * total / n;
    let mut best: Option<Best> = None;
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for (j, col) in cols.cols.iter().enumerate() {
        groups.clear();
        let mut nz_count = 0.0;
        let mut nz_sum = 0.0;
        let mut zero_placed = false;
        for &(i, v) in col.iter().filter(|(i, _)| in_node[*i]) {
            if !zero_placed && v > 0.0 {
                groups.push((0.0, 0.0, 0.0));
                zero_placed = true;
            }
            nz_count += 1.0;
            nz_sum += resid[i];
            match groups.last_mut() {
                Some(g) if g.0 == v => {
                    g.1 += 1.0;
                    g.2 += resid[i];
                }
                _ => groups.push((v, 1.0, resid[i])),
            }
        }
        if nz_count == 0.0 {
            continue;
        }
        if !zero_placed {
            groups.push((0.0, 0.0, 0.0));
        }
        let zero_count = n - nz_count;
        let zero_sum = total - nz_sum;
        for g in groups.iter_mut().filter(|g| g.0 == 0.0) {
            g.1 = zero_count;
            g.2 = zero_sum;
        }
        groups.retain(|g| g.1 > 0.0);
        let (mut lc, mut ls) = (0.0, 0.0);
        for w in groups.windows(2) {
            lc += w[0].1;
            ls += w[0].2;
            let (rc, rs) = (n - lc, total - ls);
            let gain = ls * ls / lc + rs * rs / rc - base;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Best {
                    gain,
                    feature: j,
                    threshold: midpoint(w[0].0, w[1].0),
                });
            }
        }
    }
    best
}

fn grow(
    tree: &mut Tree,
    cols: &Columns,
    x: &[SparseVector],
    rows: Vec<usize>,
    in_node: &mut [bool],
    resid: &[f64],
    depth_left: usize,
) -> usize {
    let id = tree.nodes.len();
    let mean = rows.iter().map(|&i| resid[i]).sum::<f64>() / rows.len() as f64;
    tree.nodes.push(Node::Leaf { value: mean });
    if depth_left == 0 || rows.len() < 2 {
        return id;
    }
    rows.iter().for_each(|&i| in_node[i] = true);
    let split = best_split(cols, &rows, in_node, resid);
    rows.iter().for_each(|&i| in_node[i] = false);
    let Some(split) = split else {
        return id;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| x[i].get(split.feature) <= split.threshold);
    let left = grow(tree, cols, x, l, in_node, resid, depth_left - 1);
    let right = grow(tree, cols, x, r, in_node, resid, depth_left - 1);
    tree.nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}

fn mean_log_loss(f: &[f64], y: &[u8]) -> f64 {
    f.iter().zip(y).map(|(&z, &l)| bce_logit(z, l)).sum::<f64>() / y.len() as f64
}

/// Stagewise boosting on the logistic loss. Each tree is fit to the
/// residuals `y - p` and its leaves hold the mean residual.
pub fn fit_gbt(x: &[SparseVector], y: &[u8], cfg: &GbtConfig) -> Result<GradientBoostedTreesModel> {
    if !(cfg.eta >= 0.0 && cfg.eta.is_finite()) {
        return Err(Error::invalid(format!(
            "eta must be finite and non-negative, got {}",
            cfg.eta
        )));
    }
    let dim = check_training(x, y)?;
    let ones = y.iter().filter(|&&l| l == 1).count() as f64;
    let p0 = ones / y.len() as f64;
    let init = (p0 / (1.0 - p0)).ln();
    let cols = Columns::new(x, dim);
    let mut f = vec![init; x.len()];
    let mut trace = vec![mean_log_loss(&f, y)];
    let mut trees = Vec::with_capacity(cfg.rounds);
    let mut in_node = vec![false; x.len()];
    for _ in 0..cfg.rounds {
        let resid: Vec<f64> = f
            .iter()
            .zip(y)
            .map(|(&z, &l)| f64::from(l) - sigmoid(z))
            .collect();
        let mut tree = Tree { nodes: Vec::new() };
        grow(
            &mut tree,
            &cols,
            x,
            (0..x.len()).collect(),
            &mut in_node,
            &resid,
            cfg.max_depth,
        );
        for (fi, r) in f.iter_mut().zip(x) {
            *fi += cfg.eta * tree.eval(r);
        }
        trace.push(mean_log_loss(&f, y));
        trees.push(tree);
    }
    let mut model = GradientBoostedTreesModel {
        n_features: dim,
        init_log_odds: init,
        eta: cfg.eta,
        max_depth: cfg.max_depth,
        trees,
        loss_trace: trace,
        train_accuracy: 0.0,
    };
    model.train_accuracy = accuracy_of(&model, x, y);
    Ok(model)
}

impl GradientBoostedTreesModel {
    pub fn raw_score(&self, x: &SparseVector) -> f64 {
        self.init_log_odds + self.eta * self.trees.iter().map(|t| t.eval(x)).sum::<f64>()
    }
}

impl Classifier for GradientBoostedTreesModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn proba_unchecked(&self, x: &SparseVector) -> f64 {
        sigmoid(self.raw_score(x))
    }
}
