//! Regression trees grown by exact greedy Newton splits.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { value: f64 },
}

/// Flat binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    /// Index of the leaf a feature row falls into.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] < threshold { left } else { right },
                TreeNode::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            TreeNode::Leaf { value } => value,
            TreeNode::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitRules {
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

/// Column-major copy of the training features plus each column's row order
/// sorted by value. Built once per fit and shared by every tree.
pub(crate) struct SortedColumns {
    n_rows: usize,
    columns: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
    sorted: Vec<Vec<f64>>,
}

impl SortedColumns {
    pub fn new(features: &[f64], n_rows: usize, n_cols: usize) -> Self {
        let columns: Vec<Vec<f64>> = (0..n_cols)
            .map(|c| (0..n_rows).map(|r| features[r * n_cols + c]).collect())
            .collect();
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n_rows as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect::<Vec<Vec<u32>>>();
        let sorted = columns
            .iter()
            .zip(&order)
            .map(|(col, idx)| idx.iter().map(|&r| col[r as usize]).collect())
            .collect();
        SortedColumns {
            n_rows,
            columns,
            order,
            sorted,
        }
    }
}

#[derive(Clone, Copy)]
struct NodeStats {
    grad: f64,
    hess: f64,
    count: usize,
    depth: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    left_grad: f64,
    left_hess: f64,
    left_count: usize,
}

#[derive(Clone, Copy, Default)]
struct Running {
    grad: f64,
    hess: f64,
    count: usize,
    last: f64,
}

struct Scan {
    run: Running,
    parent_grad: f64,
    parent_hess: f64,
    parent_score: f64,
    best_gain: f64,
    best: Option<Candidate>,
}

const INACTIVE: usize = usize::MAX;

fn score(grad: f64, hess: f64, lambda: f64) -> f64 {
    let den = hess + lambda;
    if den > 0.0 {
        grad * grad / den
    } else {
        0.0
    }
}

pub(crate) fn leaf_value(grad: f64, hess: f64, lambda: f64) -> f64 {
    let den = hess + lambda;
    if den > 0.0 {
        -grad / den
    } else {
        0.0
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + 0.5 * (b - a);
    // Adjacent floats: fall back to `b` so that `a < threshold` still holds.
    if mid > a && mid <= b {
        mid
    } else {
        b
    }
}

/// Grows one tree level by level. On return `leaf_of[r]` is the index of the
/// leaf that training row `r` ends in.
pub(crate) fn grow_tree(
    data: &SortedColumns,
    grad: &[f64],
    hess: &[f64],
    rules: SplitRules,
    leaf_of: &mut [usize],
) -> RegressionTree {
    let n = data.n_rows;
    leaf_of.iter_mut().for_each(|l| *l = 0);
    let mut nodes = vec![TreeNode::Leaf { value: 0.0 }];
    let mut stats = vec![NodeStats {
        grad: grad.iter().sum(),
        hess: hess.iter().sum(),
        count: n,
        depth: 0,
    }];
    let mut frontier = vec![0usize];

    while !frontier.is_empty() {
        // Map node id -> slot in this level's scan state.
        let mut slot_of = vec![INACTIVE; nodes.len()];
        let mut active = Vec::new();
        for &id in &frontier {
            let s = stats[id];
            if s.depth < rules.max_depth && s.count >= 2 && s.hess > 0.0 {
                slot_of[id] = active.len();
                active.push(id);
            }
        }
        if active.is_empty() {
            break;
        }

        let slot_of_row: Vec<usize> = leaf_of.iter().map(|&l| slot_of[l]).collect();
        let gh: Vec<(f64, f64)> = grad.iter().copied().zip(hess.iter().copied()).collect();
        let mut scans: Vec<Scan> = active
            .iter()
            .map(|&id| {
                let s = stats[id];
                Scan {
                    run: Running::default(),
                    parent_grad: s.grad,
                    parent_hess: s.hess,
                    parent_score: score(s.grad, s.hess, rules.lambda),
                    best_gain: f64::NEG_INFINITY,
                    best: None,
                }
            })
            .collect();
        for (feature, (order, values)) in data.order.iter().zip(&data.sorted).enumerate() {
            scans.iter_mut().for_each(|s| s.run = Running::default());
            for (&row, &x) in order.iter().zip(values) {
                let row = row as usize;
                let slot = slot_of_row[row];
                if slot == INACTIVE {
                    continue;
                }
                let scan = &mut scans[slot];
                let run = &mut scan.run;
                if run.count > 0 && x > run.last {
                    let (gl, hl) = (run.grad, run.hess);
                    let (gr, hr) = (scan.parent_grad - gl, scan.parent_hess - hl);
                    if hl >= rules.min_child_weight && hr >= rules.min_child_weight {
                        let gain = 0.5
                            * (score(gl, hl, rules.lambda) + score(gr, hr, rules.lambda) - scan.parent_score)
                            - rules.gamma;
                        // Strict improvement keeps the lowest feature, then the
                        // lowest threshold, among equal gains.
                        if gain > scan.best_gain {
                            scan.best_gain = gain;
                            scan.best = Some(Candidate {
                                gain,
                                feature,
                                threshold: midpoint(run.last, x),
                                left_grad: gl,
                                left_hess: hl,
                                left_count: run.count,
                            });
                        }
                    }
                }
                let (g, h) = gh[row];
                run.grad += g;
                run.hess += h;
                run.count += 1;
                run.last = x;
            }
        }

        let mut next = Vec::new();
        let mut split_of = vec![None; active.len()];
        for (slot, &id) in active.iter().enumerate() {
            let Some(c) = scans[slot].best.filter(|c| c.gain > 0.0) else {
                continue;
            };
            let parent = stats[id];
            let left = nodes.len();
            let right = left + 1;
            nodes.push(TreeNode::Leaf { value: 0.0 });
            nodes.push(TreeNode::Leaf { value: 0.0 });
            stats.push(NodeStats {
                grad: c.left_grad,
                hess: c.left_hess,
                count: c.left_count,
                depth: parent.depth + 1,
            });
            stats.push(NodeStats {
                grad: parent.grad - c.left_grad,
                hess: parent.hess - c.left_hess,
                count: parent.count - c.left_count,
                depth: parent.depth + 1,
            });
            nodes[id] = TreeNode::Split {
                feature: c.feature,
                threshold: c.threshold,
                left,
                right,
            };
            split_of[slot] = Some((c.feature, c.threshold, left, right));
            next.push(left);
            next.push(right);
        }

        for (row, node) in leaf_of.iter_mut().enumerate() {
            let slot = slot_of.get(*node).copied().unwrap_or(INACTIVE);
            if slot == INACTIVE {
                continue;
            }
            if let Some((feature, threshold, left, right)) = split_of[slot] {
                *node = if data.columns[feature][row] < threshold { left } else { right };
            }
        }
        frontier = next;
    }

    // Leaf values from the instances that actually reach each leaf.
    let mut sums = vec![(0.0f64, 0.0f64); nodes.len()];
    for (row, &leaf) in leaf_of.iter().enumerate() {
        sums[leaf].0 += grad[row];
        sums[leaf].1 += hess[row];
    }
    for (node, &(g, h)) in nodes.iter_mut().zip(&sums) {
        if let TreeNode::Leaf { value } = node {
            *value = leaf_value(g, h, rules.lambda);
        }
    }
    RegressionTree { nodes }
}
