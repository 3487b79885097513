//! CART-style binary decision tree with Gini impurity over sparse features.
//!
//! Splits are thresholds at midpoints between consecutive distinct observed
//! values of one feature. A sample goes left iff `x[feature] <= threshold`.
//! Sparse vectors carry an implicit zero for every absent feature, so each
//! feature's candidate values are its nonzero values plus 0 whenever at
//! least one sample at the node lacks the feature.
//!
//! Nodes are stored in an arena and grown with an explicit stack.

use crate::error::{Error, Result};
use crate::vectorize::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    /// `None` grows until every leaf is pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::invalid("min_samples_split must be at least 2"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::invalid("max_depth must be positive"));
        }
        Ok(())
    }
}

/// Class counts `[negatives, positives]`.
pub type ClassCounts = [u64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    Leaf {
        label: bool,
        class_counts: ClassCounts,
    },
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

impl TreeNode {
    /// Majority label; ties go to the negative class.
    pub fn leaf(class_counts: ClassCounts) -> Self {
        TreeNode::Leaf {
            label: class_counts[1] > class_counts[0],
            class_counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
    dimension: usize,
}

/// `1 - p0^2 - p1^2`.
pub fn gini_impurity(counts: ClassCounts) -> Result<f64> {
    let total = counts[0] + counts[1];
    if total == 0 {
        return Err(Error::invalid("gini impurity of an empty node"));
    }
    Ok(gini(counts[0], counts[1]))
}

fn gini(c0: u64, c1: u64) -> f64 {
    let n = (c0 + c1) as f64;
    let p0 = c0 as f64 / n;
    let p1 = c1 as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

/// Child-size-weighted Gini of a binary partition.
pub fn weighted_impurity(left: ClassCounts, right: ClassCounts) -> f64 {
    let nl = (left[0] + left[1]) as f64;
    let nr = (right[0] + right[1]) as f64;
    let mut acc = 0.0;
    if nl > 0.0 {
        acc += nl * gini(left[0], left[1]);
    }
    if nr > 0.0 {
        acc += nr * gini(right[0], right[1]);
    }
    acc / (nl + nr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub weighted_impurity: f64,
}

/// Best threshold split over `candidate_features`, or `None` when no split
/// lowers the impurity. Ties resolve to the lowest feature, then the lowest
/// threshold.
///
/// Training uses the same search but also accepts a split that leaves the
/// impurity unchanged; an impure node becomes a leaf only when its samples
/// cannot be separated.
pub fn best_split(xs: &[SparseVector], ys: &[bool], candidate_features: &[usize]) -> Option<Split> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mut allowed = candidate_features.to_vec();
    allowed.sort_unstable();
    allowed.dedup();
    let samples: Vec<usize> = (0..xs.len()).collect();
    let [neg, pos] = count_classes(ys, &samples);
    let parent = gini(neg, pos);
    find_split(xs, ys, &samples, |f| allowed.binary_search(&f).is_ok())
        .filter(|b| b.weighted_impurity < parent)
}

fn count_classes(ys: &[bool], samples: &[usize]) -> ClassCounts {
    let pos = samples.iter().filter(|&&i| ys[i]).count() as u64;
    [samples.len() as u64 - pos, pos]
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

/// Lowest-impurity split of an impure node, whether or not it improves on
/// the parent. `None` for pure nodes and nodes whose samples are identical.
fn find_split(
    xs: &[SparseVector],
    ys: &[bool],
    samples: &[usize],
    allow: impl Fn(usize) -> bool,
) -> Option<Split> {
    let total = count_classes(ys, samples);
    if total[0] == 0 || total[1] == 0 {
        return None;
    }

    let mut triples: Vec<(usize, f64, bool)> = samples
        .iter()
        .flat_map(|&i| xs[i].entries().iter().map(move |&(f, v)| (f, v, ys[i])))
        .filter(|&(f, _, _)| allow(f))
        .collect();
    triples.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut best: Option<Split> = None;
    let mut groups: Vec<(f64, ClassCounts)> = Vec::new();
    for run in triples.chunk_by(|a, b| a.0 == b.0) {
        let feature = run[0].0;
        groups.clear();
        let mut nonzero = [0u64; 2];
        for &(_, v, y) in run {
            nonzero[usize::from(y)] += 1;
            match groups.last_mut() {
                Some((last, counts)) if *last == v => counts[usize::from(y)] += 1,
                _ => {
                    let mut counts = [0, 0];
                    counts[usize::from(y)] = 1;
                    groups.push((v, counts));
                }
            }
        }
        let zeros = [total[0] - nonzero[0], total[1] - nonzero[1]];
        if zeros[0] + zeros[1] > 0 {
            let pos = groups.partition_point(|&(v, _)| v < 0.0);
            groups.insert(pos, (0.0, zeros));
        }

        let mut left = [0u64; 2];
        for k in 0..groups.len().saturating_sub(1) {
            left[0] += groups[k].1[0];
            left[1] += groups[k].1[1];
            let right = [total[0] - left[0], total[1] - left[1]];
            let impurity = weighted_impurity(left, right);
            if best.is_none_or(|b| impurity < b.weighted_impurity) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(groups[k].0, groups[k + 1].0),
                    weighted_impurity: impurity,
                });
            }
        }
    }
    best
}

impl TreeModel {
    pub fn train(xs: &[SparseVector], ys: &[bool], config: &TreeConfig) -> Result<Self> {
        config.validate()?;
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!(
                "{} feature vectors but {} labels",
                xs.len(),
                ys.len()
            )));
        }
        let Some(first) = xs.first() else {
            return Err(Error::invalid("cannot train a tree on zero samples"));
        };
        let dimension = first.dimension();
        if let Some(x) = xs.iter().find(|x| x.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: x.dimension(),
            });
        }

        let mut nodes = vec![TreeNode::leaf([0, 0])];
        let mut pending = vec![(0usize, (0..xs.len()).collect::<Vec<_>>(), 0usize)];
        while let Some((slot, samples, depth)) = pending.pop() {
            let counts = count_classes(ys, &samples);
            let may_split = samples.len() >= config.min_samples_split
                && config.max_depth.is_none_or(|d| depth < d);
            let split = if may_split {
                find_split(xs, ys, &samples, |_| true)
            } else {
                None
            };
            let Some(split) = split else {
                nodes[slot] = TreeNode::leaf(counts);
                continue;
            };
            let (left, right): (Vec<usize>, Vec<usize>) = samples
                .into_iter()
                .partition(|&i| xs[i].get(split.feature) <= split.threshold);
            let left_slot = nodes.len();
            let right_slot = left_slot + 1;
            nodes.push(TreeNode::leaf([0, 0]));
            nodes.push(TreeNode::leaf([0, 0]));
            nodes[slot] = TreeNode::Internal {
                feature: split.feature,
                threshold: split.threshold,
                left: left_slot,
                right: right_slot,
            };
            pending.push((right_slot, right, depth + 1));
            pending.push((left_slot, left, depth + 1));
        }
        Ok(TreeModel { nodes, dimension })
    }

    /// Builds a model from nodes listed in pre-order (each internal node
    /// followed by its whole left subtree, then its right subtree). Child
    /// links in the input are ignored and recomputed.
    pub fn from_preorder(preorder: Vec<PreorderNode>, dimension: usize) -> Result<Self> {
        if preorder.is_empty() {
            return Err(Error::invalid("a tree needs at least one node"));
        }
        let mut nodes: Vec<TreeNode> = Vec::with_capacity(preorder.len());
        // Internal nodes whose left (false) or right (true) child is next.
        let mut open: Vec<(usize, bool)> = Vec::new();
        for (pos, node) in preorder.into_iter().enumerate() {
            if pos > 0 && open.is_empty() {
                return Err(Error::invalid("trailing nodes after a complete tree"));
            }
            let slot = nodes.len();
            if let Some((parent, right_side)) = open.pop() {
                if let TreeNode::Internal { left, right, .. } = &mut nodes[parent] {
                    if right_side {
                        *right = slot;
                    } else {
                        *left = slot;
                        open.push((parent, true));
                    }
                }
            }
            match node {
                PreorderNode::Leaf { label, class_counts } => {
                    nodes.push(TreeNode::Leaf { label, class_counts })
                }
                PreorderNode::Internal { feature, threshold } => {
                    if feature >= dimension {
                        return Err(Error::invalid(format!(
                            "split feature {feature} outside dimension {dimension}"
                        )));
                    }
                    nodes.push(TreeNode::Internal {
                        feature,
                        threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                    });
                    open.push((slot, false));
                }
            }
        }
        if !open.is_empty() {
            return Err(Error::invalid("tree ends before every internal node has two children"));
        }
        Ok(TreeModel { nodes, dimension })
    }

    /// Nodes in pre-order, the layout used for persistence.
    pub fn preorder(&self) -> Vec<PreorderNode> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            match self.nodes[i] {
                TreeNode::Leaf { label, class_counts } => {
                    out.push(PreorderNode::Leaf { label, class_counts })
                }
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    out.push(PreorderNode::Internal { feature, threshold });
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, index: usize) -> &TreeNode {
        &self.nodes[index]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Number of internal nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match self.nodes[i] {
                TreeNode::Leaf { .. } => deepest = deepest.max(d),
                TreeNode::Internal { left, right, .. } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
            }
        }
        deepest
    }

    /// Leaf reached by `x`, plus the number of internal nodes visited.
    pub fn leaf_for(&self, x: &SparseVector) -> Result<(&TreeNode, usize)> {
        if x.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.dimension(),
            });
        }
        let mut i = 0;
        let mut steps = 0;
        loop {
            match &self.nodes[i] {
                leaf @ TreeNode::Leaf { .. } => return Ok((leaf, steps)),
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x.get(*feature) <= *threshold { *left } else { *right };
                    steps += 1;
                }
            }
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<bool> {
        match self.leaf_for(x)?.0 {
            TreeNode::Leaf { label, .. } => Ok(*label),
            TreeNode::Internal { .. } => unreachable!("leaf_for returns leaves"),
        }
    }
}

/// A node without child links, as it appears in pre-order serialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PreorderNode {
    Leaf { label: bool, class_counts: ClassCounts },
    Internal { feature: usize, threshold: f64 },
}
