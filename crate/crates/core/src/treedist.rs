//! Ordered tree edit distance and its normalized form.
//!
//! Distances are computed with the Zhang–Shasha keyroot dynamic program.
//! Leaves are compared by label and all internal nodes share one blank label,
//! so only topology and leaf placement matter. Child order matters to the
//! ordered distance, which is why trees are canonicalized before comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phylo::PhyloTree;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditCost {
    pub insert: f64,
    pub delete: f64,
    pub rename: f64,
}

impl Default for EditCost {
    fn default() -> Self {
        EditCost {
            insert: 1.0,
            delete: 1.0,
            rename: 1.0,
        }
    }
}

impl EditCost {
    pub fn new(insert: f64, delete: f64, rename: f64) -> Result<Self> {
        let c = EditCost { insert, delete, rename };
        if [insert, delete, rename].iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(c)
        } else {
            Err(Error::InvalidArgument(format!(
                "edit costs must be finite and nonnegative: {c:?}"
            )))
        }
    }
}

/// Rooted ordered tree with a label on every node. Dendrograms convert to
/// this form with an empty label on internal nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    labels: Vec<String>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl LabeledTree {
    pub fn leaf(label: impl Into<String>) -> Self {
        LabeledTree::node(label, Vec::new())
    }

    /// A node over the given subtrees, kept in order.
    pub fn node(label: impl Into<String>, subtrees: Vec<LabeledTree>) -> Self {
        let mut labels = vec![label.into()];
        let mut children = vec![Vec::new()];
        for sub in subtrees {
            let offset = labels.len();
            children[0].push(offset + sub.root);
            labels.extend(sub.labels);
            children.extend(
                sub.children
                    .into_iter()
                    .map(|c| c.into_iter().map(|k| k + offset).collect()),
            );
        }
        LabeledTree {
            labels,
            children,
            root: 0,
        }
    }

    pub fn from_phylo(t: &PhyloTree) -> Self {
        LabeledTree {
            labels: t.nodes().iter().map(|n| n.label.clone().unwrap_or_default()).collect(),
            children: t.nodes().iter().map(|n| n.children.clone()).collect(),
            root: t.root(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Node ids in postorder.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded || self.children[id].is_empty() {
                out.push(id);
            } else {
                stack.push((id, true));
                stack.extend(self.children[id].iter().rev().map(|&c| (c, false)));
            }
        }
        out
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    pub fn root(&self) -> usize {
        self.root
    }
}

/// Postorder arrays: labels, leftmost leaf per node, and keyroots.
struct Prepared<'a> {
    labels: Vec<&'a str>,
    leftmost: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Prepared<'a> {
    fn new(t: &'a LabeledTree) -> Self {
        let order = t.postorder();
        let mut index = vec![0; t.len()];
        for (k, &id) in order.iter().enumerate() {
            index[id] = k;
        }
        let mut leftmost = vec![0; order.len()];
        for (k, &id) in order.iter().enumerate() {
            leftmost[k] = match t.children[id].first() {
                Some(&c) => leftmost[index[c]],
                None => k,
            };
        }
        // A keyroot is the highest node with a given leftmost leaf.
        let mut seen = vec![false; order.len()];
        let mut keyroots = Vec::new();
        for k in (0..order.len()).rev() {
            if !seen[leftmost[k]] {
                seen[leftmost[k]] = true;
                keyroots.push(k);
            }
        }
        keyroots.reverse();
        Prepared {
            labels: order.iter().map(|&id| t.labels[id].as_str()).collect(),
            leftmost,
            keyroots,
        }
    }
}

/// Exact ordered tree edit distance between `a` and `b` in their stored
/// child order.
pub fn ted(a: &PhyloTree, b: &PhyloTree, cost: EditCost) -> f64 {
    ted_labeled(&LabeledTree::from_phylo(a), &LabeledTree::from_phylo(b), cost)
}

/// Exact ordered tree edit distance between two general labeled trees.
pub fn ted_labeled(a: &LabeledTree, b: &LabeledTree, cost: EditCost) -> f64 {
    let (pa, pb) = (Prepared::new(a), Prepared::new(b));
    let (n, m) = (pa.labels.len(), pb.labels.len());
    let mut td = vec![0.0; n * m];
    let mut fd = vec![0.0; (n + 1) * (m + 1)];
    let w = m + 1;

    for &i in &pa.keyroots {
        for &j in &pb.keyroots {
            let (li, lj) = (pa.leftmost[i], pb.leftmost[j]);
            // fd[x * w + y]: forest li..li+x of `a` against lj..lj+y of `b`.
            let (rows, cols) = (i - li + 1, j - lj + 1);
            fd[0] = 0.0;
            for x in 1..=rows {
                fd[x * w] = fd[(x - 1) * w] + cost.delete;
            }
            for y in 1..=cols {
                fd[y] = fd[y - 1] + cost.insert;
            }
            for x in 1..=rows {
                let ia = li + x - 1;
                for y in 1..=cols {
                    let jb = lj + y - 1;
                    let del = fd[(x - 1) * w + y] + cost.delete;
                    let ins = fd[x * w + y - 1] + cost.insert;
                    let v = if pa.leftmost[ia] == li && pb.leftmost[jb] == lj {
                        let ren = if pa.labels[ia] == pb.labels[jb] {
                            0.0
                        } else {
                            cost.rename
                        };
                        let v = del.min(ins).min(fd[(x - 1) * w + y - 1] + ren);
                        td[ia * m + jb] = v;
                        v
                    } else {
                        let (px, py) = (pa.leftmost[ia] - li, pb.leftmost[jb] - lj);
                        del.min(ins).min(fd[px * w + py] + td[ia * m + jb])
                    };
                    fd[x * w + y] = v;
                }
            }
        }
    }
    td[(n - 1) * m + (m - 1)]
}

/// Child lists sorted by the smallest leaf label below each child.
pub fn canonicalize(t: &PhyloTree) -> PhyloTree {
    t.canonicalized()
}

/// Edit distance divided by the cost of deleting every node of one tree and
/// inserting every node of the other under unit costs.
pub fn napted(ted_value: f64, a: &PhyloTree, b: &PhyloTree) -> Result<f64> {
    let total = a.len() + b.len();
    if total == 0 || a.is_empty() || b.is_empty() {
        return Err(Error::InvalidTree("cannot normalize against an empty tree".into()));
    }
    if !(ted_value.is_finite() && ted_value >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "edit distance {ted_value} is not a nonnegative number"
        )));
    }
    Ok(ted_value / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreeComparison {
    pub ted: f64,
    pub napted: f64,
    pub nodes_a: usize,
    pub nodes_b: usize,
    pub leaves_a: usize,
    pub leaves_b: usize,
}

/// Canonicalizes both trees and reports unit-cost TED and nAPTED.
pub fn compare(a: &PhyloTree, b: &PhyloTree) -> Result<TreeComparison> {
    let (ca, cb) = (canonicalize(a), canonicalize(b));
    let d = ted(&ca, &cb, EditCost::default());
    Ok(TreeComparison {
        ted: d,
        napted: napted(d, &ca, &cb)?,
        nodes_a: ca.len(),
        nodes_b: cb.len(),
        leaves_a: ca.n_leaves(),
        leaves_b: cb.n_leaves(),
    })
}
