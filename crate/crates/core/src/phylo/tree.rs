use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use super::{validate_steps, MergeStep};
use crate::dataset::LanguageCode;
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Set on leaves only.
    pub label: Option<String>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub height: f64,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Rooted tree stored as a node arena. Leaves carry unique labels, internal
/// nodes have at least two children and no label.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: usize,
}

impl PhyloTree {
    /// Builds a tree from `(label, children, height)` triples; parent links are
    /// derived. Fails unless the arena forms a single tree whose leaves are
    /// labelled uniquely and whose internal nodes branch.
    pub fn from_parts(parts: Vec<(Option<String>, Vec<usize>, f64)>) -> Result<Self> {
        let n = parts.len();
        if n == 0 {
            return Err(Error::InvalidTree("tree has no nodes".into()));
        }
        let mut nodes: Vec<Node> = parts
            .into_iter()
            .map(|(label, children, height)| Node {
                label,
                children,
                parent: None,
                height,
            })
            .collect();
        for p in 0..n {
            for c in nodes[p].children.clone() {
                if c >= n || c == p || nodes[c].parent.is_some() {
                    return Err(Error::InvalidTree(format!("node {c} has a bad parent link")));
                }
                nodes[c].parent = Some(p);
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&i| nodes[i].parent.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidTree(format!("expected one root, found {}", roots.len())));
        }
        let tree = PhyloTree { nodes, root: roots[0] };
        if tree.postorder().len() != n {
            return Err(Error::InvalidTree("node arena contains a cycle".into()));
        }
        let mut seen = HashSet::new();
        for node in &tree.nodes {
            if !node.height.is_finite() {
                return Err(Error::InvalidTree("non-finite node height".into()));
            }
            match (node.is_leaf(), &node.label) {
                (true, Some(l)) if !l.is_empty() => {
                    if !seen.insert(l.clone()) {
                        return Err(Error::InvalidTree(format!("duplicate leaf label {l}")));
                    }
                }
                (true, _) => return Err(Error::InvalidTree("leaf without a label".into())),
                (false, _) if node.children.len() < 2 => {
                    return Err(Error::InvalidTree("internal node with a single child".into()))
                }
                (false, Some(l)) => return Err(Error::InvalidTree(format!("internal node labelled {l}"))),
                (false, None) => {}
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Total node count, leaves included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf ids in ascending arena order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Leaf labels in the order of [`PhyloTree::leaves`].
    pub fn leaf_labels(&self) -> Vec<&str> {
        self.leaves()
            .into_iter()
            .map(|i| self.nodes[i].label.as_deref().unwrap_or_default())
            .collect()
    }

    /// Node ids in postorder (children left to right, then the parent).
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded || self.nodes[id].is_leaf() {
                out.push(id);
            } else {
                stack.push((id, true));
                for &c in self.nodes[id].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Heights made nondecreasing towards the root by a running maximum.
    pub fn monotone_heights(&self) -> Vec<f64> {
        let mut h: Vec<f64> = self.nodes.iter().map(|n| n.height).collect();
        for id in self.postorder() {
            for &c in &self.nodes[id].children {
                h[id] = h[id].max(h[c]);
            }
        }
        h
    }

    /// Smallest leaf label below each node.
    fn min_labels(&self) -> Vec<String> {
        let mut min = vec![String::new(); self.nodes.len()];
        for id in self.postorder() {
            let node = &self.nodes[id];
            min[id] = match &node.label {
                Some(l) if node.is_leaf() => l.clone(),
                _ => node.children.iter().map(|&c| min[c].clone()).min().unwrap_or_default(),
            };
        }
        min
    }

    /// Copy with every child list sorted by the smallest leaf label of each
    /// child's subtree, renumbered in preorder.
    pub fn canonicalized(&self) -> PhyloTree {
        let min = self.min_labels();
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        let mut sorted: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|n| {
                let mut c = n.children.clone();
                c.sort_by(|&a, &b| min[a].cmp(&min[b]));
                c
            })
            .collect();
        while let Some(id) = stack.pop() {
            order.push(id);
            stack.extend(sorted[id].iter().rev());
        }
        let new_id: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &o)| (o, k)).collect();
        let nodes = order
            .iter()
            .map(|&o| Node {
                label: self.nodes[o].label.clone(),
                children: std::mem::take(&mut sorted[o]).iter().map(|c| new_id[c]).collect(),
                parent: self.nodes[o].parent.map(|p| new_id[&p]),
                height: self.nodes[o].height,
            })
            .collect();
        PhyloTree { nodes, root: 0 }
    }

    /// Equality up to child order, with heights compared within `tol`.
    pub fn same_shape(&self, other: &PhyloTree, tol: f64) -> bool {
        let (a, b) = (self.canonicalized(), other.canonicalized());
        a.nodes.len() == b.nodes.len()
            && a.nodes
                .iter()
                .zip(&b.nodes)
                .all(|(x, y)| x.label == y.label && x.children == y.children && (x.height - y.height).abs() <= tol)
    }

    /// Subtree spanned by the given leaves. Nodes left with a single child
    /// are spliced out; heights are kept.
    pub fn restrict<S: AsRef<str>>(&self, keep: &[S]) -> Result<PhyloTree> {
        let present: HashMap<&str, usize> = self
            .leaves()
            .into_iter()
            .map(|i| (self.nodes[i].label.as_deref().unwrap_or_default(), i))
            .collect();
        let mut wanted = vec![false; self.nodes.len()];
        for label in keep {
            let id = present
                .get(label.as_ref())
                .ok_or_else(|| Error::InvalidTree(format!("no leaf labelled {}", label.as_ref())))?;
            wanted[*id] = true;
        }
        if !wanted.iter().any(|&w| w) {
            return Err(Error::InvalidTree("restriction keeps no leaves".into()));
        }
        // For every node, the surviving representative after splicing.
        let mut rep: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut kept_children: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for id in self.postorder() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                rep[id] = wanted[id].then_some(id);
                continue;
            }
            let kids: Vec<usize> = node.children.iter().filter_map(|&c| rep[c]).collect();
            rep[id] = match kids.len() {
                0 => None,
                1 => Some(kids[0]),
                _ => {
                    kept_children[id] = kids;
                    Some(id)
                }
            };
        }
        let root = rep[self.root].expect("at least one leaf kept");
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            order.push(id);
            stack.extend(kept_children[id].iter().rev());
        }
        let new_id: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &o)| (o, k)).collect();
        let parts = order
            .iter()
            .map(|&o| {
                (
                    self.nodes[o].label.clone(),
                    kept_children[o].iter().map(|c| new_id[c]).collect(),
                    self.nodes[o].height,
                )
            })
            .collect();
        PhyloTree::from_parts(parts)
    }
}

/// Binary dendrogram for a merge list: node `i < n` is the leaf for
/// `labels[i]`, node `n + s` is the cluster formed at step `s`.
pub fn to_tree<S: AsRef<str>>(steps: &[MergeStep], labels: &[S]) -> Result<PhyloTree> {
    let n = steps.len() + 1;
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    validate_steps(steps)?;
    let mut parts: Vec<(Option<String>, Vec<usize>, f64)> = labels
        .iter()
        .map(|l| (Some(l.as_ref().to_owned()), Vec::new(), 0.0))
        .collect();
    parts.extend(steps.iter().map(|m| (None, vec![m.left, m.right], m.height)));
    PhyloTree::from_parts(parts)
}

/// Leaf-by-leaf matrix of lowest-common-ancestor heights, with heights
/// monotonized first. Rows follow [`PhyloTree::leaf_labels`].
pub fn cophenetic_matrix(t: &PhyloTree) -> (Vec<String>, DMatrix<f64>) {
    let leaves = t.leaves();
    let index: HashMap<usize, usize> = leaves.iter().enumerate().map(|(k, &l)| (l, k)).collect();
    let h = t.monotone_heights();
    let mut d = DMatrix::zeros(leaves.len(), leaves.len());
    let mut below: Vec<Vec<usize>> = vec![Vec::new(); t.nodes.len()];
    for id in t.postorder() {
        let node = &t.nodes[id];
        if node.is_leaf() {
            below[id].push(index[&id]);
            continue;
        }
        let mut acc: Vec<usize> = Vec::new();
        for &c in &node.children {
            let part = std::mem::take(&mut below[c]);
            for &a in &acc {
                for &b in &part {
                    d[(a, b)] = h[id];
                    d[(b, a)] = h[id];
                }
            }
            acc.extend(part);
        }
        below[id] = acc;
    }
    let labels = t.leaf_labels().into_iter().map(str::to_owned).collect();
    (labels, d)
}

/// Cophenetic distances for a tree whose leaves are language codes.
pub fn cophenetic(t: &PhyloTree) -> Result<DistanceMatrix> {
    let (labels, d) = cophenetic_matrix(t);
    let codes = labels.iter().map(LanguageCode::new).collect::<Result<Vec<_>>>()?;
    DistanceMatrix::new(codes, d)
}
