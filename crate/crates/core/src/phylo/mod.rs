//! Hierarchical agglomerative clustering over language distances.
//!
//! Merge heights follow the Lance–Williams recurrence applied to whatever
//! distance matrix is supplied. For Ward this means the coefficients act on
//! cosine distances directly, as if they were squared Euclidean distances;
//! the resulting heights can invert, and inversions are kept in the merge
//! list untouched.

mod newick;
mod tree;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::format_real;
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

pub use newick::{parse_newick, read_newick, write_newick};
pub use tree::{cophenetic, cophenetic_matrix, to_tree, Node, PhyloTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Ward,
    Average,
    Complete,
    Single,
}

impl Linkage {
    pub const ALL: [Linkage; 4] = [Linkage::Ward, Linkage::Average, Linkage::Complete, Linkage::Single];

    pub fn as_str(self) -> &'static str {
        match self {
            Linkage::Ward => "ward",
            Linkage::Average => "average",
            Linkage::Complete => "complete",
            Linkage::Single => "single",
        }
    }

    /// Distance from the union of clusters `i` and `j` to cluster `k`.
    fn update(self, d_ik: f64, d_jk: f64, d_ij: f64, n_i: f64, n_j: f64, n_k: f64) -> f64 {
        match self {
            Linkage::Single => d_ik.min(d_jk),
            Linkage::Complete => d_ik.max(d_jk),
            Linkage::Average => (n_i * d_ik + n_j * d_jk) / (n_i + n_j),
            Linkage::Ward => ((n_i + n_k) * d_ik + (n_j + n_k) * d_jk - n_k * d_ij) / (n_i + n_j + n_k),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Linkage::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown linkage {s:?}")))
    }
}

/// One agglomeration step. Leaves are clusters `0..n`; the cluster created
/// by step `s` gets id `n + s`. `left < right` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Runs agglomerative clustering and returns the `n − 1` merges in order.
///
/// Among equally close pairs the one with the smallest `(i, j)` slot pair
/// wins, where slots are the input row indices and a merged cluster takes
/// over the smaller slot of its two parts.
pub fn agglomerate(d: &DistanceMatrix, linkage: Linkage) -> Result<Vec<MergeStep>> {
    let n = d.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mut dist: Vec<f64> = d.data().iter().copied().collect();
    let at = |i: usize, j: usize| j * n + i;
    let mut active = vec![true; n];
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut steps = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                let v = dist[at(i, j)];
                if v < best.2 || best.0 == usize::MAX {
                    best = (i, j, v);
                }
            }
        }
        let (i, j, height) = best;
        let (n_i, n_j) = (sizes[i] as f64, sizes[j] as f64);
        for k in (0..n).filter(|&k| active[k] && k != i && k != j) {
            let v = linkage.update(dist[at(i, k)], dist[at(j, k)], height, n_i, n_j, sizes[k] as f64);
            dist[at(i, k)] = v;
            dist[at(k, i)] = v;
        }
        active[j] = false;
        sizes[i] += sizes[j];
        steps.push(MergeStep {
            left: ids[i].min(ids[j]),
            right: ids[i].max(ids[j]),
            height,
            size: sizes[i],
        });
        ids[i] = n + step;
    }
    Ok(steps)
}

fn leaf_count(steps: &[MergeStep]) -> usize {
    steps.len() + 1
}

/// Checks that `steps` describes a complete binary merge history.
pub fn validate_steps(steps: &[MergeStep]) -> Result<()> {
    let n = leaf_count(steps);
    let mut used = vec![false; 2 * n - 1];
    let mut size = vec![1usize; 2 * n - 1];
    for (s, m) in steps.iter().enumerate() {
        let new = n + s;
        for c in [m.left, m.right] {
            if c >= new || used[c] {
                return Err(Error::InvalidTree(format!(
                    "merge {s} refers to unavailable cluster {c}"
                )));
            }
            used[c] = true;
        }
        if m.left == m.right || !m.height.is_finite() {
            return Err(Error::InvalidTree(format!("merge {s} is malformed")));
        }
        size[new] = size[m.left] + size[m.right];
        if size[new] != m.size {
            return Err(Error::InvalidTree(format!(
                "merge {s} reports size {} but joins {} leaves",
                m.size, size[new]
            )));
        }
    }
    Ok(())
}

/// Flat clustering obtained by undoing the last `k − 1` merges.
///
/// Cluster labels are numbered in order of each cluster's smallest leaf index.
pub fn cut(steps: &[MergeStep], k: usize) -> Result<Vec<usize>> {
    let n = leaf_count(steps);
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, min: 1, max: n });
    }
    validate_steps(steps)?;
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for (s, m) in steps[..n - k].iter().enumerate() {
        parent[m.left] = n + s;
        parent[m.right] = n + s;
    }
    let root = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };
    let mut label_of = std::collections::HashMap::new();
    Ok((0..n)
        .map(|leaf| {
            let next = label_of.len();
            *label_of.entry(root(leaf)).or_insert(next)
        })
        .collect())
}

/// Number of merges whose height is below the height of a cluster they join.
pub fn count_inversions(steps: &[MergeStep]) -> usize {
    let n = leaf_count(steps);
    let height = |c: usize| if c < n { 0.0 } else { steps[c - n].height };
    steps
        .iter()
        .filter(|m| m.height < height(m.left).max(height(m.right)))
        .count()
}

/// Writes the merge list as CSV with columns `step,left,right,height,size`.
pub fn write_merges_csv<W: Write>(steps: &[MergeStep], mut out: W) -> Result<()> {
    let err = |e| Error::io("<merges>", e);
    writeln!(out, "step,left,right,height,size").map_err(err)?;
    for (s, m) in steps.iter().enumerate() {
        writeln!(out, "{s},{},{},{},{}", m.left, m.right, format_real(m.height), m.size).map_err(err)?;
    }
    Ok(())
}
