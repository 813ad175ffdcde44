use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use mvlang::distance::{cosine_distance_matrix, DistanceMatrix};
use mvlang::evaluation::spearman;
use mvlang::phylo::{
    agglomerate, cophenetic, count_inversions, read_newick, to_tree, write_merges_csv, write_newick, Linkage, PhyloTree,
};
use mvlang::treedist::{compare, TreeComparison};
use serde::Serialize;

use super::{num, read_view, Ctx};
use crate::config::require;
use crate::error::CliError;
use crate::plot::dendrogram_svg;
use crate::report::{to_bytes, Output};

#[derive(Args, Debug)]
pub struct TreeArgs {
    /// Language vectors; distances between rows are cosine distances.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Agglomeration linkage [default: ward].
    #[arg(long)]
    pub linkage: Option<Linkage>,
    /// Newick output [default: tree.nwk in the output directory].
    #[arg(long)]
    pub newick: Option<PathBuf>,
    /// Merge list CSV [default: merges.csv in the output directory].
    #[arg(long)]
    pub merges: Option<PathBuf>,
    /// Reference Newick tree to score the result against on shared leaves.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Dendrogram SVG.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Serialize)]
struct ReferenceScore {
    path: String,
    shared_leaves: usize,
    #[serde(flatten)]
    comparison: TreeComparison,
}

#[derive(Serialize)]
struct TreeReport {
    space: String,
    languages: usize,
    linkage: Linkage,
    inversions: usize,
    newick: String,
    reference: Option<ReferenceScore>,
}

/// Both trees restricted to the leaves they share.
fn on_shared_leaves(a: &PhyloTree, b: &PhyloTree) -> Result<(PhyloTree, PhyloTree, usize), CliError> {
    let in_b: HashSet<&str> = b.leaf_labels().into_iter().collect();
    let shared: Vec<&str> = a.leaf_labels().into_iter().filter(|l| in_b.contains(l)).collect();
    if shared.is_empty() {
        return Err(CliError::Input("the trees share no leaf labels".into()));
    }
    Ok((a.restrict(&shared)?, b.restrict(&shared)?, shared.len()))
}

pub fn tree(args: TreeArgs, ctx: &Ctx) -> Result<Output, CliError> {
    let c = &ctx.config;
    let space_path = require(args.space, c.space.clone(), "space")?;
    let linkage = args.linkage.or(c.linkage).unwrap_or(Linkage::Ward);
    let space = read_view(&space_path)?;
    let d = cosine_distance_matrix(&space)?;
    let steps = agglomerate(&d, linkage)?;
    let labels: Vec<&str> = d.languages().iter().map(|l| l.as_str()).collect();
    let t = to_tree(&steps, &labels)?;
    let newick = write_newick(&t);

    let reference = match args.reference.or(c.reference.clone()) {
        Some(path) => {
            let gold = read_newick(&path)?;
            let (ours, gold, shared) = on_shared_leaves(&t, &gold)?;
            Some(ReferenceScore {
                path: path.display().to_string(),
                shared_leaves: shared,
                comparison: compare(&ours, &gold)?,
            })
        }
        None => None,
    };
    let report = TreeReport {
        space: space_path.display().to_string(),
        languages: d.len(),
        linkage,
        inversions: count_inversions(&steps),
        newick: newick.clone(),
        reference,
    };
    let mut text = format!(
        "{} languages, {linkage} linkage, {} inversions\n{newick}\n",
        report.languages, report.inversions
    );
    if let Some(r) = &report.reference {
        let _ = writeln!(
            text,
            "against {} on {} shared leaves: ted {} napted {}",
            r.path,
            r.shared_leaves,
            num(r.comparison.ted),
            num(r.comparison.napted)
        );
    }
    let mut out = Output::new("tree", &report, text)?
        .artifact("tree.nwk", args.newick, format!("{newick}\n").into_bytes())
        .artifact("merges.csv", args.merges, to_bytes(|b| write_merges_csv(&steps, b))?);
    if let Some(p) = args.plot {
        let title = format!("{} ({linkage})", space.name());
        out = out.artifact("dendrogram.svg", Some(p), dendrogram_svg(&t, &title)?.into_bytes());
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct TreedistArgs {
    /// First Newick file.
    pub a: PathBuf,
    /// Second Newick file.
    pub b: PathBuf,
    /// Compare only the leaves present in both trees.
    #[arg(long)]
    pub common_leaves: bool,
}

#[derive(Serialize)]
struct TreedistReport {
    a: String,
    b: String,
    shared_leaves: Option<usize>,
    #[serde(flatten)]
    comparison: TreeComparison,
}

pub fn treedist(args: TreedistArgs, _ctx: &Ctx) -> Result<Output, CliError> {
    let (mut a, mut b) = (read_newick(&args.a)?, read_newick(&args.b)?);
    let mut shared = None;
    if args.common_leaves {
        let (ra, rb, n) = on_shared_leaves(&a, &b)?;
        (a, b, shared) = (ra, rb, Some(n));
    }
    let comparison = compare(&a, &b)?;
    let report = TreedistReport {
        a: args.a.display().to_string(),
        b: args.b.display().to_string(),
        shared_leaves: shared,
        comparison,
    };
    let text = format!(
        "ted {}\nnapted {}\nnodes {} {}\nleaves {} {}\n",
        num(comparison.ted),
        num(comparison.napted),
        comparison.nodes_a,
        comparison.nodes_b,
        comparison.leaves_a,
        comparison.leaves_b
    );
    Output::new("treedist", &report, text)
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    /// Newick tree (cophenetic distances) or view file (cosine distances).
    pub a: PathBuf,
    /// Newick tree (cophenetic distances) or view file (cosine distances).
    pub b: PathBuf,
}

#[derive(Serialize)]
struct Input {
    path: String,
    kind: &'static str,
    languages: usize,
}

#[derive(Serialize)]
struct CorrelateReport {
    a: Input,
    b: Input,
    shared_languages: usize,
    rho: f64,
    p_value: f64,
    n_pairs: usize,
}

fn is_newick(path: &Path) -> bool {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    matches!(ext.as_str(), "nwk" | "newick" | "tree" | "tre")
}

fn distances(path: &Path) -> Result<(DistanceMatrix, Input), CliError> {
    let (d, kind) = if is_newick(path) {
        (cophenetic(&read_newick(path)?)?, "tree")
    } else {
        (cosine_distance_matrix(&read_view(path)?)?, "view")
    };
    let input = Input {
        path: path.display().to_string(),
        kind,
        languages: d.len(),
    };
    Ok((d, input))
}

pub fn correlate(args: CorrelateArgs, _ctx: &Ctx) -> Result<Output, CliError> {
    let (da, ia) = distances(&args.a)?;
    let (db, ib) = distances(&args.b)?;
    let in_b: HashSet<_> = db.languages().iter().collect();
    let shared: Vec<_> = da.languages().iter().filter(|l| in_b.contains(l)).cloned().collect();
    let r = spearman(&da.select(&shared)?, &db.select(&shared)?)?;
    let report = CorrelateReport {
        a: ia,
        b: ib,
        shared_languages: shared.len(),
        rho: r.rho,
        p_value: r.p_value,
        n_pairs: r.n_pairs,
    };
    let text = format!(
        "rho {}\np {}\nlanguages {} ({} pairs)\n",
        num(r.rho),
        num(r.p_value),
        shared.len(),
        r.n_pairs
    );
    Output::new("correlate", &report, text)
}
