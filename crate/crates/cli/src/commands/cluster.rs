use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mvlang::dataset::format_real;
use mvlang::distance::cosine_distance_matrix;
use mvlang::phylo::{agglomerate, cut, Linkage};
use mvlang::selection::{elbow_curve, silhouette_curve, stability_sweep, StabilityConfig, StabilitySweep};
use serde::Serialize;

use super::fuse::default_sizes;
use super::{num, read_view, Ctx};
use crate::config::require;
use crate::error::CliError;
use crate::plot::curve_svg;
use crate::report::Output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Select {
    /// Cut at the peak mean silhouette.
    Silhouette,
    /// Report within-cluster dispersion per k; no k is picked.
    Elbow,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    /// Language vectors; distances between rows are cosine distances.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Agglomeration linkage [default: average].
    #[arg(long)]
    pub linkage: Option<Linkage>,
    /// Curve computed over k.
    #[arg(long, value_enum, default_value_t = Select::Silhouette)]
    pub select: Select,
    /// Number of clusters to cut at, overriding the silhouette peak.
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest k on the curve [default: 20, capped by the language count].
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Cluster assignment CSV [default: clusters.csv in the output directory].
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// SVG plot of the curve.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Serialize)]
struct CurvePoint {
    k: usize,
    value: f64,
}

#[derive(Serialize)]
struct ClusterReport {
    space: String,
    languages: usize,
    linkage: Linkage,
    select: Select,
    curve: Vec<CurvePoint>,
    best_k: Option<usize>,
    k: Option<usize>,
    clusters: Vec<Vec<String>>,
}

pub fn cluster(args: ClusterArgs, ctx: &Ctx) -> Result<Output, CliError> {
    let c = &ctx.config;
    let space_path = require(args.space, c.space.clone(), "space")?;
    let linkage = args.linkage.or(c.linkage).unwrap_or(Linkage::Average);
    let space = read_view(&space_path)?;
    let d = cosine_distance_matrix(&space)?;
    let steps = agglomerate(&d, linkage)?;
    let n = d.len();
    let k_max = args.k_max.or(c.k_max).unwrap_or(20);

    let (curve, best_k, label) = match args.select {
        Select::Silhouette => {
            let s = silhouette_curve(&d, &steps, k_max.min(n.saturating_sub(1)))?;
            let points =
                s.ks.iter()
                    .zip(&s.scores)
                    .map(|(&k, &v)| CurvePoint { k, value: v })
                    .collect();
            (points, Some(s.best_k), "silhouette")
        }
        Select::Elbow => {
            let e = elbow_curve(&d, &steps, k_max.min(n))?;
            (
                e.into_iter().map(|(k, v)| CurvePoint { k, value: v }).collect(),
                None,
                "dispersion",
            )
        }
    };
    let k = args.k.or(best_k);
    let mut clusters = Vec::new();
    let mut assignment_csv = String::from("lang,cluster\n");
    if let Some(k) = k {
        let labels = cut(&steps, k)?;
        clusters = vec![Vec::new(); k];
        for (code, &l) in d.languages().iter().zip(&labels) {
            clusters[l].push(code.to_string());
            let _ = writeln!(assignment_csv, "{code},{l}");
        }
    }
    let report = ClusterReport {
        space: space_path.display().to_string(),
        languages: n,
        linkage,
        select: args.select,
        curve,
        best_k,
        k,
        clusters,
    };

    let mut text = format!("{n} languages, {linkage} linkage\n");
    for p in &report.curve {
        let _ = writeln!(text, "k={:<3} {label} {}", p.k, num(p.value));
    }
    match k {
        Some(k) => {
            let _ = writeln!(text, "k = {k}");
            for (i, members) in report.clusters.iter().enumerate() {
                let _ = writeln!(text, "  {i}: {}", members.join(" "));
            }
        }
        None => {
            let _ = writeln!(text, "no k chosen; pass --k to cut the dendrogram");
        }
    }

    let mut curve_csv = format!("k,{label}\n");
    for p in &report.curve {
        let _ = writeln!(curve_csv, "{},{}", p.k, format_real(p.value));
    }
    let mut out = Output::new("cluster", &report, text)?.artifact("curve.csv", None, curve_csv.into_bytes());
    if k.is_some() {
        out = out.artifact("clusters.csv", args.assignments, assignment_csv.into_bytes());
    }
    if let Some(path) = args.plot {
        let points: Vec<(f64, f64)> = report.curve.iter().map(|p| (p.k as f64, p.value)).collect();
        let mark = best_k.and_then(|b| points.iter().copied().find(|p| p.0 == b as f64));
        let svg = curve_svg(&format!("{} ({linkage})", space.name()), "k", label, &points, mark)?;
        out = out.artifact("curve.svg", Some(path), svg.into_bytes());
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// View whose SVD threshold is swept.
    #[arg(long)]
    pub view: Option<PathBuf>,
    /// Second view; when given, each resample is fused with SVCCA first.
    #[arg(long)]
    pub partner: Option<PathBuf>,
    /// Comma-separated thresholds on the 0.05 grid [default: 0.5 to 1.0].
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Comma-separated increasing sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Bootstrap replicates per sample size [default: 100].
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Agglomeration linkage [default: average].
    #[arg(long)]
    pub linkage: Option<Linkage>,
    /// Largest k searched for the silhouette peak [default: 20].
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Per-threshold, per-size table CSV [default: sweep.csv in the output directory].
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    view: String,
    partner: Option<String>,
    config: &'a StabilityConfig,
    #[serde(flatten)]
    sweep: &'a StabilitySweep,
}

pub fn sweep(args: SweepArgs, ctx: &Ctx) -> Result<Output, CliError> {
    let c = &ctx.config;
    let view_path = require(args.view, c.view_x.clone(), "view")?;
    let partner_path = args.partner.or(c.view_y.clone());
    let view = read_view(&view_path)?;
    let partner = partner_path.as_deref().map(read_view).transpose()?;
    let available = match &partner {
        Some(p) => mvlang::align(&view, p)?.len(),
        None => view.n_languages(),
    };
    let defaults = StabilityConfig::default();
    let config = StabilityConfig {
        thresholds: args.thresholds.or(c.thresholds.clone()).unwrap_or(defaults.thresholds),
        sizes: args
            .sizes
            .or(c.sizes.clone())
            .unwrap_or_else(|| default_sizes(available)),
        replicates: args.replicates.or(c.replicates).unwrap_or(defaults.replicates),
        seed: args.seed.or(c.seed).unwrap_or(defaults.seed),
        linkage: args.linkage.or(c.linkage).unwrap_or(defaults.linkage),
        k_max: args.k_max.or(c.k_max).unwrap_or(defaults.k_max),
    };
    let result = stability_sweep(&view, partner.as_ref(), &config)?;

    let mut text = format!(
        "{available} languages, sizes {:?}, {} replicates, seed {}\n",
        config.sizes, config.replicates, config.seed
    );
    let mut table = String::from("threshold,size,clusters_mean,ci_low,ci_high,clusters_std,failed\n");
    for r in &result.reports {
        let means: Vec<String> = r.clusters_mean.iter().map(|m| format!("{m:.2}")).collect();
        let _ = writeln!(
            text,
            "threshold {:<5} variability {:<8.4} mean k {}",
            num(r.threshold),
            r.variability,
            means.join(" ")
        );
        for (i, size) in r.sample_sizes.iter().enumerate() {
            let _ = writeln!(
                table,
                "{},{size},{},{},{},{},{}",
                format_real(r.threshold),
                format_real(r.clusters_mean[i]),
                format_real(r.clusters_ci[i].0),
                format_real(r.clusters_ci[i].1),
                format_real(r.clusters_std[i]),
                r.failed[i]
            );
        }
    }
    let _ = writeln!(text, "recommended threshold {}", num(result.recommended));
    let report = SweepReport {
        view: view_path.display().to_string(),
        partner: partner_path.map(|p| p.display().to_string()),
        config: &config,
        sweep: &result,
    };
    Ok(Output::new("sweep", &report, text)?.artifact("sweep.csv", args.table, table.into_bytes()))
}
