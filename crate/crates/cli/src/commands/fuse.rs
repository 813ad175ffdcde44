use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use mvlang::dataset::{align, ViewMatrix};
use mvlang::selection::{stability_sweep, StabilityConfig};
use mvlang::svcca::{load_model, model_to_json, SvccaConfig, SvdTransform, ViewSide};
use serde::Serialize;

use super::{num, read_view, Ctx};
use crate::config::{require, Threshold};
use crate::error::CliError;
use crate::report::{to_bytes, Output};

#[derive(Args, Debug)]
pub struct FuseArgs {
    /// First view, usually the knowledge-base features.
    #[arg(long, short = 'x')]
    pub view_x: Option<PathBuf>,
    /// Second view, usually the task-learned vectors.
    #[arg(long, short = 'y')]
    pub view_y: Option<PathBuf>,
    /// Explained-variance threshold for the first view (0.05 grid) or "sweep".
    #[arg(long)]
    pub threshold_x: Option<Threshold>,
    /// Explained-variance threshold for the second view (0.05 grid) or "sweep".
    #[arg(long)]
    pub threshold_y: Option<Threshold>,
    /// Minimum canonical correlation of a retained dimension.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Ridge added to both covariance matrices.
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Scale columns to unit variance before each SVD.
    #[arg(long)]
    pub standardize: bool,
    /// Model JSON to write [default: model.json in the output directory].
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Fused space of the training languages, projected from the first view.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Seed of the threshold sweep.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bootstrap replicates per sample size in the threshold sweep.
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Serialize)]
struct ViewSummary {
    name: String,
    path: String,
    input_dim: usize,
    threshold: f64,
    kept_dims: usize,
    explained_ratio: f64,
}

impl ViewSummary {
    fn new(view: &ViewMatrix, path: &std::path::Path, svd: &SvdTransform) -> Self {
        ViewSummary {
            name: view.name().to_string(),
            path: path.display().to_string(),
            input_dim: svd.input_dim(),
            threshold: svd.variance_threshold(),
            kept_dims: svd.k(),
            explained_ratio: svd.explained_ratio(),
        }
    }
}

#[derive(Serialize)]
struct ThresholdChoice {
    recommended: f64,
    variability: f64,
    sample_sizes: Vec<usize>,
    replicates: usize,
    seed: u64,
}

#[derive(Serialize)]
struct FuseReport {
    view_x: ViewSummary,
    view_y: ViewSummary,
    languages: usize,
    correlations: Vec<f64>,
    retained: Vec<bool>,
    retention_cutoff: f64,
    ridge: f64,
    shared_dim: usize,
    threshold_sweep: Option<ThresholdChoice>,
    model: String,
}

/// Sample sizes for a sweep over `available` languages: the standard grid
/// when it fits, otherwise five evenly spaced sizes.
pub fn default_sizes(available: usize) -> Vec<usize> {
    let standard = StabilityConfig::default().sizes;
    if standard.last().is_some_and(|&s| s <= available) {
        return standard;
    }
    let mut sizes: Vec<usize> = (1..=5).map(|i| (available * i).div_ceil(5).max(3)).collect();
    sizes.dedup();
    sizes.retain(|&s| s <= available);
    sizes
}

pub fn fuse(args: FuseArgs, ctx: &Ctx) -> Result<Output, CliError> {
    let c = &ctx.config;
    let path_x = require(args.view_x, c.view_x.clone(), "view_x")?;
    let path_y = require(args.view_y, c.view_y.clone(), "view_y")?;
    let model_path = args
        .model
        .or(c.model.clone())
        .or_else(|| ctx.out_dir().map(|d| d.join("model.json")))
        .ok_or_else(|| CliError::Usage("fuse needs --model or --out-dir".into()))?;
    let (vx, vy) = (read_view(&path_x)?, read_view(&path_y)?);
    let aligned = align(&vx, &vy)?;

    let tx = args.threshold_x.or(c.threshold_x).unwrap_or(Threshold::Fixed(1.0));
    let ty = args.threshold_y.or(c.threshold_y).unwrap_or(Threshold::Fixed(1.0));
    let mut sweep_choice = None;
    let (tx, ty) = match (tx, ty) {
        (Threshold::Fixed(a), Threshold::Fixed(b)) => (a, b),
        (a, b) => {
            let defaults = StabilityConfig::default();
            let config = StabilityConfig {
                thresholds: c.thresholds.clone().unwrap_or(defaults.thresholds),
                sizes: c.sizes.clone().unwrap_or_else(|| default_sizes(aligned.len())),
                replicates: args.replicates.or(c.replicates).unwrap_or(defaults.replicates),
                seed: args.seed.or(c.seed).unwrap_or(defaults.seed),
                linkage: c.linkage.unwrap_or(defaults.linkage),
                k_max: c.k_max.unwrap_or(defaults.k_max),
            };
            let result = stability_sweep(&vx, Some(&vy), &config)?;
            let best = result
                .reports
                .iter()
                .find(|r| r.threshold == result.recommended)
                .map_or(f64::NAN, |r| r.variability);
            sweep_choice = Some(ThresholdChoice {
                recommended: result.recommended,
                variability: best,
                sample_sizes: config.sizes.clone(),
                replicates: config.replicates,
                seed: config.seed,
            });
            let pick = |t: Threshold| match t {
                Threshold::Fixed(v) => v,
                Threshold::Sweep => result.recommended,
            };
            (pick(a), pick(b))
        }
    };

    let mut svcca = SvccaConfig::with_thresholds(tx, ty);
    if let Some(v) = args.cutoff.or(c.retention_cutoff) {
        svcca.retention_cutoff = v;
    }
    if let Some(v) = args.ridge.or(c.ridge) {
        svcca.ridge = v;
    }
    svcca.standardize = args.standardize || c.standardize.unwrap_or(false);
    let model = svcca.fit(&aligned)?;
    let space = model.project_view(aligned.view_x(), ViewSide::X)?;

    let report = FuseReport {
        view_x: ViewSummary::new(&vx, &path_x, model.svd_x()),
        view_y: ViewSummary::new(&vy, &path_y, model.svd_y()),
        languages: aligned.len(),
        correlations: model.cca().correlations().to_vec(),
        retained: model.cca().retained().to_vec(),
        retention_cutoff: svcca.retention_cutoff,
        ridge: svcca.ridge,
        shared_dim: model.shared_dim(),
        threshold_sweep: sweep_choice,
        model: model_path.display().to_string(),
    };
    let mut text = String::new();
    if let Some(s) = &report.threshold_sweep {
        let _ = writeln!(
            text,
            "threshold sweep recommends {} (variability {})",
            num(s.recommended),
            num(s.variability)
        );
    }
    for v in [&report.view_x, &report.view_y] {
        let _ = writeln!(
            text,
            "{}: {} -> {} dims at threshold {} ({} of variance)",
            v.name,
            v.input_dim,
            v.kept_dims,
            num(v.threshold),
            num(v.explained_ratio)
        );
    }
    let _ = writeln!(text, "common languages: {}", report.languages);
    let spectrum: Vec<String> = report.correlations.iter().map(|&r| num(r)).collect();
    let _ = writeln!(text, "canonical correlations: {}", spectrum.join(" "));
    let _ = writeln!(
        text,
        "shared dimensions: {} (cutoff {})",
        report.shared_dim,
        num(report.retention_cutoff)
    );

    let space_bytes = to_bytes(|b| space.write_delimited(b, b','))?;
    Ok(Output::new("fuse", &report, text)?
        .artifact(
            "model.json",
            Some(model_path),
            format!("{}\n", model_to_json(&model)).into_bytes(),
        )
        .artifact("space.csv", args.space.or(c.space.clone()), space_bytes))
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// Model JSON written by `fuse`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// View file whose rows are projected; any language code is accepted.
    #[arg(long)]
    pub view: PathBuf,
    /// Which fused view the file belongs to.
    #[arg(long, default_value = "x")]
    pub side: ViewSide,
    /// Output CSV [default: projected.csv in the output directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ProjectReport {
    model: String,
    view: String,
    side: ViewSide,
    languages: usize,
    unseen_languages: usize,
    shared_dim: usize,
    output: Option<String>,
}

pub fn project(args: ProjectArgs, ctx: &Ctx) -> Result<Output, CliError> {
    let model_path = require(args.model, ctx.config.model.clone(), "model")?;
    let out = args.out.or_else(|| ctx.out_dir().map(|d| d.join("projected.csv")));
    if out.is_none() {
        return Err(CliError::Usage("project needs --out or --out-dir".into()));
    }
    let model = load_model(&model_path)?;
    let view = read_view(&args.view)?;
    let projected = model.project_view(&view, args.side)?;
    let unseen = view
        .languages()
        .iter()
        .filter(|c| !model.train_languages().contains(c))
        .count();
    let report = ProjectReport {
        model: model_path.display().to_string(),
        view: args.view.display().to_string(),
        side: args.side,
        languages: view.n_languages(),
        unseen_languages: unseen,
        shared_dim: model.shared_dim(),
        output: out.as_ref().map(|p| p.display().to_string()),
    };
    let text = format!(
        "projected {} languages ({} outside the training set) into {} shared dimensions\n",
        report.languages, report.unseen_languages, report.shared_dim
    );
    let bytes = to_bytes(|b| projected.write_delimited(b, b','))?;
    Ok(Output::new("project", &report, text)?.artifact("projected.csv", out, bytes))
}
