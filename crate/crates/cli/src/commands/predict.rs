use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use mvlang::dataset::{align, load_meta};
use mvlang::evaluation::{predict_features, PredictionReport, Protocol, TypologyDataset};
use serde::Serialize;

use super::{num, read_view, Ctx};
use crate::config::require;
use crate::error::CliError;
use crate::report::{to_bytes, Output};

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Language vectors used as classifier inputs.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    /// Binary typological features to predict.
    #[arg(long)]
    pub targets: PathBuf,
    /// Metadata CSV; needed for the family protocol.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Cross-validation protocol: `language` or `family`.
    #[arg(long, default_value = "language")]
    pub protocol: Protocol,
    /// Per-feature accuracy CSV [default: features.csv in the output directory].
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Serialize)]
struct PredictOutput<'a> {
    inputs: String,
    targets: String,
    languages: usize,
    #[serde(flatten)]
    report: &'a PredictionReport,
}

pub fn predict(args: PredictArgs, ctx: &Ctx) -> Result<Output, CliError> {
    let c = &ctx.config;
    let inputs_path = require(args.inputs, c.space.clone(), "inputs")?;
    // Restricted to the languages present in both files.
    let aligned = align(&read_view(&inputs_path)?, &read_view(&args.targets)?)?;
    let inputs = aligned.view_x();
    let mut targets = TypologyDataset::new(aligned.view_y().clone())?;
    if let Some(meta) = args.meta.or(c.meta.clone()) {
        targets = targets.with_meta(&load_meta(meta)?)?;
    }
    let report = predict_features(inputs, &targets, args.protocol)?;

    let mut text = format!(
        "{}: {} folds, {} features, {} cells evaluated, {} skipped\nmacro accuracy {}\n",
        report.protocol,
        report.n_folds,
        report.n_features,
        report.evaluated_cells,
        report.skipped.len(),
        num(report.macro_accuracy)
    );
    let ranked = report.ranked_features();
    let top = ranked.len().min(10);
    let _ = writeln!(text, "best features:");
    for (name, acc) in &ranked[..top] {
        let _ = writeln!(text, "  {name} {}", num(*acc));
    }
    let _ = writeln!(text, "worst features:");
    for (name, acc) in ranked.iter().rev().take(top) {
        let _ = writeln!(text, "  {name} {}", num(*acc));
    }
    let csv = to_bytes(|b| report.write_csv(b))?;
    let out = PredictOutput {
        inputs: inputs_path.display().to_string(),
        targets: args.targets.display().to_string(),
        languages: inputs.n_languages(),
        report: &report,
    };
    Ok(Output::new("predict", &out, text)?.artifact("features.csv", args.table, csv))
}
