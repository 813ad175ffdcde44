//! `mvlang`: fuse language views and run the downstream analyses.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 numerical
//! failure.

mod commands;
mod config;
mod error;
mod plot;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::Ctx;
use config::Config;
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "mvlang",
    version,
    about = "Multi-view language vectors: fusion, phylogenies, clustering and transfer ranking"
)]
struct Cli {
    /// TOML settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving the JSON and text reports and default artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit an SVCCA model on the languages shared by two views.
    Fuse(commands::FuseArgs),
    /// Project a view into the shared space of a fitted model.
    Project(commands::ProjectArgs),
    /// Infer a language tree from vectors by agglomerative clustering.
    Tree(commands::TreeArgs),
    /// Tree edit distance between two Newick trees.
    Treedist(commands::TreedistArgs),
    /// Cluster languages and choose the number of clusters.
    Cluster(commands::ClusterArgs),
    /// Rank transfer partners for a language under a data budget.
    Rank(commands::RankArgs),
    /// Predict binary typological features from language vectors.
    Predict(commands::PredictArgs),
    /// Spearman correlation between two language distance structures.
    Correlate(commands::CorrelateArgs),
    /// Bootstrap stability of the silhouette-peak cluster count per SVD threshold.
    Sweep(commands::SweepArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let ctx = Ctx {
        out_dir: cli.out_dir.or(config.out_dir.clone()),
        config,
    };
    let output = match cli.command {
        Command::Fuse(a) => commands::fuse(a, &ctx),
        Command::Project(a) => commands::project(a, &ctx),
        Command::Tree(a) => commands::tree(a, &ctx),
        Command::Treedist(a) => commands::treedist(a, &ctx),
        Command::Cluster(a) => commands::cluster(a, &ctx),
        Command::Rank(a) => commands::rank(a, &ctx),
        Command::Predict(a) => commands::predict(a, &ctx),
        Command::Correlate(a) => commands::correlate(a, &ctx),
        Command::Sweep(a) => commands::sweep(a, &ctx),
    }?;
    report::emit(output, ctx.out_dir(), cli.json)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("\nFor more information, try '--help'.");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
