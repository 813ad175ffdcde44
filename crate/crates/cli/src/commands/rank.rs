use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use mvlang::dataset::{load_meta, LanguageCode};
use mvlang::ranking::{explain, rank as rank_partners, write_explain_csv, ExplainRow, RankingQuery, RankingResult};
use serde::Serialize;

use super::{num, read_view, Ctx};
use crate::config::require;
use crate::error::CliError;
use crate::report::{to_bytes, Output};

#[derive(Args, Debug)]
pub struct RankArgs {
    /// Language vectors used for cosine similarity.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Metadata CSV with `lang,family,subfamily,size`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Low-resource language to find partners for.
    #[arg(long)]
    pub child: String,
    /// Training sentences to accumulate across partners.
    #[arg(long)]
    pub budget: u64,
    /// Skip candidates with fewer training sentences than this.
    #[arg(long, default_value_t = 0)]
    pub min_size: u64,
    /// Select at most this many partners.
    #[arg(long)]
    pub max_k: Option<usize>,
    /// Full similarity table CSV [default: ranking.csv in the output directory].
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Serialize)]
struct RankReport {
    space: String,
    query: RankingQuery,
    #[serde(flatten)]
    result: RankingResult,
    table: Vec<ExplainRow>,
}

pub fn rank(args: RankArgs, ctx: &Ctx) -> Result<Output, CliError> {
    let c = &ctx.config;
    let space_path = require(args.space, c.space.clone(), "space")?;
    let meta_path = require(args.meta, c.meta.clone(), "meta")?;
    let space = read_view(&space_path)?;
    let meta = load_meta(&meta_path)?;
    let query = RankingQuery {
        child: LanguageCode::new(&args.child)?,
        budget: args.budget,
        min_candidate_size: args.min_size,
        max_k: args.max_k,
    };
    let result = rank_partners(&space, &meta, &query)?;
    let table = explain(&space, &meta, &query)?;

    let mut text = format!("partners for {} (budget {}):\n", query.child, query.budget);
    for (i, cand) in result.candidates.iter().enumerate() {
        let _ = writeln!(
            text,
            "{:>3}. {} similarity {} size {}",
            i + 1,
            cand.code,
            num(cand.similarity),
            cand.train_size
        );
    }
    let _ = writeln!(
        text,
        "accumulated {} sentences with k = {}{}",
        result.accumulated_size,
        result.k,
        if result.budget_unmet {
            " (budget not reached)"
        } else {
            ""
        }
    );
    let csv = to_bytes(|b| write_explain_csv(&table, b))?;
    let report = RankReport {
        space: space_path.display().to_string(),
        query,
        result,
        table,
    };
    Ok(Output::new("rank", &report, text)?.artifact("ranking.csv", args.table, csv))
}
