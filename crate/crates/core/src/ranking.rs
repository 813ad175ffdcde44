//! Partner-language ranking for multilingual transfer.
//!
//! Candidates are ordered by cosine similarity to the child language (ties
//! by code) and the shortest prefix whose training sizes add up to the
//! budget is selected.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::{format_real, LanguageCode, LanguageMeta, ViewMatrix};
use crate::distance::cosine_similarity;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingQuery {
    pub child: LanguageCode,
    /// Target number of accumulated training sentences; must be positive.
    pub budget: u64,
    pub min_candidate_size: u64,
    pub max_k: Option<usize>,
}

impl RankingQuery {
    pub fn new(child: LanguageCode, budget: u64) -> Self {
        RankingQuery {
            child,
            budget,
            min_candidate_size: 0,
            max_k: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidArgument("budget must be positive".into()));
        }
        if self.max_k == Some(0) {
            return Err(Error::InvalidArgument("max_k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub code: LanguageCode,
    pub similarity: f64,
    pub train_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingResult {
    pub child: LanguageCode,
    pub candidates: Vec<Candidate>,
    pub accumulated_size: u64,
    pub k: usize,
    /// Set when every eligible candidate together stays below the budget.
    pub budget_unmet: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplainRow {
    pub code: LanguageCode,
    pub similarity: f64,
    pub train_size: u64,
    /// Running total of `train_size` down to and including this row.
    pub cumulative_size: u64,
    /// Whether the row passes the minimum-size filter.
    pub eligible: bool,
}

/// Every language other than the child, most similar first.
fn similarity_table(space: &ViewMatrix, meta: &[LanguageMeta], child: &LanguageCode) -> Result<Vec<Candidate>> {
    let child_row = space
        .row(child)
        .ok_or_else(|| Error::UnknownLanguage(child.to_string()))?;
    if child_row.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateVector(child.to_string()));
    }
    let sizes: HashMap<&LanguageCode, u64> = meta.iter().map(|m| (&m.code, m.train_size)).collect();
    let mut rows = Vec::with_capacity(space.n_languages());
    for (i, code) in space.languages().iter().enumerate() {
        if code == child {
            continue;
        }
        let train_size = *sizes
            .get(code)
            .ok_or_else(|| Error::MissingMetadata(code.to_string()))?;
        let row: Vec<f64> = space.data().row(i).iter().copied().collect();
        if row.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateVector(code.to_string()));
        }
        rows.push(Candidate {
            code: code.clone(),
            similarity: cosine_similarity(&child_row, &row),
            train_size,
        });
    }
    rows.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.code.cmp(&b.code)));
    Ok(rows)
}

/// Full similarity table with cumulative sizes over eligible rows.
pub fn explain(space: &ViewMatrix, meta: &[LanguageMeta], q: &RankingQuery) -> Result<Vec<ExplainRow>> {
    q.validate()?;
    let mut total = 0u64;
    Ok(similarity_table(space, meta, &q.child)?
        .into_iter()
        .map(|c| {
            let eligible = c.train_size >= q.min_candidate_size;
            if eligible {
                total = total.saturating_add(c.train_size);
            }
            ExplainRow {
                code: c.code,
                similarity: c.similarity,
                train_size: c.train_size,
                cumulative_size: total,
                eligible,
            }
        })
        .collect())
}

/// Shortest similarity-ordered prefix of eligible candidates whose sizes
/// reach the budget, capped at `max_k`.
pub fn rank(space: &ViewMatrix, meta: &[LanguageMeta], q: &RankingQuery) -> Result<RankingResult> {
    q.validate()?;
    let cap = q.max_k.unwrap_or(usize::MAX);
    let mut candidates = Vec::new();
    let mut accumulated = 0u64;
    for c in similarity_table(space, meta, &q.child)? {
        if accumulated >= q.budget || candidates.len() >= cap {
            break;
        }
        if c.train_size >= q.min_candidate_size {
            accumulated = accumulated.saturating_add(c.train_size);
            candidates.push(c);
        }
    }
    Ok(RankingResult {
        child: q.child.clone(),
        k: candidates.len(),
        budget_unmet: accumulated < q.budget,
        accumulated_size: accumulated,
        candidates,
    })
}

pub fn write_explain_csv<W: Write>(rows: &[ExplainRow], mut out: W) -> Result<()> {
    let err = |e| Error::io("<ranking>", e);
    writeln!(out, "rank,code,similarity,train_size,cumulative_size,eligible").map_err(err)?;
    for (i, r) in rows.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            i + 1,
            r.code,
            format_real(r.similarity),
            r.train_size,
            r.cumulative_size,
            r.eligible
        )
        .map_err(err)?;
    }
    Ok(())
}
