//! Typological feature prediction and rank correlation between distance
//! matrices.
//!
//! Each binary feature gets its own L2-regularized logistic regression
//! (strength `C = 1`, unpenalized intercept, no feature scaling, no class
//! weights) trained on all languages outside the held-out fold. Cells where
//! the training labels are all one class are skipped and listed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{format_real, LanguageCode, LanguageMeta, ViewMatrix};
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Binary typological features with optional language families.
#[derive(Debug, Clone)]
pub struct TypologyDataset {
    view: ViewMatrix,
    families: Option<Vec<String>>,
}

impl TypologyDataset {
    /// Every cell of `view` must be exactly 0 or 1.
    pub fn new(view: ViewMatrix) -> Result<Self> {
        let data = view.data();
        for i in 0..data.nrows() {
            for j in 0..data.ncols() {
                let v = data[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::MalformedInput(format!(
                        "feature value {v} for {} is not binary",
                        view.languages()[i]
                    )));
                }
            }
        }
        Ok(TypologyDataset { view, families: None })
    }

    /// Attaches family labels; every language needs a metadata entry.
    pub fn with_meta(mut self, meta: &[LanguageMeta]) -> Result<Self> {
        let by_code: HashMap<&LanguageCode, &str> = meta.iter().map(|m| (&m.code, m.family.as_str())).collect();
        let families = self
            .view
            .languages()
            .iter()
            .map(|c| {
                by_code
                    .get(c)
                    .map(|f| f.to_string())
                    .ok_or_else(|| Error::MissingMetadata(c.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.families = Some(families);
        Ok(self)
    }

    pub fn view(&self) -> &ViewMatrix {
        &self.view
    }

    pub fn families(&self) -> Option<&[String]> {
        self.families.as_deref()
    }

    pub fn feature_names(&self) -> Vec<String> {
        match self.view.feature_names() {
            Some(names) => names.to_vec(),
            None => (0..self.view.dim()).map(|j| format!("f{j}")).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    OneLanguageOut,
    OneFamilyOut,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::OneLanguageOut => "one_language_out",
            Protocol::OneFamilyOut => "one_family_out",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").to_ascii_lowercase().as_str() {
            "one_language_out" | "language" | "lolo" => Ok(Protocol::OneLanguageOut),
            "one_family_out" | "family" | "lofo" => Ok(Protocol::OneFamilyOut),
            _ => Err(Error::InvalidArgument(format!("unknown protocol {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedCell {
    pub fold: String,
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub protocol: Protocol,
    pub n_folds: usize,
    pub n_features: usize,
    /// Mean over evaluated folds of the held-out accuracy, per feature.
    /// Features never evaluated are absent.
    pub per_feature_accuracy: BTreeMap<String, f64>,
    /// Mean held-out accuracy over every evaluated (fold, feature) cell.
    pub macro_accuracy: f64,
    pub evaluated_cells: usize,
    pub skipped: Vec<SkippedCell>,
}

impl PredictionReport {
    /// Features ordered from most to least accurate, ties by name.
    pub fn ranked_features(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self
            .per_feature_accuracy
            .iter()
            .map(|(k, &a)| (k.as_str(), a))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let err = |e| Error::io("<report>", e);
        writeln!(out, "feature,accuracy").map_err(err)?;
        for (name, acc) in &self.per_feature_accuracy {
            writeln!(out, "{name},{}", format_real(*acc)).map_err(err)?;
        }
        Ok(())
    }
}

/// Fitted binary logistic regression.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: DVector<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.intercept + x.iter().zip(self.weights.iter()).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Minimizes `½‖w‖² + C Σ log(1 + exp(−sᵢ(xᵢ·w + b)))`, `sᵢ = ±1`, by
/// damped Newton iterations from zero.
pub fn fit_logistic(x: &DMatrix<f64>, y: &[bool], c: f64) -> Result<LogisticModel> {
    let (n, d) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "regularization strength {c} must be positive"
        )));
    }
    // Design matrix with a trailing column of ones for the intercept.
    let a = x.clone().insert_column(d, 1.0);
    let t = DVector::from_iterator(n, y.iter().map(|&v| if v { 1.0 } else { 0.0 }));
    let objective = |theta: &DVector<f64>| {
        let z = &a * theta;
        let reg = 0.5 * theta.rows(0, d).norm_squared();
        reg + c * z.iter().zip(t.iter()).map(|(&z, &t)| softplus(z) - t * z).sum::<f64>()
    };
    let mut theta = DVector::zeros(d + 1);
    let mut f = objective(&theta);
    for _ in 0..100 {
        let z = &a * &theta;
        let p = z.map(sigmoid);
        let mut grad = a.tr_mul(&(&p - &t)) * c;
        for k in 0..d {
            grad[k] += theta[k];
        }
        if grad.amax() <= 1e-10 * (1.0 + theta.amax()) {
            break;
        }
        let wts = p.map(|p| c * p * (1.0 - p));
        let mut h = a.tr_mul(&DMatrix::from_fn(n, d + 1, |i, j| a[(i, j)] * wts[i]));
        for k in 0..d {
            h[(k, k)] += 1.0;
        }
        h[(d, d)] += 1e-12 * (1.0 + h[(d, d)]);
        let step = h
            .cholesky()
            .ok_or_else(|| Error::Numerical("logistic Hessian is not positive definite".into()))?
            .solve(&grad);
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-10 {
            let cand = &theta - &step * alpha;
            let fc = objective(&cand);
            if fc <= f - 1e-4 * alpha * slope {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !theta.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("logistic regression diverged".into()));
    }
    Ok(LogisticModel {
        weights: theta.rows(0, d).into_owned(),
        intercept: theta[d],
    })
}

/// Training design for one fold. When there are more features than training
/// rows the problem is solved in the row space of the training matrix, which
/// holds the optimum because the penalty is rotation invariant.
struct FoldDesign {
    train: DMatrix<f64>,
    basis: Option<DMatrix<f64>>,
}

impl FoldDesign {
    fn new(x: &DMatrix<f64>) -> Self {
        if x.ncols() <= x.nrows() {
            return FoldDesign {
                train: x.clone(),
                basis: None,
            };
        }
        let svd = x.clone().svd(true, true);
        let s_max = svd.singular_values.max();
        let tol = s_max * x.nrows().max(x.ncols()) as f64 * f64::EPSILON;
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > tol)
            .collect();
        let v_t = svd.v_t.expect("requested");
        let basis = DMatrix::from_fn(x.ncols(), keep.len(), |i, k| v_t[(keep[k], i)]);
        FoldDesign {
            train: x * &basis,
            basis: Some(basis),
        }
    }

    fn reduce(&self, row: &[f64]) -> Vec<f64> {
        match &self.basis {
            None => row.to_vec(),
            Some(b) => b.tr_mul(&DVector::from_column_slice(row)).iter().copied().collect(),
        }
    }
}

struct Fold {
    name: String,
    test: Vec<usize>,
}

fn folds(targets: &TypologyDataset, protocol: Protocol) -> Result<Vec<Fold>> {
    let langs = targets.view.languages();
    match protocol {
        Protocol::OneLanguageOut => {
            if langs.len() < 3 {
                return Err(Error::TooFewSamples {
                    needed: 3,
                    got: langs.len(),
                });
            }
            Ok(langs
                .iter()
                .enumerate()
                .map(|(i, c)| Fold {
                    name: c.to_string(),
                    test: vec![i],
                })
                .collect())
        }
        Protocol::OneFamilyOut => {
            let fams = targets
                .families
                .as_ref()
                .ok_or_else(|| Error::MissingMetadata(langs[0].to_string()))?;
            let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, f) in fams.iter().enumerate() {
                groups.entry(f).or_default().push(i);
            }
            if groups.len() < 2 {
                return Err(Error::TooFewSamples {
                    needed: 2,
                    got: groups.len(),
                });
            }
            Ok(groups
                .into_iter()
                .map(|(name, test)| Fold {
                    name: name.to_owned(),
                    test,
                })
                .collect())
        }
    }
}

/// Held-out accuracy of per-feature classifiers that map `inputs` rows to
/// the binary target features.
pub fn predict_features(
    inputs: &ViewMatrix,
    targets: &TypologyDataset,
    protocol: Protocol,
) -> Result<PredictionReport> {
    let langs = targets.view.languages();
    if inputs.n_languages() != langs.len() {
        return Err(Error::DimensionMismatch {
            expected: langs.len(),
            found: inputs.n_languages(),
        });
    }
    let inputs = inputs.select(langs).map_err(|_| Error::DimensionMismatch {
        expected: langs.len(),
        found: langs.iter().filter(|c| inputs.index_of(c).is_some()).count(),
    })?;
    let x = inputs.data();
    let y = targets.view.data();
    let names = targets.feature_names();
    let folds = folds(targets, protocol)?;
    let n = langs.len();

    // (feature, correct, total) per evaluated cell, or None when skipped.
    let per_fold: Vec<Vec<Option<(usize, usize)>>> = folds
        .par_iter()
        .map(|fold| {
            let train: Vec<usize> = (0..n).filter(|i| !fold.test.contains(i)).collect();
            let design = FoldDesign::new(&x.select_rows(&train));
            let tests: Vec<Vec<f64>> = fold
                .test
                .iter()
                .map(|&i| design.reduce(&x.row(i).iter().copied().collect::<Vec<_>>()))
                .collect();
            (0..y.ncols())
                .map(|f| {
                    let labels: Vec<bool> = train.iter().map(|&i| y[(i, f)] == 1.0).collect();
                    let positives = labels.iter().filter(|&&v| v).count();
                    if positives == 0 || positives == labels.len() {
                        return Ok(None);
                    }
                    let model = fit_logistic(&design.train, &labels, 1.0)?;
                    let correct = fold
                        .test
                        .iter()
                        .zip(&tests)
                        .filter(|(&i, row)| model.predict(row) == (y[(i, f)] == 1.0))
                        .count();
                    Ok(Some((correct, fold.test.len())))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_feature = BTreeMap::new();
    let mut skipped = Vec::new();
    let (mut cell_sum, mut cells) = (0.0, 0usize);
    for (f, name) in names.iter().enumerate() {
        let (mut sum, mut count) = (0.0, 0usize);
        for (fold, row) in folds.iter().zip(&per_fold) {
            match row[f] {
                Some((correct, total)) => {
                    let acc = correct as f64 / total as f64;
                    sum += acc;
                    count += 1;
                }
                None => skipped.push(SkippedCell {
                    fold: fold.name.clone(),
                    feature: name.clone(),
                }),
            }
        }
        if count > 0 {
            per_feature.insert(name.clone(), sum / count as f64);
            cell_sum += sum;
            cells += count;
        }
    }
    if cells == 0 {
        return Err(Error::InvalidArgument("every (fold, feature) cell was skipped".into()));
    }
    Ok(PredictionReport {
        protocol,
        n_folds: folds.len(),
        n_features: names.len(),
        per_feature_accuracy: per_feature,
        macro_accuracy: cell_sum / cells as f64,
        evaluated_cells: cells,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpearmanResult {
    pub rho: f64,
    pub p_value: f64,
    pub n_pairs: usize,
}

/// Ranks starting at 1, with tied values sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman correlation of two samples with a two-sided p-value from the
/// t approximation.
pub fn spearman_vectors(a: &[f64], b: &[f64]) -> Result<SpearmanResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let m = a.len();
    if m < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: m });
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let mean = (m as f64 + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation("one of the samples is constant".into()));
    }
    let rho = (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0);
    let df = (m - 2) as f64;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numerical(e.to_string()))?;
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(SpearmanResult {
        rho,
        p_value,
        n_pairs: m,
    })
}

/// Spearman correlation over the strict upper triangles of two distance
/// matrices on the same languages. `d2` is reordered to match `d1`.
pub fn spearman(d1: &DistanceMatrix, d2: &DistanceMatrix) -> Result<SpearmanResult> {
    let n = d1.len();
    if d2.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d2.len(),
        });
    }
    if n < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: n });
    }
    let d2 = d2.select(d1.languages())?;
    spearman_vectors(&d1.upper_triangle(), &d2.upper_triangle())
}
