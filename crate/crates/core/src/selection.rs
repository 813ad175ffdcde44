//! Choosing the number of clusters and the SVD variance threshold.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{align, ViewMatrix};
use crate::distance::{cosine_distance_matrix, DistanceMatrix};
use crate::error::{Error, Result};
use crate::phylo::{agglomerate, cut, Linkage, MergeStep};
use crate::svcca::{fit_svd, SvccaConfig, ViewSide};

/// Per-sample silhouette widths for a flat clustering. Members of singleton
/// clusters score 0.
pub fn silhouette_samples(d: &DMatrix<f64>, labels: &[usize]) -> Result<Vec<f64>> {
    let n = labels.len();
    if d.nrows() != n || d.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d.nrows(),
        });
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let mut out = Vec::with_capacity(n);
    let mut sums = vec![0.0; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            sums[labels[j]] += d[(i, j)];
        }
        let own = labels[i];
        if sizes[own] == 1 {
            out.push(0.0);
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        out.push(if denom > 0.0 && b.is_finite() {
            (b - a) / denom
        } else {
            0.0
        });
    }
    Ok(out)
}

pub fn silhouette_score(d: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    let s = silhouette_samples(d, labels)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SilhouetteCurve {
    pub ks: Vec<usize>,
    pub scores: Vec<f64>,
    pub best_k: usize,
}

fn check_steps(d: &DistanceMatrix, steps: &[MergeStep]) -> Result<usize> {
    let n = d.len();
    if steps.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: steps.len() + 1,
        });
    }
    Ok(n)
}

/// Mean silhouette of the dendrogram cut at each `k` in `2..=k_max`; the
/// peak (smallest `k` on ties) is `best_k`.
pub fn silhouette_curve(d: &DistanceMatrix, steps: &[MergeStep], k_max: usize) -> Result<SilhouetteCurve> {
    let n = check_steps(d, steps)?;
    if k_max < 2 || k_max + 1 > n {
        return Err(Error::InvalidK {
            k: k_max,
            min: 2,
            max: n.saturating_sub(1),
        });
    }
    let ks: Vec<usize> = (2..=k_max).collect();
    let scores = ks
        .iter()
        .map(|&k| silhouette_score(d.data(), &cut(steps, k)?))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(SilhouetteCurve {
        best_k: ks[best],
        ks,
        scores,
    })
}

/// Within-cluster dispersion `Σ_c S_c / n_c`, where `S_c` sums the distances
/// over unordered pairs inside cluster `c`.
pub fn within_dispersion(d: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![0.0; k];
    let mut sizes = vec![0usize; k];
    for i in 0..labels.len() {
        sizes[labels[i]] += 1;
        for j in i + 1..labels.len() {
            if labels[i] == labels[j] {
                sums[labels[i]] += d[(i, j)];
            }
        }
    }
    sums.iter()
        .zip(&sizes)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| s / n as f64)
        .sum()
}

/// `(k, dispersion)` for every `k` in `1..=k_max`. No knee is picked.
pub fn elbow_curve(d: &DistanceMatrix, steps: &[MergeStep], k_max: usize) -> Result<Vec<(usize, f64)>> {
    let n = check_steps(d, steps)?;
    if k_max < 1 || k_max > n {
        return Err(Error::InvalidK {
            k: k_max,
            min: 1,
            max: n,
        });
    }
    (1..=k_max)
        .map(|k| Ok((k, within_dispersion(d.data(), &cut(steps, k)?))))
        .collect()
}

/// Settings of a bootstrap stability sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub thresholds: Vec<f64>,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub linkage: Linkage,
    /// Upper bound on the silhouette search; further capped at `m − 1` for a
    /// resample of `m` languages.
    pub k_max: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            thresholds: (10..=20).map(|i| i as f64 / 20.0).collect(),
            sizes: vec![10, 20, 30, 40, 53],
            replicates: 100,
            seed: 0,
            linkage: Linkage::Average,
            k_max: 20,
        }
    }
}

/// Checks that a variance threshold is one of 0.50, 0.55, ..., 1.00.
pub fn validate_grid_threshold(t: f64) -> Result<()> {
    let steps = t * 20.0;
    if steps.is_finite() && (steps - steps.round()).abs() < 1e-9 && (10.0..=20.0).contains(&steps.round()) {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(t))
    }
}

impl StabilityConfig {
    fn validate(&self, available: usize) -> Result<()> {
        if self.thresholds.is_empty() {
            return Err(Error::InvalidArgument("no thresholds given".into()));
        }
        for &t in &self.thresholds {
            validate_grid_threshold(t)?;
        }
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "sample sizes must be strictly increasing".into(),
            ));
        }
        for &s in &self.sizes {
            if s < 3 || s > available {
                return Err(Error::InvalidSampleSize { size: s, available });
            }
        }
        if self.replicates < 10 {
            return Err(Error::InvalidArgument(format!(
                "at least 10 replicates are needed, got {}",
                self.replicates
            )));
        }
        if self.k_max < 2 {
            return Err(Error::InvalidK {
                k: self.k_max,
                min: 2,
                max: usize::MAX,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub threshold: f64,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    /// Replicates per size whose pipeline failed numerically and were left out.
    pub failed: Vec<usize>,
    pub clusters_mean: Vec<f64>,
    /// Empirical 2.5 % and 97.5 % quantiles of the cluster count.
    pub clusters_ci: Vec<(f64, f64)>,
    pub clusters_std: Vec<f64>,
    /// Mean over sizes of `clusters_std`.
    pub variability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySweep {
    pub reports: Vec<StabilityReport>,
    /// Threshold with the least variability; the smallest one on ties.
    pub recommended: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn replicate_rng(seed: u64, size_index: usize, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((size_index as u64) << 32) | replicate as u64);
    rng
}

/// Distinct row indices of a bootstrap draw of `size` rows out of `n`.
/// Draws leaving fewer than three distinct rows are repeated.
fn bootstrap_rows(rng: &mut ChaCha8Rng, n: usize, size: usize) -> Vec<usize> {
    loop {
        let mut rows: Vec<usize> = (0..size).map(|_| rng.gen_range(0..n)).collect();
        rows.sort_unstable();
        rows.dedup();
        if rows.len() >= 3 {
            return rows;
        }
    }
}

fn peak_k(space: &ViewMatrix, linkage: Linkage, k_max: usize) -> Result<usize> {
    let d = cosine_distance_matrix(space)?;
    let steps = agglomerate(&d, linkage)?;
    Ok(silhouette_curve(&d, &steps, k_max.min(d.len() - 1))?.best_k)
}

/// Silhouette-peak cluster counts over bootstrap resamples, per threshold and
/// sample size. Each `(size, replicate)` pair draws the same languages for
/// every threshold.
pub fn stability_sweep(
    view: &ViewMatrix,
    partner: Option<&ViewMatrix>,
    config: &StabilityConfig,
) -> Result<StabilitySweep> {
    let aligned = partner.map(|p| align(view, p)).transpose()?;
    let languages = match &aligned {
        Some(av) => av.common().to_vec(),
        None => view.languages().to_vec(),
    };
    config.validate(languages.len())?;

    let draws: Vec<Vec<Vec<usize>>> = config
        .sizes
        .iter()
        .enumerate()
        .map(|(si, &size)| {
            (0..config.replicates)
                .map(|r| bootstrap_rows(&mut replicate_rng(config.seed, si, r), languages.len(), size))
                .collect()
        })
        .collect();

    let jobs: Vec<(usize, usize, usize)> = (0..config.thresholds.len())
        .flat_map(|t| (0..config.sizes.len()).flat_map(move |s| (0..config.replicates).map(move |r| (t, s, r))))
        .collect();
    let outcomes: Vec<Result<Option<usize>>> = jobs
        .par_iter()
        .map(|&(t, s, r)| {
            let threshold = config.thresholds[t];
            let codes: Vec<_> = draws[s][r].iter().map(|&i| languages[i].clone()).collect();
            let space = match &aligned {
                Some(av) => {
                    let sub = av.subset(&codes)?;
                    SvccaConfig::with_thresholds(threshold, threshold)
                        .fit(&sub)
                        .and_then(|m| m.project_view(sub.view_x(), ViewSide::X))
                }
                None => {
                    let sub = view.select(&codes)?;
                    fit_svd(sub.data(), threshold)
                        .and_then(|svd| svd.transform(sub.data()))
                        .and_then(|z| ViewMatrix::new(sub.name(), codes.clone(), z, None))
                }
            };
            match space.and_then(|sp| peak_k(&sp, config.linkage, config.k_max)) {
                Ok(k) => Ok(Some(k)),
                Err(e) if is_replicate_failure(&e) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut reports = Vec::with_capacity(config.thresholds.len());
    let mut it = outcomes.into_iter();
    for &threshold in &config.thresholds {
        let mut report = StabilityReport {
            threshold,
            sample_sizes: config.sizes.clone(),
            replicates: config.replicates,
            failed: Vec::new(),
            clusters_mean: Vec::new(),
            clusters_ci: Vec::new(),
            clusters_std: Vec::new(),
            variability: 0.0,
        };
        for _ in &config.sizes {
            let mut ks = Vec::with_capacity(config.replicates);
            let mut failed = 0;
            for _ in 0..config.replicates {
                match it.next().expect("one outcome per job")? {
                    Some(k) => ks.push(k as f64),
                    None => failed += 1,
                }
            }
            report.failed.push(failed);
            if ks.len() < 2 {
                return Err(Error::Numerical(format!(
                    "threshold {threshold}: only {} replicates succeeded",
                    ks.len()
                )));
            }
            ks.sort_by(f64::total_cmp);
            let mean = ks.iter().sum::<f64>() / ks.len() as f64;
            let var = ks.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (ks.len() - 1) as f64;
            report.clusters_mean.push(mean);
            report.clusters_ci.push((quantile(&ks, 0.025), quantile(&ks, 0.975)));
            report.clusters_std.push(var.sqrt());
        }
        report.variability = report.clusters_std.iter().sum::<f64>() / report.clusters_std.len() as f64;
        reports.push(report);
    }
    let mut best = 0;
    for (i, r) in reports.iter().enumerate() {
        if r.variability < reports[best].variability {
            best = i;
        }
    }
    Ok(StabilitySweep {
        recommended: reports[best].threshold,
        reports,
    })
}

fn is_replicate_failure(e: &Error) -> bool {
    e.is_numerical() || matches!(e, Error::NoCorrelatedDimensions { .. } | Error::DegenerateVector(_))
}
