//! JSON persistence for fitted SVCCA models.
//!
//! Matrices are stored as arrays of rows. Floats are written in shortest
//! round-trip form, so a reloaded model is bit-identical to the saved one.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::cca::CcaTransform;
use super::model::SvccaModel;
use super::svd::SvdTransform;
use crate::dataset::LanguageCode;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    view_names: (String, String),
    train_languages: Vec<LanguageCode>,
    svd_x: SvdFile,
    svd_y: SvdFile,
    cca: CcaFile,
    shared_dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SvdFile {
    mean: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<Vec<f64>>,
    components: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
    threshold: f64,
    explained_ratio: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CcaFile {
    mean_x: Vec<f64>,
    mean_y: Vec<f64>,
    proj_x: Vec<Vec<f64>>,
    proj_y: Vec<Vec<f64>>,
    correlations: Vec<f64>,
    retained: Vec<bool>,
    cutoff: f64,
    ridge: f64,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ModelFormat(format!("{what}: expected {nrows}×{ncols} matrix")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn check_len(v: &[f64], len: usize, what: &str) -> Result<()> {
    if v.len() != len {
        return Err(Error::ModelFormat(format!(
            "{what}: expected length {len}, found {}",
            v.len()
        )));
    }
    Ok(())
}

impl SvdFile {
    fn from_transform(t: &SvdTransform) -> Self {
        SvdFile {
            mean: t.mean.iter().copied().collect(),
            scale: t.scale.as_ref().map(|s| s.iter().copied().collect()),
            components: rows_of(&t.components),
            singular_values: t.singular_values.iter().copied().collect(),
            threshold: t.variance_threshold,
            explained_ratio: t.explained_ratio,
        }
    }

    fn into_transform(self, what: &str) -> Result<SvdTransform> {
        let d = self.mean.len();
        let k = self.singular_values.len();
        if d == 0 || k == 0 {
            return Err(Error::ModelFormat(format!("{what}: empty transform")));
        }
        if let Some(scale) = &self.scale {
            check_len(scale, d, what)?;
        }
        Ok(SvdTransform {
            components: matrix_from(&self.components, d, k, what)?,
            mean: DVector::from_vec(self.mean),
            scale: self.scale.map(DVector::from_vec),
            singular_values: DVector::from_vec(self.singular_values),
            variance_threshold: self.threshold,
            explained_ratio: self.explained_ratio,
        })
    }
}

/// Serializes a model to its JSON document.
pub fn model_to_json(model: &SvccaModel) -> String {
    let cca = &model.cca;
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        view_names: model.view_names.clone(),
        train_languages: model.train_languages.clone(),
        svd_x: SvdFile::from_transform(&model.svd_x),
        svd_y: SvdFile::from_transform(&model.svd_y),
        cca: CcaFile {
            mean_x: cca.mean_x.iter().copied().collect(),
            mean_y: cca.mean_y.iter().copied().collect(),
            proj_x: rows_of(&cca.proj_x),
            proj_y: rows_of(&cca.proj_y),
            correlations: cca.correlations.clone(),
            retained: cca.retained.clone(),
            cutoff: cca.retention_cutoff,
            ridge: cca.ridge,
        },
        shared_dim: model.shared_dim,
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

/// Parses and validates a model JSON document.
pub fn model_from_json(text: &str) -> Result<SvccaModel> {
    #[derive(Deserialize)]
    struct VersionProbe {
        version: Option<u32>,
    }
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    match probe.version {
        Some(MODEL_FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {v} (expected {MODEL_FORMAT_VERSION})"
            )))
        }
        None => return Err(Error::ModelFormat("missing version field".into())),
    }
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;

    let svd_x = file.svd_x.into_transform("svd_x")?;
    let svd_y = file.svd_y.into_transform("svd_y")?;
    let c = file.cca;
    let m = c.correlations.len();
    if c.retained.len() != m || m == 0 {
        return Err(Error::ModelFormat("cca: correlations/retained length mismatch".into()));
    }
    check_len(&c.mean_x, svd_x.k(), "cca.mean_x")?;
    check_len(&c.mean_y, svd_y.k(), "cca.mean_y")?;
    let cca = CcaTransform {
        proj_x: matrix_from(&c.proj_x, svd_x.k(), m, "cca.proj_x")?,
        proj_y: matrix_from(&c.proj_y, svd_y.k(), m, "cca.proj_y")?,
        mean_x: DVector::from_vec(c.mean_x),
        mean_y: DVector::from_vec(c.mean_y),
        correlations: c.correlations,
        retained: c.retained,
        retention_cutoff: c.cutoff,
        ridge: c.ridge,
    };
    if cca.n_retained() != file.shared_dim || file.shared_dim == 0 {
        return Err(Error::ModelFormat(format!(
            "shared_dim {} disagrees with the retained mask",
            file.shared_dim
        )));
    }
    Ok(SvccaModel {
        svd_x,
        svd_y,
        cca,
        shared_dim: file.shared_dim,
        train_languages: file.train_languages,
        view_names: file.view_names,
    })
}

pub fn save_model(model: &SvccaModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model) + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvccaModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
