use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::cca::{fit_cca, CcaTransform, DEFAULT_RETENTION_CUTOFF, DEFAULT_RIDGE};
use super::svd::{fit_svd_with, validate_threshold, SvdTransform};
use crate::dataset::{AlignedViews, LanguageCode, ViewMatrix};
use crate::error::{Error, Result};

/// Which of the two fused views a row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewSide {
    X,
    Y,
}

impl std::str::FromStr for ViewSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(ViewSide::X),
            "y" => Ok(ViewSide::Y),
            other => Err(Error::InvalidArgument(format!(
                "view side must be x or y, got {other:?}"
            ))),
        }
    }
}

/// Hyperparameters of an SVCCA fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvccaConfig {
    pub threshold_x: f64,
    pub threshold_y: f64,
    pub retention_cutoff: f64,
    pub ridge: f64,
    /// Scale columns to unit variance before each SVD.
    pub standardize: bool,
}

impl Default for SvccaConfig {
    fn default() -> Self {
        SvccaConfig {
            threshold_x: 1.0,
            threshold_y: 1.0,
            retention_cutoff: DEFAULT_RETENTION_CUTOFF,
            ridge: DEFAULT_RIDGE,
            standardize: false,
        }
    }
}

impl SvccaConfig {
    pub fn with_thresholds(threshold_x: f64, threshold_y: f64) -> Self {
        SvccaConfig {
            threshold_x,
            threshold_y,
            ..Default::default()
        }
    }

    pub fn fit(&self, av: &AlignedViews) -> Result<SvccaModel> {
        validate_threshold(self.threshold_x)?;
        validate_threshold(self.threshold_y)?;
        let svd_x = fit_svd_with(av.view_x().data(), self.threshold_x, self.standardize)?;
        let svd_y = fit_svd_with(av.view_y().data(), self.threshold_y, self.standardize)?;
        let reduced_x = svd_x.transform(av.view_x().data())?;
        let reduced_y = svd_y.transform(av.view_y().data())?;
        let cca = fit_cca(&reduced_x, &reduced_y, self.retention_cutoff, self.ridge)?;
        let shared_dim = cca.n_retained();
        if shared_dim == 0 {
            return Err(Error::NoCorrelatedDimensions {
                cutoff: self.retention_cutoff,
                correlations: cca.correlations.clone(),
            });
        }
        Ok(SvccaModel {
            svd_x,
            svd_y,
            cca,
            shared_dim,
            train_languages: av.common().to_vec(),
            view_names: (av.view_x().name().to_string(), av.view_y().name().to_string()),
        })
    }
}

/// Two-view fusion: per-view truncated SVD followed by CCA, keeping the
/// canonical dimensions whose correlation reaches the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct SvccaModel {
    pub(crate) svd_x: SvdTransform,
    pub(crate) svd_y: SvdTransform,
    pub(crate) cca: CcaTransform,
    pub(crate) shared_dim: usize,
    pub(crate) train_languages: Vec<LanguageCode>,
    pub(crate) view_names: (String, String),
}

impl SvccaModel {
    pub fn svd_x(&self) -> &SvdTransform {
        &self.svd_x
    }

    pub fn svd_y(&self) -> &SvdTransform {
        &self.svd_y
    }

    pub fn cca(&self) -> &CcaTransform {
        &self.cca
    }

    pub fn shared_dim(&self) -> usize {
        self.shared_dim
    }

    pub fn train_languages(&self) -> &[LanguageCode] {
        &self.train_languages
    }

    pub fn view_names(&self) -> (&str, &str) {
        (&self.view_names.0, &self.view_names.1)
    }

    pub fn input_dim(&self, side: ViewSide) -> usize {
        match side {
            ViewSide::X => self.svd_x.input_dim(),
            ViewSide::Y => self.svd_y.input_dim(),
        }
    }

    /// Name used for projected spaces, e.g. `SVCCA(U_S,L_T)`.
    pub fn space_name(&self) -> String {
        format!("SVCCA({},{})", self.view_names.0, self.view_names.1)
    }

    /// Maps raw rows of one view into the shared space (retained dimensions only).
    pub fn project(&self, rows: &DMatrix<f64>, side: ViewSide) -> Result<DMatrix<f64>> {
        let variates = match side {
            ViewSide::X => self.cca.transform_x(&self.svd_x.transform(rows)?)?,
            ViewSide::Y => self.cca.transform_y(&self.svd_y.transform(rows)?)?,
        };
        let keep: Vec<usize> = self
            .cca
            .retained
            .iter()
            .enumerate()
            .filter_map(|(j, r)| r.then_some(j))
            .collect();
        Ok(variates.select_columns(&keep))
    }

    /// Projects every language of `view` and wraps the result as a new view.
    pub fn project_view(&self, view: &ViewMatrix, side: ViewSide) -> Result<ViewMatrix> {
        let data = self.project(view.data(), side)?;
        ViewMatrix::new(self.space_name(), view.languages().to_vec(), data, None)
    }
}

/// Fits SVCCA with the default ridge and no standardization.
pub fn fit_svcca(av: &AlignedViews, threshold_x: f64, threshold_y: f64, retention_cutoff: f64) -> Result<SvccaModel> {
    SvccaConfig {
        threshold_x,
        threshold_y,
        retention_cutoff,
        ..Default::default()
    }
    .fit(av)
}

pub fn project(model: &SvccaModel, rows: &DMatrix<f64>, side: ViewSide) -> Result<DMatrix<f64>> {
    model.project(rows, side)
}

/// Row-wise concatenation of the two aligned views.
pub fn concat_views(av: &AlignedViews) -> ViewMatrix {
    let x = av.view_x();
    let y = av.view_y();
    let (dx, dy) = (x.dim(), y.dim());
    let data = DMatrix::from_fn(av.len(), dx + dy, |i, j| {
        if j < dx {
            x.data()[(i, j)]
        } else {
            y.data()[(i, j - dx)]
        }
    });
    let names = match (x.feature_names(), y.feature_names()) {
        (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
        _ => None,
    };
    ViewMatrix::new(format!("{}+{}", x.name(), y.name()), av.common().to_vec(), data, names)
        .expect("aligned views concatenate into a valid view")
}
