//! Singular vector canonical correlation analysis.
//!
//! Each view is reduced with a centered truncated SVD, then CCA finds
//! paired directions maximising the correlation between the reduced views.
//! Dimensions whose canonical correlation reaches the retention cutoff form
//! the shared space, and a fitted model projects new rows from either view.

mod cca;
mod io;
mod model;
mod svd;

pub use cca::{fit_cca, CcaTransform, DEFAULT_RETENTION_CUTOFF, DEFAULT_RIDGE};
pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use model::{concat_views, fit_svcca, project, SvccaConfig, SvccaModel, ViewSide};
pub use svd::{fit_svd, fit_svd_with, transform_svd, validate_threshold, SvdTransform};
