//! Multi-view language representations.
//!
//! Knowledge-base and task-learned language vectors are fused with SVCCA,
//! then compared through hierarchical clustering, tree edit distance to a
//! reference phylogeny, typological feature prediction and partner-language
//! ranking.

pub mod dataset;
pub mod distance;
pub mod error;
pub mod evaluation;
pub mod phylo;
pub mod ranking;
pub mod selection;
pub mod svcca;
pub mod treedist;

pub use dataset::{align, load_meta, load_view, AlignedViews, LanguageCode, LanguageMeta, ViewFormat, ViewMatrix};
pub use distance::{cosine_distance_matrix, DistanceMatrix};
pub use error::{Error, Result};
