mod cluster;
mod fuse;
mod predict;
mod rank;
mod trees;

use std::path::{Path, PathBuf};

use mvlang::dataset::{load_view, ViewFormat, ViewMatrix};

use crate::config::Config;

pub use cluster::{cluster, sweep, ClusterArgs, SweepArgs};
pub use fuse::{fuse, project, FuseArgs, ProjectArgs};
pub use predict::{predict, PredictArgs};
pub use rank::{rank, RankArgs};
pub use trees::{correlate, tree, treedist, CorrelateArgs, TreeArgs, TreedistArgs};

/// Settings shared by every subcommand.
pub struct Ctx {
    pub config: Config,
    pub out_dir: Option<PathBuf>,
}

impl Ctx {
    pub fn out_dir(&self) -> Option<&Path> {
        self.out_dir.as_deref()
    }
}

pub fn read_view(path: &Path) -> mvlang::Result<ViewMatrix> {
    load_view(path, ViewFormat::from_path(path))
}

/// Shortest round-trip form used in text reports, in exponent notation for
/// very small or large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}
