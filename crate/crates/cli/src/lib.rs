//! Command-line front end: JSON experiment configs, figure presets, sweeps
//! and output bundles.

pub mod bundle;
pub mod config;
pub mod error;
pub mod presets;
pub mod sweep;
pub mod validate;

use std::path::Path;
use std::sync::Arc;

use spinring_core::SpectralCache;

use crate::bundle::{run_to_dir, Outcome};
use crate::error::Result;
use crate::presets::{preset, Figure};

/// Runs every member of a figure preset under `out`. A figure with several
/// members writes one subdirectory per label. Members share one spectral
/// cache, so phase segments that differ only in B are decomposed once.
pub fn run_figure(figure: Figure, out: &Path) -> Result<Vec<(String, Outcome)>> {
    let members = preset(figure);
    let cache = Arc::new(SpectralCache::new());
    let single = members.len() == 1;
    members
        .into_iter()
        .map(|(label, config)| {
            let dir = if single { out.to_path_buf() } else { out.join(&label) };
            run_to_dir(&config, &dir, Some(cache.clone())).map(|o| (label, o))
        })
        .collect()
}
