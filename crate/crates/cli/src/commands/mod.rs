pub mod aa;
pub mod classical;
pub mod floquet;
pub mod quantum;
pub mod repro;

use serde_json::Value as Json;

use crate::config::Config;
use crate::output::Artifact;

/// Everything a command hands back for writing.
#[derive(Debug, Default)]
pub struct Produced {
    pub artifacts: Vec<Artifact>,
    pub derived: Json,
    pub dt: Json,
    pub seed: Option<u64>,
}

pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub seed: u64,
    pub quiet: bool,
}

impl Ctx<'_> {
    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("dharper: {}", msg.as_ref());
        }
    }
}

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Logarithmically spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}
