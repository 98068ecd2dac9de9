mod exponents;
mod scans;
mod solver;

use std::sync::Arc;

use dispersive_lab::spectral::{Field, TorusGrid};
use dispersive_lab::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::config::ConfigError;
use crate::record::{Series, Status};

pub use exponents::ExponentsConfig;
pub use scans::{HessianScanConfig, KernelDecayConfig, StrichartzScanConfig};
pub use solver::{ContractionConfig, NonlinearCheckConfig, RoughDataConfig, SolveConfig};

pub struct Outcome {
    pub status: Status,
    pub summary: String,
    pub tolerance: String,
    pub results: serde_json::Value,
    pub series: Option<Series>,
    pub snapshot: Option<Field>,
    pub grid: Option<Arc<TorusGrid>>,
}

impl Outcome {
    pub fn new(status: Status, summary: String, tolerance: String, results: serde_json::Value) -> Self {
        Outcome { status, summary, tolerance, results, series: None, snapshot: None, grid: None }
    }

    /// Non-convergence and divergence are recorded, never passed.
    fn inconclusive(err: &Error, tolerance: String) -> Self {
        Outcome::new(Status::Inconclusive, format!("inconclusive: {err}"), tolerance, json!({ "error": err.to_string() }))
    }
}

pub trait Experiment: DeserializeOwned + Serialize {
    const NAME: &'static str;
    const ANCHOR: &'static str;
    fn anchor(&self) -> Option<&String>;
    fn run(&self) -> anyhow::Result<Outcome>;
}

fn is_numerical(e: &Error) -> bool {
    matches!(e, Error::NonConvergence(_) | Error::Diverged { .. })
}

/// Library errors from parameter checks are configuration errors.
fn lib(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidParameter(_) | Error::OutsideRange(_) | Error::EmptyWindow { .. } | Error::GridMismatch(_) => {
            ConfigError(e.to_string()).into()
        }
        other => other.into(),
    }
}
