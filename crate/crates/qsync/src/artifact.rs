//! Results of a scenario run, in a form that serializes losslessly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub const TOOL: &str = "qsync";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArtifact {
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Table>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sync: Vec<SyncSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<ModeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Spectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing_scan: Option<DephasingScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Verb that produced the artifact: `run`, `sweep` or `spectrum`.
    pub command: String,
    pub grid: GridInfo,
    /// The fully resolved scenario.
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridInfo {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

/// Pearson indicator of one observable pair on the trajectory grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncSummary {
    pub a: String,
    pub b: String,
    pub window: f64,
    pub threshold: f64,
    /// Undefined samples (constant windows, or windows running past the end
    /// of the trajectory) are `null`.
    pub pearson: Vec<Option<f64>>,
    pub onset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<[f64; 2]>,
    /// Whether `|C| >= threshold` throughout `span`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sustained: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_abs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSummary {
    pub frequencies: Vec<f64>,
    /// Row-major normal-mode transform; column `m` holds mode `m`.
    pub transform: Vec<f64>,
    /// Effective bath couplings, one row per mode.
    pub kappa: Vec<Vec<f64>>,
    pub decay: Vec<f64>,
    pub noiseless: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spectrum {
    /// What was diagonalized, e.g. `liouvillian` or `moment_generator`.
    pub generator: String,
    /// `[re, im]`, sorted by decay rate, then frequency.
    pub eigenvalues: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<Gap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gap {
    pub slow_eigenvalue: [f64; 2],
    pub slow_rate: f64,
    pub next_rate: Option<f64>,
    pub gap_ratio: Option<f64>,
    pub degenerate_frequencies: bool,
}

impl From<&qsync_core::liouvillian::GapReport> for Gap {
    fn from(g: &qsync_core::liouvillian::GapReport) -> Self {
        Gap {
            slow_eigenvalue: [g.slow_eigenvalue.re, g.slow_eigenvalue.im],
            slow_rate: g.slow_rate,
            next_rate: g.next_rate,
            gap_ratio: g.gap_ratio,
            degenerate_frequencies: g.degenerate_frequencies,
        }
    }
}

/// Coherence-block spectra across dephasing rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingScan {
    pub gamma_z: Vec<f64>,
    pub eigenvalues: Vec<Vec<[f64; 2]>>,
    pub gap_ratio: Vec<Option<f64>>,
    /// Largest distance between the block spectrum and the undephased one
    /// shifted by `-4 gamma_z`.
    pub max_shift_error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub lambdas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub eval_time: f64,
    pub window: f64,
    /// `|C|`, row-major with one row per coupling.
    pub values: Vec<Option<f64>>,
}

impl SweepTable {
    pub fn matrix(&self) -> qsync_core::sync::SweepMatrix {
        qsync_core::sync::SweepMatrix {
            lambdas: self.lambdas.clone(),
            omegas: self.omegas.clone(),
            values: self.values.clone(),
        }
    }
}

impl RunArtifact {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                field,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })
    }
}
