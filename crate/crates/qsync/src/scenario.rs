//! Scenario files: the JSON schema, defaults and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::run;

/// Version of the scenario schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    /// Used as the stem of every output file.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model: Model,
    pub time: TimeSpec,
    /// Series recorded in the trajectory table. Empty selects the defaults of
    /// the model kind.
    #[serde(default)]
    pub observables: Vec<String>,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    Harmonic(HarmonicParams),
    SpinPairLocalBath(SpinLocalParams),
    SpinPairDephasing(DephasingParams),
    SpinLocalMeComparison(SpinLocalParams),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Harmonic(_) => "harmonic",
            Model::SpinPairLocalBath(_) => "spin_pair_local_bath",
            Model::SpinPairDephasing(_) => "spin_pair_dephasing",
            Model::SpinLocalMeComparison(_) => "spin_local_me_comparison",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicParams {
    /// Bare frequencies `omega_i`.
    pub frequencies: Vec<f64>,
    /// Symmetric coupling matrix `lambda_ij` with zero diagonal.
    pub couplings: Vec<Vec<f64>>,
    #[serde(default)]
    pub coupling_form: CouplingForm,
    pub bath: BathSpec,
    /// Squeezing parameters of the initial squeezed vacuum, one per site.
    pub squeezing: Vec<f64>,
    /// Upper bound on the integrator step; defaults to `0.01 / max Omega`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    #[default]
    Bilinear,
    Spring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub kind: BathKind,
    /// One-based site of a local bath.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    pub gamma: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathKind {
    Separate,
    Common,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinLocalParams {
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub gamma0: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default)]
    pub secular: Secular,
    pub initial_state: [QubitState; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Secular {
    #[default]
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma: f64,
    pub gamma_z: f64,
    /// Bath-induced exchange coupling.
    #[serde(default)]
    pub s: f64,
    pub initial_state: [QubitState; 2],
    /// Dephasing rates at which the coherence block is diagonalized.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma_z_scan: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitState {
    #[serde(rename = "e")]
    Excited,
    #[serde(rename = "g")]
    Ground,
    #[serde(rename = "+")]
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub start: f64,
    pub end: f64,
    /// Sampling step of the recorded series.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Observable pairs to correlate. Empty selects the defaults of the model
    /// kind.
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    /// Interval over which synchronization must hold for a positive verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<[f64; 2]>,
    /// Frequency tolerance of the gap report's degeneracy flag.
    #[serde(default = "default_tol_freq")]
    pub tol_freq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            window: default_window(),
            threshold: default_threshold(),
            pairs: Vec::new(),
            span: None,
            tol_freq: default_tol_freq(),
            sweep: None,
        }
    }
}

/// Coupling-detuning grid for a harmonic pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub lambda: Axis,
    pub omega2: Axis,
    pub eval_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        qsync_core::sync::linspace(self.from, self.to, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: None,
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

fn default_cutoff() -> f64 {
    qsync_core::spin::DEFAULT_OHMIC_CUTOFF
}

fn default_window() -> f64 {
    qsync_core::sync::DEFAULT_WINDOW
}

fn default_threshold() -> f64 {
    qsync_core::sync::DEFAULT_THRESHOLD
}

fn default_tol_freq() -> f64 {
    1e-6
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

/// Parses a scenario document without validating it.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            field,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    Ok(scenario)
}

/// Parses, fills defaults and validates a scenario document.
pub fn scenario_from_str(text: &str) -> Result<Scenario> {
    let mut scenario = parse_scenario(text)?;
    scenario.apply_defaults();
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    scenario_from_str(&text)
}

impl Scenario {
    pub fn default_observables(&self) -> Vec<String> {
        let names: &[&str] = match &self.model {
            Model::Harmonic(p) => {
                return ["x", "p"]
                    .iter()
                    .flat_map(|q| (1..=p.frequencies.len()).map(move |i| format!("{q}{i}^2")))
                    .collect();
            }
            Model::SpinPairLocalBath(_) => &["sx1", "sx2"],
            Model::SpinPairDephasing(_) => &["sx1", "sx2", "I", "I0"],
            Model::SpinLocalMeComparison(_) => &["sx1", "sx2", "sx1_local", "sx2_local"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn default_pairs(&self) -> Vec<[String; 2]> {
        let pair = |a: &str, b: &str| [a.to_string(), b.to_string()];
        match &self.model {
            Model::Harmonic(_) => vec![pair("x1^2", "x2^2")],
            Model::SpinPairLocalBath(_) | Model::SpinPairDephasing(_) => vec![pair("sx1", "sx2")],
            Model::SpinLocalMeComparison(_) => {
                vec![pair("sx1", "sx2"), pair("sx1_local", "sx2_local")]
            }
        }
    }

    /// Replaces empty observable and pair lists by the kind defaults.
    pub fn apply_defaults(&mut self) {
        if self.observables.is_empty() {
            self.observables = self.default_observables();
        }
        if self.analysis.pairs.is_empty() {
            self.analysis.pairs = self.default_pairs();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        let name_ok = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !self.name.starts_with('.');
        if !name_ok {
            return Err(Error::invalid(
                "name",
                "must be non-empty and use only ASCII letters, digits, '_', '-' and '.'",
            ));
        }
        let grid = self.grid()?;
        let prepared = run::prepare(self)?;
        let known = prepared.observable_names();
        for (k, name) in self.observables.iter().enumerate() {
            if !known.iter().any(|n| n == name) {
                return Err(Error::invalid(
                    format!("observables[{k}]"),
                    format!(
                        "unknown observable `{name}` for {} (known: {})",
                        self.model.kind(),
                        known.join(", ")
                    ),
                ));
            }
        }
        let a = &self.analysis;
        if !(a.threshold.is_finite() && a.threshold > 0.0 && a.threshold <= 1.0) {
            return Err(Error::invalid("analysis.threshold", "must lie in (0, 1]"));
        }
        if !(a.tol_freq.is_finite() && a.tol_freq >= 0.0) {
            return Err(Error::invalid("analysis.tol_freq", "must be nonnegative"));
        }
        let steps = grid.steps_in(a.window);
        if !(a.window.is_finite() && a.window > 0.0) || steps < qsync_core::sync::MIN_WINDOW_STEPS {
            return Err(Error::invalid(
                "analysis.window",
                format!(
                    "must span at least {} sampling steps (window {}, step {})",
                    qsync_core::sync::MIN_WINDOW_STEPS,
                    a.window,
                    grid.step()
                ),
            ));
        }
        for (k, pair) in a.pairs.iter().enumerate() {
            for name in pair {
                if !self.observables.contains(name) {
                    return Err(Error::invalid(
                        format!("analysis.pairs[{k}]"),
                        format!("`{name}` is not among the recorded observables"),
                    ));
                }
            }
        }
        if let Some([from, to]) = a.span {
            if !(from.is_finite() && to.is_finite() && from <= to) {
                return Err(Error::invalid(
                    "analysis.span",
                    "must be an ordered pair of finite times",
                ));
            }
            if from < grid.start() || to + a.window > grid.end() + 1e-9 * grid.step() {
                return Err(Error::invalid(
                    "analysis.span",
                    format!(
                        "[{from}, {to}] plus the window {} must lie inside the time grid [{}, {}]",
                        a.window,
                        grid.start(),
                        grid.end()
                    ),
                ));
            }
        }
        if let Some(sweep) = &a.sweep {
            self.validate_sweep(sweep, &grid)?;
        }
        if let Model::SpinPairDephasing(p) = &self.model {
            for (k, gz) in p.gamma_z_scan.iter().enumerate() {
                if !(gz.is_finite() && *gz >= 0.0) {
                    return Err(Error::invalid(
                        format!("model.params.gamma_z_scan[{k}]"),
                        "must be nonnegative",
                    ));
                }
            }
        }
        for f in &self.output.formats {
            if self.output.formats.iter().filter(|g| *g == f).count() > 1 {
                return Err(Error::invalid("output.formats", "formats must not repeat"));
            }
        }
        Ok(())
    }

    fn validate_sweep(&self, sweep: &SweepSpec, grid: &qsync_core::TimeGrid) -> Result<()> {
        let Model::Harmonic(p) = &self.model else {
            return Err(Error::invalid(
                "analysis.sweep",
                "coupling-detuning sweeps are defined for harmonic pairs only",
            ));
        };
        if p.frequencies.len() != 2 {
            return Err(Error::invalid("analysis.sweep", "sweeps need a pair of oscillators"));
        }
        for (field, axis) in [
            ("analysis.sweep.lambda", &sweep.lambda),
            ("analysis.sweep.omega2", &sweep.omega2),
        ] {
            if axis.count == 0 || !(axis.from.is_finite() && axis.to.is_finite()) {
                return Err(Error::invalid(field, "needs finite bounds and at least one point"));
            }
        }
        if sweep.omega2.from.min(sweep.omega2.to) <= 0.0 {
            return Err(Error::invalid("analysis.sweep.omega2", "frequencies must be positive"));
        }
        if sweep.lambda.from.min(sweep.lambda.to) < 0.0 {
            return Err(Error::invalid("analysis.sweep.lambda", "couplings must be nonnegative"));
        }
        let t = sweep.eval_time;
        if !(t.is_finite() && t >= grid.start() && t + self.analysis.window <= grid.end() + 1e-9 * grid.step()) {
            return Err(Error::invalid(
                "analysis.sweep.eval_time",
                format!(
                    "eval_time plus the window must lie inside the time grid [{}, {}]",
                    grid.start(),
                    grid.end()
                ),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<qsync_core::TimeGrid> {
        qsync_core::TimeGrid::new(self.time.start, self.time.end, self.time.step).map_err(Error::validation("time"))
    }
}
