//! Scenario-driven runner for the `qsync-core` engines.
//!
//! A scenario is a JSON document naming a model kind, its parameters, a time
//! grid and the analyses to perform. [`load_scenario`] parses and validates
//! it, [`run_scenario`] produces a [`RunArtifact`], and [`export`] writes the
//! artifact as CSV, JSON or SVG.

pub mod artifact;
pub mod error;
pub mod export;
pub mod run;
pub mod scenario;
pub mod svg;

pub use artifact::RunArtifact;
pub use error::{Error, Result};
pub use export::export;
pub use run::{run_scenario, run_spectrum, run_sweep};
pub use scenario::{load_scenario, parse_scenario, scenario_from_str, Format, Scenario, SCHEMA_VERSION};
