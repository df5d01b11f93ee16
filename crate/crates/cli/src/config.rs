//! Experiment configuration: JSON in, validated struct with defaults out.

use std::fmt;

use serde::{Deserialize, Serialize};

use tensornet::tebd::GroundStateOptions;
use tensornet::{Model, TruncationSpec};

use crate::error::CliError;
use crate::verify::Suite;

/// Upper bound on TRG coarse-graining steps.
pub const MAX_TRG_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ed,
    Tebd,
    Trg,
    MpsInfo,
    Corr,
    Verify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ed => "ed",
            Command::Tebd => "tebd",
            Command::Trg => "trg",
            Command::MpsInfo => "mps-info",
            Command::Corr => "corr",
            Command::Verify => "verify",
        }
    }

    fn needs_model(self) -> bool {
        !matches!(self, Command::Trg | Command::Verify)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// Bond-dimension cap for TEBD, MPS compression and TRG.
    pub chi_max: usize,
    /// Relative discarded-weight cutoff.
    pub cutoff: f64,
    pub tau_schedule: Vec<f64>,
    pub max_sweeps: usize,
    pub energy_tol: f64,
    /// TRG coarse-graining steps.
    pub steps: usize,
    /// TRG inverse temperatures.
    pub betas: Vec<f64>,
    /// TRG coupling.
    pub coupling: f64,
    pub lanczos_iters: usize,
    pub lanczos_tol: f64,
    /// Number of separations sampled by `corr`.
    pub max_distance: usize,
    pub suite: String,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        let gs = GroundStateOptions::default();
        Self {
            chi_max: gs.chi_max,
            cutoff: gs.cutoff,
            tau_schedule: gs.tau_schedule,
            max_sweeps: gs.max_sweeps,
            energy_tol: gs.energy_tol,
            steps: 8,
            betas: vec![0.44],
            coupling: 1.0,
            lanczos_iters: 500,
            lanczos_tol: 1e-10,
            max_distance: 16,
            suite: "all".into(),
        }
    }
}

impl AlgorithmConfig {
    pub fn truncation(&self) -> TruncationSpec {
        TruncationSpec {
            chi_max: Some(self.chi_max),
            cutoff: self.cutoff,
            ..TruncationSpec::default()
        }
    }

    pub fn ground_state_options(&self, seed: u64) -> GroundStateOptions {
        GroundStateOptions {
            chi_max: self.chi_max,
            cutoff: self.cutoff,
            tau_schedule: self.tau_schedule.clone(),
            max_sweeps: self.max_sweeps,
            energy_tol: self.energy_tol,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// File to write; absent or `-` means standard output.
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(default)]
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Same as [`ExperimentConfig`] but with the command optional, for
/// invocations where the subcommand supplies it.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    #[serde(default)]
    model: Option<Model>,
    #[serde(default)]
    algorithm: AlgorithmConfig,
    #[serde(default)]
    output: OutputConfig,
    #[serde(default)]
    seed: u64,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Reads a config whose `command` must be present.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    parse_config_for(text, None)
}

/// Reads a config; `command` fills in or must agree with the file's field.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<ExperimentConfig, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if let Some(model) = value.get("model") {
        check_model_fields(model)?;
    }
    let raw: RawConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "config".to_string() } else { path };
        invalid(&field, e.into_inner().to_string())
    })?;
    let command = match (raw.command, command) {
        (Some(a), Some(b)) if a != b => return Err(invalid("command", format!("config says `{a}` but `{b}` was invoked"))),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(invalid("command", "missing")),
    };
    let config = ExperimentConfig {
        command,
        model: raw.model,
        algorithm: raw.algorithm,
        output: raw.output,
        seed: raw.seed,
    };
    config.validate()?;
    Ok(config)
}

/// Tagged model blocks lose field paths during typed deserialization, so the
/// numeric fields are checked by name first.
fn check_model_fields(model: &serde_json::Value) -> Result<(), CliError> {
    let Some(fields) = model.as_object() else {
        return Ok(());
    };
    for (key, v) in fields {
        let field = format!("model.{key}");
        match key.as_str() {
            "n" if v.as_u64().is_none() => return Err(invalid(&field, format!("must be a non-negative integer (got {v})"))),
            "j" | "h" | "j1" | "j2" | "xi" if !v.is_number() => return Err(invalid(&field, format!("must be a number (got {v})"))),
            _ => {}
        }
    }
    Ok(())
}

fn finite(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be finite"))
    }
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite (got {x})")))
    }
}

pub fn validate_model(model: &Model) -> Result<(), CliError> {
    let min = match model {
        Model::IsingNnn { .. } => 3,
        _ => 2,
    };
    if model.n() < min {
        return Err(invalid("model.n", format!("must be at least {min} (got {})", model.n())));
    }
    match *model {
        Model::IsingNn { j, h, .. } => {
            finite("model.j", j)?;
            finite("model.h", h)
        }
        Model::IsingNnn { j1, j2, .. } => {
            finite("model.j1", j1)?;
            finite("model.j2", j2)
        }
        Model::ExpDecay { xi, .. } => positive("model.xi", xi),
        Model::Heisenberg { j, .. } => finite("model.j", j),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.model, self.command.needs_model()) {
            (Some(m), _) => validate_model(m)?,
            (None, true) => return Err(invalid("model", format!("required by `{}`", self.command))),
            (None, false) => {}
        }
        let a = &self.algorithm;
        if a.chi_max == 0 {
            return Err(invalid("algorithm.chi_max", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&a.cutoff) {
            return Err(invalid("algorithm.cutoff", format!("must lie in [0, 1) (got {})", a.cutoff)));
        }
        if a.tau_schedule.is_empty() {
            return Err(invalid("algorithm.tau_schedule", "must not be empty"));
        }
        for &tau in &a.tau_schedule {
            positive("algorithm.tau_schedule", tau)?;
        }
        positive("algorithm.energy_tol", a.energy_tol)?;
        if a.steps > MAX_TRG_STEPS {
            return Err(invalid("algorithm.steps", format!("must not exceed {MAX_TRG_STEPS}")));
        }
        if a.betas.is_empty() {
            return Err(invalid("algorithm.betas", "must not be empty"));
        }
        for &beta in &a.betas {
            positive("algorithm.betas", beta)?;
        }
        finite("algorithm.coupling", a.coupling)?;
        if a.lanczos_iters == 0 {
            return Err(invalid("algorithm.lanczos_iters", "must be at least 1"));
        }
        positive("algorithm.lanczos_tol", a.lanczos_tol)?;
        if a.max_distance == 0 {
            return Err(invalid("algorithm.max_distance", "must be at least 1"));
        }
        if self.command == Command::Verify {
            a.suite
                .parse::<Suite>()
                .map_err(|e| invalid("algorithm.suite", e))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
