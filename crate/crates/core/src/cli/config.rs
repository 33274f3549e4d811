//! Flat `key = value` run configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::bogoliubov::{InteractionWeight, DEFAULT_GOLDSTONE_TOL, DEFAULT_GP_MAX_ITER, DEFAULT_GP_TOL};
use crate::exact::DEFAULT_SEED;

/// Where a configuration value came from, for error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Environment,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => write!(f, "override"),
            Origin::Environment => write!(f, "environment"),
            Origin::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: Origin, key: String },

    #[error("{origin}: expected `key = value`, found `{text}`")]
    Syntax { origin: Origin, text: String },

    #[error("{origin}: invalid value `{value}` for `{key}` (expected {expected})")]
    Malformed {
        origin: Origin,
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("{origin}: {message}")]
    Constraint { origin: Origin, message: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Coupling values `start ..= stop` over `steps` intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingSweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Geometric spacing when false.
    pub linear: bool,
}

impl CouplingSweep {
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps as f64;
        (0..=self.steps)
            .map(|i| {
                let t = i as f64 / n;
                if i == self.steps {
                    self.stop
                } else if self.linear {
                    self.start + (self.stop - self.start) * t
                } else {
                    self.start * (self.stop / self.start).powf(t)
                }
            })
            .collect()
    }
}

/// Subcommands, as far as validation cares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Exact,
    Condensate,
    Bogoliubov,
    Compare,
    Sweep,
}

impl Command {
    fn needs_fluctuations(self) -> bool {
        matches!(self, Command::Bogoliubov | Command::Compare | Command::Sweep)
    }

    fn needs_particles(self) -> bool {
        !matches!(self, Command::Exact)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_particles: usize,
    pub modes: usize,
    pub coupling: f64,
    pub sweep: Option<CouplingSweep>,
    pub interaction_weight: InteractionWeight,
    /// 0 selects `2M + 2`.
    pub quadrature_nodes: usize,
    pub gp_tol: f64,
    pub gp_max_iter: usize,
    /// `None` uses the solver path default.
    pub eig_tol: Option<f64>,
    pub lowest_k: usize,
    pub goldstone_tol: f64,
    pub output_format: OutputFormat,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    origins: HashMap<&'static str, Origin>,
    sweep_parts: SweepParts,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct SweepParts {
    start: Option<f64>,
    stop: Option<f64>,
    steps: Option<usize>,
    linear: bool,
}

pub const KEYS: &[&str] = &[
    "n_particles",
    "modes",
    "coupling",
    "coupling_start",
    "coupling_stop",
    "coupling_steps",
    "coupling_linear",
    "interaction_weight_convention",
    "quadrature_nodes",
    "gp_tol",
    "gp_max_iter",
    "eig_tol",
    "lowest_k",
    "goldstone_tol",
    "output_format",
    "output_path",
    "seed",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_particles: 4,
            modes: 8,
            coupling: 0.0,
            sweep: None,
            interaction_weight: InteractionWeight::Particles,
            quadrature_nodes: 0,
            gp_tol: DEFAULT_GP_TOL,
            gp_max_iter: DEFAULT_GP_MAX_ITER,
            eig_tol: None,
            lowest_k: 2,
            goldstone_tol: DEFAULT_GOLDSTONE_TOL,
            output_format: OutputFormat::Csv,
            output_path: None,
            seed: DEFAULT_SEED,
            origins: HashMap::new(),
            sweep_parts: SweepParts {
                linear: true,
                ..SweepParts::default()
            },
        }
    }
}

fn parse_value<T: std::str::FromStr>(
    origin: Origin,
    key: &str,
    value: &str,
    expected: &'static str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Malformed {
        origin,
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

impl RunConfig {
    /// Parses a configuration file body. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::Line(idx + 1);
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin,
                    text: line.to_string(),
                });
            };
            config.set(key.trim(), value.trim(), origin)?;
        }
        Ok(config)
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(ConfigError::Syntax {
                origin: Origin::Override,
                text: assignment.to_string(),
            });
        };
        self.set(key.trim(), value.trim(), Origin::Override)
    }

    fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return Err(ConfigError::UnknownKey {
                origin,
                key: key.to_string(),
            });
        };
        match known {
            "n_particles" => self.n_particles = parse_value(origin, key, value, "a non-negative integer")?,
            "modes" => self.modes = parse_value(origin, key, value, "a positive integer")?,
            "coupling" => self.coupling = parse_value(origin, key, value, "a real number")?,
            "coupling_start" => self.sweep_parts.start = Some(parse_value(origin, key, value, "a real number")?),
            "coupling_stop" => self.sweep_parts.stop = Some(parse_value(origin, key, value, "a real number")?),
            "coupling_steps" => self.sweep_parts.steps = Some(parse_value(origin, key, value, "a positive integer")?),
            "coupling_linear" => self.sweep_parts.linear = parse_value(origin, key, value, "true or false")?,
            "interaction_weight_convention" => {
                self.interaction_weight = match value {
                    "N" => InteractionWeight::Particles,
                    "N-1" => InteractionWeight::ParticlesMinusOne,
                    _ => {
                        return Err(ConfigError::Malformed {
                            origin,
                            key: key.to_string(),
                            value: value.to_string(),
                            expected: "`N` or `N-1`",
                        })
                    }
                }
            }
            "quadrature_nodes" => self.quadrature_nodes = parse_value(origin, key, value, "a non-negative integer")?,
            "gp_tol" => self.gp_tol = parse_value(origin, key, value, "a positive real")?,
            "gp_max_iter" => self.gp_max_iter = parse_value(origin, key, value, "a positive integer")?,
            "eig_tol" => self.eig_tol = Some(parse_value(origin, key, value, "a positive real")?),
            "lowest_k" => self.lowest_k = parse_value(origin, key, value, "a positive integer")?,
            "goldstone_tol" => self.goldstone_tol = parse_value(origin, key, value, "a positive real")?,
            "output_format" => {
                self.output_format = match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => {
                        return Err(ConfigError::Malformed {
                            origin,
                            key: key.to_string(),
                            value: value.to_string(),
                            expected: "`csv` or `json`",
                        })
                    }
                }
            }
            "output_path" => {
                self.output_path = match value {
                    "" | "-" => None,
                    path => Some(PathBuf::from(path)),
                }
            }
            "seed" => self.seed = parse_value(origin, key, value, "a non-negative integer")?,
            _ => unreachable!("key list and match arms agree"),
        }
        self.origins.insert(known, origin);
        Ok(())
    }

    fn origin(&self, key: &str) -> Origin {
        self.origins.get(key).copied().unwrap_or(Origin::Default)
    }

    fn constraint(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Constraint {
            origin: self.origin(key),
            message: message.into(),
        }
    }

    /// Checks cross-key constraints for `command` and resolves the coupling
    /// sweep.
    pub fn validate(&mut self, command: Command) -> Result<(), ConfigError> {
        if self.modes == 0 {
            return Err(self.constraint("modes", "modes must be at least 1"));
        }
        if command.needs_fluctuations() && self.modes < 2 {
            return Err(self.constraint(
                "modes",
                "modes must be at least 2 for Bogoliubov calculations (one fluctuation mode)",
            ));
        }
        if command.needs_particles() && self.n_particles == 0 {
            return Err(self.constraint("n_particles", "n_particles must be at least 1"));
        }
        for (key, value) in [("gp_tol", self.gp_tol), ("goldstone_tol", self.goldstone_tol)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(self.constraint(key, format!("{key} must be positive")));
            }
        }
        if let Some(tol) = self.eig_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(self.constraint("eig_tol", "eig_tol must be positive"));
            }
        }
        if self.gp_max_iter == 0 {
            return Err(self.constraint("gp_max_iter", "gp_max_iter must be at least 1"));
        }
        if self.lowest_k == 0 {
            return Err(self.constraint("lowest_k", "lowest_k must be at least 1"));
        }
        if self.quadrature_nodes != 0 && 2 * self.quadrature_nodes < 4 * (self.modes - 1) + 1 {
            return Err(self.constraint(
                "quadrature_nodes",
                format!(
                    "{} nodes cannot integrate the degree-{} overlap integrands exactly",
                    self.quadrature_nodes,
                    4 * (self.modes - 1)
                ),
            ));
        }
        if !self.coupling.is_finite() {
            return Err(self.constraint("coupling", "coupling must be finite"));
        }

        let parts = self.sweep_parts.clone();
        self.sweep = match (parts.start, parts.stop, parts.steps) {
            (None, None, None) => None,
            (Some(start), Some(stop), Some(steps)) => {
                if self.origins.contains_key("coupling") {
                    return Err(self.constraint("coupling", "coupling conflicts with a coupling sweep"));
                }
                if steps == 0 {
                    return Err(self.constraint("coupling_steps", "coupling_steps must be at least 1"));
                }
                if !(start.is_finite() && stop.is_finite()) {
                    return Err(self.constraint("coupling_start", "sweep bounds must be finite"));
                }
                if !parts.linear && start * stop <= 0.0 {
                    return Err(self.constraint(
                        "coupling_linear",
                        "geometric sweeps need nonzero bounds of the same sign",
                    ));
                }
                Some(CouplingSweep {
                    start,
                    stop,
                    steps,
                    linear: parts.linear,
                })
            }
            _ => {
                let key = ["coupling_start", "coupling_stop", "coupling_steps"]
                    .into_iter()
                    .find(|k| self.origins.contains_key(k))
                    .unwrap_or("coupling_steps");
                return Err(self.constraint(
                    key,
                    "a coupling sweep needs coupling_start, coupling_stop and coupling_steps",
                ));
            }
        };
        Ok(())
    }

    /// Coupling values in run order.
    pub fn couplings(&self) -> Vec<f64> {
        match &self.sweep {
            Some(sweep) => sweep.points(),
            None => vec![self.coupling],
        }
    }
}
