//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::problems::{problem_by_name, PROBLEM_NAMES};
use crate::rules::{Rule, SearchWindow, DEFAULT_K_MIN};

/// How the Landweber stepsize is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaMode {
    /// `ϑ / ‖F′(x†)‖²`
    AutoAtDagger,
    /// `ϑ / ‖F′(x₀)‖²`
    AutoAtX0,
    Fixed(f64),
}

/// How noise realizations relate across the δ levels of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseStreams {
    /// One noise direction per seed, rescaled to each δ.
    Shared,
    /// An independent draw for every `(seed, δ)` pair.
    PerDelta,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOmega {
    Number(f64),
    Name(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: String,
    n: Option<usize>,
    delta_rel: Option<Vec<f64>>,
    seeds: Option<Vec<u64>>,
    rules: Option<Vec<String>>,
    tau: Option<f64>,
    kmax: Option<usize>,
    k_min: Option<usize>,
    skip_ascent: Option<bool>,
    omega: Option<RawOmega>,
    omega_safety: Option<f64>,
    output: Option<PathBuf>,
    execution: Option<String>,
    noise_streams: Option<String>,
    wall_time: Option<bool>,
}

/// A validated experiment. Unset keys take the problem's benchmark defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub n: Option<usize>,
    pub delta_rel: Vec<f64>,
    pub seeds: Vec<u64>,
    pub rules: Vec<Rule>,
    pub tau: f64,
    pub kmax: usize,
    pub window: SearchWindow,
    pub omega: OmegaMode,
    pub omega_safety: f64,
    pub output: PathBuf,
    pub execution: Execution,
    pub noise_streams: NoiseStreams,
    /// Record wall-clock times; off by default so reports are reproducible.
    pub wall_time: bool,
}

pub const DEFAULT_SEEDS: [u64; 3] = [0, 1, 2];
pub const DEFAULT_OUTPUT: &str = "out";

fn invalid(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    /// Benchmark defaults for a registered problem.
    pub fn for_problem(problem: &str) -> Result<Self> {
        let p = problem_by_name(problem, None)?;
        let b = p.benchmark();
        Ok(Self {
            problem: problem.to_string(),
            n: None,
            delta_rel: b.delta_rel_list.clone(),
            seeds: DEFAULT_SEEDS.to_vec(),
            rules: Rule::ALL.to_vec(),
            tau: b.tau,
            kmax: b.kmax,
            window: SearchWindow::default(),
            omega: OmegaMode::AutoAtDagger,
            omega_safety: 1.0,
            output: PathBuf::from(DEFAULT_OUTPUT),
            execution: Execution::Parallel,
            noise_streams: NoiseStreams::Shared,
            wall_time: false,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        if !PROBLEM_NAMES.contains(&raw.problem.as_str()) {
            return Err(invalid(
                "problem",
                format!("unknown problem {:?}; expected one of {}", raw.problem, PROBLEM_NAMES.join(", ")),
            ));
        }
        let mut cfg = Self::for_problem(&raw.problem)?;
        cfg.n = raw.n;
        if let Some(d) = raw.delta_rel {
            cfg.delta_rel = d;
        }
        if let Some(s) = raw.seeds {
            cfg.seeds = s;
        }
        if let Some(rules) = raw.rules {
            cfg.rules = rules
                .iter()
                .enumerate()
                .map(|(i, r)| r.parse().map_err(|_| invalid(format!("rules[{i}]"), format!("unknown rule {r:?}"))))
                .collect::<Result<_>>()?;
        }
        if let Some(t) = raw.tau {
            cfg.tau = t;
        }
        if let Some(k) = raw.kmax {
            cfg.kmax = k;
        }
        cfg.window = SearchWindow {
            k_min: raw.k_min.unwrap_or(DEFAULT_K_MIN),
            skip_ascent: raw.skip_ascent.unwrap_or(true),
        };
        cfg.omega = match raw.omega {
            None => OmegaMode::AutoAtDagger,
            Some(RawOmega::Number(w)) => OmegaMode::Fixed(w),
            Some(RawOmega::Name(s)) => match s.as_str() {
                "auto_at_dagger" => OmegaMode::AutoAtDagger,
                "auto_at_x0" => OmegaMode::AutoAtX0,
                _ => {
                    return Err(invalid(
                        "omega",
                        format!("expected \"auto_at_dagger\", \"auto_at_x0\" or a number, got {s:?}"),
                    ))
                }
            },
        };
        if let Some(s) = raw.omega_safety {
            cfg.omega_safety = s;
        }
        if let Some(o) = raw.output {
            cfg.output = o;
        }
        cfg.execution = match raw.execution.as_deref() {
            None | Some("parallel") => Execution::Parallel,
            Some("sequential") => Execution::Sequential,
            Some(other) => {
                return Err(invalid(
                    "execution",
                    format!("expected \"parallel\" or \"sequential\", got {other:?}"),
                ))
            }
        };
        cfg.noise_streams = match raw.noise_streams.as_deref() {
            None | Some("shared") => NoiseStreams::Shared,
            Some("per_delta") => NoiseStreams::PerDelta,
            Some(other) => {
                return Err(invalid(
                    "noise_streams",
                    format!("expected \"shared\" or \"per_delta\", got {other:?}"),
                ))
            }
        };
        cfg.wall_time = raw.wall_time.unwrap_or(false);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.n {
            if n < 2 {
                return Err(invalid("n", format!("grid needs at least 2 cells, got {n}")));
            }
        }
        if self.delta_rel.is_empty() {
            return Err(invalid("delta_rel", "must not be empty"));
        }
        for (i, d) in self.delta_rel.iter().enumerate() {
            if !(*d > 0.0 && d.is_finite()) {
                return Err(invalid(format!("delta_rel[{i}]"), format!("must be positive, got {d}")));
            }
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "must not be empty"));
        }
        if self.rules.is_empty() {
            return Err(invalid("rules", "must not be empty"));
        }
        for (i, r) in self.rules.iter().enumerate() {
            if self.rules[..i].contains(r) {
                return Err(invalid(format!("rules[{i}]"), format!("duplicate rule {r}")));
            }
        }
        if !(self.tau >= 1.0 && self.tau.is_finite()) {
            return Err(invalid("tau", format!("must be >= 1, got {}", self.tau)));
        }
        if self.window.k_min == 0 {
            return Err(invalid("k_min", "must be >= 1"));
        }
        if self.kmax < self.window.k_min {
            return Err(invalid("kmax", format!("must be >= k_min = {}, got {}", self.window.k_min, self.kmax)));
        }
        if let OmegaMode::Fixed(w) = self.omega {
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid("omega", format!("must be positive, got {w}")));
            }
        }
        if !(self.omega_safety > 0.0 && self.omega_safety <= 1.0) {
            return Err(invalid("omega_safety", format!("must lie in (0, 1], got {}", self.omega_safety)));
        }
        Ok(())
    }
}
