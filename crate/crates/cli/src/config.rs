//! Flat JSON run configuration and its command-line overrides.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use toda_tau::hirota::ChargeConvention;
use toda_tau::kernel::SigmaWeight;
use toda_tau::{HalfInt, ParamSeq};

pub const MAX_DIM: usize = 512;
pub const MAX_CUTOFF: usize = 4096;
pub const MAX_E: usize = 16;
pub const MAX_CHARGE: i64 = 8;
pub const MAX_ENUM: usize = 24;
pub const MAX_SAMPLES: usize = 1 << 16;

/// Miwa parameters as either a plain list `[t_1, t_2, ...]` of reals or the
/// sparse `{"k": [re, im]}` form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    Real(Vec<f64>),
    Sparse(ParamSeq),
}

impl Params {
    pub fn seq(&self) -> ParamSeq {
        match self {
            Params::Real(v) => ParamSeq::from_real(v),
            Params::Sparse(p) => p.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BruteKind {
    #[default]
    Correlation,
    Gap,
    Multiplicative,
    Cauchy,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Adjudication {
    Sigma,
    ChargeSign,
    #[default]
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// The 27-case suite.
    #[default]
    Default,
    /// One case from `t, t_prime, s, s_prime, sigma, m, l`.
    Single,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Must name the subcommand when present.
    pub command: Option<String>,
    pub t: Params,
    pub t_prime: Params,
    pub sigma: SigmaWeight,
    pub allow_nonstandard_sigma: bool,
    pub n: i64,
    /// Last charge of a `gap` or `tau` sweep; defaults to `n`.
    pub n_to: Option<i64>,
    pub m: i64,
    pub l: i64,
    pub s: Params,
    pub s_prime: Params,
    pub dim: usize,
    pub cutoff: usize,
    pub base: i64,
    pub e_max: usize,
    pub charge_max: i64,
    pub radius: f64,
    pub samples: usize,
    pub max_samples: usize,
    pub tol: f64,
    pub max_size: usize,
    pub depth: Option<usize>,
    pub kind: BruteKind,
    pub points: Vec<HalfInt>,
    pub grid: Grid,
    pub convention: ChargeConvention,
    /// A Hirota summary above this is a mismatch.
    pub residual_tol: f64,
    pub adjudicate: Adjudication,
    pub u: f64,
    pub t_tilde: Params,
    pub c_max: i64,
    /// Enumeration size of the finite-temperature brute force.
    pub sigma_max_size: usize,
    pub sets: Vec<Vec<HalfInt>>,
    pub sigma_tolerance: f64,
    pub charges: Vec<i64>,
    pub sigma_count: usize,
    pub sigma_seed: u64,
    pub charge_sign_tolerance: f64,
    pub parallel: bool,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let half = |k: i64| HalfInt::plus_half(k);
        RunConfig {
            command: None,
            t: Params::Real(vec![0.5]),
            t_prime: Params::Real(vec![0.5]),
            sigma: SigmaWeight::zero(),
            allow_nonstandard_sigma: false,
            n: 0,
            n_to: None,
            m: 0,
            l: 0,
            s: Params::Real(vec![0.05, -0.02]),
            s_prime: Params::Real(vec![-0.03, 0.02]),
            dim: 24,
            cutoff: 48,
            base: -12,
            e_max: 12,
            charge_max: 4,
            radius: 0.3,
            samples: 64,
            max_samples: 1024,
            tol: 1e-9,
            max_size: 16,
            depth: None,
            kind: BruteKind::Correlation,
            points: vec![half(0)],
            grid: Grid::Default,
            convention: ChargeConvention::Reflected,
            residual_tol: 1e-6,
            adjudicate: Adjudication::Both,
            u: 0.4,
            t_tilde: Params::Real(vec![0.2]),
            c_max: 6,
            sigma_max_size: 10,
            sets: vec![vec![half(0)], vec![half(0), half(1)]],
            sigma_tolerance: 1e-4,
            charges: (-2..=2).collect(),
            sigma_count: 20,
            sigma_seed: 0,
            charge_sign_tolerance: 1e-8,
            parallel: true,
            output: None,
            csv: None,
        }
    }
}

/// Flags that override the file. Every flag is optional.
#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// Flat JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated real t_1, t_2, ...
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    #[arg(long = "t-prime", global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_prime: Option<Vec<f64>>,
    /// Weight as JSON, e.g. '{"kind":"fermi","u":0.3}'.
    #[arg(long, global = true)]
    pub sigma: Option<String>,
    /// File holding the weight as JSON.
    #[arg(long, global = true)]
    pub sigma_file: Option<PathBuf>,
    #[arg(long, global = true)]
    pub allow_nonstandard_sigma: bool,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub n: Option<i64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub n_to: Option<i64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<i64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub l: Option<i64>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub base: Option<i64>,
    #[arg(long, global = true)]
    pub e_max: Option<usize>,
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Enumeration size for brute-force oracles.
    #[arg(long, global = true)]
    pub max_size: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub kind: Option<BruteKind>,
    /// Comma-separated half-integers, e.g. 1/2,-3/2.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Option<Vec<String>>,
    #[arg(long, global = true, value_enum)]
    pub grid: Option<Grid>,
    #[arg(long, global = true, value_enum)]
    pub adjudicate: Option<Adjudication>,
    /// Index tau by n as written instead of the reflected -n.
    #[arg(long, global = true)]
    pub unreflected: bool,
    #[arg(long, global = true)]
    pub sequential: bool,
    /// JSON lines go here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))
}

fn parse_sigma(text: &str, origin: &str) -> Result<SigmaWeight, ConfigError> {
    if text.trim().is_empty() {
        return Ok(SigmaWeight::zero());
    }
    serde_json::from_str(text).map_err(|e| ConfigError(format!("bad sigma in {origin}: {e}")))
}

impl Overrides {
    pub fn resolve(&self, command: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => serde_json::from_str::<RunConfig>(&read(path)?)
                .map_err(|e| ConfigError(format!("bad config {}: {e}", path.display())))?,
            None => RunConfig::default(),
        };
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(ConfigError(format!("config is for `{c}`, not `{command}`")));
            }
        }
        if let Some(v) = &self.t {
            cfg.t = Params::Real(v.clone());
        }
        if let Some(v) = &self.t_prime {
            cfg.t_prime = Params::Real(v.clone());
        }
        if let Some(path) = &self.sigma_file {
            cfg.sigma = parse_sigma(&read(path)?, &path.display().to_string())?;
        }
        if let Some(s) = &self.sigma {
            cfg.sigma = parse_sigma(s, "--sigma")?;
        }
        cfg.allow_nonstandard_sigma |= self.allow_nonstandard_sigma;
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        take!(n, m, l, dim, cutoff, base, e_max, radius, samples, max_size, kind, grid, adjudicate);
        if self.n_to.is_some() {
            cfg.n_to = self.n_to;
        }
        if self.depth.is_some() {
            cfg.depth = self.depth;
        }
        if let Some(pts) = &self.points {
            cfg.points = pts
                .iter()
                .map(|p| p.parse::<HalfInt>().map_err(|e| ConfigError(format!("--points: {e}"))))
                .collect::<Result<_, _>>()?;
        }
        if self.unreflected {
            cfg.convention = ChargeConvention::Unreflected;
        }
        if self.sequential {
            cfg.parallel = false;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if self.csv.is_some() {
            cfg.csv = self.csv.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let cap = |name: &str, v: usize, lo: usize, hi: usize| {
            if v < lo || v > hi {
                Err(ConfigError(format!("{name} = {v} must lie in [{lo}, {hi}]")))
            } else {
                Ok(())
            }
        };
        cap("dim", self.dim, 1, MAX_DIM)?;
        cap("cutoff", self.cutoff, 1, MAX_CUTOFF)?;
        cap("e_max", self.e_max, 0, MAX_E)?;
        cap("max_size", self.max_size, 0, MAX_ENUM)?;
        cap("sigma_max_size", self.sigma_max_size, 0, 12)?;
        cap("samples", self.samples, 4, MAX_SAMPLES)?;
        cap("max_samples", self.max_samples, self.samples, MAX_SAMPLES)?;
        if !(0..=MAX_CHARGE).contains(&self.charge_max) {
            return Err(ConfigError(format!("charge_max = {} must lie in [0, {MAX_CHARGE}]", self.charge_max)));
        }
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(ConfigError(format!("radius = {} must lie in (0, 1)", self.radius)));
        }
        if !(self.u > 0.0 && self.u < 1.0) {
            return Err(ConfigError(format!("u = {} must lie in (0, 1)", self.u)));
        }
        if let Some(to) = self.n_to {
            if to < self.n || to - self.n > 256 {
                return Err(ConfigError(format!("n_to = {to} must lie in [n, n + 256]")));
            }
        }
        for (name, v) in [
            ("tol", self.tol),
            ("residual_tol", self.residual_tol),
            ("sigma_tolerance", self.sigma_tolerance),
            ("charge_sign_tolerance", self.charge_sign_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError(format!("{name} = {v} must be positive")));
            }
        }
        self.sigma.validate(self.allow_nonstandard_sigma).map_err(|e| {
            let hint = if self.sigma.is_nonstandard() && !self.allow_nonstandard_sigma {
                " (pass --allow-nonstandard-sigma to enable it)"
            } else {
                ""
            };
            ConfigError(format!("{e}{hint}"))
        })
    }

    pub fn parallelism(&self) -> toda_tau::Parallelism {
        if self.parallel {
            toda_tau::Parallelism::Parallel
        } else {
            toda_tau::Parallelism::Sequential
        }
    }

    pub fn charges_swept(&self) -> std::ops::RangeInclusive<i64> {
        self.n..=self.n_to.unwrap_or(self.n)
    }
}
