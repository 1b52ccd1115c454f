//! Command-line surface and validated experiment configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::Format;
use crate::CliError;

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug, Parser)]
#[command(name = "hessq-lab", version, about = "Verifiers and sweeps for the Hessian quotient operator sigma_n/sigma_k")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Dimension; each command has its own default.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true, env = "HESSQ_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Report file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
    /// Grid field to analyse instead of the built-in test field (`.csv` or binary).
    #[arg(long, global = true)]
    pub field_in: Option<PathBuf>,
    /// Writes the analysed grid field (`.csv` or binary).
    #[arg(long, global = true)]
    pub field_out: Option<PathBuf>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = value.parse().map_err(|_| format!("not a number: `{value}`"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("tolerance must be finite and nonnegative, got {v}"));
    }
    Ok((name.to_owned(), v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestField {
    /// `x₁³ + x₂³ + x₁x₂x₃` (needs n >= 3).
    Cubic,
    /// `exp(x₁ + 0.3x₂) + sin(x₂x₃) + x₁⁴` (needs n >= 3).
    Smooth,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CommandArgs {
    /// Deleted-index identities of the elementary symmetric functions.
    Identities,
    /// Sampled concavity inequality for k = n-1 or k = n-2.
    Concavity,
    /// Induction-constant plateau along the completion family.
    Induction {
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Number of log-spaced lambda_1 values in [1e2, 1e6].
        #[arg(long, default_value_t = 9)]
        points: usize,
    },
    /// Eigenvalue pinch bounds with C(n) = binomial(n, k).
    SpectralBounds,
    /// Ellipticity of the Legendre-transformed operator under lambda_1 growth.
    Ellipticity {
        #[arg(long, default_value_t = 1.0)]
        f: f64,
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
        /// Number of log-spaced lambda_1 values in [1e3, 1e6].
        #[arg(long, default_value_t = 7)]
        points: usize,
    },
    /// Singular family exponent, convexity and profile.
    Singular {
        /// Emit a radial profile instead of the Hölder increments.
        #[arg(long)]
        profile: bool,
        /// Regularization used by the profile.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Also check the sigma -> 0 limit.
        #[arg(long)]
        viscosity: bool,
    },
    /// Jacobi inequality estimator on a grid field.
    Jacobi {
        /// Nodes per axis of the built-in field.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Fixed forcing constant; estimated from the field when absent.
        #[arg(long)]
        big_c: Option<f64>,
    },
    /// Divergence of the Newton tensor under grid refinement.
    Divergence {
        #[arg(long, value_enum, default_value_t = TestField::Cubic)]
        test_field: TestField,
        #[arg(long, default_value_t = 8)]
        cells: usize,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Discrete shifted Legendre transform and gradient-map monotonicity.
    Legendre {
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Identities,
    Concavity,
    Induction,
    SpectralBounds,
    Ellipticity,
    Singular,
    Jacobi,
    Divergence,
    Legendre,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Identities => "identities",
            Command::Concavity => "concavity",
            Command::Induction => "induction",
            Command::SpectralBounds => "spectral-bounds",
            Command::Ellipticity => "ellipticity",
            Command::Singular => "singular",
            Command::Jacobi => "jacobi",
            Command::Divergence => "divergence",
            Command::Legendre => "legendre",
        }
    }

    fn defaults(self) -> (usize, Option<usize>, u64) {
        match self {
            Command::Identities => (5, Some(3), 10_000),
            Command::Concavity => (3, Some(2), 100_000),
            Command::Induction => (3, Some(2), 0),
            Command::SpectralBounds => (3, Some(2), 100_000),
            Command::Ellipticity => (3, Some(2), 0),
            Command::Singular => (4, Some(1), 0),
            Command::Jacobi => (3, None, 0),
            Command::Divergence => (3, Some(2), 0),
            Command::Legendre => (2, Some(1), 1000),
        }
    }

    fn tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Command::Identities => &[("residual", 1e-12)],
            Command::Concavity => &[("gap", 1e-9), ("equality", 1e-12)],
            Command::Induction => &[("plateau", 0.10)],
            Command::SpectralBounds => &[("slack", 1e-12), ("tight", 1e-12)],
            Command::Ellipticity => &[("variation", 0.05)],
            Command::Singular => &[("exponent", 0.05), ("flatness", 1e-2), ("viscosity", 1e-4)],
            Command::Jacobi => &[("gap", 1e-9)],
            Command::Divergence => &[("k1", 1e-12), ("slope", 1.9)],
            Command::Legendre => &[("hessian", 1e-8), ("monotone", 1e-12)],
        }
    }
}

/// Per-command parameters beyond the shared ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    None,
    Induction { l: usize, points: usize },
    Ellipticity { f: f64, shift: f64, points: usize },
    Singular { profile: bool, sigma: f64, viscosity: bool },
    Jacobi { grid: usize, big_c: Option<f64> },
    Divergence { test_field: TestField, cells: usize, levels: usize },
    Legendre { shift: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub k: usize,
    pub samples: u64,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub field_in: Option<PathBuf>,
    pub field_out: Option<PathBuf>,
    /// Effective tolerances, defaults merged with overrides.
    pub tolerances: BTreeMap<String, f64>,
    pub params: Params,
}

impl ExperimentConfig {
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, params) = match cli.command {
            CommandArgs::Identities => (Command::Identities, Params::None),
            CommandArgs::Concavity => (Command::Concavity, Params::None),
            CommandArgs::Induction { l, points } => (Command::Induction, Params::Induction { l, points }),
            CommandArgs::SpectralBounds => (Command::SpectralBounds, Params::None),
            CommandArgs::Ellipticity { f, shift, points } => (Command::Ellipticity, Params::Ellipticity { f, shift, points }),
            CommandArgs::Singular { profile, sigma, viscosity } => {
                (Command::Singular, Params::Singular { profile, sigma, viscosity })
            }
            CommandArgs::Jacobi { grid, big_c } => (Command::Jacobi, Params::Jacobi { grid, big_c }),
            CommandArgs::Divergence { test_field, cells, levels } => {
                (Command::Divergence, Params::Divergence { test_field, cells, levels })
            }
            CommandArgs::Legendre { shift } => (Command::Legendre, Params::Legendre { shift }),
        };
        let c = cli.common;
        let (n0, k0, s0) = command.defaults();
        let n = c.n.unwrap_or(n0);
        let k = c.k.or(k0).unwrap_or(n.saturating_sub(1));
        let mut tolerances: BTreeMap<String, f64> = command.tolerances().iter().map(|&(k, v)| (k.to_owned(), v)).collect();
        for (name, v) in c.tol {
            match tolerances.get_mut(&name) {
                Some(slot) => *slot = v,
                None => {
                    let known: Vec<&str> = command.tolerances().iter().map(|t| t.0).collect();
                    return Err(CliError::Config(format!(
                        "unknown tolerance `{name}` for {}; known: {}",
                        command.name(),
                        known.join(", ")
                    )));
                }
            }
        }
        let cfg = ExperimentConfig {
            command,
            n,
            k,
            samples: c.samples.unwrap_or(s0),
            seed: c.seed,
            format: c.format,
            output: c.output,
            field_in: c.field_in,
            field_out: c.field_out,
            tolerances,
            params,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let (n, k) = (self.n, self.k);
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(2..=64).contains(&n) {
            return bad(format!("n must lie in 2..=64, got {n}"));
        }
        if k < 1 || k >= n {
            return bad(format!("need 1 <= k <= n-1, got n = {n}, k = {k}"));
        }
        let samples_needed = matches!(self.command, Command::Identities | Command::Concavity | Command::SpectralBounds | Command::Legendre);
        if samples_needed && self.samples == 0 {
            return bad(format!("{} needs at least one sample", self.command.name()));
        }
        let estimate_regime = k + 1 == n || k + 2 == n;
        match (&self.command, &self.params) {
            (Command::Concavity | Command::Induction | Command::SpectralBounds | Command::Ellipticity, _) if !estimate_regime => {
                bad(format!("{} requires k = n-1 or k = n-2, got n = {n}, k = {k}", self.command.name()))
            }
            (Command::Induction, Params::Induction { l, points }) if *l < 1 || *l > k || *points < 2 => {
                bad(format!("induction needs 1 <= l <= k and at least 2 points, got l = {l}, points = {points}"))
            }
            (Command::Ellipticity, Params::Ellipticity { f, shift, points }) if !(*f > 0.0 && *shift > 0.0) || *points < 2 => {
                bad(format!("ellipticity needs f > 0, shift > 0 and at least 2 points, got {f}, {shift}, {points}"))
            }
            (Command::Singular, Params::Singular { sigma, .. }) if n < 4 || k + 3 > n || !(*sigma >= 0.0) => {
                bad(format!("singular requires 1 <= k <= n-3 and sigma >= 0, got n = {n}, k = {k}, sigma = {sigma}"))
            }
            (Command::Jacobi, Params::Jacobi { grid, big_c }) if *grid < 5 || big_c.is_some_and(|c| !c.is_finite()) => {
                bad(format!("jacobi needs at least 5 nodes per axis, got {grid}"))
            }
            (Command::Divergence, Params::Divergence { cells, levels, .. })
                if self.field_in.is_none() && (n < 3 || *cells < 4 || *levels < 1 || *levels > 6) =>
            {
                bad(format!("divergence needs n >= 3, cells >= 4 and 1..=6 levels, got n = {n}, {cells}, {levels}"))
            }
            (Command::Legendre, Params::Legendre { shift }) if !(*shift > 0.0) => {
                bad(format!("legendre needs a positive shift, got {shift}"))
            }
            _ => Ok(()),
        }
    }

    /// `key=value` lines echoed in the report header.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("command".into(), self.command.name().into()),
            ("n".into(), self.n.to_string()),
            ("k".into(), self.k.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("decision".into(), hessq::operator::CONSTANT_RULE.into()),
        ];
        let p = |k: &str, v: String| (k.to_owned(), v);
        match &self.params {
            Params::None => {}
            Params::Induction { l, points } => out.extend([p("l", l.to_string()), p("points", points.to_string())]),
            Params::Ellipticity { f, shift, points } => {
                out.extend([p("f", f.to_string()), p("shift", shift.to_string()), p("points", points.to_string())])
            }
            Params::Singular { profile, sigma, viscosity } => out.extend([
                p("profile", profile.to_string()),
                p("sigma", sigma.to_string()),
                p("viscosity", viscosity.to_string()),
            ]),
            Params::Jacobi { grid, big_c } => out.extend([
                p("grid", grid.to_string()),
                p("big_c", big_c.map_or("estimated".into(), |c| c.to_string())),
            ]),
            Params::Divergence { test_field, cells, levels } => out.extend([
                p("test_field", format!("{test_field:?}").to_lowercase()),
                p("cells", cells.to_string()),
                p("levels", levels.to_string()),
            ]),
            Params::Legendre { shift } => out.push(p("shift", shift.to_string())),
        }
        if let Some(f) = &self.field_in {
            out.push(p("field_in", f.display().to_string()));
        }
        for (name, v) in &self.tolerances {
            out.push((format!("tolerance.{name}"), v.to_string()));
        }
        out
    }
}
