//! Command-line flags, flat config files and the merged run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const THREADS_ENV: &str = "NHSPEC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Eigenvalues from closed form (or momentum equation) and the dense oracle.
    Spectrum,
    /// Right/left open-chain eigenstates with Dirac and biorthogonal profiles.
    Eigenstates,
    /// Real/complex classification over a J-phi grid plus bisected boundaries.
    PhaseDiagram,
    /// Averaged IPR against system size for each phi.
    IprScaling,
    /// Runs the invariant suites and reports pass/fail per invariant.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ring,
    Chain,
    DefectRing,
    FluxRing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `lo:hi:steps`, expanded to `steps` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self, String> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(format!("grid bounds must be finite, got {lo}:{hi}"));
        }
        if steps == 0 {
            return Err("grid steps must be at least 1".into());
        }
        if lo > hi {
            return Err(format!("grid lower bound {lo} exceeds upper bound {hi}"));
        }
        if steps > 1 && lo == hi {
            return Err(format!("grid {lo}:{hi} has {steps} steps but zero width"));
        }
        Ok(Self { lo, hi, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(format!("expected lo:hi:steps, got {s:?}"));
        };
        let lo = lo.trim().parse::<f64>().map_err(|e| format!("bad lower bound {lo:?}: {e}"))?;
        let hi = hi.trim().parse::<f64>().map_err(|e| format!("bad upper bound {hi:?}: {e}"))?;
        let steps = steps
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad step count {steps:?}: {e}"))?;
        Grid::new(lo, hi, steps)
    }
}

impl TryFrom<String> for Grid {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

/// Parsed `--N-list`. The alias keeps clap from treating the flag as multi-valued.
pub type SizeList = Vec<usize>;

/// Comma-separated system sizes.
pub fn parse_size_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad size {t:?}: {e}")))
        .collect()
}

#[derive(Debug, Parser)]
#[command(name = "nhspec", version, about = "Spectra, phase diagrams and localization of asymmetric tight-binding lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Every flag is optional so that config-file values can fill the gaps.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// Flat TOML file whose keys mirror the flag names (snake_case).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true)]
    pub size: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub flux: Option<f64>,
    /// Defect factor of the defect ring.
    #[arg(long = "J", global = true, allow_negative_numbers = true)]
    pub j: Option<f64>,
    /// Defect factor grid, lo:hi:steps.
    #[arg(long = "sweep-J", global = true, allow_hyphen_values = true)]
    pub sweep_j: Option<Grid>,
    /// Gauge field grid, lo:hi:steps.
    #[arg(long = "sweep-phi", global = true, allow_hyphen_values = true)]
    pub sweep_phi: Option<Grid>,
    /// Comma-separated system sizes.
    #[arg(long = "N-list", global = true, value_parser = parse_size_list)]
    pub n_list: Option<SizeList>,
    #[arg(long, global = true)]
    pub tol_imag: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; defaults to NHSPEC_THREADS, then the core count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Comma-separated verify suites: lattice, spectral, phase, ipr.
    #[arg(long, global = true, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
}

/// Keys accepted in a config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelKind>,
    pub size: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub flux: Option<f64>,
    #[serde(alias = "J")]
    pub j: Option<f64>,
    #[serde(alias = "sweep_J")]
    pub sweep_j: Option<Grid>,
    pub sweep_phi: Option<Grid>,
    #[serde(alias = "N_list")]
    pub n_list: Option<Vec<usize>>,
    pub tol_imag: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub only: Option<Vec<String>>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

pub const DEFAULT_SIZE: usize = 20;

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelKind,
    pub size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub flux: f64,
    pub j: f64,
    pub sweep_j: Option<Grid>,
    pub sweep_phi: Option<Grid>,
    pub n_list: Option<Vec<usize>>,
    pub tol_imag: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub only: Option<Vec<String>>,
}

impl RunConfig {
    /// Flags win over the config file, which wins over `NHSPEC_THREADS`
    /// and the built-in defaults.
    pub fn resolve(command: Command, flags: Flags, env_threads: Option<String>) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(command, flags, file, env_threads)
    }

    pub fn merge(command: Command, flags: Flags, file: FileConfig, env_threads: Option<String>) -> Result<Self, CliError> {
        let env_threads = match env_threads.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<usize>()
                    .map_err(|_| CliError::Config(format!("{THREADS_ENV}={s:?} is not a thread count")))?,
            ),
        };
        let threads = flags
            .threads
            .or(file.threads)
            .or(env_threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if threads == 0 {
            return Err(CliError::Config("worker count must be at least 1".into()));
        }
        if let Some(t) = flags.tol_imag.or(file.tol_imag) {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("tol-imag must be positive, got {t}")));
            }
        }
        Ok(Self {
            command,
            model: flags.model.or(file.model).unwrap_or(match command {
                Command::PhaseDiagram => ModelKind::DefectRing,
                Command::Eigenstates | Command::IprScaling => ModelKind::Chain,
                _ => ModelKind::Ring,
            }),
            size: flags.size.or(file.size).unwrap_or(DEFAULT_SIZE),
            alpha: flags.alpha.or(file.alpha).unwrap_or(1.0),
            beta: flags.beta.or(file.beta).unwrap_or(1.0),
            kappa: flags.kappa.or(file.kappa).unwrap_or(1.0),
            flux: flags.flux.or(file.flux).unwrap_or(0.0),
            j: flags.j.or(file.j).unwrap_or(1.0),
            sweep_j: flags.sweep_j.or(file.sweep_j),
            sweep_phi: flags.sweep_phi.or(file.sweep_phi),
            n_list: flags.n_list.or(file.n_list),
            tol_imag: flags.tol_imag.or(file.tol_imag),
            out: flags.out.or(file.out),
            format: flags.format.or(file.format).unwrap_or_default(),
            threads,
            only: flags.only.or(file.only),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing_and_points() {
        let g: Grid = "0:0.5:6".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!("-5:5:401".parse::<Grid>().unwrap().points().len(), 401);
        assert_eq!("2:2:1".parse::<Grid>().unwrap().points(), vec![2.0]);
        assert!("1:0:3".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("a:1:2".parse::<Grid>().is_err());
        assert_eq!("-1:1:3".parse::<Grid>().unwrap().to_string(), "-1:1:3");
    }

    #[test]
    fn size_list() {
        assert_eq!(parse_size_list("8, 16,32").unwrap(), vec![8, 16, 32]);
        assert!(parse_size_list("8,x").is_err());
    }

    #[test]
    fn flags_override_file_and_env() {
        let file = FileConfig::parse("size = 12\nalpha = 2.0\nthreads = 3\nsweep_phi = \"0:1:5\"\nJ = -1.0").unwrap();
        let flags = Flags {
            size: Some(30),
            ..Flags::default()
        };
        let cfg = RunConfig::merge(Command::Spectrum, flags, file.clone(), Some("7".into())).unwrap();
        assert_eq!(cfg.size, 30);
        assert_eq!(cfg.alpha, 2.0);
        assert_eq!(cfg.j, -1.0);
        assert_eq!(cfg.threads, 3);
        assert_eq!(cfg.sweep_phi.unwrap().steps, 5);
        let cfg = RunConfig::merge(Command::Spectrum, Flags::default(), FileConfig::default(), Some("7".into())).unwrap();
        assert_eq!(cfg.threads, 7);
        let flags = Flags {
            threads: Some(2),
            ..Flags::default()
        };
        assert_eq!(RunConfig::merge(Command::Spectrum, flags, file, Some("7".into())).unwrap().threads, 2);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let zero = Flags {
            threads: Some(0),
            ..Flags::default()
        };
        assert!(matches!(
            RunConfig::merge(Command::Verify, zero, FileConfig::default(), None),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::merge(Command::Verify, Flags::default(), FileConfig::default(), Some("x".into())),
            Err(CliError::Config(_))
        ));
        assert!(FileConfig::parse("bogus = 1").is_err());
        assert!(FileConfig::parse("sweep_J = \"1:0:3\"").is_err());
    }

    #[test]
    fn cli_parses_negative_values() {
        let cli = Cli::try_parse_from([
            "nhspec", "phase-diagram", "--size", "20", "--J", "-1", "--sweep-J", "-5:5:401", "--sweep-phi", "0.0488:0.0488:1",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::PhaseDiagram);
        assert_eq!(cli.flags.j, Some(-1.0));
        assert_eq!(cli.flags.sweep_j.unwrap().lo, -5.0);
        let cli = Cli::try_parse_from(["nhspec", "verify", "--only", "ipr,phase"]).unwrap();
        assert_eq!(cli.flags.only.unwrap(), vec!["ipr", "phase"]);
        assert!(Cli::try_parse_from(["nhspec", "spectrum", "--model", "torus"]).is_err());
    }
}
