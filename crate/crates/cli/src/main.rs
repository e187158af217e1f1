//! `qmacro`: size reports, relative-Fisher measures, speed limits, sweeps,
//! plot data and the verification suite.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmacro_core::error::{Error, ErrorClass};

use crate::commands::Ctx;
use crate::config::{named_from_parts, GridKind, RunConfig, StateSpec};
use crate::output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("csv: {0}")]
    Csv(csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Capacity => 4,
            },
            CliError::Io(..) | CliError::Csv(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qmacro", version, about = "Macroscopicity measures for two-branch superpositions")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (or directory for `plotdata` and `verify`); stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fixed single-mode Fock truncation instead of adaptive doubling.
    #[arg(long, global = true)]
    truncation: Option<usize>,
    /// Convergence tolerance for truncation certificates.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct StateArgs {
    /// ghz, ecs, fockghz, hcs, psi0, psi1, psi2plus, psi2minus, iteratedsd.
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<f64>,
    /// Fock level of `fockghz`.
    #[arg(long = "n")]
    level: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Branch-distinguishability size C_δ.
    Size {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        delta: Option<f64>,
        /// Also compute N^rF with the default or given family.
        #[arg(long)]
        with_nrf: bool,
        #[arg(long)]
        algebra: Option<String>,
        /// Also check the variance formula of the constructed observable.
        #[arg(long)]
        with_checks: bool,
    },
    /// Relative-Fisher size N^rF, with the time-ratio cross-check.
    Nrf {
        #[command(flatten)]
        state: StateArgs,
        /// qubit, h3, h4, h4_l1, sl2.
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        /// Optimize each mode's coefficients independently.
        #[arg(long)]
        per_mode: bool,
        #[arg(long)]
        no_time_ratio: bool,
    },
    /// Distinguishability-time bounds and the measured crossing time for a qubit.
    Times {
        /// zero, one, plus, minus, plus_i, minus_i.
        #[arg(long)]
        state: Option<String>,
        /// sigmax, sigmay, sigmaz.
        #[arg(long)]
        hamiltonian: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        /// Weight of the maximally mixed state.
        #[arg(long)]
        mix: Option<f64>,
    },
    /// Parameter sweep, one CSV row per grid point.
    Sweep {
        /// gaussian, nrf, size.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Vec<f64>,
        /// `start:stop:count`, appended to --xi.
        #[arg(long)]
        xi_range: Option<String>,
        #[arg(long, value_delimiter = ',')]
        modes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        #[arg(long = "n", value_delimiter = ',')]
        level: Vec<usize>,
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Ellipse and curve data for the Gaussian cat figure.
    Plotdata {
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
    },
    /// Runs the acceptance suite; exits 1 if any criterion fails.
    Verify {
        #[arg(long, value_delimiter = ',')]
        criterion: Vec<u8>,
    },
}

fn state_override(cfg: &mut RunConfig, s: &StateArgs) -> Result<(), Error> {
    if let Some(name) = &s.state {
        cfg.state = Some(StateSpec::Named(named_from_parts(name, s.modes, s.alpha, s.xi, s.level)?));
    } else if s.modes.is_some() || s.alpha.is_some() || s.xi.is_some() || s.level.is_some() {
        return Err(Error::Argument("state parameters need --state".into()));
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Argument(format!("range '{s}' must be start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    Ok(match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    })
}

/// Merges the config file and flags into one effective configuration.
fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.truncation.is_some() {
        cfg.truncation = cli.truncation;
    }
    if let Some(t) = cli.tolerance {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::Argument(format!("tolerance must be positive, got {t}")));
        }
        let mut tol = cfg.tolerances();
        tol.conv = t;
        cfg.tolerances = Some(tol);
    }
    match &cli.command {
        Command::Size { state, delta, with_nrf, algebra, with_checks } => {
            state_override(&mut cfg, state)?;
            cfg.delta = delta.or(cfg.delta);
            cfg.algebra = algebra.clone().or(cfg.algebra.take());
            if *with_nrf && !cfg.measures.contains(&config::Measure::Nrf) {
                cfg.measures.push(config::Measure::Nrf);
            }
            if *with_checks && !cfg.measures.contains(&config::Measure::Checks) {
                cfg.measures.push(config::Measure::Checks);
            }
        }
        Command::Nrf { state, algebra, delta, per_mode, .. } => {
            state_override(&mut cfg, state)?;
            cfg.delta = delta.or(cfg.delta);
            cfg.algebra = algebra.clone().or(cfg.algebra.take());
            cfg.per_mode_independent |= *per_mode;
        }
        Command::Times { state, hamiltonian, delta, mix } => {
            let mut t = cfg.times.clone().unwrap_or_default();
            if let Some(s) = state {
                t.state = s.clone();
            }
            if let Some(h) = hamiltonian {
                t.hamiltonian = h.clone();
            }
            if let Some(m) = mix {
                t.mix = *m;
            }
            cfg.times = Some(t);
            cfg.delta = delta.or(cfg.delta);
        }
        Command::Sweep { kind, state, alpha, xi, xi_range, modes, delta, level, algebra } => {
            let mut g = cfg.grid.clone().unwrap_or_default();
            if let Some(k) = kind {
                g.kind = match k.as_str() {
                    "gaussian" => GridKind::Gaussian,
                    "nrf" => GridKind::Nrf,
                    "size" => GridKind::Size,
                    other => {
                        return Err(Error::Argument(format!("unknown sweep kind '{other}' (gaussian, nrf, size)")))
                    }
                };
            }
            if let Some(s) = state {
                g.state = s.clone();
            }
            if !alpha.is_empty() {
                g.alpha = alpha.clone();
            }
            if !xi.is_empty() || xi_range.is_some() {
                g.xi = xi.clone();
                if let Some(r) = xi_range {
                    g.xi.extend(parse_range(r)?);
                }
            }
            if !modes.is_empty() {
                g.modes = modes.clone();
            }
            if !delta.is_empty() {
                g.delta = delta.clone();
            }
            if !level.is_empty() {
                g.n = level.clone();
            }
            if algebra.is_some() {
                g.algebra = algebra.clone();
            }
            if g.modes.is_empty() {
                g.modes = vec![1];
            }
            cfg.grid = Some(g);
        }
        Command::Plotdata { alpha, xi } => {
            let mut p = cfg.plot.clone().unwrap_or_default();
            if let Some(a) = alpha {
                p.alpha = *a;
            }
            if let Some(x) = xi {
                p.xi = *x;
            }
            cfg.plot = Some(p);
        }
        Command::Verify { criterion } => {
            if !criterion.is_empty() {
                cfg.criteria = criterion.clone();
            }
            if let Some(bad) = cfg.criteria.iter().find(|c| !(1..=8).contains(*c)) {
                return Err(Error::Argument(format!("criterion {bad} does not exist (1-8)")));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cfg = build_config(&cli)?;
    let format = if cli.json {
        Some(Format::Json)
    } else if cli.csv {
        Some(Format::Csv)
    } else {
        None
    };
    let ctx = Ctx { cfg, out: cli.out.clone(), format };
    match cli.command {
        Command::Size { .. } => commands::cmd_size(&ctx)?,
        Command::Nrf { no_time_ratio, .. } => commands::cmd_nrf(&ctx, !no_time_ratio)?,
        Command::Times { .. } => commands::cmd_times(&ctx)?,
        Command::Sweep { .. } => commands::cmd_sweep(&ctx)?,
        Command::Plotdata { .. } => commands::cmd_plotdata(&ctx)?,
        Command::Verify { .. } => return commands::cmd_verify(&ctx),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::parse_from(["qmacro", "--seed", "3", "size", "--state", "ghz", "--modes", "5", "--delta", "0"]);
        let cfg = build_config(&cli).unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.delta, Some(0.0));
        assert!(matches!(
            cfg.state,
            Some(StateSpec::Named(qmacro_core::superposition::NamedState::Ghz { n_modes: 5 }))
        ));
    }
}
