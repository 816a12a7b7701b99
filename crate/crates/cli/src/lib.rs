//! Command-line front end for the giant-atom battery simulator.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Command, Entry, Origin, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] gaqb_core::Error),
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gaqb", version, about = "Giant-atom quantum battery simulator")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Coupling parameters as a function of θ
    Params(Flags),
    /// Single charging run from |e_a g_b>
    Charge(Flags),
    /// θ × t grid of battery metrics with global maxima
    Sweep(Flags),
    /// Chiral pitch-catch transfer
    Chiral(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// key = value config file; flags take precedence
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "braided|separated|nested")]
    topology: Option<String>,
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, value_name = "F")]
    gamma: Option<String>,
    #[arg(long, value_name = "F")]
    omega0: Option<String>,
    #[arg(long, value_name = "F")]
    tmax: Option<String>,
    #[arg(long, value_name = "F")]
    dt: Option<String>,
    #[arg(long, value_name = "N")]
    sample_stride: Option<String>,
    /// Output file (default: stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    #[arg(long, value_name = "csv|json")]
    format: Option<String>,
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    theta_min: Option<String>,
    #[arg(long, value_name = "F", allow_hyphen_values = true)]
    theta_max: Option<String>,
    #[arg(long, value_name = "N")]
    theta_steps: Option<String>,
    /// Comma-separated: E, ergotropy, sigma, power, energy_power
    #[arg(long, value_name = "LIST")]
    metrics: Option<String>,
    /// Worker threads for sweeps (default: all processors)
    #[arg(long, value_name = "N")]
    threads: Option<String>,
    #[arg(long, value_name = "F")]
    gamma_max: Option<String>,
    /// Γ_max·τ
    #[arg(long, value_name = "F")]
    tau_scaled: Option<String>,
    #[arg(long, value_name = "right|left")]
    direction: Option<String>,
}

impl Flags {
    fn entries(&self) -> Vec<Entry> {
        let pairs = [
            ("topology", &self.topology),
            ("theta", &self.theta),
            ("gamma", &self.gamma),
            ("omega0", &self.omega0),
            ("tmax", &self.tmax),
            ("dt", &self.dt),
            ("sample_stride", &self.sample_stride),
            ("out", &self.out),
            ("format", &self.format),
            ("theta_min", &self.theta_min),
            ("theta_max", &self.theta_max),
            ("theta_steps", &self.theta_steps),
            ("metrics", &self.metrics),
            ("threads", &self.threads),
            ("gamma_max", &self.gamma_max),
            ("tau_scaled", &self.tau_scaled),
            ("direction", &self.direction),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| {
                v.as_ref().map(|v| Entry {
                    key: k.to_string(),
                    value: v.clone(),
                    origin: Origin::Flag,
                })
            })
            .collect()
    }
}

/// Resolve the configuration and produce the output bytes of one command.
pub fn execute(command: Command, file: &[Entry], flags: &[Entry]) -> Result<(RunConfig, Vec<u8>), CliError> {
    let config = RunConfig::resolve(command, file, flags)?;
    let table = match command {
        Command::Params => commands::cmd_params(&config)?,
        Command::Charge => commands::cmd_charge(&config)?,
        Command::Sweep => commands::cmd_sweep(&config)?,
        Command::Chiral => commands::cmd_chiral(&config)?,
    };
    let bytes = table.render(config.format).into_bytes();
    Ok((config, bytes))
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (command, flags) = match cli.command {
        Sub::Params(f) => (Command::Params, f),
        Sub::Charge(f) => (Command::Charge, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Chiral(f) => (Command::Chiral, f),
    };
    let file = match &flags.config {
        Some(path) => config::load_config(path)?,
        None => Vec::new(),
    };
    let (config, bytes) = execute(command, &file, &flags.entries())?;
    match &config.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => stdout.write_all(&bytes).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// Run the CLI and return the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let kind = if e.exit_code() == 2 {
                "numerical failure"
            } else {
                "error"
            };
            let _ = writeln!(stderr, "{kind}: {e}");
            e.exit_code()
        }
    }
}
