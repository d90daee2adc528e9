mod commands;
mod config;
mod error;
mod sweep;
mod table;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{merge, read_config_file, Command, ExperimentSpec};
use crate::error::{CliError, CliResult};
use crate::table::write_table;

/// Spin coherent state teleportation experiments.
///
/// Sweeps accept a single value, a comma list or start:stop:step (stop
/// included). Angles may be written as multiples of pi, e.g. pi/2 or -3pi/4.
/// Values from --config FILE (key=value lines) are defaults; flags override
/// them.
///
/// Output starts with the resolved configuration (`# key=value` lines in CSV,
/// a "config" object in JSON). Floats use the shortest representation that
/// parses back exactly.
///
/// Exit codes: 0 success, 1 I/O or numerical failure, 2 usage, 3 resource
/// limit, 4 failed check.
#[derive(Parser, Debug)]
#[command(name = "bloch-teleport", version, verbatim_doc_comment)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Joint outcome table per (N, theta, phi, gamma).
    ///
    /// Columns: N,theta,phi,gamma,k1,k2,k3,prob. All k1 unless --k1 is given.
    /// gamma > 0 gives the dephased table.
    #[command(verbatim_doc_comment)]
    Distributions,
    /// Peak formulas per k1 next to grid maxima.
    ///
    /// Columns: N,theta,phi,k1,s1,phi_peak,phi_peak_kind,theta_peak,
    /// theta_peak_kind,phi_argmax,theta_argmax. Kinds: regular, clamped,
    /// undefined (empty value). The argmax columns scan Alice's phi over
    /// grid-phi+1 points on [0, pi] and her theta over grid-theta+1 points on
    /// [-pi/2, pi/2], at k2 = k3 = floor(N/2).
    #[command(verbatim_doc_comment)]
    Peaks,
    /// Sphere-averaged error on a grid-theta x grid-phi grid.
    ///
    /// Columns: N,k1_cut,epsilon,epsilon_qse,epsilon_comm,success_prob.
    /// Default cut N/2 (unconditional); cuts above N/2 are skipped.
    #[command(verbatim_doc_comment)]
    TeleportError,
    /// Acceptance probability and pointwise error per cut.
    ///
    /// Columns: N,theta,phi,k1_cut,k1_cut_ratio,success_prob,epsilon.
    /// Default: every cut 0..=N/2; cuts above N/2 are skipped.
    #[command(verbatim_doc_comment)]
    SuccessProb,
    /// Dephased error for each rate.
    ///
    /// Columns: N,gamma,k1_cut,theta,phi,epsilon,success_prob,equator_epsilon.
    /// equator_epsilon averages over grid-phi equatorial states. Default cut
    /// N/2; quad-nodes sets the Gauss-Hermite order (at least 20).
    #[command(verbatim_doc_comment)]
    Dephasing,
    /// Classical reference errors.
    ///
    /// Columns: N,epsilon_qse,epsilon_comm. epsilon_comm uses a
    /// grid-theta x grid-phi Gauss-Legendre rule (at least 16 x 32, even).
    #[command(verbatim_doc_comment)]
    Bounds,
    /// Analytic table against the brute-force simulation (N <= 12).
    ///
    /// Columns: N,theta,phi,gamma,check,max_deviation,tolerance,pass.
    /// Checks the swept states plus --states random ones drawn from --seed.
    /// Each gamma > 0 adds a Monte Carlo row (N <= 8, --trajectories runs,
    /// per-entry tolerance max(5e-2, 3 standard errors)). Exits 4 if any
    /// row fails.
    #[command(verbatim_doc_comment)]
    OracleCheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Distributions => Command::Distributions,
            Cmd::Peaks => Command::Peaks,
            Cmd::TeleportError => Command::TeleportError,
            Cmd::SuccessProb => Command::SuccessProb,
            Cmd::Dephasing => Command::Dephasing,
            Cmd::Bounds => Command::Bounds,
            Cmd::OracleCheck => Command::OracleCheck,
        }
    }
}

#[derive(Args, Debug)]
struct Opts {
    /// Particle number sweep [default: 10]
    #[arg(long, global = true)]
    n: Option<String>,
    /// Alice's polar angle sweep [default: pi/2]
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Alice's azimuth sweep [default: 0]
    #[arg(long, global = true, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Postselection cut sweep (keep k1 <= cut or k1 >= N - cut)
    #[arg(long = "k1-cut", global = true)]
    k1_cut: Option<String>,
    /// Dephasing rate sweep [default: 0]
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Seed for random states and trajectories [default: 0]
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Polar nodes of the sphere grid [default: 32]
    #[arg(long = "grid-theta", global = true)]
    grid_theta: Option<String>,
    /// Azimuthal nodes of the sphere grid [default: 64]
    #[arg(long = "grid-phi", global = true)]
    grid_phi: Option<String>,
    /// Gauss-Hermite nodes per dephasing average [default: 40]
    #[arg(long = "quad-nodes", global = true)]
    quad_nodes: Option<String>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long, global = true)]
    threads: Option<String>,
    /// csv or json [default: csv]
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file, - for stdout [default: stdout]
    #[arg(long, global = true)]
    out: Option<String>,
    /// literal, derived-inverse or reflected [default: reflected]
    #[arg(long, global = true)]
    correction: Option<String>,
    /// Fixed k1 for distributions
    #[arg(long, global = true)]
    k1: Option<String>,
    /// Extra random states for oracle-check [default: 5]
    #[arg(long, global = true)]
    states: Option<String>,
    /// Monte Carlo trajectories for oracle-check [default: 2000]
    #[arg(long, global = true)]
    trajectories: Option<String>,
    /// key=value file of defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Opts {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("n", self.n.clone()),
            ("theta", self.theta.clone()),
            ("phi", self.phi.clone()),
            ("k1-cut", self.k1_cut.clone()),
            ("gamma", self.gamma.clone()),
            ("seed", self.seed.clone()),
            ("grid-theta", self.grid_theta.clone()),
            ("grid-phi", self.grid_phi.clone()),
            ("quad-nodes", self.quad_nodes.clone()),
            ("threads", self.threads.clone()),
            ("format", self.format.clone()),
            ("out", self.out.clone()),
            ("correction", self.correction.clone()),
            ("k1", self.k1.clone()),
            ("states", self.states.clone()),
            ("trajectories", self.trajectories.clone()),
        ]
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let file = match &cli.opts.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let settings = merge(cli.opts.flags(), file);
    let spec = ExperimentSpec::resolve(cli.command.into(), &settings)?;
    if spec.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(spec.threads)
            .build_global()
            .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?;
    }
    let report = commands::run(&spec)?;
    write_table(&report.table, &spec.header(), spec.format, spec.out.as_deref())?;
    if report.failures > 0 {
        return Err(CliError::Validation(format!(
            "{} of {} checks failed",
            report.failures,
            report.table.rows().len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
