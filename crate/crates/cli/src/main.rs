//! `orthohaptic`: kinematics, workspace maps, sizing and self-checks for the
//! decoupled six-dof haptic device.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "orthohaptic", version, about = "Six-dof haptic device kinematics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Device configuration (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pose from joint values.
    Fk {
        #[command(flatten)]
        cfg: ConfigArg,
        /// rho1,rho2,rho3,gamma1,gamma2,gamma3 (gammas in degrees).
        #[arg(long, value_name = "LIST", value_parser = commands::parse_six, allow_hyphen_values = true)]
        joints: [f64; 6],
    },
    /// Joint values from a pose.
    Ik {
        #[command(flatten)]
        cfg: ConfigArg,
        /// x,y,z,rx,ry,rz: position, then X-Y-Z rotation angles in degrees.
        #[arg(long, value_name = "LIST", value_parser = commands::parse_six, allow_hyphen_values = true)]
        pose: [f64; 6],
    },
    /// Translation and rotation Jacobian blocks (home by default).
    Jacobian {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_name = "LIST", value_parser = commands::parse_six, allow_hyphen_values = true, conflicts_with = "pose")]
        joints: Option<[f64; 6]>,
        #[arg(long, value_name = "LIST", value_parser = commands::parse_six, allow_hyphen_values = true)]
        pose: Option<[f64; 6]>,
    },
    /// Conditioning map over a grid, written as CSV.
    WorkspaceMap {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Points per axis (defaults to grid_n from the configuration).
        #[arg(long)]
        grid: Option<usize>,
        /// Lower box bound on every axis (defaults to -L).
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        /// Upper box bound on every axis (defaults to L).
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
    },
    /// Largest axis-aligned cube in the translational workspace.
    Cube {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Face sampling resolution.
        #[arg(long, default_value_t = 17)]
        resolution: usize,
    },
    /// Size leg length and prismatic range for a required cube.
    Optimize {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Required cube edge (overrides required_edge).
        #[arg(long)]
        edge: Option<f64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Single universal joint transfer table over one revolution, as CSV.
    Transmission {
        /// Bend angle in degrees.
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 360)]
        steps: usize,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
    /// Run the built-in invariant suites.
    Check {
        /// Multiplies every pass threshold.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        #[arg(long, default_value_t = 2006)]
        seed: u64,
        /// Run only the named suite.
        #[arg(long)]
        suite: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fk { cfg, joints } => commands::fk(&cfg.config, joints),
        Command::Ik { cfg, pose } => commands::ik(&cfg.config, pose),
        Command::Jacobian { cfg, joints, pose } => commands::jacobian(&cfg.config, joints, pose),
        Command::WorkspaceMap {
            cfg,
            out,
            grid,
            lo,
            hi,
        } => commands::workspace_map(&cfg.config, &out, grid, lo, hi),
        Command::Cube {
            cfg,
            out,
            resolution,
        } => commands::cube(&cfg.config, out.as_deref(), resolution),
        Command::Optimize { cfg, edge, out } => commands::optimize(&cfg.config, edge, out.as_deref()),
        Command::Transmission {
            beta,
            steps,
            out,
            config,
        } => commands::transmission(config.as_deref(), beta, steps, &out),
        Command::Check {
            tol_scale,
            seed,
            suite,
        } => commands::check(tol_scale, seed, suite.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("orthohaptic: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
