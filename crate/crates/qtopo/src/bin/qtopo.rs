//! Thin command-line front end; all logic lives in the library's `cli`
//! module. Exit codes: 0 success, 1 numerical failure, 2 usage/config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qtopo::cli::{self, CliError};
use qtopo::curves::CurveKind;
use qtopo::mesh::{generate_plate, generate_sphere};

#[derive(Parser)]
#[command(
    name = "qtopo",
    version,
    about = "Antenna Q-factor minimization by density topology optimization in a method-of-moments model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh, print its counts, optionally write a mesh file
    Mesh {
        #[command(subcommand)]
        kind: MeshCmd,
    },
    /// Run the optimization loop described by a config file
    Optimize {
        /// TOML run configuration
        #[arg(long)]
        config: PathBuf,
    },
    /// Frequency sweep of a stored design
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Design file (gray densities or thresholded 0/1 field)
        #[arg(long)]
        design: PathBuf,
        /// Comma-separated electrical sizes, e.g. 0.7,0.75,0.8
        #[arg(long)]
        ka: String,
        /// Analyze the hard-thresholded design with true material values
        #[arg(long)]
        thresholded: bool,
        /// Output CSV path (stdout when omitted)
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Verify adjoint sensitivities against finite differences (T ≤ 200)
    Gradcheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample a spherical curve into a polyline file
    Curves {
        #[arg(value_enum)]
        kind: CurveArg,
        /// Turns M (helix) or slope γ (loxodrome)
        #[arg(long)]
        param: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Loxodrome parameter half-range (samples span [−t, t])
        #[arg(long, default_value_t = 3.0)]
        t_span: f64,
        /// Also write the π-rotated second arm
        #[arg(long)]
        two_arm: bool,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Structured rectangular plate (cells split into 4 triangles)
    Plate {
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 0.6)]
        aspect: f64,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Geodesic sphere by icosahedron subdivision
    Sphere {
        #[arg(long)]
        subdiv: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveArg {
    Helix,
    Loxodrome,
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Mesh { kind } => {
            let (mesh, output) = match kind {
                MeshCmd::Plate { length, aspect, nx, ny, output } => (
                    generate_plate(length, aspect, nx, ny)
                        .map_err(|e| CliError::Usage(e.to_string()))?,
                    output,
                ),
                MeshCmd::Sphere { subdiv, radius, output } => (
                    generate_sphere(subdiv, radius)
                        .map_err(|e| CliError::Usage(e.to_string()))?,
                    output,
                ),
            };
            cli::cmd_mesh(&mesh, output.as_deref()).map(|_| ())
        }
        Command::Optimize { config } => cli::cmd_optimize(&config),
        Command::Sweep { config, design, ka, thresholded, output } => {
            let ka_list: Result<Vec<f64>, _> =
                ka.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect();
            let ka_list =
                ka_list.map_err(|e| CliError::Usage(format!("cannot parse ka list: {e}")))?;
            cli::cmd_sweep(&config, &design, &ka_list, thresholded, output.as_deref())
        }
        Command::Gradcheck { config } => cli::cmd_gradcheck(&config),
        Command::Curves { kind, param, radius, samples, t_span, two_arm, output } => {
            let kind = match kind {
                CurveArg::Helix => CurveKind::Helix,
                CurveArg::Loxodrome => CurveKind::Loxodrome,
            };
            cli::cmd_curves(kind, param, radius, samples, t_span, two_arm, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtopo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
