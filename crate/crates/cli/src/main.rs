//! `kwverify`: batch driver for the kw-core checks.
//!
//! Exit status: 0 when every check passes, 1 on a usage error, 2 when a check
//! fails or a computation cannot be completed, 3 on an I/O error.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kw_core::nahm::NahmSolution;

use commands::{CliError, Grid};
use report::{Format, Report};

#[derive(Parser, Debug)]
#[command(name = "kwverify", version, about = "Numerical checks for rotationally invariant Kapustin-Witten solutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long = "t-min", allow_negative_numbers = true)]
    t_min: Option<f64>,
    #[arg(long = "t-max", allow_negative_numbers = true)]
    t_max: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    /// Logarithmic spacing (the default).
    #[arg(long, conflicts_with = "linear")]
    log: bool,
    #[arg(long)]
    linear: bool,
}

impl GridArgs {
    fn resolve(&self, min: f64, max: f64, count: usize) -> Grid {
        Grid {
            min: self.t_min.unwrap_or(min),
            max: self.t_max.unwrap_or(max),
            count: self.count.unwrap_or(count),
            log: !self.linear,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced ODE residuals, endpoint behaviour and the 4D finite-difference order.
    Verify {
        /// Family tag (f1, f2, glued_plus, conj_glued_minus, thooft, alt_asd, tan) or `all`.
        #[arg(long, default_value = "f1")]
        family: String,
        #[arg(long = "C", value_delimiter = ',', default_value = "1", allow_negative_numbers = true)]
        c: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
        /// Base finite-difference step.
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Random points per finite-difference scan.
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Bound on the reduced residuals.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Multiply the Higgs field by this factor (negative control).
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        higgs_scale: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Instanton number by the boundary formula, radial quadrature and 4D trace density.
    Instanton {
        #[arg(long, default_value = "all")]
        family: String,
        #[arg(long = "C", value_delimiter = ',', default_value = "1", allow_negative_numbers = true)]
        c: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Curvature rescaling, C-independence of the L2 mass and concentration.
    Bubbling {
        #[arg(long = "C", value_delimiter = ',', default_value = "10,100,10000")]
        c: Vec<f64>,
        /// Radius of the ball for the mass fraction.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 0.99)]
        min_fraction: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Growth of the L2 norm of d_A phi near the Higgs pole.
    Singularity {
        #[arg(long, default_value = "f1")]
        family: String,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,5e-3,2.5e-3")]
        eps: Vec<f64>,
        /// Upper integration limit (default 2/C).
        #[arg(long)]
        upper: Option<f64>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        expect_exponent: f64,
        #[arg(long, default_value_t = 0.1)]
        exponent_tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Finite-difference check and instanton quadrature for U-map fields.
    Multicenter {
        /// CenterData JSON: {"lambdas": [...], "centers": [[w,x,y,z], ...], "C": c}.
        #[arg(long, conflicts_with = "k")]
        centers: Option<PathBuf>,
        /// Number of random centers when no file is given.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nahm-pole asymptotics, decay, sphere frame and cylinder instanton number.
    Nahm {
        #[arg(long, default_value = "plus_half")]
        which: NahmSolution,
        #[arg(long = "y-min", default_value_t = 1e-8)]
        y_min: f64,
        #[arg(long = "y-max", default_value_t = 10.0)]
        y_max: f64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        linear: bool,
        #[arg(long, default_value_t = 6)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        frame_points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tables of f, g and |F_A|, or ODE trajectories with the first integral.
    Odeplot {
        #[arg(long, default_value = "f1")]
        family: String,
        #[arg(long = "C", default_value_t = 1.0, allow_negative_numbers = true)]
        c: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// Integrate the autonomous system instead of tabulating the closed form.
        #[arg(long)]
        trajectory: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cmd: Command) -> Result<(Report, OutputArgs), CliError> {
    Ok(match cmd {
        Command::Verify { family, c, grid, h, seed, points, tol, higgs_scale, output } => {
            let cfg = commands::VerifyConfig {
                family,
                cs: c,
                grid: grid.resolve(1e-3, 1e3, 1000),
                h,
                seed,
                points,
                tol,
                higgs_scale,
            };
            (commands::verify(&cfg)?, output)
        }
        Command::Instanton { family, c, output } => {
            (commands::instanton(&commands::InstantonConfig { family, cs: c })?, output)
        }
        Command::Bubbling { c, r, min_fraction, grid, output } => {
            let cfg = commands::BubblingConfig { cs: c, r, grid: grid.resolve(1e-6, 1e2, 200), min_fraction };
            (commands::bubbling(&cfg)?, output)
        }
        Command::Singularity { family, c, eps, upper, expect_exponent, exponent_tol, output } => {
            let cfg = commands::SingularityConfig { family, c, eps, upper, expect_exponent, exponent_tol };
            (commands::singularity(&cfg)?, output)
        }
        Command::Multicenter { centers, k, c, seed, h, points, output } => {
            let cfg = commands::MulticenterConfig { centers, k, c, seed, h, points };
            (commands::multicenter(&cfg)?, output)
        }
        Command::Nahm { which, y_min, y_max, count, linear, seed, frame_points, output } => {
            let grid = Grid { min: y_min, max: y_max, count, log: !linear };
            (commands::nahm(&commands::NahmConfig { which, grid, seed, frame_points })?, output)
        }
        Command::Odeplot { family, c, grid, trajectory, tol, output } => {
            let cfg = commands::OdeplotConfig { family, c, grid: grid.resolve(1e-3, 1e3, 1000), trajectory, tol };
            (commands::odeplot(&cfg)?, output)
        }
    })
}

fn emit(report: &Report, out: &OutputArgs) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    match &out.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            report.write(out.format, BufWriter::new(f)).map_err(io_err)?;
        }
        None => report.write(out.format, io::stdout().lock()).map_err(io_err)?,
    }
    report.write_diagnostics(io::stderr().lock()).map_err(io_err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(cli.command).and_then(|(report, out)| {
        emit(&report, &out)?;
        Ok(report.passed())
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let _ = writeln!(io::stderr(), "kwverify: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
