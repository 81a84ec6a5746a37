use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod run;

#[derive(Parser, Debug)]
#[command(name = "transfinite", version, about = "Transfinite diameter, Chebyshev constant and Wiener energy on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one quantity and print a JSON report.
    Compute {
        quantity: Quantity,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        degree: Degree,
        /// Fail with exit code 3 instead of falling back to a heuristic.
        #[arg(long)]
        exact_only: bool,
    },
    /// Run an invariant suite; exit 0 iff every assertion passes.
    Verify {
        suite: Suite,
        #[command(flatten)]
        input: Input,
        /// Largest degree for the D_n and M_n checks.
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Constant added to the kernel by the shift suite.
        #[arg(long, default_value = "1")]
        shift: String,
    },
    /// Write the D_n / M_n convergence table as CSV.
    Converge {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n_max: usize,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Built-in example kernels.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand, Debug)]
enum FixtureAction {
    /// List fixture names, default sizes and descriptions.
    List,
    /// Print a fixture as a kernel file, with its expected values.
    Export {
        name: String,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum Quantity {
    Dn,
    Mn,
    W,
    Uvq,
    Rendezvous,
    /// Maximum-principle verdict.
    Mp,
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum Suite {
    Chain,
    Frostman,
    Shift,
    Equivalence,
}

#[derive(Copy, Clone, Debug, PartialEq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Args, Debug)]
struct Input {
    /// Kernel file (JSON).
    #[arg(long, conflicts_with = "fixture", required_unless_present = "fixture")]
    kernel: Option<std::path::PathBuf>,
    /// Built-in fixture name.
    #[arg(long)]
    fixture: Option<String>,
    /// Truncation size or grid size of the fixture.
    #[arg(long, requires = "fixture")]
    fixture_size: Option<usize>,
    /// Comma-separated point indices; the whole space when absent.
    #[arg(long)]
    subset: Option<String>,
    /// Arithmetic; exact for small explicit matrices, float otherwise.
    #[arg(long)]
    mode: Option<Mode>,
    /// Absolute slack of float comparisons.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct Degree {
    #[arg(long, conflicts_with = "n_max")]
    n: Option<usize>,
    /// Report the whole trace up to this degree.
    #[arg(long)]
    n_max: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
