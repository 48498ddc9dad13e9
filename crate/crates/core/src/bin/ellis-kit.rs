use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ellis_kit::orbit::OrbitBounds;
use ellis_kit::report::{render_report, run_command, Command, Format, Verb, EXIT_INPUT};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerbArg {
    Validate,
    Orbit,
    Omega,
    Iterate,
    Continuity,
    Ellis,
    Transitivity,
    Report,
    Oracle,
}

impl From<VerbArg> for Verb {
    fn from(v: VerbArg) -> Self {
        match v {
            VerbArg::Validate => Verb::Validate,
            VerbArg::Orbit => Verb::Orbit,
            VerbArg::Omega => Verb::Omega,
            VerbArg::Iterate => Verb::Iterate,
            VerbArg::Continuity => Verb::Continuity,
            VerbArg::Ellis => Verb::Ellis,
            VerbArg::Transitivity => Verb::Transitivity,
            VerbArg::Report => Verb::Report,
            VerbArg::Oracle => Verb::Oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Lines,
}

/// Analyses of finitely presented dynamical systems on countable ordinals.
///
/// Set ELLISKIT_THREADS to bound the worker pool.
#[derive(Debug, Parser)]
#[command(name = "ellis-kit", version)]
struct Cli {
    verb: VerbArg,
    /// System as `builtin:NAME` or a path to a `.dsk` file.
    #[arg(value_name = "SYSTEM")]
    system_arg: Option<String>,
    #[arg(long)]
    system: Option<String>,
    /// Point literal such as `A(3)`.
    #[arg(long)]
    point: Option<String>,
    /// Residue class `Nk+l`, or a natural number for a plain power.
    #[arg(long)]
    class: Option<String>,
    /// Truncation depth.
    #[arg(long, default_value_t = ellis_kit::report::DEFAULT_DEPTH)]
    depth: u64,
    /// Orbit step bound.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Largest escape period searched.
    #[arg(long, default_value_t = 64)]
    period_bound: usize,
    /// Power horizon for `ellis`, progression horizon for `oracle`.
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("ELLISKIT_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let Some(system) = cli.system.or(cli.system_arg) else {
        eprintln!("error: a system is required (--system builtin:NAME or a path)");
        return ExitCode::from(EXIT_INPUT as u8);
    };
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Lines => Format::Lines,
    };
    let command = Command {
        verb: cli.verb.into(),
        system,
        point: cli.point,
        class: cli.class,
        depth: Some(cli.depth),
        horizon: cli.horizon,
        bounds: OrbitBounds {
            step_bound: cli.steps,
            period_bound: cli.period_bound,
        },
        format,
    };
    let report = run_command(&command);
    print!("{}", render_report(&report, format));
    ExitCode::from(report.exit_code as u8)
}
