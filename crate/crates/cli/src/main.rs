use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use radon_cli::{parse_config, run_pipeline, run_verify, CliError, Command, Report};

#[derive(Parser)]
#[command(name = "radon", version, about = "Singular Radon transforms: symbolic conditions, kernels and operator experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Problem configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the t truncation order.
    #[arg(long, global = true)]
    lt: Option<u32>,
    /// Overrides the x truncation order.
    #[arg(long, global = true)]
    lx: Option<u32>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Report)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// The JSON report.
    Report,
    /// Tables as tab-separated text.
    Tables,
}

#[derive(Subcommand)]
enum Cmd {
    /// W, exponential fields, pure/non-pure partition and all condition verdicts.
    Analyze,
    /// Preparation of W.
    Prep,
    /// Division of [divide].dividend by [divide].generators.
    Divide,
    /// Lie closure of the pure fields.
    Lie,
    /// Condition verdicts with certificates.
    Control,
    /// Kernel synthesis and size constants.
    Kernel,
    /// Operator norm estimates of T over J.
    Norm,
    /// Carnot-Carathéodory ball sampling.
    Ccball,
    /// Reduction of the maximal operator and the M0 ≤ M1 comparison.
    Maximal,
    /// Replays every certificate in a report.
    Verify {
        /// Report produced by analyze or control.
        report: PathBuf,
    },
}

fn read(path: &PathBuf, stage: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new(stage, format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(Report, bool), CliError> {
    if let Cmd::Verify { report } = &cli.cmd {
        return run_verify(&read(report, "verify")?);
    }
    let text = match &cli.config {
        Some(p) => read(p, "config")?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(v) = cli.lt {
        cfg.truncation.lt = v;
    }
    if let Some(v) = cli.lx {
        cfg.truncation.lx = v;
    }
    let cmd = match cli.cmd {
        Cmd::Analyze => Command::Analyze,
        Cmd::Prep => Command::Prep,
        Cmd::Divide => Command::Divide,
        Cmd::Lie => Command::Lie,
        Cmd::Control => Command::Control,
        Cmd::Kernel => Command::Kernel,
        Cmd::Norm => Command::Norm,
        Cmd::Ccball => Command::Ccball,
        Cmd::Maximal => Command::Maximal,
        Cmd::Verify { .. } => unreachable!("handled above"),
    };
    Ok((run_pipeline(&cfg, &text, cmd)?, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, ok) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error in stage {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let body = match cli.format {
        Format::Report => report.to_json(),
        Format::Tables => report.tables_tsv(),
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, body).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error writing output: {e}");
        return ExitCode::from(1);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}
