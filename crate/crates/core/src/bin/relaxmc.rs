use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relaxmc::harness::run::{
    run_complete, run_experiment, run_ingest_check, run_lemma6, run_leverage, run_sample, run_synth, run_verify,
    CompleteOutcome,
};
use relaxmc::harness::{DataSpec, Generator, RunConfig, SchemeName, SourceKind};
use relaxmc::recovery::ErrorMode;
use relaxmc::Error;

#[derive(Parser)]
#[command(name = "relaxmc", version, about = "Matrix completion with relaxed leverage-score sampling")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the data and print its shape and preprocessing log.
    IngestCheck,
    /// Write row and column leverage scores at the configured rank.
    Leverage,
    /// Draw one sample from the configured scheme.
    Sample,
    /// Run the trial protocol for one scheme, or complete a stored sample.
    Complete {
        #[arg(long)]
        sample: Option<PathBuf>,
    },
    /// Calibrate both schemes and report the normalized gain per rank.
    Experiment,
    /// Lemma suite, golfing certificates and the score inequality check.
    Verify {
        /// Only run the score inequality check on an N x N grid.
        #[arg(long, value_name = "N")]
        lemma6_grid: Option<usize>,
        #[arg(long)]
        lemma_seeds: Option<usize>,
        #[arg(long)]
        certificate_seeds: Option<usize>,
        /// Per-round constant of the certificate runs.
        #[arg(long)]
        c0: Option<f64>,
    },
    /// Generate a synthetic matrix as dense CSV.
    Synth,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorName {
    Incoherent,
    Spiked,
    PowerLaw,
}

#[derive(Clone, Copy, ValueEnum)]
enum ErrorModeArg {
    Rel,
    Abs,
}

#[derive(Args)]
struct Flags {
    /// TOML file supplying any of the flags below; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<SourceKind>,
    /// Rows of synthetic data, or the declared rows of a triplet file.
    #[arg(long, global = true)]
    rows: Option<usize>,
    #[arg(long, global = true)]
    cols: Option<usize>,
    #[arg(long, global = true, value_enum)]
    generator: Option<GeneratorName>,
    #[arg(long, global = true)]
    rank: Option<usize>,
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, global = true)]
    constant: Option<f64>,
    #[arg(long, global = true, value_enum)]
    log_factor: Option<Switch>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    success_min: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    error_mode: Option<ErrorModeArg>,
    #[arg(long, global = true)]
    sweep_cap: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Uniform,
    Leveraged,
    Relaxed,
}

fn parse_format(s: &str) -> Result<SourceKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn generator_of(name: GeneratorName) -> Generator {
    match name {
        GeneratorName::Incoherent => Generator::Incoherent,
        GeneratorName::Spiked => Generator::spiked_default(),
        GeneratorName::PowerLaw => Generator::PowerLaw { exponent: 1.0 },
    }
}

impl Flags {
    fn resolve(&self) -> relaxmc::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.data {
            c.data = Some(DataSpec::File {
                path: path.clone(),
                format: self.format.unwrap_or(SourceKind::RatingsTriplets),
                rows: self.rows,
                cols: self.cols,
            });
        } else if let Some(DataSpec::File { format, rows, cols, .. }) = &mut c.data {
            *format = self.format.unwrap_or(*format);
            *rows = self.rows.or(*rows);
            *cols = self.cols.or(*cols);
        } else if self.rows.is_some() || self.cols.is_some() || self.generator.is_some() || c.data.is_some() {
            // A config-file rank stays the generated rank and --rank truncates;
            // data built from flags alone is generated at --rank.
            let (rows, cols, rank, generator) = match c.data.take() {
                Some(DataSpec::Synthetic { rows, cols, rank, generator }) => (rows, cols, rank, generator),
                _ => (100, 80, self.rank.unwrap_or(5), Generator::Incoherent),
            };
            c.data = Some(DataSpec::Synthetic {
                rows: self.rows.unwrap_or(rows),
                cols: self.cols.unwrap_or(cols),
                rank,
                generator: self.generator.map_or(generator, generator_of),
            });
        }
        if let Some(rank) = self.rank {
            c.ranks = vec![rank];
        }
        if let Some(s) = self.scheme {
            c.scheme.kind = match s {
                SchemeArg::Uniform => SchemeName::Uniform,
                SchemeArg::Leveraged => SchemeName::Leveraged,
                SchemeArg::Relaxed => SchemeName::Relaxed,
            };
        }
        if let Some(v) = self.constant {
            c.scheme.constant = v;
        }
        if let Some(v) = self.log_factor {
            c.scheme.log_factor = matches!(v, Switch::On);
        }
        if let Some(v) = self.trials {
            c.protocol.trials = v;
        }
        if let Some(v) = self.success_min {
            c.protocol.success_threshold = v;
        }
        if let Some(v) = self.epsilon {
            c.protocol.epsilon = v;
        }
        if let Some(v) = self.error_mode {
            c.protocol.error_mode = match v {
                ErrorModeArg::Rel => ErrorMode::Relative,
                ErrorModeArg::Abs => ErrorMode::Absolute,
            };
        }
        if let Some(v) = self.sweep_cap {
            c.sweep_cap = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::RankOutOfRange { .. } => 2,
        Error::Io(_) | Error::Parse { .. } => 3,
        Error::CalibrationFailed { .. } => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> relaxmc::Result<()> {
    let mut config = cli.flags.resolve()?;
    match cli.command {
        Command::IngestCheck => {
            let s = run_ingest_check(&config)?;
            let (m, n) = s.dataset.matrix.dims();
            println!("{}: {m}x{n}, {} nonzeros", s.dataset.source_kind.name(), s.nonzeros);
            for line in s.dataset.log_lines() {
                println!("  {line}");
            }
        }
        Command::Leverage => {
            let path = run_leverage(&config)?;
            println!("wrote {}", path.display());
        }
        Command::Sample => {
            let (sample, path) = run_sample(&config)?;
            println!("{} entries, wrote {}", sample.len(), path.display());
        }
        Command::Complete { sample } => match run_complete(&config, sample.as_deref())? {
            CompleteOutcome::Trials(summary, path) => {
                println!(
                    "{} c={}: {}/{} successes, mean |Omega| {:.1}, wrote {}",
                    summary.scheme,
                    summary.constant,
                    summary.successes,
                    summary.records.len(),
                    summary.mean_sample_size(),
                    path.display()
                );
            }
            CompleteOutcome::Single(report, path) => {
                println!(
                    "{} iterations, converged {}, wrote {}",
                    report.iterations,
                    report.converged,
                    path.display()
                );
            }
        },
        Command::Experiment => {
            let outcome = run_experiment(&config)?;
            print!("{}", outcome.table);
        }
        Command::Verify {
            lemma6_grid,
            lemma_seeds,
            certificate_seeds,
            c0,
        } => {
            if let Some(v) = lemma_seeds {
                config.verify.lemma_seeds = v;
            }
            if let Some(v) = certificate_seeds {
                config.verify.certificate_seeds = v;
            }
            if let Some(v) = c0 {
                config.verify.certificate_c0 = v;
            }
            if let Some(grid) = lemma6_grid {
                config.verify.lemma6_grid = grid;
                let (report, _) = run_lemma6(&config)?;
                println!("checked {} pairs, {} violations", report.checked, report.violations);
                return Ok(());
            }
            let outcome = run_verify(&config)?;
            for row in &outcome.lemmas.rows {
                println!("{:<18} {:>4} seeds  pass rate {:.3}", row.lemma, row.seed_count, row.pass_rate());
            }
            let runs = outcome.certificates.len();
            let practical = outcome.certificates.iter().filter(|(_, r)| r.passed_practical).count();
            println!("certificate: {practical}/{runs} pass at the practical gap threshold");
            println!(
                "lemma6: checked {} pairs, {} violations",
                outcome.lemma6.checked, outcome.lemma6.violations
            );
        }
        Command::Synth => {
            let (m, path) = run_synth(&config)?;
            println!("{}x{} matrix, wrote {}", m.rows(), m.cols(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
