//! Batch drivers behind the CLI subcommands. Every file written starts with
//! the config header so outputs can be traced back to their run.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{DataSpec, RunConfig};
use super::dataset::{ingest, rank_truncate, write_dense_csv, Dataset, IngestOptions, Transform};
use super::synth::{generate, Generator};
use crate::error::{Error, Result};
use crate::leverage::{entry_probabilities, leverage_scores};
use crate::matcore::{truncated_svd, DenseMatrix};
use crate::recovery::{
    gain_report, profile_of, recover_with_scheme, render_table, write_gain_csv, write_trials_csv, GainReport,
    TrialSummary,
};
use crate::sampling::rng::derive_seed;
use crate::sampling::{draw_bernoulli, partition_from_round_probabilities, read_sample_csv, write_sample_csv, SampleSet};
use crate::solver::{complete, RecoveryReport};
use crate::verify::{
    build_dual_certificate, lemma6_check, lemma_suite_with, write_certificate_csv, CertificateReport, Lemma6Report,
    LemmaSuite, LemmaSuiteConfig, TheoryConstants,
};

const DATA_STREAM: u64 = 20;
const LEMMA_INSTANCE_STREAM: u64 = 21;
const LEMMA_SEED_STREAM: u64 = 22;
const CERTIFICATE_STREAM: u64 = 23;
const LEMMA6_STREAM: u64 = 24;

fn generator_label(g: &Generator) -> String {
    match g {
        Generator::Incoherent => "incoherent".into(),
        Generator::Spiked { rows, cols, factor } => format!("spiked(rows={rows},cols={cols},factor={factor})"),
        Generator::PowerLaw { exponent } => format!("power-law(exponent={exponent})"),
    }
}

/// Reads or synthesizes the configured matrix, before any truncation.
pub fn load_dataset(config: &RunConfig) -> Result<Dataset> {
    match config.data()? {
        DataSpec::File { path, format, rows, cols } => ingest(
            path,
            *format,
            IngestOptions {
                rows: *rows,
                cols: *cols,
            },
        ),
        DataSpec::Synthetic {
            rows,
            cols,
            rank,
            generator,
        } => {
            let seed = derive_seed(config.seed, DATA_STREAM, 0);
            let m = generate(*rows, *cols, *rank, generator, seed)?;
            let step = Transform::new(
                "synthesize",
                &[
                    ("generator", generator_label(generator)),
                    ("rows", rows.to_string()),
                    ("cols", cols.to_string()),
                    ("rank", rank.to_string()),
                    ("seed", seed.to_string()),
                ],
            );
            Ok(Dataset::synthetic(m, step))
        }
    }
}

/// The experiment matrix at `rank`. Synthetic data generated at that rank is
/// used as is; everything else is truncated.
pub fn prepare(config: &RunConfig, raw: &Dataset, rank: usize) -> Result<Dataset> {
    match config.data()? {
        DataSpec::Synthetic { rank: generated, .. } if *generated == rank => Ok(raw.clone()),
        _ => rank_truncate(raw, rank),
    }
}

/// Writes `<dir>/<name>` as the header line followed by `body`.
fn write_artifact(
    dir: &Path,
    name: &str,
    header: &str,
    body: impl FnOnce(&mut Vec<u8>) -> Result<()>,
) -> Result<PathBuf> {
    let mut buf = Vec::new();
    writeln!(buf, "{header}")?;
    body(&mut buf)?;
    write_bytes(dir, name, &buf)
}

fn write_bytes(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn write_log(dir: &Path, name: &str, header: &str, log: &[Transform]) -> Result<PathBuf> {
    write_artifact(dir, name, header, |out| {
        for t in log {
            writeln!(out, "{t}")?;
        }
        Ok(())
    })
}

fn single_rank(config: &RunConfig) -> Result<usize> {
    match config.experiment_ranks()?.as_slice() {
        [rank] => Ok(*rank),
        ranks => Err(Error::Config(format!("this command takes one rank, got {ranks:?}"))),
    }
}

#[derive(Debug)]
pub struct IngestSummary {
    pub dataset: Dataset,
    pub nonzeros: usize,
    pub written: Vec<PathBuf>,
}

pub fn run_ingest_check(config: &RunConfig) -> Result<IngestSummary> {
    let dataset = load_dataset(config)?;
    let nonzeros = dataset.matrix.as_matrix().iter().filter(|v| **v != 0.0).count();
    let log = write_log(&config.out, "preprocessing.log", &config.header()?, &dataset.preprocessing_log)?;
    Ok(IngestSummary {
        dataset,
        nonzeros,
        written: vec![log],
    })
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub reports: Vec<GainReport>,
    pub table: String,
    pub written: Vec<PathBuf>,
}

/// ingest, truncate and calibrate both schemes at every configured rank.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let header = config.header()?;
    let raw = load_dataset(config)?;
    let mut reports = Vec::new();
    let mut log = raw.preprocessing_log.clone();
    for rank in config.experiment_ranks()? {
        let data = prepare(config, &raw, rank)?;
        log.extend(data.preprocessing_log[raw.preprocessing_log.len()..].iter().cloned());
        reports.push(gain_report(&data.matrix, rank, &config.protocol, config.seed, config.sweep_cap)?);
    }
    let table = render_table(&reports);
    let written = vec![
        write_artifact(&config.out, "gain.csv", &header, |out| write_gain_csv(&reports, out))?,
        write_artifact(&config.out, "trials.csv", &header, |out| write_trials_csv(&reports, out))?,
        write_artifact(&config.out, "table.txt", &header, |out| Ok(out.write_all(table.as_bytes())?))?,
        write_log(&config.out, "preprocessing.log", &header, &log)?,
    ];
    Ok(ExperimentOutcome {
        reports,
        table,
        written,
    })
}

pub fn run_leverage(config: &RunConfig) -> Result<PathBuf> {
    let rank = single_rank(config)?;
    let data = prepare(config, &load_dataset(config)?, rank)?;
    let profile = profile_of(&data.matrix, rank)?;
    write_artifact(&config.out, "leverage.csv", &config.header()?, |out| profile.write_csv(out))
}

/// One Bernoulli draw from the configured scheme.
pub fn run_sample(config: &RunConfig) -> Result<(SampleSet, PathBuf)> {
    let rank = single_rank(config)?;
    let data = prepare(config, &load_dataset(config)?, rank)?;
    let profile = leverage_scores(&truncated_svd(&data.matrix, rank)?);
    let table = entry_probabilities(&profile, &config.scheme.scheme())?;
    let sample = draw_bernoulli(&data.matrix, &table, config.seed)?;
    // The sample format owns its first line; the hash joins it there.
    let mut buf = Vec::new();
    write_sample_csv(&sample, &mut buf)?;
    let text = String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let stamped = format!("{first} config_hash={}\n{rest}", config.hash()?);
    let path = write_bytes(&config.out, "sample.csv", stamped.as_bytes())?;
    Ok((sample, path))
}

#[derive(Debug)]
pub enum CompleteOutcome {
    Trials(TrialSummary, PathBuf),
    Single(RecoveryReport, PathBuf),
}

/// Completes a stored sample when given one, otherwise runs the trial
/// protocol for the configured scheme.
pub fn run_complete(config: &RunConfig, sample: Option<&Path>) -> Result<CompleteOutcome> {
    let header = config.header()?;
    if let Some(path) = sample {
        let file = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let sample = read_sample_csv(std::io::BufReader::new(file))?;
        let report = complete(&sample, &config.protocol.solver)?;
        let out = write_artifact(&config.out, "completed.csv", &header, |out| write_dense_csv(&report.solution, out))?;
        return Ok(CompleteOutcome::Single(report, out));
    }
    config.protocol.validate()?;
    let rank = single_rank(config)?;
    let data = prepare(config, &load_dataset(config)?, rank)?;
    let summary = recover_with_scheme(&data.matrix, rank, &config.scheme.scheme(), &config.protocol, config.seed)?;
    let out = write_artifact(&config.out, "trials.csv", &header, |out| {
        writeln!(out, "scheme,constant,trial,seed,sample_size,error,converged,iterations,success")?;
        for r in &summary.records {
            writeln!(
                out,
                "{},{:?},{},{},{},{:?},{},{},{}",
                summary.scheme, summary.constant, r.trial, r.seed, r.sample_size, r.error, r.converged, r.iterations, r.success
            )?;
        }
        Ok(())
    })?;
    Ok(CompleteOutcome::Trials(summary, out))
}

pub fn run_synth(config: &RunConfig) -> Result<(DenseMatrix, PathBuf)> {
    if !matches!(config.data()?, DataSpec::Synthetic { .. }) {
        return Err(Error::Config("synth needs synthetic data".into()));
    }
    let data = load_dataset(config)?;
    let path = write_artifact(&config.out, "matrix.csv", &config.header()?, |out| write_dense_csv(&data.matrix, out))?;
    Ok((data.matrix, path))
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub lemmas: LemmaSuite,
    pub certificates: Vec<(u64, CertificateReport)>,
    pub lemma6: Lemma6Report,
    pub written: Vec<PathBuf>,
}

fn lemma6_for(config: &RunConfig) -> Lemma6Report {
    let v = &config.verify;
    lemma6_check(v.lemma6_grid, v.lemma6_pairs, derive_seed(config.seed, LEMMA6_STREAM, 0))
}

fn write_lemma6(config: &RunConfig, report: &Lemma6Report) -> Result<PathBuf> {
    write_artifact(&config.out, "lemma6.csv", &config.header()?, |out| {
        writeln!(out, "grid,random_pairs,checked,violations")?;
        writeln!(
            out,
            "{},{},{},{}",
            config.verify.lemma6_grid, config.verify.lemma6_pairs, report.checked, report.violations
        )?;
        Ok(())
    })
}

pub fn run_lemma6(config: &RunConfig) -> Result<(Lemma6Report, PathBuf)> {
    let report = lemma6_for(config);
    let path = write_lemma6(config, &report)?;
    Ok((report, path))
}

/// Golfing certificates on fresh instances, one per derived seed.
pub fn certificate_runs(config: &RunConfig) -> Result<Vec<(u64, CertificateReport)>> {
    let v = &config.verify;
    let constants = TheoryConstants::with_c0(v.rows, v.cols, v.certificate_c0);
    (0..v.certificate_seeds as u64)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(config.seed, CERTIFICATE_STREAM, k);
            let m = generate(v.rows, v.cols, v.rank, &v.generator, seed)?;
            let fact = truncated_svd(&m, v.rank)?;
            let q = constants.round_probabilities(&leverage_scores(&fact))?;
            let partition = partition_from_round_probabilities(&m, q, constants.k0, seed)?;
            let (_, report) = build_dual_certificate(&fact, &partition)?;
            Ok((seed, report))
        })
        .collect()
}

pub fn lemma_runs(config: &RunConfig) -> Result<LemmaSuite> {
    let v = &config.verify;
    let m = generate(v.rows, v.cols, v.rank, &v.generator, derive_seed(config.seed, LEMMA_INSTANCE_STREAM, 0))?;
    let fact = truncated_svd(&m, v.rank)?;
    let constants = match v.c0 {
        Some(c0) => TheoryConstants::with_c0(v.rows, v.cols, c0),
        None => TheoryConstants::theory_grade(v.rows, v.cols),
    };
    let seeds: Vec<u64> = (0..v.lemma_seeds as u64)
        .map(|k| derive_seed(config.seed, LEMMA_SEED_STREAM, k))
        .collect();
    let suite_config = LemmaSuiteConfig {
        perturbation_constant: v.perturbation_constant,
        perturbations_per_seed: v.perturbations_per_seed,
    };
    lemma_suite_with(&fact, &constants, &seeds, &suite_config)
}

pub fn run_verify(config: &RunConfig) -> Result<VerifyOutcome> {
    let header = config.header()?;
    let lemmas = lemma_runs(config)?;
    let certificates = certificate_runs(config)?;
    let lemma6 = lemma6_for(config);
    let written = vec![
        write_artifact(&config.out, "lemmas.csv", &header, |out| lemmas.write_csv(out))?,
        write_artifact(&config.out, "certificate.csv", &header, |out| write_certificate_csv(&certificates, out))?,
        write_lemma6(config, &lemma6)?,
    ];
    Ok(VerifyOutcome {
        lemmas,
        certificates,
        lemma6,
        written,
    })
}
