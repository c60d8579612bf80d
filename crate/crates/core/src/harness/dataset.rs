//! File ingestion with an auditable log of every transform applied.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{truncated_svd, DenseMatrix};

/// Words of at most this many characters are dropped from document-term data.
pub const SHORT_WORD_MAX_LEN: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    /// `user item rating [timestamp]`, whitespace separated, 1-based ids.
    #[serde(alias = "triplets")]
    RatingsTriplets,
    /// One document per line of free text.
    DocumentTerm,
    /// MatrixMarket `array` or `coordinate`, real or integer.
    MatrixMarket,
    /// Comma-separated rows; lines starting with `#` are skipped.
    DenseCsv,
    Synthetic,
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            SourceKind::RatingsTriplets => "ratings-triplets",
            SourceKind::DocumentTerm => "document-term",
            SourceKind::MatrixMarket => "matrix-market",
            SourceKind::DenseCsv => "dense-csv",
            SourceKind::Synthetic => "synthetic",
        }
    }
}

impl std::str::FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triplets" | "ratings-triplets" => Ok(SourceKind::RatingsTriplets),
            "document-term" => Ok(SourceKind::DocumentTerm),
            "matrix-market" => Ok(SourceKind::MatrixMarket),
            "dense-csv" => Ok(SourceKind::DenseCsv),
            "synthetic" => Ok(SourceKind::Synthetic),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// One applied transform and its parameters, in application order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transform {
    pub name: String,
    pub params: Vec<(String, String)>,
}

impl Transform {
    pub fn new(name: &str, params: &[(&str, String)]) -> Self {
        Self {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub matrix: DenseMatrix,
    pub source_kind: SourceKind,
    pub preprocessing_log: Vec<Transform>,
}

impl Dataset {
    pub fn synthetic(matrix: DenseMatrix, description: Transform) -> Self {
        Self {
            matrix,
            source_kind: SourceKind::Synthetic,
            preprocessing_log: vec![description],
        }
    }

    pub fn log_lines(&self) -> Vec<String> {
        self.preprocessing_log.iter().map(|t| t.to_string()).collect()
    }
}

/// Declared dimensions for ratings triplets; ids beyond them are errors.
/// Without them the largest ids seen set the shape.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub rows: Option<usize>,
    pub cols: Option<usize>,
}

pub fn ingest(path: &Path, kind: SourceKind, options: IngestOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut dataset = ingest_reader(BufReader::new(file), kind, options)?;
    dataset
        .preprocessing_log
        .insert(0, Transform::new("read", &[("path", path.display().to_string()), ("format", kind.name().into())]));
    Ok(dataset)
}

pub fn ingest_reader<R: BufRead>(input: R, kind: SourceKind, options: IngestOptions) -> Result<Dataset> {
    let (matrix, log) = match kind {
        SourceKind::RatingsTriplets => read_triplets(input, options)?,
        SourceKind::DocumentTerm => read_documents(input)?,
        SourceKind::MatrixMarket => read_matrix_market(input)?,
        SourceKind::DenseCsv => read_dense_csv(input)?,
        SourceKind::Synthetic => {
            return Err(Error::Config("synthetic data is generated, not read".into()))
        }
    };
    Ok(Dataset {
        matrix,
        source_kind: kind,
        preprocessing_log: log,
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read_triplets<R: BufRead>(input: R, options: IngestOptions) -> Result<(DenseMatrix, Vec<Transform>)> {
    let mut ratings: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = HashMap::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') || body.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(parse_err(lineno, format!("expected 3 or 4 fields, found {}", fields.len())));
        }
        let id = |s: &str, what: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(0) => Err(parse_err(lineno, format!("{what} ids are 1-based, got 0"))),
                Ok(v) => Ok(v - 1),
                Err(e) => Err(parse_err(lineno, format!("{what} id '{s}': {e}"))),
            }
        };
        let (i, j) = (id(fields[0], "user")?, id(fields[1], "item")?);
        let value: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(lineno, format!("rating '{}': {e}", fields[2])))?;
        if !value.is_finite() {
            return Err(parse_err(lineno, format!("rating '{}' is not finite", fields[2])));
        }
        if let Some(first) = seen.insert((i, j), lineno) {
            return Err(parse_err(lineno, format!("pair ({}, {}) already rated on line {first}", i + 1, j + 1)));
        }
        ratings.push((i, j, value));
    }
    let rows = options.rows.unwrap_or_else(|| ratings.iter().map(|r| r.0 + 1).max().unwrap_or(0));
    let cols = options.cols.unwrap_or_else(|| ratings.iter().map(|r| r.1 + 1).max().unwrap_or(0));
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix { rows, cols });
    }
    let mut a = DMatrix::zeros(rows, cols);
    for &(i, j, v) in &ratings {
        if i >= rows || j >= cols {
            return Err(Error::IndexOutOfRange { row: i, col: j, rows, cols });
        }
        a[(i, j)] = v;
    }
    let log = vec![
        Transform::new(
            "place-triplets",
            &[("rows", rows.to_string()), ("cols", cols.to_string()), ("ratings", ratings.len().to_string())],
        ),
        Transform::new("zero-fill-unrated", &[("filled", (rows * cols - ratings.len()).to_string())]),
    ];
    Ok((DenseMatrix::try_from(a)?, log))
}

fn read_documents<R: BufRead>(input: R) -> Result<(DenseMatrix, Vec<Transform>)> {
    let mut docs: Vec<BTreeMap<String, f64>> = Vec::new();
    let mut dropped = 0usize;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut counts = BTreeMap::new();
        for token in line.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            if token.chars().count() <= SHORT_WORD_MAX_LEN {
                dropped += 1;
                continue;
            }
            *counts.entry(token.to_lowercase()).or_insert(0.0) += 1.0;
        }
        docs.push(counts);
    }
    let vocab: BTreeMap<&str, usize> = docs
        .iter()
        .flat_map(|d| d.keys())
        .map(String::as_str)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, w)| (w, k))
        .collect();
    let (rows, cols) = (docs.len(), vocab.len());
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix { rows, cols });
    }
    let mut a = DMatrix::zeros(rows, cols);
    for (i, d) in docs.iter().enumerate() {
        for (w, &c) in d {
            a[(i, vocab[w.as_str()])] = c;
        }
    }
    let zero_rows = normalize_rows(&mut a);
    let log = vec![
        Transform::new("tokenize", &[("documents", rows.to_string()), ("lowercase", "true".into())]),
        Transform::new(
            "drop-short-words",
            &[("max_len", SHORT_WORD_MAX_LEN.to_string()), ("dropped", dropped.to_string()), ("vocabulary", cols.to_string())],
        ),
        Transform::new("normalize-rows", &[("norm", "l2".into()), ("zero_rows", zero_rows.to_string())]),
    ];
    Ok((DenseMatrix::try_from(a)?, log))
}

/// Scales every nonzero row to unit l2 norm; returns the number of zero rows.
fn normalize_rows(a: &mut DMatrix<f64>) -> usize {
    let mut zero = 0;
    for i in 0..a.nrows() {
        let norm = a.row(i).norm();
        if norm > 0.0 {
            a.row_mut(i).unscale_mut(norm);
        } else {
            zero += 1;
        }
    }
    zero
}

fn read_matrix_market<R: BufRead>(input: R) -> Result<(DenseMatrix, Vec<Transform>)> {
    let mut lines = input.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let banner = banner?.to_lowercase();
    let words: Vec<&str> = banner.split_whitespace().collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let coordinate = match words[2] {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unsupported layout '{other}'"))),
    };
    if !matches!(words[3], "real" | "integer") {
        return Err(parse_err(1, format!("unsupported field '{}'", words[3])));
    }
    let symmetric = match words[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };
    let mut body = lines.filter_map(|(k, l)| match l {
        Ok(l) if l.trim().is_empty() || l.trim_start().starts_with('%') => None,
        other => Some((k + 1, other)),
    });
    let (size_line, size) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let size = size?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse().map_err(|e| parse_err(size_line, format!("size '{s}': {e}"))))
        .collect::<Result<_>>()?;
    let expected = if coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_err(size_line, format!("expected {expected} size fields, found {}", dims.len())));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix { rows, cols });
    }
    let mut a = DMatrix::zeros(rows, cols);
    let number = |s: &str, line: usize| -> Result<f64> {
        let v: f64 = s.parse().map_err(|e| parse_err(line, format!("value '{s}': {e}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(parse_err(line, format!("value '{s}' is not finite")))
        }
    };
    let mut count = 0usize;
    if coordinate {
        for (line, text) in body {
            let text = text?;
            let f: Vec<&str> = text.split_whitespace().collect();
            if f.len() != 3 {
                return Err(parse_err(line, format!("expected 'row col value', found {} fields", f.len())));
            }
            let index = |s: &str, max: usize| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if (1..=max).contains(&v) => Ok(v - 1),
                    Ok(v) => Err(parse_err(line, format!("index {v} outside 1..={max}"))),
                    Err(e) => Err(parse_err(line, format!("index '{s}': {e}"))),
                }
            };
            let (i, j) = (index(f[0], rows)?, index(f[1], cols)?);
            let v = number(f[2], line)?;
            a[(i, j)] = v;
            if symmetric && i != j {
                if j >= rows || i >= cols {
                    return Err(parse_err(line, "symmetric entry outside a square matrix"));
                }
                a[(j, i)] = v;
            }
            count += 1;
        }
        if count != dims[2] {
            return Err(parse_err(size_line, format!("declared {} entries, found {count}", dims[2])));
        }
    } else {
        // Column-major values; the symmetric variant lists the lower triangle.
        let mut slots = (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).filter(|&(i, j)| !symmetric || i >= j);
        for (line, text) in body {
            let text = text?;
            for s in text.split_whitespace() {
                let (i, j) = slots.next().ok_or_else(|| parse_err(line, "more values than the declared size"))?;
                let v = number(s, line)?;
                a[(i, j)] = v;
                if symmetric {
                    a[(j, i)] = v;
                }
                count += 1;
            }
        }
        if slots.next().is_some() {
            return Err(parse_err(size_line, format!("only {count} values for a {rows}x{cols} array")));
        }
    }
    let layout = if coordinate { "coordinate" } else { "array" };
    let log = vec![Transform::new(
        "read-matrix-market",
        &[("layout", layout.into()), ("symmetric", symmetric.to_string()), ("entries", count.to_string())],
    )];
    Ok((DenseMatrix::try_from(a)?, log))
}

fn read_dense_csv<R: Read>(input: R) -> Result<(DenseMatrix, Vec<Transform>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| parse_err(line, format!("value '{s}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(line, format!("expected {} columns, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    let m = DenseMatrix::from_rows(&rows)?;
    let log = vec![Transform::new("read-dense-csv", &[("rows", m.rows().to_string()), ("cols", m.cols().to_string())])];
    Ok((m, log))
}

/// Writes a matrix as comma-separated rows, shortest round-trip floats.
pub fn write_dense_csv<W: std::io::Write>(m: &DenseMatrix, mut out: W) -> Result<()> {
    for row in m.to_rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Replaces the matrix by its best rank-`rank` approximation.
pub fn rank_truncate(d: &Dataset, rank: usize) -> Result<Dataset> {
    let (m, n) = d.matrix.dims();
    if rank == 0 || rank > m.min(n) {
        return Err(Error::RankOutOfRange { rank, max: m.min(n) });
    }
    let f = truncated_svd(&d.matrix, rank)?;
    let mut log = d.preprocessing_log.clone();
    log.push(Transform::new(
        "rank-truncate",
        &[("rank", rank.to_string()), ("numerical_rank", f.rank().to_string())],
    ));
    Ok(Dataset {
        matrix: f.reconstruct(),
        source_kind: d.source_kind,
        preprocessing_log: log,
    })
}
