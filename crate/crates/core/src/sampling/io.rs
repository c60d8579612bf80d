use std::io::{BufRead, Write};

use super::{Observation, SampleSet};
use crate::error::{Error, Result};

/// Writes `# rows=R cols=C seed=S`, then `i,j,p,value` rows. Floats use the
/// shortest representation that parses back to the same bits.
pub fn write_sample_csv<W: Write>(s: &SampleSet, mut out: W) -> Result<()> {
    let (m, n) = s.dims();
    writeln!(out, "# rows={m} cols={n} seed={}", s.seed())?;
    writeln!(out, "i,j,p,value")?;
    for o in s.entries() {
        writeln!(out, "{},{},{:?},{:?}", o.i, o.j, o.p, o.value)?;
    }
    Ok(())
}

fn parse_sidecar(line: &str) -> Result<(usize, usize, u64)> {
    let bad = |message: String| Error::Parse { line: 1, message };
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| bad("missing '# rows=.. cols=.. seed=..' header".into()))?;
    let (mut rows, mut cols, mut seed) = (None, None, None);
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| bad(format!("malformed header field '{field}'")))?;
        let parse_err = |e: std::num::ParseIntError| bad(format!("{key}: {e}"));
        match key {
            "rows" => rows = Some(value.parse().map_err(parse_err)?),
            "cols" => cols = Some(value.parse().map_err(parse_err)?),
            "seed" => seed = Some(value.parse().map_err(parse_err)?),
            _ => {}
        }
    }
    match (rows, cols, seed) {
        (Some(r), Some(c), Some(s)) => Ok((r, c, s)),
        _ => Err(bad("header needs rows, cols and seed".into())),
    }
}

pub fn read_sample_csv<R: BufRead>(mut input: R) -> Result<SampleSet> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let (rows, cols, seed) = parse_sidecar(&first)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["i", "j", "p", "value"] {
        return Err(Error::Parse {
            line: 2,
            message: "expected header i,j,p,value".into(),
        });
    }
    let mut entries = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let line = k + 3;
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing column {idx}"),
            })
        };
        let parse_err = |name: &str, e: String| Error::Parse {
            line,
            message: format!("{name}: {e}"),
        };
        entries.push(Observation {
            i: field(0)?.parse().map_err(|e: std::num::ParseIntError| parse_err("i", e.to_string()))?,
            j: field(1)?.parse().map_err(|e: std::num::ParseIntError| parse_err("j", e.to_string()))?,
            p: field(2)?.parse().map_err(|e: std::num::ParseFloatError| parse_err("p", e.to_string()))?,
            value: field(3)?
                .parse()
                .map_err(|e: std::num::ParseFloatError| parse_err("value", e.to_string()))?,
        });
    }
    SampleSet::from_observations(rows, cols, seed, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::DenseMatrix;
    use crate::sampling::{draw_bernoulli, ProbabilityTable};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bit_exact_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = DenseMatrix::from_fn(9, 7, |_, _| rng.random_range(-1e3..1e3)).unwrap();
        let t = ProbabilityTable::from_fn(9, 7, |_, _| rng.random_range(1e-9..1.0)).unwrap();
        let s = draw_bernoulli(&m, &t, u64::MAX - 3).unwrap();
        let mut buf = Vec::new();
        write_sample_csv(&s, &mut buf).unwrap();
        let back = read_sample_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        for (a, b) in back.entries().iter().zip(s.entries()) {
            assert_eq!(a.p.to_bits(), b.p.to_bits());
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
        let mut again = Vec::new();
        write_sample_csv(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# rows=2 cols=2 seed=0\ni,j,p,value\n0,0,0.5,1.0\n1,x,0.5,1.0\n";
        match read_sample_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(read_sample_csv("i,j,p,value\n".as_bytes()).is_err());
    }
}
