use std::io::Write;

use crate::error::{Error, Result};

/// Row-major `m x n` table of probabilities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ProbabilityTable {
    pub fn from_row_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if values.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                actual: values.len(),
            });
        }
        for (k, v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidProbability {
                    row: k / cols,
                    col: k % cols,
                    value: *v,
                });
            }
        }
        Ok(Self { rows, cols, values })
    }

    pub fn constant(rows: usize, cols: usize, p: f64) -> Result<Self> {
        Self::from_row_major(rows, cols, vec![p; rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Self::from_row_major(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Maps every entry through `f`; the result must stay in `[0, 1]`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_row_major(self.rows, self.cols, self.values.iter().map(|v| f(*v)).collect())
    }

    /// CSV with header `i,j,p`, 0-based indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,p")?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                writeln!(out, "{i},{j},{:?}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            ProbabilityTable::from_row_major(1, 2, vec![0.5, 1.5]),
            Err(Error::InvalidProbability { row: 0, col: 1, .. })
        ));
        assert!(ProbabilityTable::from_row_major(1, 2, vec![0.5, f64::NAN]).is_err());
        assert!(ProbabilityTable::from_row_major(2, 2, vec![0.5]).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = ProbabilityTable::from_row_major(1, 2, vec![0.25, 1.0]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,p\n0,0,0.25\n0,1,1.0\n");
    }
}
