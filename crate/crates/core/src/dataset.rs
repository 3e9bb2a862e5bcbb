//! In-memory sample `{(X_i, Y_i)}` with CSV input/output.
//!
//! The CSV layout is a header `x_1,..,x_d,y_1,..,y_m` followed by one row per
//! observation.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    m: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from row-major covariate and outcome buffers.
    pub fn new(d: usize, m: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if d == 0 || m == 0 {
            return invalid("covariate and outcome dimensions must be at least 1");
        }
        if x.len() % d != 0 || y.len() % m != 0 || x.len() / d != y.len() / m {
            return invalid(format!(
                "row counts disagree: {} covariate values for d={d}, {} outcome values for m={m}",
                x.len(),
                y.len()
            ));
        }
        if let Some(v) = x.iter().chain(&y).find(|v| !v.is_finite()) {
            return invalid(format!("non-finite entry {v}"));
        }
        Ok(Self { d, m, x, y })
    }

    /// Convenience constructor for `d = m = 1`.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (x, y) = pairs.iter().copied().unzip();
        Self::new(1, 1, x, y)
    }

    pub fn n(&self) -> usize {
        self.x.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn y_row(&self, i: usize) -> &[f64] {
        &self.y[i * self.m..(i + 1) * self.m]
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Reorders rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return invalid("not a permutation of the rows");
        }
        let x = perm.iter().flat_map(|&p| self.x_row(p).iter().copied()).collect();
        let y = perm.iter().flat_map(|&p| self.y_row(p).iter().copied()).collect();
        Self::new(self.d, self.m, x, y)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut d = 0;
        let mut m = 0;
        for (i, h) in headers.iter().enumerate() {
            if h == format!("x_{}", d + 1) && m == 0 {
                d += 1;
            } else if h == format!("y_{}", m + 1) {
                m += 1;
            } else {
                return invalid(format!("unexpected header `{h}` in column {}", i + 1));
            }
        }
        if d == 0 || m == 0 {
            return invalid("header must be x_1..x_d,y_1..y_m");
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != d + m {
                return invalid(format!("row {} has {} fields, expected {}", line + 1, rec.len(), d + m));
            }
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("row {}: cannot parse `{field}`", line + 1)))?;
                if j < d {
                    x.push(v);
                } else {
                    y.push(v);
                }
            }
        }
        Self::new(d, m, x, y)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes the dataset with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.d)
            .map(|j| format!("x_{j}"))
            .chain((1..=self.m).map(|j| format!("y_{j}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n() {
            let row: Vec<String> = self.x_row(i).iter().chain(self.y_row(i)).map(|v| fmt_f64(*v)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Formats a float with 17 significant digits, the precision needed for a
/// lossless round trip.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}
