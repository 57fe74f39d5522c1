//! Row-major sample matrices and CSV ingestion.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// An `N x n` sample. Rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    rows: usize,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset from a flat row-major buffer.
    pub fn from_flat(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidInput(
                "dataset must contain at least one row".into(),
            ));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput(format!(
                "{} values do not form rows of length {dim}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let rows = values.len() / dim;
        Ok(Self { values, rows, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::InvalidInput("dataset must contain at least one row".into()))?;
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, dim)
    }

    /// A univariate dataset (`n = 1`).
    pub fn from_column(column: &[f64]) -> Result<Self> {
        Self::from_flat(column.to_vec(), 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for row in self.rows() {
            for (acc, x) in c.iter_mut().zip(row) {
                *acc += x;
            }
        }
        let n = self.rows as f64;
        c.iter_mut().for_each(|v| *v /= n);
        c
    }

    /// Mean Euclidean distance of the observations to their centroid.
    pub fn mean_distance_to_centroid(&self) -> f64 {
        let c = self.centroid();
        self.rows().map(|r| distance(r, &c)).sum::<f64>() / self.rows as f64
    }

    /// Scale used for relative tolerances; falls back to 1 for a sample with no spread.
    pub fn data_scale(&self) -> f64 {
        let s = self.mean_distance_to_centroid();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn coordinate_median(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| {
                let mut col = self.column(j);
                col.sort_by(f64::total_cmp);
                let n = col.len();
                if n % 2 == 1 {
                    col[n / 2]
                } else {
                    0.5 * (col[n / 2 - 1] + col[n / 2])
                }
            })
            .collect()
    }

    /// Rows selected by index, with repetition allowed.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self {
            values,
            rows: idx.len(),
            dim: self.dim,
        }
    }

    /// Applies `x -> scale * A x + shift` to every row. `matrix` is row-major `n x n`.
    pub fn affine(&self, scale: f64, matrix: &[f64], shift: &[f64]) -> Result<Self> {
        let n = self.dim;
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: matrix.len(),
            });
        }
        if shift.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: shift.len(),
            });
        }
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.rows() {
            for i in 0..n {
                let ax: f64 = (0..n).map(|j| matrix[i * n + j] * row[j]).sum();
                values.push(scale * ax + shift[i]);
            }
        }
        Self::from_flat(values, n)
    }

    /// Whether the sample lies on one line (affine rank of the rows is at most one).
    ///
    /// Centered rows are tested for parallelism against the row farthest from the centroid,
    /// with a tolerance of `1e-12` times the largest centered norm.
    pub fn is_on_single_line(&self) -> bool {
        if self.dim == 1 || self.rows <= 2 {
            return true;
        }
        let c = self.centroid();
        let centered: Vec<Vec<f64>> = self
            .rows()
            .map(|r| r.iter().zip(&c).map(|(x, m)| x - m).collect())
            .collect();
        let (far, far_norm) = centered
            .iter()
            .map(|v| norm(v))
            .enumerate()
            .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
        if far_norm == 0.0 {
            return true;
        }
        let axis: Vec<f64> = centered[far].iter().map(|v| v / far_norm).collect();
        let eps = 1e-12 * far_norm;
        centered.iter().all(|v| {
            let t = dot(v, &axis);
            let off: f64 = v
                .iter()
                .zip(&axis)
                .map(|(x, a)| (x - t * a).powi(2))
                .sum::<f64>()
                .sqrt();
            off <= eps
        })
    }

    /// Reads one observation per CSV row. Decimal point is `.`.
    pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut dim = None;
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            match dim {
                None => dim = Some(record.len()),
                Some(d) if d != record.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: record.len(),
                    })
                }
                _ => {}
            }
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::InvalidInput(format!("row {row}, column {col}: cannot parse `{field}`"))
                })?;
                values.push(v);
            }
        }
        let dim = dim.ok_or_else(|| Error::InvalidInput("empty CSV input".into()))?;
        Self::from_flat(values, dim)
    }

    pub fn read_csv_path(path: &Path, has_header: bool) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, has_header)
    }

    /// Writes the dataset with a `v1,...,vn` header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record((1..=self.dim).map(|j| format!("v{j}")))?;
        for row in self.rows() {
            wtr.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
