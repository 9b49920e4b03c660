//! Row-major data matrices and the validated pseudo-data wrapper.

use crate::error::{Error, Result};

/// Entries this close to {0,1} are nudged into the open interval before any
/// log/power transform downstream.
pub const OPEN_INTERVAL_EPS: f64 = 1e-12;

/// Plain n-by-d matrix of observations, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl DataMatrix {
    pub fn new(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 || values.len() != n * d {
            return Err(Error::InvalidMatrix {
                n,
                d,
                reason: format!("expected {} values, got {}", n * d, values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix {
                n,
                d,
                reason: "non-finite entry".to_string(),
            });
        }
        Ok(Self { values, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidMatrix {
                n,
                d,
                reason: "ragged rows".to_string(),
            });
        }
        Self::new(rows.concat(), n, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// An n-by-d matrix with every entry strictly inside (0, 1): one realization
/// of the uniform pseudo-data feeding the rank functionals and the tilted
/// likelihood. Requires n >= 2 and d >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoData(DataMatrix);

impl PseudoData {
    pub fn new(matrix: DataMatrix) -> Result<Self> {
        if matrix.n() < 2 || matrix.d() < 2 {
            return Err(Error::InvalidMatrix {
                n: matrix.n(),
                d: matrix.d(),
                reason: "pseudo-data needs n >= 2 and d >= 2".to_string(),
            });
        }
        if matrix.values().iter().any(|&v| v <= 0.0 || v >= 1.0) {
            return Err(Error::InvalidMatrix {
                n: matrix.n(),
                d: matrix.d(),
                reason: "pseudo-data entries must lie strictly inside (0,1)".to_string(),
            });
        }
        Ok(Self(matrix))
    }

    /// Builds pseudo-data from values in [0,1], nudging boundary values into
    /// the open interval. Values outside [0,1] are rejected.
    pub fn from_unit_values(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidMatrix {
                n,
                d,
                reason: "values outside [0,1]".to_string(),
            });
        }
        let clamped = values
            .into_iter()
            .map(|v| v.clamp(OPEN_INTERVAL_EPS, 1.0 - OPEN_INTERVAL_EPS))
            .collect();
        Self::new(DataMatrix::new(clamped, n, d)?)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn d(&self) -> usize {
        self.0.d()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j)
    }

    pub fn matrix(&self) -> &DataMatrix {
        &self.0
    }
}
