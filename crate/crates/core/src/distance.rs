//! Symmetric language-by-language distance matrices.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;

use crate::dataset::{format_real, LanguageCode, ViewMatrix};
use crate::error::{Error, Result};

/// Symmetric, nonnegative `n × n` matrix with a zero diagonal, indexed by
/// language codes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    languages: Vec<LanguageCode>,
    data: DMatrix<f64>,
}

impl DistanceMatrix {
    /// Validates and wraps a square matrix. Asymmetry below `1e-12` (relative
    /// to the largest entry) is averaged away; anything larger is rejected.
    pub fn new(languages: Vec<LanguageCode>, mut data: DMatrix<f64>) -> Result<Self> {
        let n = languages.len();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: data.nrows().max(data.ncols()),
            });
        }
        let scale = data.amax().max(1.0);
        for i in 0..n {
            if data[(i, i)].abs() > 1e-12 * scale {
                return Err(Error::MalformedInput(format!(
                    "distance matrix diagonal entry {i} is nonzero"
                )));
            }
            data[(i, i)] = 0.0;
            for j in (i + 1)..n {
                let (a, b) = (data[(i, j)], data[(j, i)]);
                if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
                    return Err(Error::MalformedInput(format!(
                        "distance ({i}, {j}) is negative or non-finite"
                    )));
                }
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::MalformedInput(format!(
                        "distance matrix is not symmetric at ({i}, {j})"
                    )));
                }
                let m = 0.5 * (a + b);
                data[(i, j)] = m;
                data[(j, i)] = m;
            }
        }
        let mut seen = std::collections::HashSet::new();
        for code in &languages {
            if !seen.insert(code) {
                return Err(Error::DuplicateLanguage(code.to_string()));
            }
        }
        Ok(DistanceMatrix { languages, data })
    }

    pub fn languages(&self) -> &[LanguageCode] {
        &self.languages
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Strict upper triangle in row-major order (`n(n−1)/2` entries).
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    /// Rows and columns for `codes`, in that order.
    pub fn select(&self, codes: &[LanguageCode]) -> Result<DistanceMatrix> {
        let index: HashMap<&LanguageCode, usize> = self.languages.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let idx = codes
            .iter()
            .map(|c| {
                index
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::UnknownLanguage(c.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let data = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.data[(idx[i], idx[j])]);
        DistanceMatrix::new(codes.to_vec(), data)
    }

    pub fn scaled(&self, factor: f64) -> Result<DistanceMatrix> {
        DistanceMatrix::new(self.languages.clone(), &self.data * factor)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::MalformedInput(e.to_string());
        let mut header = vec!["lang".to_string()];
        header.extend(self.languages.iter().map(|c| c.to_string()));
        w.write_record(&header).map_err(err)?;
        for (i, code) in self.languages.iter().enumerate() {
            let mut rec = vec![code.to_string()];
            rec.extend(self.data.row(i).iter().map(|v| format_real(*v)));
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<distance output>", e))
    }
}

/// Pairwise cosine distances `1 − cos(v_i, v_j)`, clamped to `[0, 2]`.
pub fn cosine_distance_matrix(view: &ViewMatrix) -> Result<DistanceMatrix> {
    let x = view.data();
    let n = x.nrows();
    let norms: Vec<f64> = (0..n).map(|i| x.row(i).norm()).collect();
    for (i, norm) in norms.iter().enumerate() {
        if *norm == 0.0 {
            return Err(Error::DegenerateVector(view.languages()[i].to_string()));
        }
    }
    let gram = x * x.transpose();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let cos = gram[(i, j)] / (norms[i] * norms[j]);
            let v = (1.0 - cos).clamp(0.0, 2.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    DistanceMatrix::new(view.languages().to_vec(), d)
}

/// Cosine similarity between two equal-length vectors.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}
