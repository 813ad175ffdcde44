use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Centered truncated SVD of one view, keeping the fewest components whose
/// cumulative explained variance reaches the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTransform {
    pub(crate) mean: DVector<f64>,
    /// Per-column divisor when the view was standardized before the SVD.
    pub(crate) scale: Option<DVector<f64>>,
    /// `d × k`, orthonormal columns.
    pub(crate) components: DMatrix<f64>,
    pub(crate) singular_values: DVector<f64>,
    pub(crate) variance_threshold: f64,
    pub(crate) explained_ratio: f64,
}

impl SvdTransform {
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn scale(&self) -> Option<&DVector<f64>> {
        self.scale.as_ref()
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    pub fn variance_threshold(&self) -> f64 {
        self.variance_threshold
    }

    /// Cumulative explained variance ratio of the kept components.
    pub fn explained_ratio(&self) -> f64 {
        self.explained_ratio
    }

    /// Number of kept components.
    pub fn k(&self) -> usize {
        self.components.ncols()
    }

    /// Width of the rows this transform accepts.
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    fn prepare(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rows.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: rows.ncols(),
            });
        }
        let mut centered = rows.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
            if let Some(scale) = &self.scale {
                row.component_div_assign(&scale.transpose());
            }
        }
        Ok(centered)
    }

    /// `(rows − mean) · components`, width `k`.
    pub fn transform(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.prepare(rows)? * &self.components)
    }

    /// Maps reduced coordinates back to the input space.
    pub fn inverse_transform(&self, coords: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if coords.ncols() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: coords.ncols(),
            });
        }
        let mut rows = coords * self.components.transpose();
        for mut row in rows.row_iter_mut() {
            if let Some(scale) = &self.scale {
                row.component_mul_assign(&scale.transpose());
            }
            row += self.mean.transpose();
        }
        Ok(rows)
    }
}

/// Checks a variance threshold lies in `[0.5, 1.0]`.
pub fn validate_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && (0.5..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

/// Fits a centered truncated SVD (no column scaling).
pub fn fit_svd(m: &DMatrix<f64>, threshold: f64) -> Result<SvdTransform> {
    fit_svd_with(m, threshold, false)
}

/// Fits a truncated SVD, optionally dividing each column by its sample
/// standard deviation after centering. A threshold of 1.0 keeps every
/// numerically nonzero singular value, giving a lossless rotation.
pub fn fit_svd_with(m: &DMatrix<f64>, threshold: f64, standardize: bool) -> Result<SvdTransform> {
    validate_threshold(threshold)?;
    let (n, d) = m.shape();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let mean = m.row_mean().transpose();
    let mut centered = m.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let scale = if standardize {
        let mut s = DVector::from_fn(d, |j, _| (centered.column(j).norm_squared() / (n - 1) as f64).sqrt());
        s.iter_mut().filter(|v| **v == 0.0).for_each(|v| *v = 1.0);
        for mut row in centered.row_iter_mut() {
            row.component_div_assign(&s.transpose());
        }
        Some(s)
    } else {
        None
    };

    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let sigma = svd.singular_values;
    let s_max = sigma.iter().copied().fold(0.0, f64::max);
    if s_max == 0.0 || !s_max.is_finite() {
        return Err(Error::DegenerateView);
    }
    let tol = s_max * (n.max(d) as f64) * f64::EPSILON;
    let rank = sigma.iter().filter(|s| **s > tol).count();

    let total: f64 = sigma.iter().take(rank).map(|s| s * s).sum();
    let k = if threshold >= 1.0 {
        rank
    } else {
        let mut cumulative = 0.0;
        let mut k = rank;
        for (i, s) in sigma.iter().take(rank).enumerate() {
            cumulative += s * s / total;
            if cumulative >= threshold - 1e-12 {
                k = i + 1;
                break;
            }
        }
        k
    };
    let explained_ratio = sigma.iter().take(k).map(|s| s * s).sum::<f64>() / total;

    let mut components = DMatrix::zeros(d, k);
    for c in 0..k {
        let mut col: DVector<f64> = v_t.row(c).transpose();
        // largest-magnitude entry positive; first index wins ties
        let mut pivot = 0;
        for (j, v) in col.iter().enumerate() {
            if v.abs() > col[pivot].abs() {
                pivot = j;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        components.set_column(c, &col);
    }

    Ok(SvdTransform {
        mean,
        scale,
        components,
        singular_values: DVector::from_iterator(k, sigma.iter().take(k).copied()),
        variance_threshold: threshold,
        explained_ratio,
    })
}

/// Free-function form of [`SvdTransform::transform`].
pub fn transform_svd(t: &SvdTransform, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    t.transform(rows)
}
