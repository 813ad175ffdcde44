use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Default ridge added to both covariance diagonals.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Default minimum canonical correlation for a dimension to be kept.
pub const DEFAULT_RETENTION_CUTOFF: f64 = 0.5;

/// Fitted canonical correlation analysis between two views.
///
/// Directions are scaled so each canonical variate has unit (ridge-augmented)
/// variance on the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaTransform {
    pub(crate) mean_x: DVector<f64>,
    pub(crate) mean_y: DVector<f64>,
    /// `k_x × m`, direction `a_j` in column `j`.
    pub(crate) proj_x: DMatrix<f64>,
    /// `k_y × m`, direction `b_j` in column `j`.
    pub(crate) proj_y: DMatrix<f64>,
    pub(crate) correlations: Vec<f64>,
    pub(crate) retained: Vec<bool>,
    pub(crate) retention_cutoff: f64,
    pub(crate) ridge: f64,
}

impl CcaTransform {
    pub fn proj_x(&self) -> &DMatrix<f64> {
        &self.proj_x
    }

    pub fn proj_y(&self) -> &DMatrix<f64> {
        &self.proj_y
    }

    /// Canonical correlations, nonincreasing.
    pub fn correlations(&self) -> &[f64] {
        &self.correlations
    }

    pub fn retained(&self) -> &[bool] {
        &self.retained
    }

    pub fn retention_cutoff(&self) -> f64 {
        self.retention_cutoff
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn n_retained(&self) -> usize {
        self.retained.iter().filter(|r| **r).count()
    }

    /// Canonical variates of X-side rows (all `m` dimensions).
    pub fn transform_x(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        apply(rows, &self.mean_x, &self.proj_x)
    }

    /// Canonical variates of Y-side rows (all `m` dimensions).
    pub fn transform_y(&self, rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        apply(rows, &self.mean_y, &self.proj_y)
    }
}

fn apply(rows: &DMatrix<f64>, mean: &DVector<f64>, proj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if rows.ncols() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            found: rows.ncols(),
        });
    }
    let mut centered = rows.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    Ok(centered * proj)
}

pub(crate) fn center(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let mean = m.row_mean().transpose();
    let mut c = m.clone();
    for mut row in c.row_iter_mut() {
        row -= mean.transpose();
    }
    (c, mean)
}

/// `C^{-1/2}` of a symmetric positive definite matrix.
fn inverse_sqrt(cov: DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(cov);
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    let floor = if ridge > 0.0 { 0.0 } else { lambda_max * 1e-12 };
    if eig.eigenvalues.iter().any(|l| *l <= floor || !l.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    let inv = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv) * v.transpose())
}

/// Canonical correlation analysis by whitening both views and taking the SVD
/// of the whitened cross-covariance. Covariances use `1/(n−1)` and get
/// `ridge` added to their diagonals.
pub fn fit_cca(x: &DMatrix<f64>, y: &DMatrix<f64>, retention_cutoff: f64, ridge: f64) -> Result<CcaTransform> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.nrows(),
        });
    }
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be >= 0, got {ridge}")));
    }
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let (xc, mean_x) = center(x);
    let (yc, mean_y) = center(y);
    let denom = (n - 1) as f64;
    let kx = x.ncols();
    let ky = y.ncols();
    let cxx = xc.transpose() * &xc / denom + DMatrix::identity(kx, kx) * ridge;
    let cyy = yc.transpose() * &yc / denom + DMatrix::identity(ky, ky) * ridge;
    let cxy = xc.transpose() * &yc / denom;

    let wx = inverse_sqrt(cxx, ridge)?;
    let wy = inverse_sqrt(cyy, ridge)?;
    let whitened = &wx * cxy * &wy;

    let svd = whitened.svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::Numerical("CCA SVD returned no left vectors".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("CCA SVD returned no right vectors".into()))?;
    let m = kx.min(ky);

    let mut proj_x = DMatrix::zeros(kx, m);
    let mut proj_y = DMatrix::zeros(ky, m);
    let mut correlations = Vec::with_capacity(m);
    for j in 0..m {
        let mut a = &wx * u.column(j);
        let mut b = &wy * v_t.row(j).transpose();
        let mut pivot = 0;
        for (i, v) in a.iter().enumerate() {
            if v.abs() > a[pivot].abs() {
                pivot = i;
            }
        }
        if a[pivot] < 0.0 {
            a.neg_mut();
            b.neg_mut();
        }
        proj_x.set_column(j, &a);
        proj_y.set_column(j, &b);
        correlations.push(svd.singular_values[j].clamp(-1.0, 1.0));
    }
    let retained = correlations.iter().map(|c| *c >= retention_cutoff).collect();

    Ok(CcaTransform {
        mean_x,
        mean_y,
        proj_x,
        proj_y,
        correlations,
        retained,
        retention_cutoff,
        ridge,
    })
}

/// Pearson correlation between two equal-length columns.
#[cfg(test)]
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn identical_views_fully_correlated() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = gaussian(30, 4, &mut rng);
        let cca = fit_cca(&x, &x, 0.5, 0.0).unwrap();
        assert_eq!(cca.correlations().len(), 4);
        for c in cca.correlations() {
            assert!((c - 1.0).abs() < 1e-8, "{c}");
        }
        assert!(cca.retained().iter().all(|r| *r));
    }

    #[test]
    fn invertible_map_keeps_full_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gaussian(40, 3, &mut rng);
        let r = gaussian(3, 3, &mut rng) + DMatrix::identity(3, 3) * 2.0;
        let y = &x * r;
        let cca = fit_cca(&x, &y, 0.5, DEFAULT_RIDGE).unwrap();
        for c in cca.correlations() {
            assert!((c - 1.0).abs() < 1e-6, "{c}");
        }
    }

    #[test]
    fn independent_views_not_retained() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gaussian(500, 2, &mut rng);
        let y = gaussian(500, 2, &mut rng);
        let cca = fit_cca(&x, &y, 0.5, DEFAULT_RIDGE).unwrap();
        assert!(cca.correlations()[0] < 0.3);
        assert_eq!(cca.n_retained(), 0);
    }

    #[test]
    fn training_variates_reproduce_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = gaussian(50, 2, &mut rng);
        let x = &z * gaussian(2, 4, &mut rng) + gaussian(50, 4, &mut rng) * 0.5;
        let y = &z * gaussian(2, 3, &mut rng) + gaussian(50, 3, &mut rng) * 0.5;
        let cca = fit_cca(&x, &y, 0.5, DEFAULT_RIDGE).unwrap();
        let u = cca.transform_x(&x).unwrap();
        let v = cca.transform_y(&y).unwrap();
        for j in 0..3 {
            let a: Vec<f64> = u.column(j).iter().copied().collect();
            let b: Vec<f64> = v.column(j).iter().copied().collect();
            assert!((pearson(&a, &b) - cca.correlations()[j]).abs() < 1e-6);
        }
        assert!(cca.correlations().windows(2).all(|w| w[0] >= w[1]));
        // distinct variates are uncorrelated within a view
        let a0: Vec<f64> = u.column(0).iter().copied().collect();
        let a1: Vec<f64> = u.column(1).iter().copied().collect();
        assert!(pearson(&a0, &a1).abs() < 1e-6);
    }

    #[test]
    fn symmetric_in_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = gaussian(25, 3, &mut rng);
        let y = x.columns(0, 2) * gaussian(2, 5, &mut rng) + gaussian(25, 5, &mut rng);
        let a = fit_cca(&x, &y, 0.5, DEFAULT_RIDGE).unwrap();
        let b = fit_cca(&y, &x, 0.5, DEFAULT_RIDGE).unwrap();
        for (p, q) in a.correlations().iter().zip(b.correlations()) {
            assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn column_scaling_does_not_change_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = gaussian(30, 3, &mut rng);
        let y = &x * gaussian(3, 3, &mut rng) + gaussian(30, 3, &mut rng);
        let base = fit_cca(&x, &y, 0.5, 0.0).unwrap();
        let mut xs = x.clone();
        xs.column_mut(1).scale_mut(37.5);
        let scaled = fit_cca(&xs, &y, 0.5, 0.0).unwrap();
        for (p, q) in base.correlations().iter().zip(scaled.correlations()) {
            assert!((p - q).abs() < 1e-6);
        }
    }

    #[test]
    fn errors() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        assert!(matches!(
            fit_cca(&x, &x, 0.5, 1e-8),
            Err(Error::TooFewSamples { needed: 3, got: 2 })
        ));
        // second column duplicates the first: singular without ridge
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 5.0, 5.0]);
        let y = DMatrix::from_row_slice(4, 1, &[1.0, 0.0, 2.0, 1.0]);
        assert!(matches!(fit_cca(&x, &y, 0.5, 0.0), Err(Error::SingularCovariance)));
        assert!(fit_cca(&x, &y, 0.5, 1e-6).is_ok());
        assert!(matches!(
            fit_cca(&x, &y.rows(0, 3).into_owned(), 0.5, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn retention_mask_follows_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = gaussian(60, 3, &mut rng);
        let y = &x * gaussian(3, 3, &mut rng) + gaussian(60, 3, &mut rng) * 3.0;
        for cutoff in [0.0, 0.3, 0.5, 0.9, 1.0] {
            let cca = fit_cca(&x, &y, cutoff, DEFAULT_RIDGE).unwrap();
            for (c, r) in cca.correlations().iter().zip(cca.retained()) {
                assert_eq!(*r, *c >= cutoff);
            }
        }
    }
}
