//! Whitening PCA and per-vector z-score standardization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spd::{sym_eig, SymMatrix};

/// Components with eigenvalue at or below `RANK_TOLERANCE · λ₁` are dropped.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Minimum standard deviation accepted by [`zscore`].
pub const MIN_STD: f64 = 1e-14;

/// Fitted whitening projection `y = Wᵀ (x − mean)` with `W = U · D^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionModel {
    train_mean: Vec<f64>,
    basis: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    whitened: DMatrix<f64>,
}

impl ProjectionModel {
    /// Rebuilds a model from its persisted parts.
    pub fn from_parts(train_mean: Vec<f64>, basis: DMatrix<f64>, eigenvalues: Vec<f64>) -> Result<Self> {
        if basis.nrows() != train_mean.len() {
            return Err(Error::DimensionMismatch {
                expected: train_mean.len(),
                actual: basis.nrows(),
            });
        }
        if basis.ncols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.ncols(),
                actual: eigenvalues.len(),
            });
        }
        if eigenvalues.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParams("eigenvalues must be positive".into()));
        }
        let mut whitened = basis.clone();
        for (k, &l) in eigenvalues.iter().enumerate() {
            whitened.column_mut(k).scale_mut(1.0 / l.sqrt());
        }
        Ok(Self {
            train_mean,
            basis,
            eigenvalues,
            whitened,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.train_mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn train_mean(&self) -> &[f64] {
        &self.train_mean
    }

    /// Orthonormal principal directions `U`, one per column.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Covariance eigenvalues `D`, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn whitened(&self) -> &DMatrix<f64> {
        &self.whitened
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let centered = DVector::from_iterator(
            x.len(),
            x.iter().zip(&self.train_mean).map(|(a, m)| a - m),
        );
        Ok(self.whitened.tr_mul(&centered).iter().copied().collect())
    }
}

/// Fits the projection on `N` training rows, keeping `min(k_requested, rank)` components.
///
/// Uses the `N × N` Gram matrix when the input dimension exceeds `N`.
pub fn fit<R: AsRef<[f64]>>(rows: &[R], k_requested: usize) -> Result<ProjectionModel> {
    if k_requested == 0 {
        return Err(Error::InvalidParams("k_requested must be >= 1".into()));
    }
    let n = rows.len();
    if n < 2 {
        return Err(Error::DegenerateTrainingSet);
    }
    let dim = rows[0].as_ref().len();
    for r in rows {
        let r = r.as_ref();
        if r.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    if dim == 0 {
        return Err(Error::DegenerateTrainingSet);
    }

    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.as_ref()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, dim, |i, j| rows[i].as_ref()[j] - mean[j]);

    let (eigenvalues, basis) = if dim > n {
        gram_components(&centered)?
    } else {
        covariance_components(&centered)?
    };
    let lambda1 = eigenvalues.first().copied().unwrap_or(0.0);
    if lambda1.is_nan() || lambda1 <= 0.0 {
        return Err(Error::DegenerateTrainingSet);
    }
    let rank = eigenvalues
        .iter()
        .take_while(|&&l| l > RANK_TOLERANCE * lambda1)
        .count();
    let k = k_requested.min(rank);
    let basis = basis.columns(0, k).into_owned();
    ProjectionModel::from_parts(mean, basis, eigenvalues[..k].to_vec())
}

// Covariance S = XᵀX / N directly (dim ≤ N).
fn covariance_components(centered: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = centered.nrows() as f64;
    let cov = SymMatrix::from_upper(centered.tr_mul(centered) / n);
    let eig = sym_eig(&cov)?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

// Eigenvectors of XXᵀ lifted to the input space: u = Xᵀv / sqrt(λ_gram).
fn gram_components(centered: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = centered.nrows();
    let gram = SymMatrix::from_upper(centered * centered.transpose());
    let eig = sym_eig(&gram)?;
    let lambda1 = eig.max_eigenvalue();
    let usable = eig
        .eigenvalues
        .iter()
        .take_while(|&&l| l > RANK_TOLERANCE * lambda1)
        .count();
    let mut basis = centered.tr_mul(&eig.eigenvectors.columns(0, usable));
    for k in 0..usable {
        basis
            .column_mut(k)
            .scale_mut(1.0 / eig.eigenvalues[k].sqrt());
    }
    let values = eig.eigenvalues[..usable]
        .iter()
        .map(|l| l / n as f64)
        .collect();
    Ok((values, basis))
}

/// A z-scored projection: zero mean, unit population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedFeature(pub Vec<f64>);

impl StandardizedFeature {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance(&self, other: &StandardizedFeature) -> f64 {
        euclidean(&self.0, &other.0)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `(y − mean(y)) / std(y)` with the population standard deviation.
pub fn zscore(y: &[f64]) -> Result<StandardizedFeature> {
    let k = y.len();
    if k < 2 {
        return Err(Error::DegenerateVector { std: 0.0 });
    }
    let mean = y.iter().sum::<f64>() / k as f64;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k as f64;
    let std = var.sqrt();
    if std.is_nan() || std <= MIN_STD {
        return Err(Error::DegenerateVector { std });
    }
    Ok(StandardizedFeature(
        y.iter().map(|v| (v - mean) / std).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_have_rank_one() {
        let dir: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let rows: Vec<Vec<f64>> = [0.0, 1.0, 3.0]
            .iter()
            .map(|t| dir.iter().map(|d| 2.0 + t * d).collect())
            .collect();
        let model = fit(&rows, 5).unwrap();
        assert_eq!(model.output_dim(), 1);
    }

    #[test]
    fn mean_projects_to_zero() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 5) as f64).collect())
            .collect();
        let model = fit(&rows, 10).unwrap();
        let p = model.project(model.train_mean()).unwrap();
        assert!(p.iter().all(|v| *v == 0.0));
        assert!(matches!(model.project(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_training_sets() {
        let same = vec![vec![1.0, 2.0, 3.0]; 4];
        assert!(matches!(fit(&same, 3), Err(Error::DegenerateTrainingSet)));
        assert!(matches!(fit(&[vec![1.0, 2.0]], 1), Err(Error::DegenerateTrainingSet)));
        let ragged = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(matches!(fit(&ragged, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zscore_examples() {
        let z = zscore(&[1.0, 2.0, 3.0]).unwrap();
        let s = (1.5f64).sqrt();
        let expected = [-s, 0.0, s];
        for (a, b) in z.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(zscore(&[2.0; 5]), Err(Error::DegenerateVector { .. })));
        assert!(matches!(zscore(&[2.0]), Err(Error::DegenerateVector { .. })));
    }
}
