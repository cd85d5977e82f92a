//! Symmetric matrix functions and the three SPD measures used by the descriptor:
//! the affine-invariant Riemannian distance, the Log-Euclidean distance, and the
//! Log-Euclidean embedding of a multivariate Gaussian.
//!
//! Every matrix function goes through one symmetric eigendecomposition
//! `A = V diag(λ) Vᵀ` and applies a scalar function to the eigenvalues.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue floor used by [`log_spd`]: eigenvalues below
/// `LOG_FLOOR_RELATIVE * λ_max` are clamped before taking the logarithm.
pub const LOG_FLOOR_RELATIVE: f64 = 1e-12;

/// Dense symmetric matrix. Storage is mirrored so `a[(i, j)] == a[(j, i)]` holds bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`) only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut inner = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..=j {
                let v = f(i, j);
                inner[(i, j)] = v;
                inner[(j, i)] = v;
            }
        }
        Self { inner }
    }

    /// Copies the upper triangle of a square matrix onto its lower triangle.
    ///
    /// # Panics
    ///
    /// Panics if `m` is not square.
    pub fn from_upper(mut m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "SymMatrix requires a square matrix");
        let n = m.nrows();
        for j in 0..n {
            for i in 0..j {
                m[(j, i)] = m[(i, j)];
            }
        }
        Self { inner: m }
    }

    /// Accepts a square matrix whose asymmetry is at most `tol * (1 + max|a_ij|)`,
    /// and stores its symmetric part.
    pub fn try_from_matrix(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = m.nrows();
        let scale = 1.0 + m.amax();
        let mut asymmetry = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asymmetry > tol * scale {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self::symmetric_part(m))
    }

    // (a + b) == (b + a) in IEEE arithmetic, so the result is exactly symmetric.
    fn symmetric_part(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|v| v.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// `‖self − other‖_F`.
    pub fn frobenius_distance(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        Self {
            inner: &self.inner * factor,
        }
    }

    /// Adds `ridge` to every diagonal entry.
    pub fn add_ridge(&mut self, ridge: f64) {
        for i in 0..self.dim() {
            self.inner[(i, i)] += ridge;
        }
    }

    /// `X · self · Xᵀ` for a square `X` of matching size.
    pub fn congruence(&self, x: &DMatrix<f64>) -> SymMatrix {
        Self::symmetric_part(x * &self.inner * x.transpose())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    // Lexicographic order on the upper triangle, used to make binary measures
    // bitwise symmetric in their arguments.
    fn canonical_cmp(&self, other: &SymMatrix) -> Ordering {
        let n = self.dim();
        for j in 0..n {
            for i in 0..=j {
                match self.inner[(i, j)].total_cmp(&other.inner[(i, j)]) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
        }
        Ordering::Equal
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
///
/// Each eigenvector is sign-normalized so that its largest-magnitude component
/// is positive, which makes the decomposition canonical for simple spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(k).scale_mut(w);
        }
        SymMatrix::from_upper(scaled * self.eigenvectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map(|l| l)
    }
}

/// Symmetric eigendecomposition, eigenvalues sorted descending.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition> {
    a.check_finite()?;
    let n = a.dim();
    let eig = a.inner.clone().symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().fold(0.0f64, |best, &v| {
            if v.abs() > best.abs() {
                v
            } else {
                best
            }
        });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.set_column(dst, &(col * sign));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn require_positive(eig: &EigenDecomposition) -> Result<()> {
    let min = eig.min_eigenvalue();
    if min > 0.0 {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        })
    }
}

/// Matrix logarithm `V · diag(log max(λ, floor)) · Vᵀ` with an absolute floor.
pub fn matrix_log(a: &SymMatrix, floor: f64) -> Result<SymMatrix> {
    let eig = sym_eig(a)?;
    if floor <= 0.0 {
        require_positive(&eig)?;
    }
    Ok(eig.map(|l| l.max(floor).ln()))
}

fn log_from_eig(eig: &EigenDecomposition) -> Result<SymMatrix> {
    require_positive(eig)?;
    let floor = LOG_FLOOR_RELATIVE * eig.max_eigenvalue();
    Ok(eig.map(|l| l.max(floor).ln()))
}

/// Logarithm of an SPD matrix using the relative floor [`LOG_FLOOR_RELATIVE`].
pub fn log_spd(a: &SymMatrix) -> Result<SymMatrix> {
    log_from_eig(&sym_eig(a)?)
}

/// Principal square root of an SPD matrix.
pub fn matrix_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eig(a)?;
    require_positive(&eig)?;
    Ok(eig.map(f64::sqrt))
}

pub fn matrix_exp(a: &SymMatrix) -> Result<SymMatrix> {
    let out = sym_eig(a)?.map(f64::exp);
    out.check_finite()?;
    Ok(out)
}

fn check_same_dim(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        })
    }
}

/// Affine-invariant Riemannian distance `sqrt(Σ ln² λ_i)` over the generalized
/// eigenvalues of `(c1, c2)`.
///
/// The generalized problem is reduced to a symmetric one by whitening with the
/// Cholesky factor `c2 = L Lᵀ`: the eigenvalues of `L⁻¹ c1 L⁻ᵀ`.
pub fn riemannian_distance(c1: &SymMatrix, c2: &SymMatrix) -> Result<f64> {
    check_same_dim(c1, c2)?;
    c1.check_finite()?;
    c2.check_finite()?;
    let (a, b) = match c1.canonical_cmp(c2) {
        Ordering::Greater => (c2, c1),
        _ => (c1, c2),
    };
    if a == b {
        return Ok(0.0);
    }
    let chol = b
        .inner
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
        })?;
    let l = chol.l();
    let half = l
        .solve_lower_triangular(&a.inner)
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let whitened = l
        .solve_lower_triangular(&half.transpose())
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let eig = sym_eig(&SymMatrix::symmetric_part(whitened))?;
    require_positive(&eig)?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|l| {
            let ln = l.ln();
            ln * ln
        })
        .sum::<f64>()
        .sqrt())
}

/// `‖log c1 − log c2‖_F`.
pub fn log_euclidean_distance(c1: &SymMatrix, c2: &SymMatrix) -> Result<f64> {
    check_same_dim(c1, c2)?;
    let l1 = log_spd(c1)?;
    let l2 = log_spd(c2)?;
    Ok(l1.frobenius_distance(&l2))
}

/// A `d`-variate Gaussian mapped to a `(d+1)×(d+1)` symmetric matrix by the
/// Log-Euclidean embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedGaussian {
    matrix: SymMatrix,
}

impl EmbeddedGaussian {
    /// Size of the embedded matrix, `d + 1`.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn gaussian_dim(&self) -> usize {
        self.matrix.dim() - 1
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    /// Frobenius distance between two embeddings.
    pub fn distance(&self, other: &EmbeddedGaussian) -> Result<f64> {
        check_same_dim(&self.matrix, &other.matrix)?;
        Ok(self.matrix.frobenius_distance(&other.matrix))
    }
}

/// The augmented SPD matrix `[[C + μμᵀ, μ], [μᵀ, 1]]` of a Gaussian.
pub fn gaussian_block_matrix(mu: &[f64], cov: &SymMatrix) -> Result<SymMatrix> {
    let d = cov.dim();
    if mu.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: mu.len(),
        });
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    cov.check_finite()?;
    Ok(SymMatrix::from_fn(d + 1, |i, j| match (i < d, j < d) {
        (true, true) => cov.get(i, j) + mu[i] * mu[j],
        (true, false) => mu[i],
        (false, true) => mu[j],
        (false, false) => 1.0,
    }))
}

/// Embeds `N(mu, cov)` as `log(M^{1/2}) = ½ log M` with `M` from [`gaussian_block_matrix`].
pub fn embed_gaussian(mu: &[f64], cov: &SymMatrix) -> Result<EmbeddedGaussian> {
    let m = gaussian_block_matrix(mu, cov)?;
    let log_m = log_from_eig(&sym_eig(&m)?)?;
    Ok(EmbeddedGaussian {
        matrix: log_m.scaled(0.5),
    })
}

/// Length of [`half_vectorize`] output for a `dim × dim` matrix.
pub const fn half_vec_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Upper triangle scanned column by column, off-diagonal entries scaled by √2,
/// so Euclidean distances between outputs equal Frobenius distances between inputs.
pub fn half_vectorize(a: &SymMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut out = Vec::with_capacity(half_vec_len(n));
    for j in 0..n {
        for i in 0..=j {
            let v = a.get(i, j);
            out.push(if i == j { v } else { std::f64::consts::SQRT_2 * v });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, SQRT_2};

    fn assert_close(a: &SymMatrix, b: &SymMatrix, tol: f64) {
        let d = a.frobenius_distance(b);
        assert!(d < tol, "distance {d:e} >= {tol:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn eig_identity() {
        let eig = sym_eig(&SymMatrix::identity(3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
        let v = &eig.eigenvectors;
        assert!((v.transpose() * v - DMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn eig_diagonal_sorted() {
        let eig = sym_eig(&SymMatrix::from_diagonal(&[1.0, 4.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![4.0, 1.0]);
        assert_eq!(eig.eigenvectors, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn eig_rejects_nan() {
        let mut m = SymMatrix::identity(2);
        m.add_ridge(f64::NAN);
        assert!(matches!(sym_eig(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn from_matrix_checks_symmetry() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(
            SymMatrix::try_from_matrix(m, 1e-12),
            Err(Error::NotSymmetric { .. })
        ));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(SymMatrix::try_from_matrix(m, 0.0).unwrap().get(1, 0), 2.0);
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = matrix_log(&SymMatrix::identity(4), 0.0).unwrap();
        assert_eq!(l.frobenius_norm(), 0.0);
    }

    #[test]
    fn log_of_diagonal() {
        let l = matrix_log(&SymMatrix::from_diagonal(&[E, E * E]), 0.0).unwrap();
        assert_close(&l, &SymMatrix::from_diagonal(&[1.0, 2.0]), 1e-14);
    }

    #[test]
    fn log_rejects_indefinite_without_floor() {
        let m = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            matrix_log(&m, 0.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
        // A positive floor clamps instead.
        let l = matrix_log(&m, 1e-3).unwrap();
        assert!((l.get(1, 1) - 1e-3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sqrt_examples() {
        assert_close(
            &matrix_sqrt(&SymMatrix::identity(3)).unwrap(),
            &SymMatrix::identity(3),
            1e-15,
        );
        assert_close(
            &matrix_sqrt(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap(),
            &SymMatrix::from_diagonal(&[2.0, 3.0]),
            1e-14,
        );
        assert!(matches!(
            matrix_sqrt(&SymMatrix::from_diagonal(&[4.0, 0.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn exp_examples() {
        assert_close(
            &matrix_exp(&SymMatrix::zeros(3)).unwrap(),
            &SymMatrix::identity(3),
            1e-15,
        );
        assert_close(
            &matrix_exp(&SymMatrix::from_diagonal(&[1.0])).unwrap(),
            &SymMatrix::from_diagonal(&[E]),
            1e-15,
        );
        assert!(matches!(
            matrix_exp(&SymMatrix::from_diagonal(&[1000.0])),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn riemannian_examples() {
        let a = SymMatrix::from_fn(3, |i, j| if i == j { 2.0 } else { 0.3 });
        assert_eq!(riemannian_distance(&a, &a).unwrap(), 0.0);
        let b = SymMatrix::from_diagonal(&[E * E, 1.0, 1.0]);
        let d = riemannian_distance(&SymMatrix::identity(3), &b).unwrap();
        assert!((d - 2.0).abs() < 1e-14, "{d}");
    }

    #[test]
    fn riemannian_errors() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::identity(3);
        assert!(matches!(
            riemannian_distance(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        let c = SymMatrix::from_diagonal(&[1.0, -2.0]);
        assert!(matches!(
            riemannian_distance(&a, &c),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            riemannian_distance(&c, &a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn log_euclidean_examples() {
        let a = SymMatrix::from_diagonal(&[E, 1.0]);
        let b = SymMatrix::from_diagonal(&[1.0, E]);
        assert_eq!(log_euclidean_distance(&a, &a).unwrap(), 0.0);
        let d = log_euclidean_distance(&a, &b).unwrap();
        assert!((d - SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn embed_standard_gaussian_is_zero() {
        let b = embed_gaussian(&[0.0; 3], &SymMatrix::identity(3)).unwrap();
        assert_eq!(b.dim(), 4);
        assert!(b.matrix().frobenius_norm() < 1e-15);
    }

    #[test]
    fn embed_scalar_gaussian() {
        let b = embed_gaussian(&[0.0], &SymMatrix::from_diagonal(&[E * E])).unwrap();
        assert_close(b.matrix(), &SymMatrix::from_diagonal(&[1.0, 0.0]), 1e-14);
    }

    #[test]
    fn embed_forty_dims() {
        let b = embed_gaussian(&[0.5; 40], &SymMatrix::identity(40)).unwrap();
        assert_eq!(b.dim(), 41);
        assert_eq!(b.gaussian_dim(), 40);
    }

    #[test]
    fn embed_rejects_bad_inputs() {
        assert!(matches!(
            embed_gaussian(&[0.0, 0.0], &SymMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            embed_gaussian(&[0.0, 0.0], &SymMatrix::from_diagonal(&[1.0, -1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            embed_gaussian(&[f64::INFINITY], &SymMatrix::identity(1)),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn half_vectorize_layout() {
        let a = SymMatrix::from_fn(2, |i, j| [[1.0, 2.0], [2.0, 3.0]][i][j]);
        assert_eq!(half_vectorize(&a), vec![1.0, SQRT_2 * 2.0, 3.0]);
        assert_eq!(
            half_vectorize(&SymMatrix::identity(3)),
            vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(half_vec_len(41), 861);
    }
}
