mod common;

use common::*;
use lglg_core::wpca::{euclidean, fit, zscore};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_rows(r: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    // Anisotropic so the spectrum is far from flat.
    let scales: Vec<f64> = (0..dim).map(|j| 1.0 + 5.0 / (1.0 + j as f64)).collect();
    (0..n)
        .map(|_| gaussian_vec(r, dim).iter().zip(&scales).map(|(v, s)| v * s + 0.3).collect())
        .collect()
}

fn projected_covariance(rows: &[Vec<f64>], project: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let ys: Vec<Vec<f64>> = rows.iter().map(|r| project(r)).collect();
    let k = ys[0].len();
    let n = ys.len() as f64;
    let mean: Vec<f64> = (0..k).map(|j| ys.iter().map(|y| y[j]).sum::<f64>() / n).collect();
    DMatrix::from_fn(k, k, |a, b| {
        ys.iter().map(|y| (y[a] - mean[a]) * (y[b] - mean[b])).sum::<f64>() / n
    })
}

#[test]
fn whitening_gram_path() {
    let mut r = rng(41);
    let rows = random_rows(&mut r, 50, 2000);
    let model = fit(&rows, 1000).unwrap();
    assert_eq!(model.output_dim(), 49);
    let cov = projected_covariance(&rows, |x| model.project(x).unwrap());
    let err = (cov - DMatrix::identity(49, 49)).abs().max();
    assert!(err < 1e-8, "max entry error {err}");
    let u = model.basis();
    assert!((u.tr_mul(u) - DMatrix::identity(49, 49)).norm() < 1e-10);
    assert!(model.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    for row in &rows {
        assert!(model.project(row).unwrap().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn whitening_covariance_path() {
    let mut r = rng(42);
    let rows = random_rows(&mut r, 80, 30);
    let model = fit(&rows, 1000).unwrap();
    assert_eq!(model.output_dim(), 30);
    let cov = projected_covariance(&rows, |x| model.project(x).unwrap());
    assert!((cov - DMatrix::identity(30, 30)).abs().max() < 1e-8);
    let u = model.basis();
    assert!((u.tr_mul(u) - DMatrix::identity(30, 30)).norm() < 1e-10);
}

#[test]
fn truncation_keeps_leading_components() {
    let mut r = rng(43);
    let rows = random_rows(&mut r, 40, 100);
    let full = fit(&rows, 1000).unwrap();
    let short = fit(&rows, 7).unwrap();
    assert_eq!(short.output_dim(), 7);
    assert_eq!(short.eigenvalues(), &full.eigenvalues()[..7]);
}

#[test]
fn centering_limits_rank_to_n_minus_one() {
    let mut r = rng(44);
    let n = 1196;
    let rows = random_rows(&mut r, n, 1200);
    let model = fit(&rows, 1196).unwrap();
    assert_eq!(model.output_dim(), 1195);
}

#[test]
fn projection_is_affine() {
    let mut r = rng(45);
    let rows = random_rows(&mut r, 20, 60);
    let model = fit(&rows, 100).unwrap();
    let a = gaussian_vec(&mut r, 60);
    let b = gaussian_vec(&mut r, 60);
    let (s, t) = (0.3, 0.7);
    let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect();
    let (pa, pb, pm) = (
        model.project(&a).unwrap(),
        model.project(&b).unwrap(),
        model.project(&mix).unwrap(),
    );
    let combo: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| s * x + t * y).collect();
    assert!(max_abs_diff(&pm, &combo) < 1e-10);
}

#[test]
fn distances_survive_a_global_rotation() {
    let mut r = rng(46);
    let dim = 40;
    let rows = random_rows(&mut r, 25, dim);
    let queries = random_rows(&mut r, 6, dim);
    let q = gaussian_matrix(&mut r, dim, dim).qr().q();
    let rotate = |v: &Vec<f64>| (&q * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec();
    let m1 = fit(&rows, 100).unwrap();
    let m2 = fit(&rows.iter().map(rotate).collect::<Vec<_>>(), 100).unwrap();
    let p1: Vec<_> = queries.iter().map(|x| m1.project(x).unwrap()).collect();
    let p2: Vec<_> = queries.iter().map(|x| m2.project(&rotate(x)).unwrap()).collect();
    for i in 0..p1.len() {
        for j in 0..i {
            assert!((euclidean(&p1[i], &p1[j]) - euclidean(&p2[i], &p2[j])).abs() < 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn zscore_moments_and_idempotence(y in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let spread = y.iter().cloned().fold(f64::MIN, f64::max) - y.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-6);
        let z = zscore(&y).unwrap();
        let k = z.len() as f64;
        let mean = z.0.iter().sum::<f64>() / k;
        let std = (z.0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt();
        prop_assert!(mean.abs() < 1e-10);
        prop_assert!((std - 1.0).abs() < 1e-10);
        let again = zscore(&z.0).unwrap();
        prop_assert!(max_abs_diff(&again.0, &z.0) < 1e-12);
    }
}
