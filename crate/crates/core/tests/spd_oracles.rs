mod common;

use common::*;
use lglg_core::spd::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn eig_reconstructs_random_symmetric() {
    let mut r = rng(1);
    for _ in 0..20 {
        let g = gaussian_matrix(&mut r, 8, 8);
        let a = SymMatrix::from_upper(&g + g.transpose());
        let eig = sym_eig(&a).unwrap();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(rel_err(eig.reconstruct().as_matrix(), a.as_matrix()) < 1e-10);
    }
}

#[test]
fn log_matches_pade_exponential() {
    let mut r = rng(2);
    for d in [2, 5, 16, 33, 64] {
        let a = random_spd(&mut r, d, 0.2);
        let log = log_spd(&a).unwrap();
        let back = log.as_matrix().clone().exp();
        assert!(rel_err(&back, a.as_matrix()) < 1e-10, "d={d}");
        let ours = matrix_exp(&log).unwrap();
        assert!(rel_err(ours.as_matrix(), a.as_matrix()) < 1e-10, "d={d}");
    }
}

#[test]
fn exp_matches_pade_on_symmetric() {
    let mut r = rng(3);
    for d in [2, 7, 20] {
        let g = gaussian_matrix(&mut r, d, d) * 0.3;
        let s = SymMatrix::from_upper(&g + g.transpose());
        let ours = matrix_exp(&s).unwrap();
        assert!(rel_err(ours.as_matrix(), &s.as_matrix().clone().exp()) < 1e-10);
    }
}

#[test]
fn sqrt_multiplies_back() {
    let mut r = rng(4);
    for d in [2, 9, 40] {
        let a = random_spd(&mut r, d, 0.1);
        let s = matrix_sqrt(&a).unwrap();
        let sq = s.as_matrix() * s.as_matrix();
        assert!(rel_err(&sq, a.as_matrix()) < 1e-10);
    }
}

fn rd_oracle(c1: &SymMatrix, c2: &SymMatrix) -> f64 {
    let inv = c2.as_matrix().clone().try_inverse().unwrap();
    let prod = inv * c1.as_matrix();
    prod.complex_eigenvalues()
        .iter()
        .map(|z| z.re.ln().powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn riemannian_distance_matches_explicit_inverse() {
    let mut r = rng(5);
    for d in [2, 4, 10, 25] {
        for _ in 0..5 {
            let c1 = random_spd(&mut r, d, 0.3);
            let c2 = random_spd(&mut r, d, 0.3);
            let ours = riemannian_distance(&c1, &c2).unwrap();
            assert!((ours - rd_oracle(&c1, &c2)).abs() < 1e-8, "d={d}");
        }
    }
}

#[test]
fn log_euclidean_matches_independent_logs() {
    let mut r = rng(6);
    for d in [3, 12, 30] {
        let c1 = random_spd(&mut r, d, 0.3);
        let c2 = random_spd(&mut r, d, 0.3);
        let l1 = spectral_fn(c1.as_matrix(), f64::ln);
        let l2 = spectral_fn(c2.as_matrix(), f64::ln);
        let ours = log_euclidean_distance(&c1, &c2).unwrap();
        assert!((ours - (l1 - l2).norm()).abs() < 1e-12);
    }
}

#[test]
fn sqrt_log_identity() {
    let mut r = rng(7);
    for d in [2, 8, 41] {
        let m = random_spd(&mut r, d, 0.2);
        let lhs = log_spd(&matrix_sqrt(&m).unwrap()).unwrap();
        let rhs = log_spd(&m).unwrap().scaled(0.5);
        assert!(lhs.frobenius_distance(&rhs) < 1e-10);
    }
}

#[test]
fn embedded_gaussian_equals_log_of_sqrt() {
    let mut r = rng(8);
    for d in [1, 5, 40] {
        let mu = gaussian_vec(&mut r, d);
        let cov = random_spd(&mut r, d, 0.5);
        let e = embed_gaussian(&mu, &cov).unwrap();
        assert_eq!(e.dim(), d + 1);
        let m = DMatrix::from_fn(d + 1, d + 1, |i, j| match (i < d, j < d) {
            (true, true) => cov.get(i, j) + mu[i] * mu[j],
            (true, false) => mu[i],
            (false, true) => mu[j],
            (false, false) => 1.0,
        });
        let oracle = spectral_fn(&spectral_fn(&m, f64::sqrt), f64::ln);
        assert!((e.matrix().as_matrix() - oracle).norm() < 1e-10);
    }
}

#[test]
fn half_vectorize_preserves_frobenius_distance() {
    let mut r = rng(9);
    for d in [1, 4, 41] {
        let g1 = gaussian_matrix(&mut r, d, d);
        let g2 = gaussian_matrix(&mut r, d, d);
        let a = SymMatrix::from_upper(&g1 + g1.transpose());
        let b = SymMatrix::from_upper(&g2 + g2.transpose());
        let (va, vb) = (half_vectorize(&a), half_vectorize(&b));
        assert_eq!(va.len(), d * (d + 1) / 2);
        let vd: f64 = va.iter().zip(&vb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!((vd - (a.as_matrix() - b.as_matrix()).norm()).abs() < 1e-12);
    }
}

fn spd_strategy() -> impl Strategy<Value = (usize, u64)> {
    (2usize..12, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms((d, seed) in spd_strategy()) {
        let mut r = rng(seed);
        let a = random_spd(&mut r, d, 0.2);
        let b = random_spd(&mut r, d, 0.2);
        let c = random_spd(&mut r, d, 0.2);
        for dist in [riemannian_distance, log_euclidean_distance] {
            let ab = dist(&a, &b).unwrap();
            prop_assert_eq!(ab.to_bits(), dist(&b, &a).unwrap().to_bits());
            prop_assert!(dist(&a, &a).unwrap().abs() < 1e-12);
            let ac = dist(&a, &c).unwrap();
            let cb = dist(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-9);
        }
    }

    #[test]
    fn affine_invariance((d, seed) in spd_strategy()) {
        let mut r = rng(seed);
        let c1 = random_spd(&mut r, d, 0.2);
        let c2 = random_spd(&mut r, d, 0.2);
        let x = gaussian_matrix(&mut r, d, d) + DMatrix::identity(d, d) * 2.0;
        let before = riemannian_distance(&c1, &c2).unwrap();
        let after = riemannian_distance(&c1.congruence(&x), &c2.congruence(&x)).unwrap();
        prop_assert!((before - after).abs() < 1e-8 * (1.0 + before));
    }

    #[test]
    fn embedding_separates_gaussians((d, seed) in (1usize..10, any::<u64>())) {
        let mut r = rng(seed);
        let mu = gaussian_vec(&mut r, d);
        let cov = random_spd(&mut r, d, 0.3);
        let e = embed_gaussian(&mu, &cov).unwrap();
        prop_assert!(e.distance(&embed_gaussian(&mu, &cov).unwrap()).unwrap() < 1e-12);
        let mut shifted = mu.clone();
        shifted[seed as usize % d] += 1e-3;
        prop_assert!(e.distance(&embed_gaussian(&shifted, &cov).unwrap()).unwrap() > 0.0);
        let mut bumped = cov.as_matrix().clone();
        bumped[(0, 0)] += 1e-3;
        let bumped = SymMatrix::from_upper(bumped);
        prop_assert!(e.distance(&embed_gaussian(&mu, &bumped).unwrap()).unwrap() > 0.0);
    }
}
