//! Shared oracles for the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use dmcp::synthesis::{profile_bandwidth, transfer_profile};

/// Derivatives `d^k p/dA^k` at `A = π`, `k = 0..=max_order`, from a
/// least-squares polynomial of degree 14 through 21 samples on `π ± w`.
///
/// The window shrinks with the profile's bandwidth `F` (`w = 1.5/F`) so a
/// degree-14 polynomial resolves the sampled stretch.
pub fn polyfit_derivatives(ratios: &[f64], max_order: usize) -> Vec<f64> {
    const POINTS: usize = 21;
    const DEGREE: usize = 14;
    let half_width = 1.5 / profile_bandwidth(ratios);
    let ts: Vec<f64> = (0..POINTS).map(|i| -1.0 + 2.0 * i as f64 / (POINTS - 1) as f64).collect();
    let vander = DMatrix::from_fn(POINTS, DEGREE + 1, |i, j| ts[i].powi(j as i32));
    let ys = DVector::from_iterator(POINTS, ts.iter().map(|t| transfer_profile(ratios, PI + half_width * t).unwrap()));
    let coeffs = vander.svd(true, true).solve(&ys, 1e-14).unwrap();
    let mut factorial = 1.0;
    (0..=max_order)
        .map(|k| {
            if k > 0 {
                factorial *= k as f64;
            }
            coeffs[k] * factorial / half_width.powi(k as i32)
        })
        .collect()
}

/// `|a − b| ≤ tol · max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Error of a k-th derivative relative to `max(|reference|, F^k)`, the
/// larger of its value and the bandwidth bound.
pub fn derivative_error(value: f64, reference: f64, ratios: &[f64], order: usize) -> f64 {
    let scale = reference.abs().max(profile_bandwidth(ratios).powi(order as i32)).max(1.0);
    (value - reference).abs() / scale
}

/// Haar-random element of SU(2) from a 4-dimensional Gaussian.
pub fn random_su2<R: rand::Rng>(rng: &mut R) -> dmcp::ComplexMatrix {
    use num_complex::Complex64 as C64;
    use rand_distr::{Distribution, StandardNormal};
    let g: Vec<f64> = (0..4).map(|_| StandardNormal.sample(rng)).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = C64::new(g[0], g[1]) / norm;
    let b = C64::new(g[2], g[3]) / norm;
    dmcp::ComplexMatrix::from_rows([[a, -b.conj()], [b, a.conj()]])
}
