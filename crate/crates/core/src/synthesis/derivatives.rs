//! Derivatives of the point-to-point transfer profile `p(A) = |U₁₂(A)|²`,
//! where every segment of a unit-coupling sequence has area `A`.
//!
//! Two routes are provided. [`taylor_derivatives`] propagates truncated power
//! series in `a = A − π` through the segment product and is exact up to
//! rounding; the root finder uses it. [`finite_difference_derivatives`]
//! evaluates the profile through [`compose`] and extrapolates central
//! differences, and serves as the cross-check.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::dynamics::{compose, CompositeSequence, ErrorModel, SequenceKind};
use crate::error::Result;
use crate::linalg::ZERO;

/// `|U₁₂|²` of the unit-coupling sequence with every segment at area `area`.
///
/// Negative areas run each segment backwards, `U_k(−A) = U_k(A)†`, so the
/// profile there is `|U₂₁|²` of the product taken in reverse order.
pub fn transfer_profile(ratios: &[f64], area: f64) -> Result<f64> {
    if area == 0.0 {
        return Ok(0.0);
    }
    if area > 0.0 {
        let seq = CompositeSequence::from_ratios(ratios, PI, 1, SequenceKind::PointToPoint)?;
        let u = compose(&seq, &ErrorModel::area(area / PI - 1.0))?;
        return Ok(u.get(0, 1).norm_sqr());
    }
    let reversed: Vec<f64> = ratios.iter().rev().copied().collect();
    let seq = CompositeSequence::from_ratios(&reversed, PI, 1, SequenceKind::PointToPoint)?;
    let u = compose(&seq, &ErrorModel::area(-area / PI - 1.0))?;
    Ok(u.get(1, 0).norm_sqr())
}

/// Highest angular frequency of `p(A)`: `Σ √(1 + r²)`.
///
/// `p` is a trigonometric polynomial of this bandwidth with values in `[0, 1]`,
/// so `|d^k p/dA^k| ≤ bandwidth^k`; this sets the natural scale of each
/// derivative and the step size of the finite-difference route.
pub fn profile_bandwidth(ratios: &[f64]) -> f64 {
    ratios.iter().map(|r| r.hypot(1.0)).sum()
}

type Mat2 = [C64; 4];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
}

/// Truncated power series with 2×2 complex coefficients.
fn series_mul(a: &[Mat2], b: &[Mat2]) -> Vec<Mat2> {
    let len = a.len();
    let mut out = vec![[ZERO; 4]; len];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate().take(len - i) {
            let p = mat_mul(ai, bj);
            for k in 0..4 {
                out[i + j][k] += p[k];
            }
        }
    }
    out
}

/// Series of one segment's propagator at area `π + a`:
/// `U = −sin(a/2) I − i cos(a/2) M` with `M = (σx − r σz)/√(1 + r²)`.
fn segment_series(ratio: f64, len: usize) -> Vec<Mat2> {
    let g = ratio.hypot(1.0);
    let (mx, mz) = (1.0 / g, -ratio / g);
    let mut out = vec![[ZERO; 4]; len];
    let mut factorial = 1.0;
    for (k, coeff) in out.iter_mut().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        let half_pow = 0.5f64.powi(k as i32) / factorial;
        // k-th coefficient of sin(a/2) and cos(a/2)
        let (sin_k, cos_k) = match k % 4 {
            0 => (0.0, half_pow),
            1 => (half_pow, 0.0),
            2 => (0.0, -half_pow),
            _ => (-half_pow, 0.0),
        };
        let diag = C64::new(-sin_k, 0.0);
        let minus_i_cos = C64::new(0.0, -cos_k);
        *coeff = [diag + minus_i_cos * mz, minus_i_cos * mx, minus_i_cos * mx, diag - minus_i_cos * mz];
    }
    out
}

/// Exact derivatives `d^k p / dA^k` at `A = π` for `k = 0..=max_order`.
pub fn taylor_derivatives(ratios: &[f64], max_order: usize) -> Vec<f64> {
    let len = max_order + 1;
    let mut total = vec![[ZERO; 4]; len];
    total[0] = [C64::new(1.0, 0.0), ZERO, ZERO, C64::new(1.0, 0.0)];
    for &r in ratios {
        total = series_mul(&segment_series(r, len), &total);
    }
    let u12: Vec<C64> = total.iter().map(|m| m[1]).collect();
    let mut factorial = 1.0;
    (0..len)
        .map(|k| {
            if k > 0 {
                factorial *= k as f64;
            }
            let coeff: f64 = (0..=k).map(|j| (u12[j] * u12[k - j].conj()).re).sum();
            coeff * factorial
        })
        .collect()
}

/// Central-difference stencil weights for the k-th derivative (second-order accurate).
fn stencil(order: usize) -> &'static [f64] {
    match order {
        1 => &[-0.5, 0.0, 0.5],
        2 => &[1.0, -2.0, 1.0],
        3 => &[-0.5, 1.0, 0.0, -1.0, 0.5],
        4 => &[1.0, -4.0, 6.0, -4.0, 1.0],
        5 => &[-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5],
        6 => &[1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0],
        _ => panic!("finite-difference stencils are tabulated for orders 1..=6"),
    }
}

/// Options for [`finite_difference_derivatives`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteDifference {
    /// Initial step for orders 1–2 in units of `1/bandwidth`; higher orders
    /// start at 2 or 4 times this.
    pub base_step: f64,
    /// Maximum rows of the Richardson tableau (step halved per row).
    pub max_levels: usize,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self { base_step: 0.5, max_levels: 5 }
    }
}

impl FiniteDifference {
    /// Single central difference of the given order and step.
    fn raw(&self, ratios: &[f64], order: usize, h: f64) -> Result<f64> {
        let w = stencil(order);
        let mid = (w.len() / 2) as f64;
        let mut acc = 0.0;
        for (i, &wi) in w.iter().enumerate() {
            if wi != 0.0 {
                acc += wi * transfer_profile(ratios, PI + (i as f64 - mid) * h)?;
            }
        }
        Ok(acc / h.powi(order as i32))
    }

    /// Richardson-extrapolated derivative with error estimate.
    ///
    /// Halves the step each row and eliminates successive even powers of `h`;
    /// returns the tableau entry with the smallest estimated error and stops
    /// once the diagonal starts to diverge from round-off.
    pub fn derivative(&self, ratios: &[f64], order: usize) -> Result<(f64, f64)> {
        if order == 0 {
            return Ok((transfer_profile(ratios, PI)?, 0.0));
        }
        let mut h = self.base_step * 2f64.powi(((order as i32) - 1) / 2) / profile_bandwidth(ratios).max(1.0);
        let mut prev: Vec<f64> = vec![self.raw(ratios, order, h)?];
        let (mut best, mut best_err) = (prev[0], f64::INFINITY);
        for _ in 1..self.max_levels {
            h *= 0.5;
            let mut row = vec![self.raw(ratios, order, h)?];
            let mut factor = 1.0;
            for j in 1..=prev.len() {
                factor *= 4.0;
                let value = (factor * row[j - 1] - prev[j - 1]) / (factor - 1.0);
                let err = (value - row[j - 1]).abs().max((value - prev[j - 1]).abs());
                if err <= best_err {
                    best_err = err;
                    best = value;
                }
                row.push(value);
            }
            prev = row;
        }
        Ok((best, best_err))
    }
}

/// Extrapolated finite-difference derivatives for `k = 0..=max_order` (max 6).
pub fn finite_difference_derivatives(ratios: &[f64], max_order: usize) -> Result<Vec<f64>> {
    let fd = FiniteDifference::default();
    (0..=max_order).map(|k| fd.derivative(ratios, k).map(|(v, _)| v)).collect()
}
