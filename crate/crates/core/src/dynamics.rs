//! Piecewise-constant two-level dynamics.
//!
//! Hamiltonian convention (ħ = 1): `H = ½ [[−Δ, Ω], [Ω, Δ]]` with real
//! coupling `Ω` and detuning `Δ`. A segment of duration `δt` has pulse area
//! `A = Ω_g δt` with `Ω_g = √(Ω² + Δ²)`, and its propagator is the closed
//! form
//!
//! ```text
//! U = [[cos(A/2) + i(Δ/Ω_g) sin(A/2),   −i(Ω/Ω_g) sin(A/2)],
//!      [−i(Ω/Ω_g) sin(A/2),              cos(A/2) − i(Δ/Ω_g) sin(A/2)]]
//! ```
//!
//! Sequences multiply right to left: `U_N ⋯ U_2 U_1`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, DmcpError, Result};
use crate::linalg::{ComplexMatrix, StateVector, I, ONE, ZERO};

/// One constant-parameter piece of a composite pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    ratio: f64,
    coupling: f64,
    nominal_area: f64,
}

impl PulseSegment {
    pub fn new(ratio: f64, coupling: f64, nominal_area: f64) -> Result<Self> {
        ensure_finite("detuning ratio", ratio)?;
        ensure_finite("coupling", coupling)?;
        ensure_finite("nominal area", nominal_area)?;
        if coupling <= 0.0 {
            return Err(DmcpError::InvalidInput(format!("coupling must be positive, got {coupling}")));
        }
        if nominal_area <= 0.0 {
            return Err(DmcpError::InvalidInput(format!("nominal area must be positive, got {nominal_area}")));
        }
        let seg = Self { ratio, coupling, nominal_area };
        let dt = seg.duration();
        if !dt.is_finite() || dt <= 0.0 {
            return Err(DmcpError::InvalidInput(format!("segment duration {dt} is not finite and positive")));
        }
        Ok(seg)
    }

    /// Unit-coupling segment of area π.
    pub fn with_ratio(ratio: f64) -> Result<Self> {
        Self::new(ratio, 1.0, PI)
    }

    /// Detuning-to-coupling ratio `Δ/Ω`.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn nominal_area(&self) -> f64 {
        self.nominal_area
    }

    pub fn detuning(&self) -> f64 {
        self.ratio * self.coupling
    }

    /// Generalized Rabi frequency `Ω_g = √(Ω² + Δ²)`.
    pub fn generalized_rabi(&self) -> f64 {
        self.coupling.hypot(self.detuning())
    }

    pub fn duration(&self) -> f64 {
        self.nominal_area / self.generalized_rabi()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    PointToPoint,
    Universal,
}

/// Ordered segments plus the rotation they are meant to realize.
///
/// `order` is the number of nullified even derivatives of the transfer
/// profile (1 or 2); a bare uncompensated pulse carries order 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeSequence {
    segments: Vec<PulseSegment>,
    target_angle: f64,
    order: u8,
    kind: SequenceKind,
}

impl CompositeSequence {
    pub fn new(segments: Vec<PulseSegment>, target_angle: f64, order: u8, kind: SequenceKind) -> Result<Self> {
        if segments.is_empty() {
            return Err(DmcpError::InvalidInput("a sequence needs at least one segment".into()));
        }
        ensure_finite("target angle", target_angle)?;
        if order > 2 {
            return Err(DmcpError::InvalidInput(format!("order must be 0, 1 or 2, got {order}")));
        }
        if kind == SequenceKind::Universal {
            let n = segments.len();
            if !n.is_multiple_of(2) {
                return Err(DmcpError::InvalidInput(format!("universal sequences have an even length, got {n}")));
            }
            for k in 0..n / 2 {
                let (a, b) = (segments[k].ratio, segments[n - 1 - k].ratio);
                if (a + b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(DmcpError::InvalidInput(format!(
                        "universal ratios must be anti-palindromic: r[{}]={a} vs r[{}]={b}",
                        k + 1,
                        n - k
                    )));
                }
            }
        }
        Ok(Self { segments, target_angle, order, kind })
    }

    /// Unit-coupling sequence with area π per segment.
    pub fn from_ratios(ratios: &[f64], target_angle: f64, order: u8, kind: SequenceKind) -> Result<Self> {
        let segments = ratios.iter().map(|&r| PulseSegment::with_ratio(r)).collect::<Result<Vec<_>>>()?;
        Self::new(segments, target_angle, order, kind)
    }

    /// A single resonant pulse of area `angle`.
    pub fn resonant(angle: f64) -> Result<Self> {
        Self::new(vec![PulseSegment::new(0.0, 1.0, angle)?], angle, 0, SequenceKind::PointToPoint)
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.ratio).collect()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn target_angle(&self) -> f64 {
        self.target_angle
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    /// Total duration under the given error model.
    pub fn total_duration(&self, err: &ErrorModel) -> f64 {
        self.segments.iter().map(|s| s.duration()).sum::<f64>() * (1.0 + err.area_scale)
    }

    /// Rotation this sequence should realize at zero error.
    ///
    /// Anti-palindromic detuning sequences compose to a real SU(2) matrix, a
    /// rotation about the y axis of the drive frame; the handedness depends on
    /// the sign family and is read off the zero-error product.
    pub fn target_rotation(&self) -> Result<Rotation> {
        match self.kind {
            SequenceKind::PointToPoint => Ok(Rotation { angle: self.target_angle, axis: Axis::X }),
            SequenceKind::Universal => {
                let realized = compose(self, &ErrorModel::zero())?;
                let plus = Rotation { angle: self.target_angle, axis: Axis::Y };
                let minus = Rotation { angle: -self.target_angle, axis: Axis::Y };
                if gate_distance(&realized, &plus.matrix()) <= gate_distance(&realized, &minus.matrix()) {
                    Ok(plus)
                } else {
                    Ok(minus)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Rotation `exp(−i (angle/2) σ_axis)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub angle: f64,
    pub axis: Axis,
}

impl Rotation {
    pub fn matrix(&self) -> ComplexMatrix {
        ideal_rotation(self.angle, self.axis)
    }
}

/// `exp(−i (angle/2) σ_axis)` in half-angle convention.
pub fn ideal_rotation(angle: f64, axis: Axis) -> ComplexMatrix {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let c = C64::new(c, 0.0);
    match axis {
        Axis::X => ComplexMatrix::from_rows([[c, C64::new(0.0, -s)], [C64::new(0.0, -s), c]]),
        Axis::Y => ComplexMatrix::from_rows([[c, C64::new(-s, 0.0)], [C64::new(s, 0.0), c]]),
        Axis::Z => ComplexMatrix::from_rows([[C64::new(c.re, -s), ZERO], [ZERO, C64::new(c.re, s)]]),
    }
}

/// How detuning errors act on a segment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningErrorMode {
    /// `Δ → Δ (1 + δ)`.
    #[default]
    Relative,
    /// `Δ → Δ + δ Ω`, i.e. δ is an offset in units of the segment coupling.
    /// Unlike the relative mode this also perturbs resonant segments.
    Absolute,
}

/// Systematic errors applied when propagating a sequence.
///
/// Per-segment lists may be shorter than the sequence; missing entries mean
/// zero error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// Fractional duration error ε: every `δt_n → δt_n (1 + ε)`.
    pub area_scale: f64,
    pub coupling_errors: Vec<f64>,
    pub detuning_errors: Vec<f64>,
    #[serde(default)]
    pub detuning_mode: DetuningErrorMode,
    /// Relaxation rate γ ≥ 0.
    pub gamma: f64,
}

impl ErrorModel {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn area(area_scale: f64) -> Self {
        Self { area_scale, ..Self::default() }
    }

    pub fn relaxation(gamma: f64) -> Self {
        Self { gamma, ..Self::default() }
    }

    /// Same fractional coupling and detuning error on each of `segments` pieces.
    pub fn uniform(segments: usize, coupling: f64, detuning: f64, mode: DetuningErrorMode) -> Self {
        Self {
            coupling_errors: vec![coupling; segments],
            detuning_errors: vec![detuning; segments],
            detuning_mode: mode,
            ..Self::default()
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_area_scale(mut self, area_scale: f64) -> Self {
        self.area_scale = area_scale;
        self
    }

    pub fn coupling_error(&self, index: usize) -> f64 {
        self.coupling_errors.get(index).copied().unwrap_or(0.0)
    }

    pub fn detuning_error(&self, index: usize) -> f64 {
        self.detuning_errors.get(index).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("area scale", self.area_scale)?;
        ensure_finite("gamma", self.gamma)?;
        for &e in self.coupling_errors.iter().chain(&self.detuning_errors) {
            ensure_finite("segment error", e)?;
        }
        if self.area_scale < -1.0 {
            return Err(DmcpError::InvalidInput(format!("area scale {} gives a negative duration", self.area_scale)));
        }
        if self.gamma < 0.0 {
            return Err(DmcpError::InvalidInput(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Coupling, detuning and duration of segment `index` after applying `err`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealizedSegment {
    pub coupling: f64,
    pub detuning: f64,
    pub duration: f64,
}

pub fn realize(seg: &PulseSegment, err: &ErrorModel, index: usize) -> Result<RealizedSegment> {
    err.validate()?;
    let coupling = seg.coupling * (1.0 + err.coupling_error(index));
    let detuning = match err.detuning_mode {
        DetuningErrorMode::Relative => seg.detuning() * (1.0 + err.detuning_error(index)),
        DetuningErrorMode::Absolute => seg.detuning() + err.detuning_error(index) * seg.coupling,
    };
    let duration = seg.duration() * (1.0 + err.area_scale);
    ensure_finite("perturbed coupling", coupling)?;
    ensure_finite("perturbed detuning", detuning)?;
    ensure_finite("perturbed duration", duration)?;
    Ok(RealizedSegment { coupling, detuning, duration })
}

/// Closed-form unitary of a real-coupling segment held for `duration`.
fn closed_form(coupling: f64, detuning: f64, duration: f64) -> ComplexMatrix {
    let rabi = coupling.hypot(detuning);
    let half = 0.5 * rabi * duration;
    let cos = half.cos();
    // sin(Ω_g δt / 2) / Ω_g, finite as Ω_g → 0
    let sin_over_rabi = if half.abs() < 1e-8 { 0.5 * duration * (1.0 - half * half / 6.0) } else { half.sin() / rabi };
    let off = C64::new(0.0, -coupling * sin_over_rabi);
    ComplexMatrix::from_rows([
        [C64::new(cos, detuning * sin_over_rabi), off],
        [off, C64::new(cos, -detuning * sin_over_rabi)],
    ])
}

/// Propagator by matrix exponential, including relaxation.
///
/// The relaxed Hamiltonian substitutes `Δ → Δ − iγ` in the diagonal of the
/// traceless form and restores the trace term that the ground-referenced
/// form `diag(0, Δ − iγ)` carries, so the product is
/// `exp(−i δt H(Δ − iγ)) · e^{−γ δt / 2}` and only the upper level decays.
fn exponential_route(coupling: f64, detuning: f64, gamma: f64, duration: f64) -> ComplexMatrix {
    let shifted = C64::new(detuning, -gamma);
    let h = ComplexMatrix::from_rows([
        [-shifted * 0.5, C64::new(0.5 * coupling, 0.0)],
        [C64::new(0.5 * coupling, 0.0), shifted * 0.5],
    ]);
    let u = h.scale(-I * duration).exp();
    u.scale(C64::new((-0.5 * gamma * duration).exp(), 0.0))
}

/// Propagator of segment `index` under `err`.
///
/// Closed form when `err.gamma == 0`, otherwise the matrix exponential of the
/// relaxed Hamiltonian.
pub fn segment_propagator(seg: &PulseSegment, err: &ErrorModel, index: usize) -> Result<ComplexMatrix> {
    segment_propagator_partial(seg, err, index, 1.0)
}

/// Same as [`segment_propagator`] but always through the matrix exponential.
pub fn segment_propagator_expm(seg: &PulseSegment, err: &ErrorModel, index: usize) -> Result<ComplexMatrix> {
    let r = realize(seg, err, index)?;
    Ok(exponential_route(r.coupling, r.detuning, err.gamma, r.duration))
}

/// Propagator over the first `fraction` of the segment's duration.
pub fn segment_propagator_partial(
    seg: &PulseSegment,
    err: &ErrorModel,
    index: usize,
    fraction: f64,
) -> Result<ComplexMatrix> {
    let r = realize(seg, err, index)?;
    let duration = r.duration * fraction;
    if err.gamma == 0.0 {
        Ok(closed_form(r.coupling, r.detuning, duration))
    } else {
        Ok(exponential_route(r.coupling, r.detuning, err.gamma, duration))
    }
}

/// Total propagator `U_N ⋯ U_1`.
pub fn compose(seq: &CompositeSequence, err: &ErrorModel) -> Result<ComplexMatrix> {
    let mut total = ComplexMatrix::identity(2);
    for (k, seg) in seq.segments().iter().enumerate() {
        total = segment_propagator(seg, err, k)?.matmul(&total)?;
    }
    Ok(total)
}

/// `U · s` without renormalization.
pub fn apply(u: &ComplexMatrix, s: &StateVector) -> Result<StateVector> {
    Ok(StateVector::unnormalized(u.mul_amplitudes(s.amplitudes())?))
}

/// Phase-insensitive distance `1 − |tr(U†V)| / n`, zero iff `U = e^{iφ} V`.
pub fn gate_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    let n = u.dim() as f64;
    let overlap = u.adjoint().matmul(v).map(|m| m.trace().norm() / n).unwrap_or(0.0);
    (1.0 - overlap).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Bloch coordinates sampled along the piecewise evolution.
///
/// Each segment is sampled at `samples_per_segment` equally spaced times
/// including both ends; shared segment boundaries appear once.
pub fn bloch_trajectory(
    seq: &CompositeSequence,
    err: &ErrorModel,
    init: &StateVector,
    samples_per_segment: usize,
) -> Result<Vec<BlochPoint>> {
    if samples_per_segment < 2 {
        return Err(DmcpError::InvalidInput(format!("need at least 2 samples per segment, got {samples_per_segment}")));
    }
    if init.dim() != 2 {
        return Err(DmcpError::DimensionMismatch { expected: 2, found: init.dim() });
    }
    err.validate()?;
    let point = |time: f64, s: &StateVector| -> Result<BlochPoint> {
        let [x, y, z] = s.bloch()?;
        Ok(BlochPoint { time, x, y, z })
    };

    let mut out = vec![point(0.0, init)?];
    if seq.total_duration(err) == 0.0 {
        return Ok(out);
    }
    let mut state = init.clone();
    let mut t0 = 0.0;
    for (k, seg) in seq.segments().iter().enumerate() {
        let duration = realize(seg, err, k)?.duration;
        for j in 1..samples_per_segment {
            let f = j as f64 / (samples_per_segment - 1) as f64;
            let u = segment_propagator_partial(seg, err, k, f)?;
            out.push(point(t0 + f * duration, &apply(&u, &state)?)?);
        }
        state = apply(&segment_propagator(seg, err, k)?, &state)?;
        t0 += duration;
    }
    Ok(out)
}

/// Pauli matrices, handy for tests and generators.
pub fn pauli() -> [ComplexMatrix; 3] {
    [
        ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]]),
        ComplexMatrix::from_rows([[ZERO, -I], [I, ZERO]]),
        ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn resonant_pi() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, -I], [-I, ZERO]])
    }

    /// Fourth-order Runge–Kutta integration of i ċ = H c, independent of the closed form.
    fn integrate(coupling: f64, detuning: f64, duration: f64, init: [C64; 2], steps: usize) -> [C64; 2] {
        let h = duration / steps as f64;
        let rhs = |c: [C64; 2]| -> [C64; 2] {
            [-I * (0.5 * (-detuning * c[0] + coupling * c[1])), -I * (0.5 * (coupling * c[0] + detuning * c[1]))]
        };
        let add = |a: [C64; 2], b: [C64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
        let mut c = init;
        for _ in 0..steps {
            let k1 = rhs(c);
            let k2 = rhs(add(c, k1, h / 2.0));
            let k3 = rhs(add(c, k2, h / 2.0));
            let k4 = rhs(add(c, k3, h));
            c = [
                c[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
                c[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
            ];
        }
        c
    }

    #[test]
    fn resonant_pi_segment_is_full_transfer() {
        let seg = PulseSegment::with_ratio(0.0).unwrap();
        let u = segment_propagator(&seg, &ErrorModel::zero(), 0).unwrap();
        assert!(u.max_abs_diff(&resonant_pi()).unwrap() < 1e-15);
    }

    #[test]
    fn detuned_segment_transfer_matches_time_slicing() {
        let seg = PulseSegment::with_ratio(0.69).unwrap();
        let u = segment_propagator(&seg, &ErrorModel::zero(), 0).unwrap();
        let p = u.get(0, 1).norm_sqr();
        // (1 / (1 + 0.69²)) sin²(π/2)
        assert!((p - 1.0 / (1.0 + 0.69f64 * 0.69)).abs() < 1e-14);
        assert!((p - 0.677_460_9).abs() < 1e-6);

        let c = integrate(seg.coupling(), seg.detuning(), seg.duration(), [ZERO, ONE], 20_000);
        assert!((c[0] - u.get(0, 1)).norm() < 1e-12);
        assert!((c[1] - u.get(1, 1)).norm() < 1e-12);
    }

    #[test]
    fn relaxation_reduces_norm() {
        let seg = PulseSegment::with_ratio(0.0).unwrap();
        let u = segment_propagator(&seg, &ErrorModel::relaxation(0.2), 0).unwrap();
        let out = apply(&u, &StateVector::basis(2, 0).unwrap()).unwrap();
        assert!(out.norm() < 1.0);
        // reference from an independent expm evaluation of the same Hamiltonian
        assert!((out.norm() - 0.764_7).abs() < 1e-3, "norm {}", out.norm());
    }

    #[test]
    fn exponential_and_closed_form_agree_without_relaxation() {
        for &r in &[-7.3, -0.5, 0.0, 0.69, 5.52] {
            let seg = PulseSegment::new(r, 1.3, 2.1).unwrap();
            let err = ErrorModel {
                area_scale: 0.07,
                coupling_errors: vec![0.1],
                detuning_errors: vec![-0.2],
                ..ErrorModel::zero()
            };
            let a = segment_propagator(&seg, &err, 0).unwrap();
            let b = segment_propagator_expm(&seg, &err, 0).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn segment_validation() {
        assert!(PulseSegment::new(f64::NAN, 1.0, PI).is_err());
        assert!(PulseSegment::new(1.0, 0.0, PI).is_err());
        assert!(PulseSegment::new(1.0, 1.0, -1.0).is_err());
        assert!(PulseSegment::new(f64::INFINITY, 1.0, PI).is_err());
        let seg = PulseSegment::with_ratio(1.0).unwrap();
        assert!(segment_propagator(&seg, &ErrorModel::area(f64::NAN), 0).is_err());
    }

    #[test]
    fn two_pi_resonant_is_identity_up_to_phase() {
        let seq = CompositeSequence::resonant(2.0 * PI).unwrap();
        let u = compose(&seq, &ErrorModel::zero()).unwrap();
        assert!(gate_distance(&u, &ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn apply_examples() {
        let ket0 = StateVector::basis(2, 0).unwrap();
        assert_eq!(apply(&ComplexMatrix::identity(2), &ket0).unwrap(), ket0);
        let out = apply(&resonant_pi(), &ket0).unwrap();
        assert_eq!(out.amplitudes(), &[ZERO, -I]);
        assert!(apply(&ComplexMatrix::identity(3), &ket0).is_err());
    }

    #[test]
    fn ideal_rotation_examples() {
        assert!(ideal_rotation(PI, Axis::X).max_abs_diff(&resonant_pi()).unwrap() < 1e-15);
        assert!(ideal_rotation(0.0, Axis::X).max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-15);
        let half = ideal_rotation(PI / 2.0, Axis::X);
        assert!((half.get(0, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((half.get(0, 1).im + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gate_distance_examples() {
        let u = ideal_rotation(0.7, Axis::Y);
        assert!(gate_distance(&u, &u) < 1e-15);
        let phased = u.scale(C64::from_polar(1.0, 1.1));
        assert!(gate_distance(&u, &phased) < 1e-15);
        assert!((gate_distance(&ComplexMatrix::identity(2), &resonant_pi()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn universal_sequence_must_be_anti_palindromic() {
        assert!(CompositeSequence::from_ratios(&[1.0, 2.0, -2.0, -1.0], PI, 1, SequenceKind::Universal).is_ok());
        assert!(CompositeSequence::from_ratios(&[1.0, 2.0, 2.0, 1.0], PI, 1, SequenceKind::Universal).is_err());
        assert!(CompositeSequence::from_ratios(&[1.0, 2.0, -1.0], PI, 1, SequenceKind::Universal).is_err());
        assert!(CompositeSequence::from_ratios(&[], PI, 1, SequenceKind::PointToPoint).is_err());
    }

    #[test]
    fn resonant_trajectory_follows_meridian() {
        let seq = CompositeSequence::resonant(PI).unwrap();
        let init = StateVector::basis(2, 0).unwrap();
        let traj = bloch_trajectory(&seq, &ErrorModel::zero(), &init, 11).unwrap();
        assert_eq!(traj.len(), 11);
        for (k, p) in traj.iter().enumerate() {
            let phi = PI * k as f64 / 10.0;
            // rotation about x: (0, −sin φ, cos φ)
            assert!(p.x.abs() < 1e-14);
            assert!((p.y + phi.sin()).abs() < 1e-14);
            assert!((p.z - phi.cos()).abs() < 1e-14);
        }
        assert!((traj.last().unwrap().z + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_duration_trajectory_is_single_point() {
        let seq = CompositeSequence::from_ratios(&[5.52, 0.69, -0.69, -5.52], PI, 1, SequenceKind::Universal).unwrap();
        let init = StateVector::basis(2, 0).unwrap();
        let traj = bloch_trajectory(&seq, &ErrorModel::area(-1.0), &init, 5).unwrap();
        assert_eq!(traj, vec![BlochPoint { time: 0.0, x: 0.0, y: 0.0, z: 1.0 }]);
        assert!(bloch_trajectory(&seq, &ErrorModel::zero(), &init, 1).is_err());
    }

    #[test]
    fn universal_target_is_y_rotation() {
        let seq = CompositeSequence::from_ratios(&[11.99, 1.94, -1.94, -11.99], PI / 2.0, 1, SequenceKind::Universal)
            .unwrap();
        let target = seq.target_rotation().unwrap();
        assert_eq!(target.axis, Axis::Y);
        let u = compose(&seq, &ErrorModel::zero()).unwrap();
        assert!(gate_distance(&u, &target.matrix()) < 1e-4);
        let flipped =
            CompositeSequence::from_ratios(&[-11.99, -1.94, 1.94, 11.99], PI / 2.0, 1, SequenceKind::Universal)
                .unwrap();
        assert_eq!(flipped.target_rotation().unwrap().angle, -target.angle);
    }
}
