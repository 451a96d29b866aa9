//! Lifting qubit sequences to n-level systems with SU(2) symmetry.
//!
//! Basis index `k = 0..n` corresponds to magnetic number `m = j − k` with
//! `j = (n − 1)/2`. The lifted Hamiltonian is `H = Ω Jx − Δ Jz`, which is the
//! qubit Hamiltonian exactly at `n = 2`.

use num_complex::Complex64 as C64;

use crate::dynamics::{apply, realize, CompositeSequence, ErrorModel};
use crate::error::{ensure_finite, DmcpError, Result};
use crate::linalg::{ComplexMatrix, StateVector, I};
use crate::robustness::Protocol;

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(DmcpError::InvalidInput(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinGenerators {
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
    pub jz: ComplexMatrix,
}

/// Angular momentum matrices of spin `(n − 1)/2`.
pub fn spin_generators(n: usize) -> Result<SpinGenerators> {
    check_dimension(n)?;
    let j = (n as f64 - 1.0) / 2.0;
    let mut jx = ComplexMatrix::zeros(n);
    let mut jy = ComplexMatrix::zeros(n);
    let mut jz = ComplexMatrix::zeros(n);
    for k in 0..n {
        let m = j - k as f64;
        jz.set(k, k, C64::new(m, 0.0));
        if k + 1 < n {
            // ⟨m|J₊|m−1⟩
            let lower = m - 1.0;
            let up = (j * (j + 1.0) - lower * (lower + 1.0)).sqrt();
            jx.set(k, k + 1, C64::new(0.5 * up, 0.0));
            jx.set(k + 1, k, C64::new(0.5 * up, 0.0));
            jy.set(k, k + 1, C64::new(0.0, -0.5 * up));
            jy.set(k + 1, k, C64::new(0.0, 0.5 * up));
        }
    }
    Ok(SpinGenerators { jx, jy, jz })
}

/// Ladder system with Jacobi couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinSystem {
    pub dimension: usize,
    pub base_coupling: f64,
    pub base_detuning: f64,
    pub offset: f64,
}

impl SpinSystem {
    pub fn new(dimension: usize, base_coupling: f64, base_detuning: f64) -> Result<Self> {
        check_dimension(dimension)?;
        ensure_finite("base coupling", base_coupling)?;
        ensure_finite("base detuning", base_detuning)?;
        if base_coupling <= 0.0 {
            return Err(DmcpError::InvalidInput("base coupling must be positive".into()));
        }
        Ok(Self { dimension, base_coupling, base_detuning, offset: 0.0 })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// `Ω_k = Ω₀ √(k(n − k))` between levels `k − 1` and `k`, for `k = 1..n`.
    pub fn couplings(&self) -> Vec<f64> {
        let n = self.dimension;
        (1..n).map(|k| self.base_coupling * ((k * (n - k)) as f64).sqrt()).collect()
    }

    /// `Δ_k = k Δ₀ + D₀` for `k = 0..n`.
    pub fn detunings(&self) -> Vec<f64> {
        (0..self.dimension).map(|k| k as f64 * self.base_detuning + self.offset).collect()
    }

    /// Ladder Hamiltonian: level energies on the diagonal, `Ω_k/2` couplings.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        let mut h = ComplexMatrix::diagonal(&self.detunings().iter().map(|&d| C64::new(d, 0.0)).collect::<Vec<_>>());
        for (k, c) in self.couplings().into_iter().enumerate() {
            h.set(k, k + 1, C64::new(0.5 * c, 0.0));
            h.set(k + 1, k, C64::new(0.5 * c, 0.0));
        }
        h
    }
}

fn lifted_segment(
    gens: &SpinGenerators,
    coupling: f64,
    detuning: f64,
    gamma: f64,
    duration: f64,
) -> Result<ComplexMatrix> {
    let j = (gens.jz.dim() as f64 - 1.0) / 2.0;
    let h = gens.jx.scale(C64::new(coupling, 0.0)).sub(&gens.jz.scale(C64::new(detuning, -gamma)))?;
    let u = h.scale(-I * duration).exp();
    if gamma > 0.0 {
        Ok(u.scale(C64::new((-j * gamma * duration).exp(), 0.0)))
    } else {
        Ok(u)
    }
}

/// Product of lifted segment propagators, right to left.
///
/// Each segment keeps its qubit duration. A nonzero `gamma` shifts the
/// detuning to `Δ − iγ` and multiplies by `e^{−jγδt}`, which at `n = 2`
/// is the qubit relaxation model.
pub fn nlevel_propagator(seq: &CompositeSequence, n: usize, err: &ErrorModel) -> Result<ComplexMatrix> {
    let gens = spin_generators(n)?;
    let mut total = ComplexMatrix::identity(n);
    for (k, seg) in seq.segments().iter().enumerate() {
        let r = realize(seg, err, k)?;
        total = lifted_segment(&gens, r.coupling, r.detuning, err.gamma, r.duration)?.matmul(&total)?;
    }
    Ok(total)
}

/// Level populations sampled along the lifted evolution.
///
/// Returns `(t, populations)` with `samples_per_segment` points per segment
/// including both ends; shared boundaries appear once.
pub fn nlevel_trajectory(
    seq: &CompositeSequence,
    err: &ErrorModel,
    init: &StateVector,
    samples_per_segment: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if samples_per_segment < 2 {
        return Err(DmcpError::InvalidInput(format!("need at least 2 samples per segment, got {samples_per_segment}")));
    }
    let gens = spin_generators(init.dim())?;
    let mut out = vec![(0.0, init.populations())];
    let mut state = init.clone();
    let mut t0 = 0.0;
    for (k, seg) in seq.segments().iter().enumerate() {
        let r = realize(seg, err, k)?;
        for j in 1..samples_per_segment {
            let f = j as f64 / (samples_per_segment - 1) as f64;
            let u = lifted_segment(&gens, r.coupling, r.detuning, err.gamma, f * r.duration)?;
            out.push((t0 + f * r.duration, apply(&u, &state)?.populations()));
        }
        state = apply(&lifted_segment(&gens, r.coupling, r.detuning, err.gamma, r.duration)?, &state)?;
        t0 += r.duration;
    }
    Ok(out)
}

fn factorial(k: i64) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Wigner small-d element `d^j_{m'm}(β)`, with `tj = 2j`, `tmp = 2m'`, `tm = 2m`.
fn small_d(tj: i64, tmp: i64, tm: i64, beta: f64) -> f64 {
    let (jpmp, jmmp, jpm, jmm) = ((tj + tmp) / 2, (tj - tmp) / 2, (tj + tm) / 2, (tj - tm) / 2);
    let dm = (tmp - tm) / 2;
    let prefactor = (factorial(jpmp) * factorial(jmmp) * factorial(jpm) * factorial(jmm)).sqrt();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let s_min = 0.max(-dm);
    let s_max = jpm.min(jmmp);
    let mut sum = 0.0;
    for k in s_min..=s_max {
        let sign = if (dm + k) % 2 == 0 { 1.0 } else { -1.0 };
        let denom = factorial(jpm - k) * factorial(k) * factorial(dm + k) * factorial(jmmp - k);
        sum += sign / denom * c.powi((tj - dm - 2 * k) as i32) * s.powi((dm + 2 * k) as i32);
    }
    prefactor * sum
}

/// Image of an SU(2) matrix in the `n`-dimensional irreducible representation.
pub fn wigner_lift(u: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    check_dimension(n)?;
    if u.dim() != 2 {
        return Err(DmcpError::DimensionMismatch { expected: 2, found: u.dim() });
    }
    let defect = u.unitarity_defect().max((u.determinant() - C64::new(1.0, 0.0)).norm());
    if defect.is_nan() || defect > 1e-8 {
        return Err(DmcpError::NotSpecialUnitary(defect));
    }
    let (a, c) = (u.get(0, 0), u.get(1, 0));
    let beta = 2.0 * c.norm().atan2(a.norm());
    let (arg_a, arg_c) = (if a.norm() > 0.0 { a.arg() } else { 0.0 }, if c.norm() > 0.0 { c.arg() } else { 0.0 });
    let alpha = arg_c - arg_a;
    let gamma = -arg_a - arg_c;

    let tj = n as i64 - 1;
    let mut out = ComplexMatrix::zeros(n);
    for row in 0..n {
        let tmp = tj - 2 * row as i64;
        for col in 0..n {
            let tm = tj - 2 * col as i64;
            let phase = -(alpha * tmp as f64 + gamma * tm as f64) / 2.0;
            let d = small_d(tj, tmp, tm, beta);
            out.set(row, col, C64::from_polar(1.0, phase) * d);
        }
    }
    Ok(out)
}

/// A qubit sequence applied to an `n`-level ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedSequence {
    pub sequence: CompositeSequence,
    pub dimension: usize,
}

impl LiftedSequence {
    pub fn new(sequence: CompositeSequence, dimension: usize) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self { sequence, dimension })
    }
}

impl Protocol for LiftedSequence {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn segment_count(&self) -> usize {
        self.sequence.len()
    }

    fn propagator(&self, err: &ErrorModel) -> Result<ComplexMatrix> {
        nlevel_propagator(&self.sequence, self.dimension, err)
    }

    fn target_gate(&self) -> Result<ComplexMatrix> {
        wigner_lift(&self.sequence.target_rotation()?.matrix(), self.dimension)
    }
}
