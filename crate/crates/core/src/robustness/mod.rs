//! Fidelity metrics and error scans, generic over the system dimension.

mod scan;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{compose, CompositeSequence, ErrorModel};
use crate::error::{DmcpError, Result};
use crate::linalg::{ComplexMatrix, StateVector};

pub use scan::{
    area_scan, decoherence_scan, robustness_radius, scan_2d, ScanAxis, ScanMetadata, ScanResult, Series,
    RADIUS_SCAN_LIMIT,
};

/// Anything that yields a propagator under an error model and has an ideal gate.
pub trait Protocol: Sync {
    fn dimension(&self) -> usize;
    fn segment_count(&self) -> usize;
    fn propagator(&self, err: &ErrorModel) -> Result<ComplexMatrix>;
    fn target_gate(&self) -> Result<ComplexMatrix>;
}

impl Protocol for CompositeSequence {
    fn dimension(&self) -> usize {
        2
    }

    fn segment_count(&self) -> usize {
        self.len()
    }

    fn propagator(&self, err: &ErrorModel) -> Result<ComplexMatrix> {
        compose(self, err)
    }

    fn target_gate(&self) -> Result<ComplexMatrix> {
        Ok(self.target_rotation()?.matrix())
    }
}

/// How a realized state is compared with its target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// `|⟨target|realized⟩|²`, with the realized state as propagated.
    #[default]
    State,
    /// `1 − ½ Σ_k |p_k − q_k|` over level populations.
    Population,
    /// State fidelity after rescaling the realized state to unit norm.
    Renormalized,
}

impl Metric {
    pub fn evaluate(self, target: &StateVector, realized: &StateVector) -> Result<f64> {
        match self {
            Metric::State => state_fidelity(target, realized),
            Metric::Population => population_fidelity(target, realized),
            Metric::Renormalized => renormalized_fidelity(target, realized),
        }
    }
}

pub fn state_fidelity(target: &StateVector, realized: &StateVector) -> Result<f64> {
    Ok(target.inner(realized)?.norm_sqr())
}

pub fn population_fidelity(target: &StateVector, realized: &StateVector) -> Result<f64> {
    if target.dim() != realized.dim() {
        return Err(DmcpError::DimensionMismatch { expected: target.dim(), found: realized.dim() });
    }
    let tv: f64 = target.populations().iter().zip(realized.populations()).map(|(p, q)| (p - q).abs()).sum();
    Ok(1.0 - 0.5 * tv)
}

pub fn renormalized_fidelity(target: &StateVector, realized: &StateVector) -> Result<f64> {
    let norm = realized.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(state_fidelity(target, realized)? / (norm * norm))
}

/// Named initial states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSet {
    pub states: Vec<(String, StateVector)>,
}

impl InitialStateSet {
    pub fn new(states: Vec<(String, StateVector)>) -> Result<Self> {
        if states.is_empty() {
            return Err(DmcpError::InvalidInput("state set is empty".into()));
        }
        let dim = states[0].1.dim();
        for (name, s) in &states {
            if s.dim() != dim {
                return Err(DmcpError::DimensionMismatch { expected: dim, found: s.dim() });
            }
            if (s.norm() - 1.0).abs() > 1e-12 {
                return Err(DmcpError::InvalidInput(format!("state '{name}' is not normalized")));
            }
        }
        Ok(Self { states })
    }

    pub fn single(name: &str, state: StateVector) -> Result<Self> {
        Self::new(vec![(name.to_string(), state)])
    }

    /// `|0⟩`, `(|0⟩ + |1⟩)/√2` and `0.9|0⟩ + √0.19|1⟩`.
    pub fn qubit_reference() -> Self {
        let states = vec![
            ("ground".to_string(), StateVector::from_real(&[1.0, 0.0]).unwrap()),
            ("equal".to_string(), StateVector::from_real(&[1.0, 1.0]).unwrap()),
            ("weighted".to_string(), StateVector::from_real(&[0.9, 0.19f64.sqrt()]).unwrap()),
        ];
        Self { states }
    }

    /// `|0⟩`, `(|0⟩ + |1⟩ + |2⟩)/√3` and `0.9|0⟩ + √(0.19/2)(|1⟩ + |2⟩)`.
    pub fn qutrit_reference() -> Self {
        let w = (0.19f64 / 2.0).sqrt();
        let states = vec![
            ("ground".to_string(), StateVector::from_real(&[1.0, 0.0, 0.0]).unwrap()),
            ("equal".to_string(), StateVector::from_real(&[1.0, 1.0, 1.0]).unwrap()),
            ("weighted".to_string(), StateVector::from_real(&[0.9, w, w]).unwrap()),
        ];
        Self { states }
    }

    /// Reference set for dimension 2 or 3, else `|0⟩` and the uniform superposition.
    pub fn reference(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::qubit_reference()),
            3 => Ok(Self::qutrit_reference()),
            d if d > 3 => Self::new(vec![
                ("ground".to_string(), StateVector::basis(d, 0)?),
                ("equal".to_string(), StateVector::from_real(&vec![1.0; d])?),
            ]),
            d => Err(DmcpError::InvalidInput(format!("dimension must be at least 2, got {d}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.states[0].1.dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Haar-random pure state, reproducible from `seed`.
pub fn haar_state(seed: u64, dim: usize) -> Result<StateVector> {
    if dim < 2 {
        return Err(DmcpError::InvalidInput(format!("dimension must be at least 2, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..dim).map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
    StateVector::new(amps)
}

/// Fidelity of `protocol` under `err` for one initial state.
pub fn fidelity_under<P: Protocol + ?Sized>(
    protocol: &P,
    state: &StateVector,
    err: &ErrorModel,
    metric: Metric,
) -> Result<f64> {
    let target = StateVector::unnormalized(protocol.target_gate()?.mul_amplitudes(state.amplitudes())?);
    let realized = StateVector::unnormalized(protocol.propagator(err)?.mul_amplitudes(state.amplitudes())?);
    metric.evaluate(&target, &realized)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::tables;

    #[test]
    fn fidelity_extremes() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(2, 1).unwrap();
        assert!((state_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(state_fidelity(&a, &b).unwrap(), 0.0);
        assert_eq!(population_fidelity(&a, &b).unwrap(), 0.0);
        assert!(state_fidelity(&a, &StateVector::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn reference_states_normalized() {
        for set in [InitialStateSet::qubit_reference(), InitialStateSet::qutrit_reference()] {
            for (_, s) in &set.states {
                assert!((s.norm() - 1.0).abs() < 1e-14);
            }
        }
        let w = &InitialStateSet::qubit_reference().states[2].1;
        assert!((w.amplitudes()[0].re - 0.9).abs() < 1e-15);
    }

    #[test]
    fn resonant_pi_with_area_error() {
        let seq = CompositeSequence::resonant(PI).unwrap();
        let s = StateVector::basis(2, 0).unwrap();
        let f = fidelity_under(&seq, &s, &ErrorModel::area(0.05), Metric::State).unwrap();
        let expected = (PI * 1.05 / 2.0).sin().powi(2);
        assert!((f - expected).abs() < 1e-12);
    }

    #[test]
    fn first_order_transfer_at_five_percent() {
        let seq = tables::lookup("pi-n4-o1").unwrap().sequence();
        let s = StateVector::basis(2, 0).unwrap();
        let f = fidelity_under(&seq, &s, &ErrorModel::area(0.05), Metric::State).unwrap();
        assert!(1.0 - f < 1e-4, "{}", 1.0 - f);
    }

    #[test]
    fn haar_reproducible_and_unbiased() {
        assert_eq!(haar_state(7, 3).unwrap(), haar_state(7, 3).unwrap());
        assert!((haar_state(7, 4).unwrap().norm() - 1.0).abs() < 1e-12);
        let mean = (0..10_000u64).map(|s| haar_state(s, 2).unwrap().populations()[0]).sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }
}
