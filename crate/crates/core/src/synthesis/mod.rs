//! Synthesis of detuning ratios from the point-to-point robustness
//! conditions, and assembly of the anti-palindromic universal sequence.

pub mod derivatives;
pub mod newton;

use serde::{Deserialize, Serialize};

use crate::dynamics::{compose, gate_distance, CompositeSequence, ErrorModel, Rotation, SequenceKind};
use crate::error::{ensure_finite, DmcpError, Result};

pub use derivatives::{
    finite_difference_derivatives, profile_bandwidth, taylor_derivatives, transfer_profile, FiniteDifference,
};
pub use newton::{NewtonOptions, NewtonOutcome};

/// Point-to-point design problem for the first half of a universal sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisProblem {
    pub target_angle: f64,
    /// Number of pieces in the point-to-point half (`N/2`).
    pub half_pieces: usize,
    /// 1 nullifies the second derivative, 2 also the fourth.
    pub order: u8,
}

impl SynthesisProblem {
    pub fn new(target_angle: f64, half_pieces: usize, order: u8) -> Result<Self> {
        ensure_finite("target angle", target_angle)?;
        if !(1..=2).contains(&order) {
            return Err(DmcpError::InvalidInput(format!("order must be 1 or 2, got {order}")));
        }
        if half_pieces < 2 {
            return Err(DmcpError::InvalidInput("N must be even and ≥4".into()));
        }
        if half_pieces < order as usize + 1 {
            return Err(DmcpError::InvalidInput(format!(
                "order {order} needs at least {} pieces per half (N ≥ {})",
                order + 1,
                2 * (order + 1)
            )));
        }
        Ok(Self { target_angle, half_pieces, order })
    }

    /// Problem for a full sequence length `n` (even, ≥ 4).
    pub fn for_sequence_length(target_angle: f64, n: usize, order: u8) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(DmcpError::InvalidInput(format!("N must be even and ≥4, got {n}")));
        }
        Self::new(target_angle, n / 2, order)
    }

    /// `|U₁₂(π)|²` required of the half sequence.
    pub fn amplitude_target(&self) -> f64 {
        (self.target_angle / 4.0).sin().powi(2)
    }
}

/// How far a half sequence is from satisfying its conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResidual {
    /// `|U₁₂(π)|² − sin²(θ/4)`.
    pub amplitude_residual: f64,
    /// Even derivatives `d², d⁴` (and `d⁶` at order 2) of `|U₁₂|²` at `A = π`.
    pub derivative_residuals: Vec<f64>,
    /// Odd derivatives `d¹, d³ (, d⁵)`; they vanish identically.
    pub odd_derivatives: Vec<f64>,
    pub order: u8,
}

impl ConditionResidual {
    /// The quantities driven to zero: amplitude, then the nullified derivatives.
    pub fn conditions(&self) -> Vec<f64> {
        let mut out = vec![self.amplitude_residual];
        out.extend(self.derivative_residuals.iter().take(self.order as usize));
        out
    }

    pub fn max_condition(&self) -> f64 {
        self.conditions().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

fn check_ratios(problem: &SynthesisProblem, ratios: &[f64]) -> Result<()> {
    if ratios.len() != problem.half_pieces {
        return Err(DmcpError::DimensionMismatch { expected: problem.half_pieces, found: ratios.len() });
    }
    for (i, &r) in ratios.iter().enumerate() {
        ensure_finite(&format!("ratio {}", i + 1), r)?;
    }
    Ok(())
}

fn residual_from(problem: &SynthesisProblem, d: &[f64]) -> ConditionResidual {
    let top = 2 * problem.order as usize + 2;
    ConditionResidual {
        amplitude_residual: d[0] - problem.amplitude_target(),
        derivative_residuals: (2..=top).step_by(2).map(|k| d[k]).collect(),
        odd_derivatives: (1..top).step_by(2).map(|k| d[k]).collect(),
        order: problem.order,
    }
}

/// Residuals with exact derivatives.
pub fn pp_residuals(problem: &SynthesisProblem, ratios: &[f64]) -> Result<ConditionResidual> {
    check_ratios(problem, ratios)?;
    let d = taylor_derivatives(ratios, 2 * problem.order as usize + 2);
    Ok(residual_from(problem, &d))
}

/// Residuals with extrapolated finite-difference derivatives of the propagated profile.
pub fn pp_residuals_fd(problem: &SynthesisProblem, ratios: &[f64]) -> Result<ConditionResidual> {
    check_ratios(problem, ratios)?;
    let d = finite_difference_derivatives(ratios, 2 * problem.order as usize + 2)?;
    Ok(residual_from(problem, &d))
}

/// Newton solve of the point-to-point conditions, with diagnostics.
pub fn solve_pp_detailed(problem: &SynthesisProblem, seed: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome> {
    check_ratios(problem, seed)?;
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DmcpError::NoConvergence { iterations: 0, residual_norm: f64::INFINITY });
        }
        let d = taylor_derivatives(x, 2 * problem.order as usize);
        let mut out = vec![d[0] - problem.amplitude_target()];
        out.extend((1..=problem.order as usize).map(|k| d[2 * k]));
        Ok(out)
    };
    newton::solve(f, seed, opts)
}

/// Ratios `r₁..r_{N/2}` solving the problem, starting from `seed`.
pub fn solve_pp(problem: &SynthesisProblem, seed: &[f64]) -> Result<Vec<f64>> {
    solve_pp_detailed(problem, seed, &NewtonOptions::default()).map(|o| o.solution)
}

/// Anti-palindromic extension `(r₁..r_k, −r_k..−r₁)`.
pub fn make_universal(pp_ratios: &[f64], target_angle: f64, order: u8) -> Result<CompositeSequence> {
    let mut ratios = pp_ratios.to_vec();
    ratios.extend(pp_ratios.iter().rev().map(|r| -r));
    CompositeSequence::from_ratios(&ratios, target_angle, order, SequenceKind::Universal)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub target: Rotation,
    /// `1 − |tr(U†V)|/2` between the zero-error product and the target.
    pub gate_distance: f64,
    pub tolerance: f64,
    /// Conditions evaluated on the first half of the sequence.
    pub half_residuals: Option<ConditionResidual>,
    pub passed: bool,
}

/// Checks that a universal sequence realizes its target rotation at zero error.
///
/// The half-sequence residuals are reported but do not decide the outcome:
/// ratios rounded to a few decimals miss the amplitude condition by more than
/// they miss the gate.
pub fn verify_sequence(seq: &CompositeSequence, tolerance: f64) -> Result<VerificationReport> {
    let target = seq.target_rotation()?;
    let realized = compose(seq, &ErrorModel::zero())?;
    let distance = gate_distance(&realized, &target.matrix());
    let half_residuals = if seq.kind() == SequenceKind::Universal && seq.len() >= 4 {
        let order = seq.order().clamp(1, 2);
        let half = seq.len() / 2;
        let problem = SynthesisProblem { target_angle: seq.target_angle(), half_pieces: half, order };
        if half > order as usize {
            Some(pp_residuals(&problem, &seq.ratios()[..half])?)
        } else {
            None
        }
    } else {
        None
    };
    Ok(VerificationReport { target, gate_distance: distance, tolerance, passed: distance < tolerance, half_residuals })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::tables::PUBLISHED;

    #[test]
    fn bare_resonant_pair_residual() {
        let p = SynthesisProblem::new(PI, 2, 1).unwrap();
        let r = pp_residuals(&p, &[0.0, 0.0]).unwrap();
        assert!((r.amplitude_residual + 0.5).abs() < 1e-14);
    }

    #[test]
    fn derives_pi_pair() {
        let p = SynthesisProblem::new(PI, 2, 1).unwrap();
        let r = solve_pp(&p, &[5.0, 1.0]).unwrap();
        assert!((r[0] - 5.52).abs() < 0.01 && (r[1] - 0.69).abs() < 0.01, "{r:?}");
        assert!(pp_residuals(&p, &r).unwrap().max_condition() < 1e-10);
    }

    #[test]
    fn negated_seed_gives_negated_family() {
        let p = SynthesisProblem::new(PI, 2, 1).unwrap();
        let r = solve_pp(&p, &[-5.0, -1.0]).unwrap();
        assert!((r[0] + 5.52).abs() < 0.01 && (r[1] + 0.69).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn derives_half_pi_pair() {
        let p = SynthesisProblem::new(FRAC_PI_2, 2, 1).unwrap();
        let r = solve_pp(&p, &[12.0, 2.0]).unwrap();
        assert!((r[0] - 11.99).abs() < 0.01 && (r[1] - 1.94).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn derives_second_order_half_pi_triple() {
        let p = SynthesisProblem::new(FRAC_PI_2, 3, 2).unwrap();
        let r = solve_pp(&p, &[-52.0, -7.0, -1.7]).unwrap();
        for (a, b) in r.iter().zip([-52.23, -6.76, -1.74]) {
            assert!((a - b).abs() < 0.01, "{r:?}");
        }
    }

    #[test]
    fn short_sequences_rejected() {
        assert!(SynthesisProblem::for_sequence_length(PI, 2, 1).is_err());
        assert!(SynthesisProblem::for_sequence_length(PI, 5, 1).is_err());
        assert!(SynthesisProblem::new(PI, 2, 2).is_err());
    }

    #[test]
    fn published_rows_verify() {
        for row in &PUBLISHED {
            let rep = verify_sequence(&row.sequence(), 1e-3).unwrap();
            assert!(rep.passed, "{}: {}", row.name, rep.gate_distance);
        }
    }

    #[test]
    fn universal_extension_is_antipalindromic() {
        let seq = make_universal(&[5.52, 0.69], PI, 1).unwrap();
        assert_eq!(seq.ratios(), vec![5.52, 0.69, -0.69, -5.52]);
    }
}
