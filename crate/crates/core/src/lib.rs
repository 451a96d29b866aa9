//! Detuning-modulated composite pulses: synthesis, propagation and
//! robustness analysis for two-level systems, spin-j lifts and coupled
//! waveguide couplers.

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod nlevel;
pub mod photonic;
pub mod robustness;
pub mod synthesis;
pub mod tables;

pub use dynamics::{
    apply, bloch_trajectory, compose, gate_distance, ideal_rotation, segment_propagator, Axis, BlochPoint,
    CompositeSequence, DetuningErrorMode, ErrorModel, PulseSegment, Rotation, SequenceKind,
};
pub use error::{DmcpError, Result};
pub use linalg::{ComplexMatrix, StateVector};
