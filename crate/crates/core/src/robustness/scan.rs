use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{fidelity_under, InitialStateSet, Metric, Protocol};
use crate::dynamics::{DetuningErrorMode, ErrorModel};
use crate::error::{ensure_finite, DmcpError, Result};
use crate::linalg::StateVector;

/// Largest area error considered by [`robustness_radius`].
pub const RADIUS_SCAN_LIMIT: f64 = 1.0;
const RADIUS_SCAN_STEP: f64 = 1e-3;
const RADIUS_RESOLUTION: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub name: String,
    pub unit: String,
    pub samples: Vec<f64>,
}

impl ScanAxis {
    pub fn new(name: &str, unit: &str, samples: Vec<f64>) -> Self {
        Self { name: name.into(), unit: unit.into(), samples }
    }
}

/// One named quantity on the scan grid, flattened row-major over the axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub sequence: String,
    pub error_model: String,
    pub initial_state: String,
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub axes: Vec<ScanAxis>,
    pub series: Vec<Series>,
    pub metadata: ScanMetadata,
}

/// Rounds to 12 significant digits and prints the shortest exact form.
fn fmt12(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    rounded.to_string()
}

impl ScanResult {
    pub fn new(axes: Vec<ScanAxis>, series: Vec<Series>, metadata: ScanMetadata) -> Result<Self> {
        let cells: usize = axes.iter().map(|a| a.samples.len()).product();
        for s in &series {
            if s.values.len() != cells {
                return Err(DmcpError::DimensionMismatch { expected: cells, found: s.values.len() });
            }
        }
        Ok(Self { axes, series, metadata })
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.samples.len()).collect()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    /// Values of the first series.
    pub fn values(&self) -> &[f64] {
        &self.series[0].values
    }

    /// Flat index of a multi-index.
    pub fn index(&self, at: &[usize]) -> usize {
        at.iter().zip(self.shape()).fold(0, |acc, (&i, n)| acc * n + i)
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut out = vec![0; shape.len()];
        for (slot, n) in out.iter_mut().zip(shape).rev() {
            *slot = flat % n;
            flat /= n;
        }
        out
    }

    /// Header of axis names and series names, then one row per grid point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| DmcpError::InvalidInput(format!("writing CSV: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> =
            self.axes.iter().map(|a| a.name.as_str()).chain(self.series.iter().map(|s| s.name.as_str())).collect();
        w.write_record(&header).map_err(io)?;
        let cells: usize = self.shape().iter().product();
        for flat in 0..cells {
            let idx = self.unravel(flat);
            let record: Vec<String> = idx
                .iter()
                .zip(&self.axes)
                .map(|(&i, a)| fmt12(a.samples[i]))
                .chain(self.series.iter().map(|s| fmt12(s.values[flat])))
                .collect();
            w.write_record(&record).map_err(io)?;
        }
        w.flush().map_err(|e| DmcpError::InvalidInput(format!("writing CSV: {e}")))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    fn nest(&self, values: &[f64], dims: &[usize]) -> Value {
        match dims {
            [] | [_] => Value::Array(values.iter().map(|&v| json!(fmt12(v).parse::<f64>().unwrap_or(v))).collect()),
            [n, rest @ ..] => {
                let stride = values.len() / n;
                Value::Array((0..*n).map(|i| self.nest(&values[i * stride..(i + 1) * stride], rest)).collect())
            }
        }
    }

    /// Axes, series as nested arrays (one nesting level per axis) and metadata.
    pub fn to_json(&self) -> Value {
        let shape = self.shape();
        let series: Vec<Value> =
            self.series.iter().map(|s| json!({ "name": s.name, "values": self.nest(&s.values, &shape) })).collect();
        json!({ "axes": self.axes, "series": series, "metadata": self.metadata })
    }
}

fn check_samples(name: &str, samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return Err(DmcpError::InvalidInput(format!("{name} range is empty")));
    }
    samples.iter().try_for_each(|&v| ensure_finite(name, v))
}

fn state_label(state: &StateVector) -> String {
    let amps: Vec<String> = state
        .amplitudes()
        .iter()
        .map(|a| format!("{}{}{}i", fmt12(a.re), if a.im < 0.0 { "-" } else { "+" }, fmt12(a.im.abs())))
        .collect();
    format!("[{}]", amps.join(", "))
}

/// Fidelity versus a common fractional area error, one row per initial state.
pub fn area_scan<P: Protocol + ?Sized>(
    protocol: &P,
    states: &InitialStateSet,
    eps: &[f64],
    metric: Metric,
) -> Result<ScanResult> {
    check_samples("epsilon", eps)?;
    if states.dim() != protocol.dimension() {
        return Err(DmcpError::DimensionMismatch { expected: protocol.dimension(), found: states.dim() });
    }
    let cells: Vec<(usize, f64)> = (0..states.len()).flat_map(|s| eps.iter().map(move |&e| (s, e))).collect();
    let values = cells
        .par_iter()
        .map(|&(s, e)| fidelity_under(protocol, &states.states[s].1, &ErrorModel::area(e), metric))
        .collect::<Result<Vec<f64>>>()?;
    let names: Vec<&str> = states.states.iter().map(|(n, _)| n.as_str()).collect();
    let metadata =
        ScanMetadata { error_model: "area".into(), initial_state: names.join(";"), metric, ..Default::default() };
    ScanResult::new(
        vec![
            ScanAxis::new("state", "index", (0..states.len()).map(|i| i as f64).collect()),
            ScanAxis::new("epsilon", "fraction", eps.to_vec()),
        ],
        vec![Series { name: "fidelity".into(), values }],
        metadata,
    )
}

/// Largest `ε*` with infidelity at most `threshold` for every `|ε| ≤ ε*`.
///
/// Steps outward in increments of 10⁻³ until either sign of `ε` exceeds the
/// threshold, then bisects the last step. Returns [`RADIUS_SCAN_LIMIT`] if the
/// threshold is never crossed.
pub fn robustness_radius<P: Protocol + ?Sized>(
    protocol: &P,
    state: &StateVector,
    threshold: f64,
    metric: Metric,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(DmcpError::InvalidInput(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let infidelity = |e: f64| -> Result<f64> {
        let plus = 1.0 - fidelity_under(protocol, state, &ErrorModel::area(e), metric)?;
        let minus = 1.0 - fidelity_under(protocol, state, &ErrorModel::area(-e), metric)?;
        Ok(plus.max(minus))
    };
    let at_zero = infidelity(0.0)?;
    if at_zero > threshold {
        return Err(DmcpError::DegenerateInput(format!(
            "infidelity without error is {at_zero:.3e}, above the threshold {threshold:.3e}"
        )));
    }
    let steps = (RADIUS_SCAN_LIMIT / RADIUS_SCAN_STEP).round() as usize;
    let mut inside = 0.0;
    for k in 1..=steps {
        let e = k as f64 * RADIUS_SCAN_STEP;
        if infidelity(e)? > threshold {
            let mut outside = e;
            while outside - inside > RADIUS_RESOLUTION {
                let mid = 0.5 * (inside + outside);
                if infidelity(mid)? > threshold {
                    outside = mid;
                } else {
                    inside = mid;
                }
            }
            return Ok(inside);
        }
        inside = e;
    }
    Ok(RADIUS_SCAN_LIMIT)
}

/// Fidelity over correlated fractional coupling and detuning errors.
///
/// Every segment receives the same error pair; durations stay at their
/// error-free values.
pub fn scan_2d<P: Protocol + ?Sized>(
    protocol: &P,
    state: &StateVector,
    coupling_errors: &[f64],
    detuning_errors: &[f64],
    mode: DetuningErrorMode,
    metric: Metric,
) -> Result<ScanResult> {
    check_samples("coupling error", coupling_errors)?;
    check_samples("detuning error", detuning_errors)?;
    let n = protocol.segment_count();
    let cells: Vec<(f64, f64)> =
        coupling_errors.iter().flat_map(|&c| detuning_errors.iter().map(move |&d| (c, d))).collect();
    let values = cells
        .par_iter()
        .map(|&(c, d)| fidelity_under(protocol, state, &ErrorModel::uniform(n, c, d, mode), metric))
        .collect::<Result<Vec<f64>>>()?;
    let mode_name = match mode {
        DetuningErrorMode::Relative => "relative",
        DetuningErrorMode::Absolute => "absolute",
    };
    let metadata = ScanMetadata {
        error_model: format!("coupling and detuning ({mode_name} detuning errors)"),
        initial_state: state_label(state),
        metric,
        ..Default::default()
    };
    let detuning_unit = match mode {
        DetuningErrorMode::Relative => "fraction of detuning",
        DetuningErrorMode::Absolute => "fraction of coupling",
    };
    ScanResult::new(
        vec![
            ScanAxis::new("coupling_error", "fraction", coupling_errors.to_vec()),
            ScanAxis::new("detuning_error", detuning_unit, detuning_errors.to_vec()),
        ],
        vec![Series { name: "fidelity".into(), values }],
        metadata,
    )
}

/// Infidelity versus decay rate of the upper level, raw and renormalized.
pub fn decoherence_scan<P: Protocol + ?Sized>(protocol: &P, state: &StateVector, gammas: &[f64]) -> Result<ScanResult> {
    check_samples("gamma", gammas)?;
    if let Some(g) = gammas.iter().find(|g| **g < 0.0) {
        return Err(DmcpError::InvalidInput(format!("decay rates must be non-negative, got {g}")));
    }
    let pairs = gammas
        .par_iter()
        .map(|&g| {
            let err = ErrorModel::relaxation(g);
            let raw = fidelity_under(protocol, state, &err, Metric::State)?;
            let renormalized = fidelity_under(protocol, state, &err, Metric::Renormalized)?;
            Ok((1.0 - raw, 1.0 - renormalized))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (raw, renormalized): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let metadata = ScanMetadata {
        error_model: "relaxation".into(),
        initial_state: state_label(state),
        metric: Metric::State,
        ..Default::default()
    };
    ScanResult::new(
        vec![ScanAxis::new("gamma", "coupling", gammas.to_vec())],
        vec![
            Series { name: "infidelity_raw".into(), values: raw },
            Series { name: "infidelity_renormalized".into(), values: renormalized },
        ],
        metadata,
    )
}
