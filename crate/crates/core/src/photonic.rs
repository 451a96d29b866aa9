//! Mapping composite sequences onto coupled-waveguide directional couplers.
//!
//! Propagation distance plays the role of time. Two waveguides of widths
//! `w₁, w₂` separated by a gap `g` have coupling `Ω(g) = a e^{−bg}` and
//! detuning `Δ = (β(w₁) − β(w₂))/2`; the amplitudes obey the same
//! Hamiltonian as the two-level system. Width discontinuities between
//! segments are treated as ideal interfaces.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    apply, segment_propagator, segment_propagator_partial, CompositeSequence, ErrorModel, PulseSegment,
};
use crate::error::{ensure_finite, DmcpError, Result};
use crate::linalg::{ComplexMatrix, StateVector};

/// Relative tolerance between a requested ratio and the one a layout realizes.
pub const RATIO_TOLERANCE: f64 = 0.02;
const MAX_FIT_RESIDUAL: f64 = 0.05;

fn calibration(msg: impl Into<String>) -> DmcpError {
    DmcpError::Calibration(msg.into())
}

/// Two-column CSV with a header row.
fn read_pairs<R: Read>(reader: R, expected_header: [&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| calibration(format!("reading header: {e}")))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != expected_header {
        return Err(calibration(format!(
            "expected header '{}', found '{}'",
            expected_header.join(","),
            names.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| calibration(format!("row {}: {e}", line + 2)))?;
        if record.len() != 2 {
            return Err(calibration(format!("row {}: expected 2 columns, found {}", line + 2, record.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| calibration(format!("row {}: '{s}' is not a finite number", line + 2)))
        };
        out.push((parse(&record[0])?, parse(&record[1])?));
    }
    if out.len() < 2 {
        return Err(calibration(format!("need at least 2 data rows, found {}", out.len())));
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| calibration(format!("{}: {e}", path.display())))
}

/// Gap dependence of the coupling, `Ω(g) = a e^{−bg}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingCalibration {
    pub a: f64,
    pub b: f64,
    /// Largest relative deviation of the fit from the table it came from.
    pub fit_residual: Option<f64>,
}

impl CouplingCalibration {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_finite("a", a)?;
        ensure_finite("b", b)?;
        if a <= 0.0 || b <= 0.0 {
            return Err(calibration(format!("coupling model needs a > 0 and b > 0, got a={a}, b={b}")));
        }
        Ok(Self { a, b, fit_residual: None })
    }

    pub fn omega(&self, gap: f64) -> f64 {
        self.a * (-self.b * gap).exp()
    }

    /// Least-squares fit of `ln Ω` against `g`.
    pub fn fit(table: &[(f64, f64)]) -> Result<Self> {
        if table.len() < 2 {
            return Err(calibration("coupling fit needs at least 2 points"));
        }
        let mut pts = table.to_vec();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        for &(g, omega) in &pts {
            if !(g.is_finite() && omega.is_finite()) || omega <= 0.0 || g < 0.0 {
                return Err(calibration(format!("coupling data must be finite and positive, got ({g}, {omega})")));
            }
        }
        for w in pts.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(calibration(format!("duplicate gap {}", w[0].0)));
            }
            if w[1].1 >= w[0].1 {
                return Err(calibration(format!(
                    "coupling must decrease with gap: Ω({})={} but Ω({})={}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        let n = pts.len() as f64;
        let mean_g = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_l = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mean_g) * (p.1.ln() - mean_l)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mean_g).powi(2)).sum();
        let slope = sxy / sxx;
        let mut cal = Self::new((mean_l - slope * mean_g).exp(), -slope)?;
        let residual = pts.iter().map(|&(g, o)| (cal.omega(g) / o - 1.0).abs()).fold(0.0, f64::max);
        if residual >= MAX_FIT_RESIDUAL {
            return Err(calibration(format!(
                "exponential coupling model misfits the table by {:.1}%",
                100.0 * residual
            )));
        }
        cal.fit_residual = Some(residual);
        Ok(cal)
    }

    /// Fit from CSV with header `g_um,omega_rad_per_um`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        Self::fit(&read_pairs(reader, ["g_um", "omega_rad_per_um"])?)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv(open(path)?)
    }
}

/// Propagation constant versus width, linearly interpolated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaCalibration {
    widths: Vec<f64>,
    betas: Vec<f64>,
}

impl BetaCalibration {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(calibration("β table needs at least 2 points"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(calibration(format!("widths must be strictly increasing ({} then {})", w[0].0, w[1].0)));
            }
        }
        let rising = points[1].1 > points[0].1;
        for w in points.windows(2) {
            if (w[1].1 > w[0].1) != rising || w[1].1 == w[0].1 {
                return Err(calibration(format!("β must be strictly monotone in width (at w = {})", w[1].0)));
            }
        }
        Ok(Self { widths: points.iter().map(|p| p.0).collect(), betas: points.iter().map(|p| p.1).collect() })
    }

    /// Parse CSV with header `w_um,beta_rad_per_um`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        Self::new(&read_pairs(reader, ["w_um", "beta_rad_per_um"])?)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv(open(path)?)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.widths[0], self.widths[self.widths.len() - 1])
    }

    pub fn beta(&self, width: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(width >= lo && width <= hi) {
            return Err(calibration(format!("width {width} outside the calibrated range [{lo}, {hi}]")));
        }
        let k = self.widths.partition_point(|&w| w <= width).clamp(1, self.widths.len() - 1);
        let (w0, w1) = (self.widths[k - 1], self.widths[k]);
        let t = (width - w0) / (w1 - w0);
        Ok(self.betas[k - 1] + t * (self.betas[k] - self.betas[k - 1]))
    }

    /// `(β(w₁) − β(w₂))/2`.
    pub fn detuning(&self, w1: f64, w2: f64) -> Result<f64> {
        Ok(0.5 * (self.beta(w1)? - self.beta(w2)?))
    }
}

/// Symmetric widths `(w₀ + δ, w₀ − δ)` (or swapped) realizing `Δ = ratio · Ω(g)`.
pub fn widths_for_ratio(
    ratio: f64,
    beta: &BetaCalibration,
    coupling: &CouplingCalibration,
    gap: f64,
    w0: f64,
) -> Result<(f64, f64)> {
    ensure_finite("ratio", ratio)?;
    ensure_finite("gap", gap)?;
    let target = ratio * coupling.omega(gap);
    let (lo, hi) = beta.range();
    if !(w0 > lo && w0 < hi) {
        return Err(calibration(format!("base width {w0} must lie inside the calibrated range ({lo}, {hi})")));
    }
    if target == 0.0 {
        return Ok((w0, w0));
    }
    let max_delta = (w0 - lo).min(hi - w0);
    let split = |d: f64| beta.detuning(w0 + d, w0 - d);
    let reach = split(max_delta)?;
    if target.abs() > reach.abs() {
        return Err(DmcpError::OutOfRange { requested: target, max_attainable: reach.abs() });
    }
    let (mut a, mut b) = (0.0, max_delta);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if split(mid)?.abs() < target.abs() {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-14 * max_delta {
            break;
        }
    }
    let delta = 0.5 * (a + b);
    // Widening the first guide raises Δ when β increases with width.
    if (reach > 0.0) == (target > 0.0) {
        Ok((w0 + delta, w0 - delta))
    } else {
        Ok((w0 - delta, w0 + delta))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSegment {
    pub w1: f64,
    pub w2: f64,
    pub gap: f64,
    pub length: f64,
    pub requested_ratio: f64,
    pub realized_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveguideLayout {
    pub segments: Vec<WaveguideSegment>,
    pub base_width: f64,
    pub gap: f64,
    /// Coupling `Ω(g)` shared by all segments.
    pub coupling: f64,
    pub total_length: f64,
    pub source_ratios: Vec<f64>,
    pub target_angle: f64,
}

/// Widths and lengths for every segment of `seq` at a common gap.
pub fn layout_from_sequence(
    seq: &CompositeSequence,
    beta: &BetaCalibration,
    coupling: &CouplingCalibration,
    gap: f64,
    w0: f64,
) -> Result<WaveguideLayout> {
    let omega = coupling.omega(gap);
    let mut segments = Vec::with_capacity(seq.len());
    for seg in seq.segments() {
        let (w1, w2) = widths_for_ratio(seg.ratio(), beta, coupling, gap, w0)?;
        let detuning = beta.detuning(w1, w2)?;
        let realized = detuning / omega;
        if (realized - seg.ratio()).abs() > RATIO_TOLERANCE * seg.ratio().abs() + 1e-12 {
            return Err(calibration(format!("realized ratio {realized} misses requested {}", seg.ratio())));
        }
        let length = seg.nominal_area() / omega.hypot(detuning);
        segments.push(WaveguideSegment { w1, w2, gap, length, requested_ratio: seg.ratio(), realized_ratio: realized });
    }
    let total_length = segments.iter().map(|s| s.length).sum();
    Ok(WaveguideLayout {
        segments,
        base_width: w0,
        gap,
        coupling: omega,
        total_length,
        source_ratios: seq.ratios(),
        target_angle: seq.target_angle(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityPoint {
    pub z: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
}

impl WaveguideLayout {
    /// Segments as realized by the device, with `z` as time.
    fn pulse_segments(&self) -> Result<Vec<PulseSegment>> {
        self.segments
            .iter()
            .map(|s| {
                PulseSegment::new(
                    s.realized_ratio,
                    self.coupling,
                    s.length * self.coupling.hypot(s.realized_ratio * self.coupling),
                )
            })
            .collect()
    }

    /// Transfer matrix of the whole device.
    pub fn transfer_matrix(&self) -> Result<ComplexMatrix> {
        let err = ErrorModel::zero();
        let mut total = ComplexMatrix::identity(2);
        for (k, seg) in self.pulse_segments()?.iter().enumerate() {
            total = segment_propagator(seg, &err, k)?.matmul(&total)?;
        }
        Ok(total)
    }

    /// Layout document: segments and totals.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "segments": self.segments,
            "segment_count": self.segments.len(),
            "base_width": self.base_width,
            "gap": self.gap,
            "coupling": self.coupling,
            "total_length": self.total_length,
            "source_ratios": self.source_ratios,
            "target_angle": self.target_angle,
        })
    }
}

/// Guide intensities along the device, `samples_per_segment` per segment
/// including both ends; interfaces appear once.
pub fn propagate_intensity(
    layout: &WaveguideLayout,
    input: &StateVector,
    samples_per_segment: usize,
) -> Result<Vec<IntensityPoint>> {
    if samples_per_segment < 2 {
        return Err(DmcpError::InvalidInput(format!("need at least 2 samples per segment, got {samples_per_segment}")));
    }
    if input.dim() != 2 {
        return Err(DmcpError::DimensionMismatch { expected: 2, found: input.dim() });
    }
    let err = ErrorModel::zero();
    let point = |z: f64, s: &StateVector| {
        let p = s.populations();
        IntensityPoint { z, i1: p[0], i2: p[1] }
    };
    let mut out = vec![point(0.0, input)];
    let mut state = input.clone();
    let mut z0 = 0.0;
    for (k, (seg, geo)) in layout.pulse_segments()?.iter().zip(&layout.segments).enumerate() {
        for j in 1..samples_per_segment {
            let f = j as f64 / (samples_per_segment - 1) as f64;
            let u = segment_propagator_partial(seg, &err, k, f)?;
            out.push(point(z0 + f * geo.length, &apply(&u, &state)?));
        }
        state = apply(&segment_propagator(seg, &err, k)?, &state)?;
        z0 += geo.length;
    }
    Ok(out)
}

/// CSV with header `z,I1,I2`.
pub fn intensity_csv(points: &[IntensityPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["z", "I1", "I2"]).map_err(|e| DmcpError::InvalidInput(e.to_string()))?;
    for p in points {
        w.write_record([p.z.to_string(), p.i1.to_string(), p.i2.to_string()])
            .map_err(|e| DmcpError::InvalidInput(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| DmcpError::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}
