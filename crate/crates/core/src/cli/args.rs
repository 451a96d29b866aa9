//! Value parsers and shared argument groups.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dmcp::robustness::Metric;
use dmcp::{CompositeSequence, DetuningErrorMode, SequenceKind};

use super::CliError;

/// Angles like `pi`, `pi/2`, `3pi/4`, `2*pi/3`, `-pi/2` or plain radians.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("cannot parse angle '{s}'"));
    };
    let head = t[..pos].trim_end_matches('*');
    let factor = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("cannot parse angle '{s}'"))?,
    };
    let tail = &t[pos + 2..];
    let divisor = if tail.is_empty() {
        1.0
    } else {
        let d = tail.strip_prefix('/').ok_or_else(|| format!("cannot parse angle '{s}'"))?;
        d.parse::<f64>().map_err(|_| format!("cannot parse angle '{s}'"))?
    };
    if divisor == 0.0 {
        return Err(format!("angle '{s}' divides by zero"));
    }
    Ok(factor * PI / divisor)
}

/// Sample points parsed from the command line.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples(pub Vec<f64>);

/// `start:stop:step` (inclusive), a single value, or a comma list.
pub fn parse_samples(s: &str) -> Result<Samples, String> {
    parse_range(s).map(Samples)
}

pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("cannot parse '{p}' in range '{s}'"));
    match parts.as_slice() {
        [single] => single.split(',').map(num).collect(),
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if h.is_nan() || h <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
                return Err(format!("range '{s}' needs start ≤ stop and a positive step"));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            if count > 10_000_000 {
                return Err(format!("range '{s}' has too many samples"));
            }
            Ok((0..count).map(|k| a + k as f64 * h).collect())
        }
        _ => Err(format!("cannot parse range '{s}', expected start:stop:step")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output format (default depends on the command)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; defaults to $DMCP_OUT_DIR/<name> if set, else stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Universal,
    Pp,
}

/// Where the pulse sequence comes from.
#[derive(Args, Debug, Clone)]
pub struct SequenceArgs {
    /// Built-in table row (pi-n4-o1, pi-n6-o1, pi-n6-o2, pi2-n4-o1, pi2-n6-o1, pi2-n6-o2)
    #[arg(long, value_name = "NAME")]
    pub table: Option<String>,
    /// Explicit detuning ratios Δ/Ω, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "R1,R2,..")]
    pub ratios: Option<Vec<f64>>,
    /// Target angle for --ratios
    #[arg(long, value_parser = parse_angle, default_value = "pi", allow_hyphen_values = true)]
    pub theta: f64,
    /// Order recorded for --ratios
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    /// Construction of --ratios
    #[arg(long, value_enum, default_value = "universal")]
    pub kind: KindArg,
    /// A single resonant π pulse
    #[arg(long)]
    pub single_resonant_pi: bool,
    /// A single resonant pulse of the given area
    #[arg(long, value_parser = parse_angle, value_name = "ANGLE")]
    pub resonant: Option<f64>,
}

impl SequenceArgs {
    pub fn build(&self) -> Result<(String, CompositeSequence), CliError> {
        let chosen = [self.table.is_some(), self.ratios.is_some(), self.single_resonant_pi, self.resonant.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if chosen != 1 {
            return Err(CliError::usage("choose exactly one of --table, --ratios, --single-resonant-pi or --resonant"));
        }
        if let Some(name) = &self.table {
            let row = dmcp::tables::lookup(name).map_err(|e| CliError::usage(e.to_string()))?;
            return Ok((name.clone(), row.sequence()));
        }
        if let Some(ratios) = &self.ratios {
            let kind = match self.kind {
                KindArg::Universal => SequenceKind::Universal,
                KindArg::Pp => SequenceKind::PointToPoint,
            };
            let seq = CompositeSequence::from_ratios(ratios, self.theta, self.order, kind)?;
            let label = ratios.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
            return Ok((format!("ratios[{label}]"), seq));
        }
        let angle = self.resonant.unwrap_or(PI);
        Ok((format!("resonant({angle})"), CompositeSequence::resonant(angle)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    State,
    Population,
    Renormalized,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::State => Metric::State,
            MetricArg::Population => Metric::Population,
            MetricArg::Renormalized => Metric::Renormalized,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Relative,
    Absolute,
}

impl From<ModeArg> for DetuningErrorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Relative => DetuningErrorMode::Relative,
            ModeArg::Absolute => DetuningErrorMode::Absolute,
        }
    }
}
