use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use dmcp::nlevel::{nlevel_trajectory, LiftedSequence};
use dmcp::photonic::{intensity_csv, layout_from_sequence, propagate_intensity, BetaCalibration, CouplingCalibration};
use dmcp::robustness::{
    area_scan, decoherence_scan, haar_state, robustness_radius, scan_2d, InitialStateSet, Metric, Protocol, ScanResult,
};
use dmcp::synthesis::{
    make_universal, pp_residuals, pp_residuals_fd, solve_pp_detailed, verify_sequence, NewtonOptions, SynthesisProblem,
};
use dmcp::{CompositeSequence, ErrorModel, StateVector};

use super::args::{Format, OutputArgs};
use super::{
    AreaArgs, CliError, DecoherenceArgs, DeriveArgs, GridArgs, NlevelArgs, RadiusArgs, TablesArgs, VerifyArgs,
    WaveguideArgs,
};

const BUNDLED_COUPLING: &str = include_str!("../../data/coupling_synthetic.csv");
const BUNDLED_BETA: &str = include_str!("../../data/beta_synthetic.csv");

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn destination(out: &OutputArgs, stem: &str, format: Format) -> Option<PathBuf> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    out.out.clone().or_else(|| {
        std::env::var_os("DMCP_OUT_DIR")
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{stem}.{ext}")))
    })
}

/// Renders in the chosen format and writes to the destination or stdout.
fn emit(
    out: &OutputArgs,
    default: Format,
    stem: &str,
    csv: impl FnOnce() -> Result<String, CliError>,
    json: impl FnOnce() -> Result<Value, CliError>,
) -> Result<(), CliError> {
    let format = out.format.unwrap_or(default);
    let text = match format {
        Format::Csv => csv()?,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json()?).expect("JSON values serialize");
            s.push('\n');
            s
        }
    };
    match destination(out, stem, format) {
        Some(path) => write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_scan(out: &OutputArgs, stem: &str, scan: &ScanResult) -> Result<(), CliError> {
    emit(out, Format::Csv, stem, || Ok(scan.to_csv_string()?), || Ok(scan.to_json()))
}

fn protocol(seq: CompositeSequence, levels: usize) -> Result<Box<dyn Protocol>, CliError> {
    if levels == 2 {
        Ok(Box::new(seq))
    } else {
        Ok(Box::new(LiftedSequence::new(seq, levels)?))
    }
}

fn state_from(amps: &[f64], dim: usize) -> Result<StateVector, CliError> {
    if amps.len() != dim {
        return Err(CliError::usage(format!("state needs {dim} amplitudes, got {}", amps.len())));
    }
    Ok(StateVector::from_real(amps)?)
}

fn same_angle(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

pub fn derive(a: &DeriveArgs, seed: u64) -> Result<(), CliError> {
    let problem = SynthesisProblem::for_sequence_length(a.theta, a.n, a.order)?;
    let half = problem.half_pieces;
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    match &a.init {
        Some(init) => {
            if init.len() != half {
                return Err(CliError::usage(format!("--init needs {half} ratios, got {}", init.len())));
            }
            seeds.push(init.clone());
        }
        None => {
            for row in &dmcp::tables::PUBLISHED {
                if same_angle(row.target_angle, a.theta) && row.ratios.len() == a.n && row.order == a.order {
                    seeds.push(row.half_ratios().to_vec());
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..a.restarts {
                seeds.push((0..half).map(|_| rng.random_range(-12.0..12.0)).collect());
            }
        }
    }

    let mut last_err = None;
    for (attempt, start) in seeds.iter().enumerate() {
        let outcome = match solve_pp_detailed(&problem, start, &NewtonOptions::default()) {
            Ok(o) => o,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let seq = make_universal(&outcome.solution, a.theta, a.order)?;
        let report = verify_sequence(&seq, a.tolerance)?;
        if !report.passed && a.init.is_none() {
            continue;
        }
        let exact = pp_residuals(&problem, &outcome.solution)?;
        let fd = pp_residuals_fd(&problem, &outcome.solution)?;
        let ratios = seq.ratios();
        emit(
            &a.output,
            Format::Json,
            "derive",
            || {
                let mut s = String::from("index,ratio\n");
                for (i, r) in ratios.iter().enumerate() {
                    s.push_str(&format!("{},{r}\n", i + 1));
                }
                Ok(s)
            },
            || {
                Ok(json!({
                    "theta": a.theta,
                    "n": a.n,
                    "order": a.order,
                    "half_ratios": outcome.solution,
                    "ratios": ratios,
                    "start": start,
                    "attempt": attempt + 1,
                    "iterations": outcome.iterations,
                    "residual_norm": outcome.residual_norm,
                    "conditions": exact,
                    "conditions_finite_difference": fd,
                    "verification": report,
                }))
            },
        )?;
        if !report.passed {
            return Err(CliError::convergence(format!(
                "derived sequence misses its target: gate distance {:.3e} ≥ {:.1e}",
                report.gate_distance, a.tolerance
            )));
        }
        return Ok(());
    }
    let detail = last_err.map(|e| e.to_string()).unwrap_or_else(|| "no start verified".into());
    Err(CliError::convergence(format!("no solution found from {} starting points: {detail}", seeds.len())))
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let sequences: Vec<(String, CompositeSequence)> = if a.all {
        dmcp::tables::PUBLISHED.iter().map(|r| (r.name.to_string(), r.sequence())).collect()
    } else {
        vec![a.sequence.build()?]
    };
    let mut reports = Vec::new();
    for (name, seq) in &sequences {
        reports.push((name.clone(), verify_sequence(seq, a.tolerance)?));
    }
    emit(
        &a.output,
        Format::Json,
        "verify",
        || {
            let mut s = String::from("sequence,gate_distance,passed\n");
            for (name, r) in &reports {
                s.push_str(&format!("{name},{:e},{}\n", r.gate_distance, r.passed));
            }
            Ok(s)
        },
        || Ok(Value::Array(reports.iter().map(|(n, r)| json!({ "sequence": n, "report": r })).collect())),
    )?;
    let failed: Vec<&str> = reports.iter().filter(|(_, r)| !r.passed).map(|(n, _)| n.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::data(format!("verification failed for {}", failed.join(", "))))
    }
}

pub fn tables(a: &TablesArgs) -> Result<(), CliError> {
    let rows = &dmcp::tables::PUBLISHED;
    emit(
        &a.output,
        Format::Csv,
        "tables",
        || {
            let mut s = String::from("name,theta,order,ratios\n");
            for r in rows {
                let ratios: Vec<String> = r.ratios.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("{},{},{},{}\n", r.name, r.target_angle, r.order, ratios.join(";")));
            }
            Ok(s)
        },
        || {
            Ok(Value::Array(
                rows.iter()
                    .map(|r| json!({ "name": r.name, "theta": r.target_angle, "order": r.order, "ratios": r.ratios }))
                    .collect(),
            ))
        },
    )
}

fn state_set(spec: &str, dim: usize, seed: u64) -> Result<InitialStateSet, CliError> {
    if spec == "reference" {
        return Ok(InitialStateSet::reference(dim)?);
    }
    if spec == "ground" {
        return Ok(InitialStateSet::single("ground", StateVector::basis(dim, 0)?)?);
    }
    if let Some(count) = spec.strip_prefix("haar:") {
        let k: u64 = count.parse().map_err(|_| CliError::usage(format!("bad state count in '{spec}'")))?;
        if k == 0 {
            return Err(CliError::usage("haar:K needs K ≥ 1"));
        }
        let states = (0..k)
            .map(|i| Ok((format!("haar{}", seed + i), haar_state(seed + i, dim)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        return Ok(InitialStateSet::new(states)?);
    }
    Err(CliError::usage(format!("unknown state set '{spec}', expected reference, ground or haar:K")))
}

pub fn scan_area(a: &AreaArgs, seed: u64) -> Result<(), CliError> {
    let (label, seq) = a.sequence.build()?;
    let states = state_set(&a.states, a.levels, seed)?;
    let p = protocol(seq, a.levels)?;
    let mut scan = area_scan(p.as_ref(), &states, &a.eps.0, a.metric.into())?;
    scan.metadata.sequence = label;
    emit_scan(&a.output, "area", &scan)
}

fn linspace(half_width: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(half_width.is_finite() && half_width >= 0.0) || steps == 0 {
        return Err(CliError::usage("--range must be non-negative and --steps positive"));
    }
    if steps == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..steps).map(|k| -half_width + 2.0 * half_width * k as f64 / (steps - 1) as f64).collect())
}

pub fn scan_grid(a: &GridArgs) -> Result<(), CliError> {
    let (label, seq) = a.sequence.build()?;
    let axis = linspace(a.range, a.steps)?;
    let state = state_from(&a.state, 2)?;
    let mut scan = scan_2d(&seq, &state, &axis, &axis, a.detuning_mode.into(), a.metric.into())?;
    scan.metadata.sequence = label;
    emit_scan(&a.output, "grid2d", &scan)
}

pub fn scan_decoherence(a: &DecoherenceArgs) -> Result<(), CliError> {
    let (label, seq) = a.sequence.build()?;
    let amps = if a.levels != 2 && a.state == [1.0, 0.0] {
        let mut v = vec![0.0; a.levels];
        v[0] = 1.0;
        v
    } else {
        a.state.clone()
    };
    let state = state_from(&amps, a.levels)?;
    let p = protocol(seq, a.levels)?;
    let mut scan = decoherence_scan(p.as_ref(), &state, &a.gamma.0)?;
    scan.metadata.sequence = label;
    emit_scan(&a.output, "decoherence", &scan)
}

pub fn scan_radius(a: &RadiusArgs) -> Result<(), CliError> {
    let (label, seq) = a.sequence.build()?;
    let state = match &a.state {
        Some(amps) => state_from(amps, a.levels)?,
        None => StateVector::basis(a.levels, 0)?,
    };
    let p = protocol(seq, a.levels)?;
    let metric: Metric = a.metric.into();
    let radius = robustness_radius(p.as_ref(), &state, a.threshold, metric)?;
    emit(
        &a.output,
        Format::Json,
        "radius",
        || Ok(format!("sequence,levels,threshold,radius\n{label},{},{},{radius}\n", a.levels, a.threshold)),
        || {
            Ok(json!({
                "sequence": label,
                "levels": a.levels,
                "threshold": a.threshold,
                "metric": metric,
                "radius": radius,
            }))
        },
    )
}

pub fn nlevel(a: &NlevelArgs) -> Result<(), CliError> {
    let (label, seq) = a.sequence.build()?;
    if a.n < 2 {
        return Err(CliError::usage(format!("--n must be at least 2, got {}", a.n)));
    }
    if !a.populations {
        let mut scan =
            area_scan(&LiftedSequence::new(seq, a.n)?, &InitialStateSet::reference(a.n)?, &a.eps.0, a.metric.into())?;
        scan.metadata.sequence = label;
        return emit_scan(&a.output, "nlevel_area", &scan);
    }
    let init = StateVector::basis(a.n, a.initial_level).map_err(|e| CliError::usage(e.to_string()))?;
    let traj = nlevel_trajectory(&seq, &ErrorModel::zero(), &init, a.samples)?;
    emit(
        &a.output,
        Format::Csv,
        "nlevel_populations",
        || {
            let header: Vec<String> =
                std::iter::once("t".to_string()).chain((0..a.n).map(|k| format!("P{k}"))).collect();
            let mut s = header.join(",") + "\n";
            for (t, pops) in &traj {
                let row: Vec<String> =
                    std::iter::once(t.to_string()).chain(pops.iter().map(|p| p.to_string())).collect();
                s.push_str(&(row.join(",") + "\n"));
            }
            Ok(s)
        },
        || {
            Ok(json!({
                "sequence": label,
                "levels": a.n,
                "t": traj.iter().map(|(t, _)| *t).collect::<Vec<_>>(),
                "populations": traj.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>(),
            }))
        },
    )
}

pub fn waveguide(a: &WaveguideArgs) -> Result<(), CliError> {
    let (_, seq) = a.sequence.build()?;
    let coupling = match &a.coupling_cal {
        Some(p) => CouplingCalibration::from_csv_path(p)?,
        None => CouplingCalibration::from_csv(BUNDLED_COUPLING.as_bytes())?,
    };
    let beta = match &a.beta_cal {
        Some(p) => BetaCalibration::from_csv_path(p)?,
        None => BetaCalibration::from_csv(BUNDLED_BETA.as_bytes())?,
    };
    let layout = layout_from_sequence(&seq, &beta, &coupling, a.gap, a.w0).map_err(|e| {
        let mut err = CliError::from(e);
        err.message.push_str("; widen the β table, reduce the gap or pick a base width nearer the table centre");
        err
    })?;
    let input = state_from(&a.input, 2)?;
    let trace = propagate_intensity(&layout, &input, a.samples)?;
    if let Some(path) = &a.layout_out {
        write_file(path, &(serde_json::to_string_pretty(&layout.to_json()).expect("JSON values serialize") + "\n"))?;
    }
    emit(
        &a.output,
        Format::Csv,
        "intensity",
        || Ok(intensity_csv(&trace)?),
        || Ok(json!({ "layout": layout.to_json(), "intensity": trace })),
    )
}
