use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use peskin_core::curve::{CurveSnapshot, FourierCurve};
use peskin_core::initdata::{InitReport, InitialDataSpec};
use peskin_core::integrator::{fit_decay as fit, run, DecayFit, RunConfig, RunFailure, Trajectory};
use peskin_core::kernels::{kernel_report, KernelLattice};
use peskin_core::linear::{spectrum_csv, spectrum_report};
use peskin_core::nonlin::{linearization_check, LinearizationReport};
use peskin_core::norms::norm_report;
use peskin_core::output::{write_trajectory, OutputDir};
use peskin_core::tension::{StructureReport, TensionLaw};

use crate::exit::CliError;

type CliResult<T> = Result<T, CliError>;

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<(T, serde_json::Value)> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let parsed = serde_json::from_value(raw.clone()).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((parsed, raw))
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn open_out(out: &Path) -> CliResult<OutputDir> {
    OutputDir::create(out).map_err(CliError::io(out))
}

fn zero() -> [f64; 2] {
    [0.0; 2]
}

#[derive(Debug, Serialize)]
struct RunSummary {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    dt: f64,
    snapshots: usize,
    t_final: f64,
    a0_final: Complex64,
    a1_final: Complex64,
    init: Option<InitReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
}

impl RunSummary {
    fn new(traj: &Trajectory, error: Option<String>) -> Self {
        let last = traj.diagnostics.last();
        let (fit, fit_error) = match (&error, fit(traj)) {
            (Some(_), _) => (None, None),
            (None, Ok(f)) => (Some(f), None),
            (None, Err(e)) => (None, Some(e.to_string())),
        };
        Self {
            status: if error.is_some() { "failed" } else { "ok" },
            error,
            dt: traj.dt,
            snapshots: traj.snapshots.len(),
            t_final: last.map_or(0.0, |d| d.t),
            a0_final: last.map_or(Complex64::new(0.0, 0.0), |d| d.a0),
            a1_final: last.map_or(Complex64::new(0.0, 0.0), |d| d.a1),
            init: traj.init_report.clone(),
            fit,
            fit_error,
        }
    }
}

pub fn simulate(
    config: &Path,
    out: &Path,
    init: Option<&str>,
    snapshot_every: Option<f64>,
    watch_modes: Option<Vec<i64>>,
) -> CliResult<()> {
    let (mut cfg, _): (RunConfig, _) = read_json(config)?;
    if let Some(text) = init {
        cfg.init = serde_json::from_str::<InitialDataSpec>(text).map_err(|e| CliError::Config(format!("--init: {e}")))?;
    }
    if snapshot_every.is_some() {
        cfg.snapshot_every = snapshot_every;
    }
    if let Some(w) = watch_modes {
        cfg.watch_modes = w;
    }
    cfg.validate()?;

    let mut dir = open_out(out)?;
    let (traj, failure) = match run(&cfg) {
        Ok(t) => (t, None),
        Err(RunFailure { error, partial }) => (*partial, Some(error)),
    };
    write_trajectory(&mut dir, &traj).map_err(CliError::io(out))?;
    let summary = RunSummary::new(&traj, failure.as_ref().map(ToString::to_string));
    dir.write_json("summary.json", &summary).map_err(CliError::io(out))?;
    dir.finish("simulate", to_value(&cfg)).map_err(CliError::io(out))?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumConfig {
    law: TensionLaw,
    #[serde(default = "zero")]
    a1: [f64; 2],
    #[serde(default = "default_m_max")]
    m_max: i64,
}

fn default_m_max() -> i64 {
    128
}

pub fn linear_spectrum(config: &Path, out: &Path) -> CliResult<()> {
    let (cfg, raw): (SpectrumConfig, _) = read_json(config)?;
    cfg.law.validate()?;
    let rows = spectrum_report(&cfg.law, Complex64::new(cfg.a1[0], cfg.a1[1]), cfg.m_max)?;
    let mut dir = open_out(out)?;
    dir.write("spectrum.csv", spectrum_csv(&rows).as_bytes()).map_err(CliError::io(out))?;
    dir.finish("linear-spectrum", raw).map_err(CliError::io(out))?;
    Ok(())
}

pub fn verify_kernels(config: Option<&Path>, out: &Path) -> CliResult<()> {
    let lattice = match config {
        Some(p) => read_json::<KernelLattice>(p)?.0,
        None => KernelLattice::coarse(),
    };
    let report = kernel_report(&lattice)?;
    let mut dir = open_out(out)?;
    dir.write_json("kernels.json", &report).map_err(CliError::io(out))?;
    dir.finish("verify-kernels", to_value(&lattice)).map_err(CliError::io(out))?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification("kernel report failed its thresholds".into()))
    }
}

/// Snapshots of a trajectory directory, in file-name order.
fn read_snapshots(input: &Path) -> CliResult<Vec<FourierCurve>> {
    let mut names: Vec<String> = fs::read_dir(input)
        .map_err(CliError::io(input))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("snapshot_") && n.ends_with(".json"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::Config(format!("{}: no snapshot files", input.display())));
    }
    names
        .iter()
        .map(|n| {
            let (snap, _): (CurveSnapshot, _) = read_json(&input.join(n))?;
            Ok(FourierCurve::try_from(snap)?)
        })
        .collect()
}

pub fn measure_norms(input: &Path, out: &Path) -> CliResult<()> {
    let snapshots = read_snapshots(input)?;
    let mut csv = String::from("t,s_norm,z1,z2,w\n");
    for s in &snapshots {
        let r = norm_report(&s.split().y, s.time);
        csv.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n", r.t, r.s_norm, r.z1, r.z2, r.w));
    }
    let mut dir = open_out(out)?;
    dir.write("norms.csv", csv.as_bytes()).map_err(CliError::io(out))?;
    dir.finish("measure-norms", serde_json::json!({ "input": input.display().to_string() }))
        .map_err(CliError::io(out))?;
    Ok(())
}

pub fn fit_decay(input: &Path, out: &Path) -> CliResult<()> {
    let snapshots = read_snapshots(input)?;
    let mut traj = Trajectory::new(Vec::new(), 0.0);
    for s in &snapshots {
        traj.record(s);
    }
    let result = fit(&traj)?;
    let mut dir = open_out(out)?;
    dir.write_json("fit.json", &result).map_err(CliError::io(out))?;
    dir.finish("fit-decay", serde_json::json!({ "input": input.display().to_string() }))
        .map_err(CliError::io(out))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearizationConfig {
    law: TensionLaw,
    #[serde(default = "zero")]
    a1: [f64; 2],
    #[serde(default = "default_k_check")]
    k_check: i64,
    #[serde(rename = "K", default = "default_k")]
    k_max: usize,
    #[serde(rename = "M", default = "default_m")]
    m: usize,
    #[serde(default = "default_delta")]
    delta: f64,
}

fn default_k_check() -> i64 {
    12
}
fn default_k() -> usize {
    16
}
fn default_m() -> usize {
    64
}
fn default_delta() -> f64 {
    1e-6
}

#[derive(Debug, Serialize)]
struct LinearizationOutput {
    structure: StructureReport,
    linearization: Option<LinearizationReport>,
    pass: bool,
}

pub fn verify_linearization(config: &Path, out: &Path) -> CliResult<()> {
    let (cfg, raw): (LinearizationConfig, _) = read_json(config)?;
    let structure = cfg.law.check_structure(257);
    let mut dir = open_out(out)?;
    if !structure.holds() {
        let report = LinearizationOutput {
            structure,
            linearization: None,
            pass: false,
        };
        dir.write_json("linearization.json", &report).map_err(CliError::io(out))?;
        dir.finish("verify-linearization", raw).map_err(CliError::io(out))?;
        return Err(cfg.law.validate().err().map_or_else(
            || CliError::Verification("structural condition fails".into()),
            CliError::from,
        ));
    }
    let lin = linearization_check(&cfg.law, Complex64::new(cfg.a1[0], cfg.a1[1]), cfg.k_check, cfg.k_max, cfg.m, cfg.delta)?;
    let pass = lin.pass;
    let report = LinearizationOutput {
        structure,
        linearization: Some(lin),
        pass,
    };
    dir.write_json("linearization.json", &report).map_err(CliError::io(out))?;
    dir.finish("verify-linearization", raw).map_err(CliError::io(out))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification("Jacobian disagrees with the closed form".into()))
    }
}
