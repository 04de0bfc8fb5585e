//! Subcommand implementations. Each writes to a file or stdout and returns
//! a [`CliError`] carrying the exit code on failure.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex;
use serde::Serialize;

use magnon_core::coupling::{
    derive_column, fit_scaling_laws, single_spin_coupling, size_coordinate, ModeInputs, ReferenceColumn,
    ScalingModel,
};
use magnon_core::fit::{fit_spectrum, synthesize_noisy_spectrum, FitProblem, Loss, Termination};
use magnon_core::magnetostatics::{closed_form_frequency, default_window, walker_roots, WalkerModeQuery, SCAN_PANELS};
use magnon_core::scattering::{complex_spectrum, sweep_map, unwrap_phase};
use magnon_core::{ComplexSpectrum, Observable, Response};

use crate::config::{FitResponse, Grid, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{csv_writer, num, write_toml};

/// Closed form and solver are reported as agreeing below this relative difference.
const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default)]
pub struct SpectrumOptions {
    pub unwrap: bool,
    /// Relative noise level; `None` for the clean model.
    pub noise: Option<f64>,
}

struct Column {
    values: Vec<Complex<f64>>,
    phase: Vec<f64>,
}

impl Column {
    fn new(spectrum: ComplexSpectrum<f64>, unwrap: bool) -> Self {
        let values = spectrum.values().to_vec();
        let mut phase: Vec<f64> = values.iter().map(|v| v.arg()).collect();
        if unwrap {
            unwrap_phase(&mut phase);
        }
        Self { values, phase }
    }
}

pub fn spectrum(cfg: &RunConfig, opts: &SpectrumOptions, output: Option<&Path>) -> Result<()> {
    let sweep = cfg.sweep()?;
    if sweep.field.count != 1 {
        return Err(CliError::Config(format!(
            "spectrum needs a single bias field (sweep.field.count = 1), got {}",
            sweep.field.count
        )));
    }
    let b = sweep.field.start;
    let freqs = sweep.frequency.points();
    let system = cfg.system()?;

    let mut responses = vec![Response::S21, Response::S11];
    responses.extend(system.modes.iter().map(|m| Response::S31(m.label.clone())));
    let columns = responses
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let s = match opts.noise {
                Some(sigma) => synthesize_noisy_spectrum(&system, b, &freqs, r, sigma, sweep.seed.wrapping_add(k as u64))?,
                None => complex_spectrum(&system, b, &freqs, r)?,
            };
            Ok(Column::new(s, opts.unwrap))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut w = csv_writer(output)?;
    let mut header = vec!["f_hz".to_string()];
    let mut names = vec!["s21".to_string(), "s11".to_string()];
    names.extend(system.modes.iter().map(|m| format!("s31_{}", m.label)));
    for n in &names {
        for part in ["re", "im", "abs2", "arg"] {
            header.push(format!("{part}_{n}"));
        }
    }
    header.push("eta".into());
    w.write_record(&header)?;

    for (i, &f) in freqs.iter().enumerate() {
        let mut row = vec![num(f)];
        for c in &columns {
            let v = c.values[i];
            row.extend([num(v.re), num(v.im), num(v.norm_sqr()), num(c.phase[i])]);
        }
        // eta is the total S31 power, zero with no magnon modes
        let eta: f64 = columns[2..].iter().map(|c| c.values[i].norm_sqr()).sum();
        row.push(num(eta));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn map(cfg: &RunConfig, observable: Option<Observable>, unwrap: bool, output: Option<&Path>) -> Result<()> {
    let sweep = cfg.sweep()?;
    let observable = observable.unwrap_or_else(|| sweep.observable.clone());
    let system = cfg.system()?;
    let mut m = sweep_map(&system, &sweep.field.points(), &sweep.frequency.points(), &observable)?;
    if unwrap && observable.is_phase() {
        m.unwrap_rows();
    }
    let mut w = csv_writer(output)?;
    w.write_record(["B_T", "f_hz", "value"])?;
    for (i, &b) in m.fields().iter().enumerate() {
        for (&f, &v) in m.frequencies().iter().zip(m.row(i)) {
            w.write_record([num(b), num(f), num(v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn modes(cfg: &RunConfig, output: Option<&Path>) -> Result<()> {
    let walker = cfg
        .walker
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [walker] section".into()))?;
    let grid: Grid = match (&walker.field, &cfg.sweep) {
        (Some(g), _) => *g,
        (None, Some(s)) => s.field,
        (None, None) => return Err(CliError::Config("no field grid: set walker.field or [sweep]".into())),
    };
    let material = &cfg.material;

    let mut w = csv_writer(output)?;
    w.write_record(["B_T", "i", "j", "branch", "closed_form_hz", "solver_hz", "rel_diff", "status"])?;
    for b in grid.points() {
        for &(i, j) in &walker.modes {
            let q = WalkerModeQuery::natural(i, j, b)?;
            let roots = walker_roots(&q, material, default_window(b, material), SCAN_PANELS)?;
            let closed = closed_form_frequency(i, j, b, material).transpose()?;
            let base = [num(b), i.to_string(), j.to_string(), q.branch.to_string()];
            match (closed, roots.is_empty()) {
                (Some(cf), false) => {
                    let root = roots
                        .iter()
                        .copied()
                        .min_by(|x, y| (x - cf).abs().total_cmp(&(y - cf).abs()))
                        .unwrap_or(cf);
                    let rel = ((root - cf) / cf).abs();
                    let status = if rel <= MATCH_TOL { "match" } else { "mismatch" };
                    write_mode_row(&mut w, &base, &num(cf), &num(root), &num(rel), status)?;
                }
                (Some(cf), true) => write_mode_row(&mut w, &base, &num(cf), "", "", "no_root")?,
                (None, true) => write_mode_row(&mut w, &base, "", "", "", "no_root")?,
                (None, false) => {
                    for r in roots {
                        write_mode_row(&mut w, &base, "", &num(r), "", "solver_only")?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_mode_row<W: std::io::Write>(
    w: &mut csv::Writer<W>,
    base: &[String; 4],
    closed: &str,
    solver: &str,
    rel: &str,
    status: &str,
) -> Result<()> {
    let mut row: Vec<&str> = base.iter().map(String::as_str).collect();
    row.extend([closed, solver, rel, status]);
    w.write_record(row)?;
    Ok(())
}

pub fn derive(cfg: &RunConfig, output: Option<&Path>) -> Result<()> {
    let d = cfg
        .derive
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [derive] section".into()))?;
    let g_b = match d.g_b {
        Some(g) => g,
        None => single_spin_coupling(&cfg.cavity, &cfg.material, d.cavity_volume)?,
    };
    let kittel = ModeInputs { g: d.kittel.g, gamma: d.kittel.gamma };
    let msm = ModeInputs { g: d.msm.g, gamma: d.msm.gamma };
    let col = derive_column(&kittel, &msm, g_b, &cfg.cavity, &cfg.material, &cfg.optical)?;
    let reference = ReferenceColumn::by_diameter(cfg.material.diameter);

    let mut rows: Vec<(&str, &str, f64, Option<f64>)> = vec![("g_b", "", g_b, None)];
    for (label, p, r) in [
        ("kittel", &col.kittel, reference.map(|r| (r.n_spins_k, r.c_k, r.density_k, r.faraday_k, r.delta_k))),
        ("msm", &col.msm, reference.map(|r| (r.n_spins_m, r.c_m, r.density_m, r.faraday_m, r.delta_m))),
    ] {
        rows.push(("n_spins", label, p.n_spins, r.map(|r| r.0)));
        rows.push(("cooperativity", label, p.cooperativity, r.map(|r| r.1)));
        rows.push(("v_m", label, p.v_m, reference.map(|r| r.v_m)));
        rows.push(("density", label, p.density, r.map(|r| r.2)));
        rows.push(("faraday", label, p.faraday, r.map(|r| r.3)));
        rows.push(("delta", label, p.delta, r.map(|r| r.4)));
    }
    rows.push(("eta", "", col.eta, reference.map(|r| r.eta)));

    let mut w = csv_writer(output)?;
    w.write_record(["quantity", "mode", "derived", "reference", "rel_dev"])?;
    for (q, mode, v, r) in rows {
        let (rs, dev) = match r {
            Some(r) => (num(r), num((v - r) / r)),
            None => (String::new(), String::new()),
        };
        w.write_record([q.to_string(), mode.to_string(), num(v), rs, dev])?;
    }
    w.flush()?;
    Ok(())
}

/// Report written by [`fit`].
#[derive(Debug, Serialize)]
pub struct FitReport {
    pub converged: bool,
    pub termination: Termination,
    pub loss: Loss,
    pub iterations: usize,
    pub rms_residual: f64,
    pub jacobian_condition_estimate: f64,
    pub initial_gradient_norm: f64,
    pub final_gradient_norm: f64,
    pub estimates: BTreeMap<String, f64>,
    pub residual_trace: Vec<f64>,
}

pub fn fit(cfg: &RunConfig, data: &Path, output: Option<&Path>) -> Result<()> {
    let fc = cfg
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [fit] section".into()))?;
    let field = match (fc.field, &cfg.sweep) {
        (Some(b), _) => b,
        (None, Some(s)) => s.field.start,
        (None, None) => return Err(CliError::Config("no bias field: set fit.field or [sweep]".into())),
    };
    let (response, name) = match fc.response {
        FitResponse::S21 => (Response::S21, "s21"),
        FitResponse::S11 => (Response::S11, "s11"),
    };
    let observed = read_spectrum(data, name)?;
    let problem = FitProblem::new(observed, cfg.system()?, field, response, fc.free_params(), fc.loss)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let result = fit_spectrum(&problem, &fc.init())?;

    let report = FitReport {
        converged: result.converged,
        termination: result.termination,
        loss: result.loss,
        iterations: result.iterations,
        rms_residual: result.rms_residual,
        jacobian_condition_estimate: result.jacobian_condition_estimate,
        initial_gradient_norm: result.initial_gradient_norm,
        final_gradient_norm: result.final_gradient_norm,
        estimates: result.estimates.iter().map(|(id, v)| (id.to_string(), *v)).collect(),
        residual_trace: result.residual_trace.clone(),
    };
    write_toml(&report, output)?;
    if !result.converged {
        return Err(CliError::NotConverged(result.termination.to_string()));
    }
    Ok(())
}

fn data_err(path: &Path, reason: impl Into<String>) -> CliError {
    CliError::Data { path: path.into(), reason: reason.into() }
}

fn open_csv(path: &Path) -> Result<(csv::Reader<std::fs::File>, csv::StringRecord)> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r.headers().map_err(|e| data_err(path, e.to_string()))?.clone();
    Ok((r, headers))
}

fn column(path: &Path, headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| data_err(path, format!("missing column `{name}`")))
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| data_err(path, format!("row {line}: cannot parse `{s}` as a number")))
}

/// Reads `f_hz`, `re_<name>`, `im_<name>` columns.
fn read_spectrum(path: &Path, name: &str) -> Result<ComplexSpectrum<f64>> {
    let (mut r, headers) = open_csv(path)?;
    let fi = column(path, &headers, "f_hz")?;
    let ri = column(path, &headers, &format!("re_{name}"))?;
    let ii = column(path, &headers, &format!("im_{name}"))?;
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| data_err(path, e.to_string()))?;
        let line = k + 2;
        let get = |i: usize| parse_f64(path, line, rec.get(i).unwrap_or(""));
        freqs.push(get(fi)?);
        values.push(Complex::new(get(ri)?, get(ii)?));
    }
    ComplexSpectrum::new(freqs, values).map_err(|e| data_err(path, e.to_string()))
}

/// Report written by [`scaling`].
#[derive(Debug, Serialize)]
pub struct ScalingReport {
    pub model: ScalingModel,
    pub coefficients: Vec<f64>,
    pub rms_residual: f64,
    pub points: Vec<ScalingPoint>,
}

#[derive(Debug, Serialize)]
pub struct ScalingPoint {
    pub diameter_m: f64,
    pub sqrt_v_mm3: f64,
    pub value: f64,
    pub fitted: f64,
    pub included: bool,
}

fn parse_bool(path: &Path, line: usize, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        other => Err(data_err(path, format!("row {line}: `{other}` is not a boolean"))),
    }
}

pub fn scaling(points: &Path, model: ScalingModel, output: Option<&Path>) -> Result<()> {
    let (mut r, headers) = open_csv(points)?;
    let di = column(points, &headers, "diameter_m")?;
    let vi = column(points, &headers, "value")?;
    let ii = headers.iter().position(|h| h.trim() == "include");
    let mut data = Vec::new();
    let mut include = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| data_err(points, e.to_string()))?;
        let line = k + 2;
        let d = parse_f64(points, line, rec.get(di).unwrap_or(""))?;
        let v = parse_f64(points, line, rec.get(vi).unwrap_or(""))?;
        data.push((d, v));
        include.push(match ii {
            Some(i) => parse_bool(points, line, rec.get(i).unwrap_or(""))?,
            None => true,
        });
    }
    let fit = fit_scaling_laws(&data, model, Some(&include))?;
    let points = data
        .iter()
        .zip(&fit.included_points)
        .map(|(&(d, v), &inc)| {
            let x = size_coordinate(d)?;
            Ok(ScalingPoint {
                diameter_m: d,
                sqrt_v_mm3: x,
                value: v,
                fitted: model.eval(&fit.coefficients, x),
                included: inc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_toml(
        &ScalingReport { model, coefficients: fit.coefficients, rms_residual: fit.rms_residual, points },
        output,
    )
}
