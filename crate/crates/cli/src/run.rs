//! Subcommand bodies. Each returns the files it wrote, relative to the
//! output directory, in a fixed order.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use mimcav::constants::{NANOMETER, TWO_PI};
use mimcav::coupling::{find_crossings, fit_hyperbola, gap_vs_displacement, quartic_transition, resolve_crossing, CouplingReport, GapTuning, ResolvedCrossing, Thresholds};
use mimcav::feasibility::estimate_both;
use mimcav::loss::{loss_profile, BaseLosses};
use mimcav::output::{self, fmt_float, CouplingRow};
use mimcav::perturbation::{QuadratureOptions, Scenario, SweepAxis};
use mimcav::transfer::{curvature_1d, resonance_detuning};

use crate::config::{mode_label, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] mimcav::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, RunError>;

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<String> {
    let path = dir.join(name);
    let wrap = |source| RunError::Io { path: path.clone(), source };
    let mut w = BufWriter::new(File::create(&path).map_err(wrap)?);
    body(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)?;
    Ok(name.to_string())
}

pub fn sweep(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>> {
    let sweep = cfg.scenario.sweep(cfg.sweep.axis, &cfg.sweep.values)?;
    if !sweep.ambiguous_steps.is_empty() {
        warn!("branch tracking was ambiguous at {} step(s); consider a finer grid", sweep.ambiguous_steps.len());
    }
    info!("{} points, {} branches", sweep.points.len(), sweep.branch_count());
    Ok(vec![write_file(out, "sweep.csv", |w| output::write_sweep(w, &sweep))?])
}

pub fn kappa(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>> {
    let sweep = cfg.scenario.sweep(cfg.sweep.axis, &cfg.sweep.values)?;
    let base = BaseLosses::new(cfg.kappa.clone())?;
    let profile = loss_profile(&cfg.scenario, &sweep, &base)?;
    Ok(vec![write_file(out, "kappa.csv", |w| output::write_kappa(w, &profile))?])
}

fn gap_label(cfg: &ScenarioConfig, id: &mimcav::coupling::GapId) -> String {
    let q = cfg.reference_q;
    format!("{}/{}{}", mode_label(id.a, q), mode_label(id.b, q), if id.rising { '+' } else { '-' })
}

/// Fits an external branch file, or resolves the configured gaps in the
/// model. With several coarse positions the gap tuning tables are written
/// too.
pub fn crossing(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>> {
    let a = &cfg.analysis;
    let mut rows = Vec::new();
    if let Some(path) = &a.branch_csv {
        let file = File::open(path).map_err(|source| RunError::Io { path: path.clone(), source })?;
        let samples = output::read_branch(BufReader::new(file))?;
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "branch".into());
        match fit_hyperbola(&samples, None).and_then(|fit| CouplingReport::from_crossing(&fit, &a.thresholds).map(|r| (fit, r))) {
            Ok((fit, report)) => rows.push(CouplingRow::from_fit(id, &fit, &report)),
            Err(e) => {
                warn!("{id}: {e}");
                rows.push(CouplingRow::unresolved(id, &e.to_string()));
            }
        }
        return Ok(vec![write_file(out, "coupling.csv", |w| output::write_coupling(w, &rows))?]);
    }

    let period = 0.5 * cfg.scenario.geometry.wavelength;
    let mut tunings: Vec<GapTuning> = Vec::new();
    for id in &a.gaps {
        let label = gap_label(cfg, id);
        let row_id = |x0: f64| format!("{label}@{}", fmt_float(x0));
        if a.coarse.len() >= 2 {
            match gap_vs_displacement(&cfg.scenario, *id, &a.coarse, &a.resolve) {
                Ok(t) => {
                    rows.extend(a.coarse.iter().zip(&t.crossings).map(|(&x0, r)| crossing_row(row_id(x0), r, &a.thresholds)));
                    tunings.push(t);
                    continue;
                }
                Err(e) => warn!("{label}: gap tuning skipped: {e}"),
            }
        }
        for &x0 in &a.coarse {
            let resolved = find_crossings(&cfg.scenario, id.a, id.b, x0, x0 + period, 64).and_then(|found| {
                let &(x, _) = found
                    .iter()
                    .find(|(_, g)| g.rising == id.rising)
                    .ok_or_else(|| mimcav::Error::UnresolvedGap { at: x0, reason: "no crossing within one period".into() })?;
                resolve_crossing(&cfg.scenario, *id, x, &a.resolve)
            });
            rows.push(match resolved {
                Ok(r) => crossing_row(row_id(x0), &r, &a.thresholds),
                Err(e) => {
                    warn!("{}: {e}", row_id(x0));
                    CouplingRow::unresolved(row_id(x0), &e.to_string())
                }
            });
        }
    }
    let mut files = vec![write_file(out, "coupling.csv", |w| output::write_coupling(w, &rows))?];
    if a.coarse.len() >= 2 {
        files.push(write_file(out, "gap_points.csv", |w| output::write_gap_points(w, &tunings))?);
        files.push(write_file(out, "gap_slopes.csv", |w| output::write_gap_slopes(w, &tunings))?);
    }
    Ok(files)
}

fn crossing_row(id: String, r: &ResolvedCrossing, thresholds: &Thresholds) -> CouplingRow {
    if r.fit.half_gap <= GapTuning::CLOSED_LENGTH * r.fit.slope {
        let mut row = CouplingRow::unresolved(id, "");
        row.center_x = Some(r.center);
        row.omega_prime = Some(r.fit.slope);
        row.omega_s = Some(0.0);
        row.status = "closed".into();
        return row;
    }
    match CouplingReport::from_crossing(&r.fit, thresholds) {
        Ok(report) => CouplingRow::from_fit(id, &r.fit, &CouplingReport { at: r.center, ..report }),
        Err(e) => CouplingRow::unresolved(id, &e.to_string()),
    }
}

pub fn quartic(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>> {
    let qc = &cfg.quartic;
    let mut scenario: Scenario = cfg.scenario.clone();
    scenario.options.quadrature = QuadratureOptions::fixed(qc.quadrature_nodes);
    let t = quartic_transition(&scenario, qc.mode, qc.center, qc.half_width, qc.samples, qc.tilt_lo, qc.tilt_hi, qc.tilt_tol, &cfg.analysis.thresholds)?;
    info!("omega'' changes sign at tilt {:.9e} rad ({})", t.tilt, t.report.classification);
    let id = format!("{}@tilt={}", mode_label(qc.mode, cfg.reference_q), fmt_float(t.tilt));
    let rows = [CouplingRow::from_report(id, &t.report)];
    Ok(vec![
        write_file(out, "quartic.csv", |w| output::write_quartic_history(w, &t))?,
        write_file(out, "coupling.csv", |w| output::write_coupling(w, &rows))?,
    ])
}

pub fn feasibility(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>> {
    let fc = cfg.feasibility.as_ref().ok_or_else(|| RunError::Config("missing required section [feasibility]".into()))?;
    let estimates = estimate_both(&fc.params, fc.sigma0, fc.laser_cooled_n_t)?;
    for e in &estimates {
        println!(
            "{:<13} x_zpf = {:.4e} m  n_T = {:.4e}  n_bar_m = {:.4e}  sigma0 = {:.4e}  S = {:.4e}  H4 = {:.4e} Hz",
            e.thermal,
            e.x_zpf,
            e.n_t,
            e.n_bar_m,
            e.sigma0,
            e.s,
            e.h4_coefficient / TWO_PI
        );
    }
    Ok(vec![write_file(out, "feasibility.csv", |w| output::write_feasibility(w, &estimates))?])
}

/// Exact 1-D detuning over the sweep grid (axial sweeps only) and the
/// curvature at its extremum.
pub fn oracle1d(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<String>> {
    if cfg.sweep.axis != SweepAxis::AxialPosition {
        return Err(RunError::Config("key `sweep.axis`: oracle1d needs axial_position".into()));
    }
    let g = &cfg.scenario.geometry;
    let m = &cfg.scenario.membrane;
    let samples: Vec<(f64, f64)> =
        cfg.sweep.values.iter().map(|&x| resonance_detuning(x, m.thickness, m.index.re, g.wavelength, g.length).map(|d| (x, d))).collect::<mimcav::Result<_>>()?;
    let c = curvature_1d(m.thickness, m.index.re, g.wavelength, g.length)?;
    info!("1-D curvature {:.4e} Hz/nm^2 at {:.4e} m", c.curvature / TWO_PI * NANOMETER * NANOMETER, c.position);
    Ok(vec![
        write_file(out, "oracle1d.csv", |w| output::write_detuning(w, &samples))?,
        write_file(out, "curvature1d.csv", |w| {
            writeln!(w, "position_m,detuning_Hz,curvature_Hz_per_nm2")?;
            writeln!(w, "{},{},{}", fmt_float(c.position), fmt_float(c.detuning / TWO_PI), fmt_float(c.curvature / TWO_PI * NANOMETER * NANOMETER))
        })?,
    ])
}
