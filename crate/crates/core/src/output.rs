//! Deterministic CSV output.
//!
//! Floats are written with 12 significant digits in exponent form, rows end
//! in `\n`, and columns and rows come in a fixed order, so identical results
//! always produce identical bytes. Frequencies are written in Hz (ω/2π) and
//! coupling coefficients per nm, matching the usual lab units.

use std::io::{self, BufRead, Write};

use crate::constants::{NANOMETER, TWO_PI};
use crate::coupling::{Coupling, CouplingReport, CrossingFit, GapTuning, QuarticTransition};
use crate::error::{Error, Result};
use crate::feasibility::QndEstimate;
use crate::loss::LossProfile;
use crate::perturbation::SpectrumSweep;

/// `{:.11e}` with negative zero folded into zero.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return format!("{:.11e}", 0.0);
    }
    format!("{v:.11e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn write_row<W: Write>(w: &mut W, fields: &[String]) -> io::Result<()> {
    w.write_all(fields.join(",").as_bytes())?;
    w.write_all(b"\n")
}

fn header<W: Write>(w: &mut W, names: &[&str]) -> io::Result<()> {
    write_row(w, &names.iter().map(|s| s.to_string()).collect::<Vec<_>>())
}

fn hz(omega: f64) -> f64 {
    omega / TWO_PI
}

/// `sweep_value, branch_id, frequency_Hz, c_<mode>...`, one row per point
/// and branch, branches in id order.
pub fn write_sweep<W: Write>(w: &mut W, sweep: &SpectrumSweep) -> io::Result<()> {
    let mut names = vec!["sweep_value".to_string(), "branch_id".to_string(), "frequency_Hz".to_string()];
    names.extend(sweep.basis.modes.iter().map(|m| format!("c_TEM{}{}_q{}", m.m, m.n, m.q)));
    write_row(w, &names)?;
    for p in &sweep.points {
        for label in 0..sweep.branch_count() {
            let col = p.column(label);
            let mut row = vec![fmt_float(p.value), label.to_string(), fmt_float(hz(p.eigen.values[col]))];
            row.extend(p.eigen.vectors[col].iter().map(|&c| fmt_float(c)));
            write_row(w, &row)?;
        }
    }
    Ok(())
}

/// `x_m, detuning_Hz`.
pub fn write_detuning<W: Write>(w: &mut W, samples: &[(f64, f64)]) -> io::Result<()> {
    header(w, &["x_m", "detuning_Hz"])?;
    for &(x, d) in samples {
        write_row(w, &[fmt_float(x), fmt_float(hz(d))])?;
    }
    Ok(())
}

/// `sweep_value, branch_id, kappa_Hz, kappa_prime_Hz_per_nm`.
pub fn write_kappa<W: Write>(w: &mut W, profile: &LossProfile) -> io::Result<()> {
    header(w, &["sweep_value", "branch_id", "kappa_Hz", "kappa_prime_Hz_per_nm"])?;
    let gradients: Vec<Vec<f64>> = (0..profile.kappa.len()).map(|l| profile.gradient(l)).collect();
    for (i, &x) in profile.values.iter().enumerate() {
        for (label, k) in profile.kappa.iter().enumerate() {
            write_row(w, &[fmt_float(x), label.to_string(), fmt_float(hz(k[i])), fmt_float(hz(gradients[label][i]) * NANOMETER)])?;
        }
    }
    Ok(())
}

/// One row of a coupling report. Rows without a fit carry only the id and
/// a status explaining why.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingRow {
    pub id: String,
    pub center_x: Option<f64>,
    pub omega_prime: Option<f64>,
    pub omega_s: Option<f64>,
    pub omega_pp: Option<f64>,
    pub omega4: Option<f64>,
    pub classification: Option<Coupling>,
    pub status: String,
}

impl CouplingRow {
    /// Row for a fitted crossing: `ω′` is the asymptotic slope and the
    /// classification is that of the gap centre.
    pub fn from_fit(id: impl Into<String>, fit: &CrossingFit, report: &CouplingReport) -> Self {
        CouplingRow {
            id: id.into(),
            center_x: Some(report.at),
            omega_prime: Some(fit.slope),
            omega_s: Some(fit.half_gap),
            omega_pp: Some(report.omega_pp),
            omega4: Some(report.omega4),
            classification: Some(report.classification),
            status: if fit.is_valid() { "ok".into() } else { format!("residual {:.3e}", fit.residual) },
        }
    }

    /// Row for a local report without a gap.
    pub fn from_report(id: impl Into<String>, report: &CouplingReport) -> Self {
        CouplingRow {
            id: id.into(),
            center_x: Some(report.at),
            omega_prime: Some(report.omega_prime),
            omega_s: None,
            omega_pp: Some(report.omega_pp),
            omega4: Some(report.omega4),
            classification: Some(report.classification),
            status: "ok".into(),
        }
    }

    pub fn unresolved(id: impl Into<String>, reason: &str) -> Self {
        CouplingRow {
            id: id.into(),
            center_x: None,
            omega_prime: None,
            omega_s: None,
            omega_pp: None,
            omega4: None,
            classification: None,
            status: format!("unresolved: {}", reason.replace([',', '\n'], ";")),
        }
    }
}

/// `crossing_id, center_x_m, omega_prime_Hz_per_nm, omega_s_Hz,
/// omega_pp_Hz_per_nm2, omega4_Hz_per_nm4, classification, status`.
pub fn write_coupling<W: Write>(w: &mut W, rows: &[CouplingRow]) -> io::Result<()> {
    header(
        w,
        &["crossing_id", "center_x_m", "omega_prime_Hz_per_nm", "omega_s_Hz", "omega_pp_Hz_per_nm2", "omega4_Hz_per_nm4", "classification", "status"],
    )?;
    for r in rows {
        write_row(
            w,
            &[
                r.id.clone(),
                fmt_opt(r.center_x),
                fmt_opt(r.omega_prime.map(|v| hz(v) * NANOMETER)),
                fmt_opt(r.omega_s.map(hz)),
                fmt_opt(r.omega_pp.map(|v| hz(v) * NANOMETER.powi(2))),
                fmt_opt(r.omega4.map(|v| hz(v) * NANOMETER.powi(4))),
                r.classification.map(|c| c.to_string()).unwrap_or_default(),
                r.status.clone(),
            ],
        )?;
    }
    Ok(())
}

/// Per-position gaps: `gap_id, coarse_x_m, center_x_m, omega_s_Hz,
/// omega_prime_Hz_per_nm, residual`. `omega_s_Hz` carries the sign of the
/// coupling element.
pub fn write_gap_points<W: Write>(w: &mut W, tunings: &[GapTuning]) -> io::Result<()> {
    header(w, &["gap_id", "coarse_x_m", "center_x_m", "omega_s_Hz", "omega_prime_Hz_per_nm", "residual"])?;
    for t in tunings {
        for (&(x0, gap), c) in t.points.iter().zip(&t.crossings) {
            write_row(
                w,
                &[t.id.to_string(), fmt_float(x0), fmt_float(c.center), fmt_float(hz(gap)), fmt_float(hz(c.fit.slope) * NANOMETER), fmt_float(c.fit.residual)],
            )?;
        }
    }
    Ok(())
}

/// Linear gap tuning per gap: `gap_id, slope_Hz_per_mm, intercept_Hz, r_squared, closed`.
pub fn write_gap_slopes<W: Write>(w: &mut W, tunings: &[GapTuning]) -> io::Result<()> {
    header(w, &["gap_id", "slope_Hz_per_mm", "intercept_Hz", "r_squared", "closed"])?;
    for t in tunings {
        write_row(w, &[t.id.to_string(), fmt_float(hz(t.slope) * 1e-3), fmt_float(hz(t.intercept)), fmt_float(t.r_squared), t.closed.to_string()])?;
    }
    Ok(())
}

/// Bisection history: `tilt_rad, omega_pp_Hz_per_nm2`.
pub fn write_quartic_history<W: Write>(w: &mut W, transition: &QuarticTransition) -> io::Result<()> {
    header(w, &["tilt_rad", "omega_pp_Hz_per_nm2"])?;
    for &(tilt, w2) in &transition.history {
        write_row(w, &[fmt_float(tilt), fmt_float(hz(w2) * NANOMETER.powi(2))])?;
    }
    Ok(())
}

/// `thermal_model, x_zpf_m, n_T, n_bar_m, sigma0, S, H4_coefficient_Hz`.
pub fn write_feasibility<W: Write>(w: &mut W, estimates: &[QndEstimate]) -> io::Result<()> {
    header(w, &["thermal_model", "x_zpf_m", "n_T", "n_bar_m", "sigma0", "S", "H4_coefficient_Hz"])?;
    for e in estimates {
        write_row(
            w,
            &[
                e.thermal.to_string(),
                fmt_float(e.x_zpf),
                fmt_float(e.n_t),
                fmt_float(e.n_bar_m),
                fmt_float(e.sigma0),
                fmt_float(e.s),
                fmt_float(hz(e.h4_coefficient)),
            ],
        )?;
    }
    Ok(())
}

/// Reads `(x in m, frequency in Hz)` pairs, one per line, returning
/// `(x, ω)` with ω in rad/s. A non-numeric first line is taken as a header;
/// blank lines and `#` comments are skipped.
pub fn read_branch<R: BufRead>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::DegenerateData(format!("line {}: {e}", i + 1)))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [x, f, ..] => x.parse::<f64>().and_then(|x| f.parse::<f64>().map(|f| (x, f))),
            _ => return Err(Error::DegenerateData(format!("line {}: expected two columns", i + 1))),
        };
        match parsed {
            Ok((x, f)) => out.push((x, TWO_PI * f)),
            Err(_) if out.is_empty() && i == 0 => continue,
            Err(e) => return Err(Error::DegenerateData(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}
