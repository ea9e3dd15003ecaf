//! Coupling coefficients from swept spectra.
//!
//! Avoided crossings are fitted to `offset + √((ω′(x − c))² + ω_s²)`, giving
//! `ω″ = ω′²/ω_s` at the centre. Smooth extrema are described by local
//! polynomial fits, and every report is classified as linear, quadratic,
//! quartic or mixed.

use std::fmt;

use rayon::prelude::*;

use crate::cavity::ModeIndex;
use crate::eigen::symmetric_eigen;
use crate::error::{invalid, Error, Result};
use crate::lsq::{bisect, least_squares, levenberg_marquardt, Polynomial};
use crate::perturbation::{linspace, Scenario, SweepAxis};

/// Result of a hyperbola fit to one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingFit {
    pub center_x: f64,
    /// Asymptotic slope `ω′`, rad/s per m, non-negative.
    pub slope: f64,
    /// Half gap `ω_s`, rad/s, non-negative.
    pub half_gap: f64,
    /// Vertical offset, rad/s.
    pub offset: f64,
    /// `+1` for a branch curving up (upper branch), `−1` for the lower one.
    pub sign: f64,
    /// RMS residual over the frequency span of the samples.
    pub residual: f64,
}

impl CrossingFit {
    /// Residual must stay below this fraction of the fitted span.
    pub const MAX_RESIDUAL: f64 = 1e-3;

    pub fn eval(&self, x: f64) -> f64 {
        let d = self.slope * (x - self.center_x);
        self.offset + self.sign * d.hypot(self.half_gap)
    }

    pub fn is_valid(&self) -> bool {
        self.residual < Self::MAX_RESIDUAL
    }
}

/// Fits `offset ± √((ω′(x − c))² + ω_s²)` to one branch by Levenberg-Marquardt
/// in normalized units. `initial_center` seeds the centre when given.
pub fn fit_hyperbola(samples: &[(f64, f64)], initial_center: Option<f64>) -> Result<CrossingFit> {
    if samples.len() < 7 {
        return Err(Error::DegenerateData(format!("hyperbola fit needs at least 7 samples, got {}", samples.len())));
    }
    if samples.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
        return Err(Error::DegenerateData("non-finite sample".into()));
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xmin, xmax) = (pts[0].0, pts[pts.len() - 1].0);
    let wmin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let wmax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let xc = 0.5 * (xmin + xmax);
    let sx = 0.5 * (xmax - xmin);
    let sv = wmax - wmin;
    if sx <= 0.0 || sv <= 0.0 {
        return Err(Error::DegenerateData("samples span no range in x or frequency".into()));
    }
    let us: Vec<f64> = pts.iter().map(|p| (p.0 - xc) / sx).collect();
    let vs_raw: Vec<f64> = pts.iter().map(|p| (p.1 - wmin) / sv).collect();

    let line = least_squares(&us.iter().map(|&u| vec![1.0, u]).collect::<Vec<_>>(), &vs_raw)
        .ok_or_else(|| Error::DegenerateData("samples are not resolvable in x".into()))?;
    let line_rms = (us.iter().zip(&vs_raw).map(|(u, v)| (line[0] + line[1] * u - v).powi(2)).sum::<f64>() / us.len() as f64).sqrt();
    if line_rms < 1e-9 {
        return Err(Error::DegenerateData("samples are collinear".into()));
    }
    let quad = Polynomial::fit(&us, &vs_raw, 2, 0.0).ok_or_else(|| Error::DegenerateData("samples are not resolvable in x".into()))?;
    let sign = if quad.coeffs[2] >= 0.0 { 1.0 } else { -1.0 };
    let vs: Vec<f64> = vs_raw.iter().map(|v| sign * v).collect();

    let guess = hyperbola_guess(&us, &vs, initial_center.map(|c| (c - xc) / sx));
    let model = |p: &[f64]| {
        let (c, a, s, o) = (p[0], p[1], p[2], p[3]);
        let mut r = Vec::with_capacity(us.len());
        let mut jac = Vec::with_capacity(us.len());
        for (&u, &v) in us.iter().zip(&vs) {
            let d = u - c;
            let root = (a * d).hypot(s);
            r.push(o + root - v);
            if root > 0.0 {
                jac.push(vec![-a * a * d / root, a * d * d / root, s / root, 1.0]);
            } else {
                jac.push(vec![0.0, d.abs(), 0.0, 1.0]);
            }
        }
        (r, jac)
    };
    let report = levenberg_marquardt(model, &guess, 500);
    if !report.converged {
        return Err(Error::FitNonConvergence(format!(
            "hyperbola fit stopped after {} iterations with gradient ratio {:.3e}",
            report.iterations,
            report.final_gradient / report.initial_gradient
        )));
    }
    let p = &report.params;
    let residual = (2.0 * report.cost / us.len() as f64).sqrt();
    Ok(CrossingFit {
        center_x: xc + sx * p[0],
        slope: p[1].abs() * sv / sx,
        half_gap: p[2].abs() * sv,
        offset: if sign > 0.0 { wmin + sv * p[3] } else { wmin - sv * p[3] },
        sign,
        residual,
    })
}

/// Starting point from the two asymptotes: straight lines through the outer
/// quarters of the data, intersected.
fn hyperbola_guess(us: &[f64], vs: &[f64], center: Option<f64>) -> [f64; 4] {
    let n = us.len();
    let k = (n / 4).max(2);
    let fit_line = |range: std::ops::Range<usize>| -> Option<(f64, f64)> {
        let rows: Vec<Vec<f64>> = us[range.clone()].iter().map(|&u| vec![1.0, u]).collect();
        least_squares(&rows, &vs[range]).map(|p| (p[0], p[1]))
    };
    let vmin_idx = (0..n).min_by(|&a, &b| vs[a].total_cmp(&vs[b])).unwrap_or(n / 2);
    let vmin = vs[vmin_idx];
    let fallback_center = center.unwrap_or(us[vmin_idx]).clamp(-1.0, 1.0);
    let (c, a, o) = match (fit_line(0..k), fit_line(n - k..n)) {
        (Some((bl, ml)), Some((br, mr))) if mr - ml > 1e-12 => {
            let u = (bl - br) / (mr - ml);
            let c = if u.abs() <= 1.0 { u } else { fallback_center };
            let o = (bl + ml * c).min(vmin);
            (c, 0.5 * (mr - ml), o)
        }
        _ => (fallback_center, 1.0, vmin - 0.1),
    };
    let s = (vmin - o).max(1e-3);
    [c, a.max(1e-3), s, o]
}

/// `ω″ = ω′²/ω_s` at the centre of a fitted crossing, signed by the branch.
pub fn curvature_at_crossing(fit: &CrossingFit) -> Result<f64> {
    if fit.half_gap == 0.0 {
        return Err(Error::ZeroGap);
    }
    Ok(fit.sign * fit.slope * fit.slope / fit.half_gap)
}

/// Fourth derivative of the fitted hyperbola at its centre, `∓3ω′⁴/ω_s³`.
pub fn quartic_at_crossing(fit: &CrossingFit) -> Result<f64> {
    if fit.half_gap == 0.0 {
        return Err(Error::ZeroGap);
    }
    Ok(-3.0 * fit.sign * fit.slope.powi(4) / fit.half_gap.powi(3))
}

/// Local form of the optomechanical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    Linear,
    Quadratic,
    Quartic,
    Mixed,
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::Linear => "linear",
            Coupling::Quadratic => "quadratic",
            Coupling::Quartic => "quartic",
            Coupling::Mixed => "mixed",
        })
    }
}

/// Classification thresholds.
///
/// A report has no linear term when `|ω′| < ε·|ω″|·x_s`. It has no quadratic
/// term when the Taylor term `ω″x²/2` is below `ε` times `ω⁽⁴⁾x⁴/24` at
/// `x = x_s`, and correspondingly for `ω′x` against the quartic term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub epsilon: f64,
    /// Length scale `x_s`, m.
    pub x_scale: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { epsilon: 1e-3, x_scale: 1e-9 }
    }
}

impl Thresholds {
    pub fn linear_free(&self, omega_prime: f64, omega_pp: f64) -> bool {
        omega_prime.abs() < self.epsilon * omega_pp.abs() * self.x_scale
    }

    pub fn quadratic_free(&self, omega_prime: f64, omega_pp: f64, omega4: f64) -> bool {
        let quartic_term = omega4.abs() * self.x_scale.powi(4) / 24.0;
        omega_pp.abs() * self.x_scale.powi(2) / 2.0 < self.epsilon * quartic_term && omega_prime.abs() * self.x_scale < self.epsilon * quartic_term
    }
}

/// Coupling coefficients at a point on one branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    /// Where the coefficients were evaluated, m.
    pub at: f64,
    /// rad/s per m.
    pub omega_prime: f64,
    /// rad/s per m².
    pub omega_pp: f64,
    /// rad/s per m⁴.
    pub omega4: f64,
    pub classification: Coupling,
}

impl CouplingReport {
    pub fn new(at: f64, omega_prime: f64, omega_pp: f64, omega4: f64, thresholds: &Thresholds) -> Self {
        let classification = classify_coupling(omega_prime, omega_pp, omega4, thresholds);
        CouplingReport { at, omega_prime, omega_pp, omega4, classification }
    }

    /// Report at the centre of a fitted crossing, where `ω′` vanishes.
    pub fn from_crossing(fit: &CrossingFit, thresholds: &Thresholds) -> Result<Self> {
        Ok(Self::new(fit.center_x, 0.0, curvature_at_crossing(fit)?, quartic_at_crossing(fit)?, thresholds))
    }
}

/// Quartic if neither linear nor quadratic terms survive the thresholds,
/// quadratic if only the linear term is absent, linear if `ω′x` is the
/// largest Taylor term at `x_s`, otherwise mixed.
pub fn classify_coupling(omega_prime: f64, omega_pp: f64, omega4: f64, thresholds: &Thresholds) -> Coupling {
    let xs = thresholds.x_scale;
    if omega4 != 0.0 && thresholds.quadratic_free(omega_prime, omega_pp, omega4) {
        return Coupling::Quartic;
    }
    if omega_pp != 0.0 && thresholds.linear_free(omega_prime, omega_pp) {
        return Coupling::Quadratic;
    }
    let t1 = omega_prime.abs() * xs;
    let t2 = omega_pp.abs() * xs * xs / 2.0;
    let t4 = omega4.abs() * xs.powi(4) / 24.0;
    if t1 > 0.0 && t1 >= t2 && t1 >= t4 {
        Coupling::Linear
    } else {
        Coupling::Mixed
    }
}

fn check_samples(samples: &[(f64, f64)], min: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.len() < min {
        return Err(Error::DegenerateData(format!("need at least {min} samples, got {}", samples.len())));
    }
    if samples.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
        return Err(Error::DegenerateData("non-finite sample".into()));
    }
    Ok(samples.iter().copied().unzip())
}

/// Local coefficients from a quartic polynomial fit. When the fitted curve
/// has a stationary point inside the samples, the report is taken at the
/// one nearest `at`; otherwise at `at` itself.
pub fn local_coupling(samples: &[(f64, f64)], at: f64, thresholds: &Thresholds) -> Result<CouplingReport> {
    let (xs, ws) = check_samples(samples, 5)?;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let poly = Polynomial::fit(&xs, &ws, 4, center).ok_or_else(|| Error::DegenerateData("samples do not determine a quartic".into()))?;
    let x = poly
        .stationary_points(lo, hi)
        .into_iter()
        .min_by(|a, b| (a - at).abs().total_cmp(&(b - at).abs()))
        .unwrap_or(at);
    Ok(CouplingReport::new(x, poly.derivative(x, 1), poly.derivative(x, 2), poly.derivative(x, 4), thresholds))
}

/// Even-quartic fit about the stationary point of a smooth extremum.
///
/// A general quartic locates the stationary point nearest the middle of the
/// samples; `a₀ + a₂u² + a₄u⁴` is then fitted in `u = x − x_c`, giving
/// `ω″ = 2a₂` and `ω⁽⁴⁾ = 24a₄`.
///
/// Where the quartic term outweighs the quadratic one over the sample span,
/// the stationary point is a near-triple root and poorly determined, so
/// `x_c` is taken instead as the point about which the fitted cubic term
/// vanishes.
pub fn quartic_fit(samples: &[(f64, f64)], thresholds: &Thresholds) -> Result<CouplingReport> {
    let (xs, ws) = check_samples(samples, 9)?;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let general = Polynomial::fit(&xs, &ws, 4, mid).ok_or_else(|| Error::DegenerateData("samples do not determine a quartic".into()))?;
    let Some(mut xc) = general.stationary_points(lo, hi).into_iter().min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs())) else {
        let slope = general.derivative(mid, 1);
        let threshold = thresholds.epsilon * general.derivative(mid, 2).abs().max(general.derivative(mid, 4).abs() * thresholds.x_scale.powi(2));
        return Err(Error::NonStationary { slope, threshold });
    };
    let c4 = general.coeffs[4];
    let c2 = 0.5 * general.derivative(xc, 2) * general.scale * general.scale;
    if c4.abs() > c2.abs() {
        let symmetric = general.center - general.scale * general.coeffs[3] / (4.0 * c4);
        if (lo..=hi).contains(&symmetric) {
            xc = symmetric;
        }
    }
    let even = Polynomial::fit_powers(&xs, &ws, &[0, 2, 4], xc).ok_or_else(|| Error::DegenerateData("samples do not determine an even quartic".into()))?;
    let omega_pp = even.derivative(xc, 2);
    let omega4 = even.derivative(xc, 4);
    Ok(CouplingReport::new(xc, general.derivative(xc, 1), omega_pp, omega4, thresholds))
}

/// An avoided crossing between two basis modes, identified by the sign of
/// the slope of `H_aa − H_bb` where the diabatic curves meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GapId {
    pub a: ModeIndex,
    pub b: ModeIndex,
    pub rising: bool,
}

impl fmt::Display for GapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TEM{}{}-TEM{}{}{}", self.a.m, self.a.n, self.b.m, self.b.n, if self.rising { '+' } else { '-' })
    }
}

/// `H_aa − H_bb` at `position` in the two-mode problem, rad/s.
pub fn diabatic_difference(pair: &Scenario, position: f64) -> Result<f64> {
    let h = pair.hamiltonian_at(position)?;
    Ok(h.get(0, 0) - h.get(1, 1))
}

/// Diabatic crossings of modes `a` and `b` in `[lo, hi]`, located by a scan
/// of `steps` intervals and polished by bisection.
pub fn find_crossings(scenario: &Scenario, a: ModeIndex, b: ModeIndex, lo: f64, hi: f64, steps: usize) -> Result<Vec<(f64, GapId)>> {
    let pair = scenario.reduced(a, b)?;
    let grid = linspace(lo, hi, steps.max(1) + 1);
    let values: Vec<f64> = grid.par_iter().map(|&x| diabatic_difference(&pair, x)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..grid.len() - 1 {
        let (f0, f1) = (values[k], values[k + 1]);
        if f0 == 0.0 || f0 * f1 < 0.0 {
            let x = if f0 == 0.0 {
                grid[k]
            } else {
                // evaluation errors cannot occur here: the same pose family already succeeded
                bisect(|x| diabatic_difference(&pair, x).unwrap_or(f64::NAN), grid[k], grid[k + 1], f0)
            };
            out.push((x, GapId { a, b, rising: f1 > f0 }));
        }
    }
    Ok(out)
}

/// Sampling controls for [`resolve_crossing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolveOptions {
    pub samples: usize,
    /// Half-width of the sampled window in units of the crossing length `ω_s/ω′`.
    pub width_factor: f64,
    pub min_half_width: f64,
    pub max_half_width: f64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions { samples: 41, width_factor: 4.0, min_half_width: 0.05e-9, max_half_width: 20e-9 }
    }
}

/// A crossing resolved in the two-mode problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCrossing {
    pub id: GapId,
    /// Where the diabatic curves meet, m.
    pub location: f64,
    /// `V_ab` there, rad/s. Its sign follows the fixed mode sign conventions.
    pub coupling: f64,
    /// `d(H_aa − H_bb)/dx` at the crossing, rad/s per m.
    pub diabatic_slope: f64,
    /// Fitted gap centre mapped back to membrane position, m.
    pub center: f64,
    /// Hyperbola fitted to the centred upper branch `(ω₊ − ω₋)/2` against
    /// the diabatic coordinate `ξ`. Since `dξ/dx = 1` at the crossing, its
    /// slope and curvature carry over to `x` unchanged.
    pub fit: CrossingFit,
    /// Narrowest sampled separation `ω₊ − ω₋`, rad/s.
    pub min_separation: f64,
    /// `(x, ξ, (ω₊ − ω₋)/2)` per sample.
    pub samples: Vec<(f64, f64, f64)>,
}

impl ResolvedCrossing {
    /// Fitted half gap carrying the sign of `V_ab`.
    pub fn signed_half_gap(&self) -> f64 {
        self.fit.half_gap.copysign(self.coupling)
    }
}

/// Samples the two-mode splitting around a diabatic crossing at `location`
/// and fits the hyperbola.
///
/// The diabatic curves are sinusoids with period `λ/2`, so across a window
/// wide enough to show both asymptotes their relative slope drifts by tens
/// of percent and the splitting is visibly skewed in `x`. The fit therefore
/// runs against `ξ = x_c + (H_aa − H_bb)/∂ₓ(H_aa − H_bb)|_{x_c}`, in which
/// the two-mode splitting is `√(ω′²ξ² + V²)` up to the slow drift of `V`.
pub fn resolve_crossing(scenario: &Scenario, id: GapId, location: f64, options: &ResolveOptions) -> Result<ResolvedCrossing> {
    if options.samples < 7 {
        return Err(invalid("samples", "a crossing needs at least 7 samples"));
    }
    let pair = scenario.reduced(id.a, id.b)?;
    let h = pair.hamiltonian_at(location)?;
    let coupling = h.get(0, 1);
    let delta = 0.5e-9;
    let rough_slope = (diabatic_difference(&pair, location + delta)? - diabatic_difference(&pair, location - delta)?) / (2.0 * delta);
    let slope = 0.5 * rough_slope.abs();
    let length = if slope > 0.0 { coupling.abs() / slope } else { f64::INFINITY };
    let half = (options.width_factor * length).clamp(options.min_half_width, options.max_half_width);
    let grid = linspace(location - half, location + half, options.samples);
    let raw: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let h = pair.hamiltonian_at(x)?;
            let e = symmetric_eigen(&h);
            Ok((x, h.get(0, 0) - h.get(1, 1), 0.5 * (e.values[1] - e.values[0])))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = raw.iter().map(|s| s.0).collect();
    let ds: Vec<f64> = raw.iter().map(|s| s.1).collect();
    let diabatic = Polynomial::fit(&xs, &ds, 4.min(options.samples - 1), location).ok_or_else(|| Error::DegenerateData("diabatic curves are not resolvable".into()))?;
    let diabatic_slope = diabatic.derivative(location, 1);
    if diabatic_slope == 0.0 {
        return Err(Error::UnresolvedGap { at: location, reason: "diabatic curves touch without crossing".into() });
    }
    let samples: Vec<(f64, f64, f64)> = raw.iter().map(|&(x, d, w)| (x, location + d / diabatic_slope, w)).collect();
    let min_separation = 2.0 * samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let fit = if coupling.abs() < 0.5 * diabatic_slope.abs() * GapTuning::CLOSED_LENGTH {
        // V is at rounding level: the branches meet in a V that a hyperbola
        // fit can only approach asymptotically
        closed_fit(&samples, location, diabatic_slope, coupling)
    } else {
        fit_hyperbola(&samples.iter().map(|s| (s.1, s.2)).collect::<Vec<_>>(), Some(location))?
    };
    let target = diabatic_slope * (fit.center_x - location);
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let f = |x: f64| diabatic.eval(x) - target;
    let center = if f(lo) * f(hi) < 0.0 { bisect(f, lo, hi, f(lo)) } else { fit.center_x };
    Ok(ResolvedCrossing { id, location, coupling, diabatic_slope, center, fit, min_separation, samples })
}

fn closed_fit(samples: &[(f64, f64, f64)], location: f64, diabatic_slope: f64, coupling: f64) -> CrossingFit {
    let mut fit = CrossingFit { center_x: location, slope: 0.5 * diabatic_slope.abs(), half_gap: coupling.abs(), offset: 0.0, sign: 1.0, residual: 0.0 };
    let lo = samples.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    let ms = samples.iter().map(|s| (fit.eval(s.1) - s.2).powi(2)).sum::<f64>() / samples.len() as f64;
    fit.residual = if hi > lo { ms.sqrt() / (hi - lo) } else { 0.0 };
    fit
}

/// Gap of one crossing tracked over coarse membrane positions.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTuning {
    pub id: GapId,
    pub crossings: Vec<ResolvedCrossing>,
    /// `(coarse position, signed half gap)` pairs, m and rad/s.
    pub points: Vec<(f64, f64)>,
    /// `∂ω_s/∂x`, rad/s per m.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Every fitted gap is below the resolution floor: the two modes do not
    /// couple here, and the line is exactly zero.
    pub closed: bool,
}

impl GapTuning {
    /// Gaps narrower than `ω′ ×` this length count as closed, m.
    pub const CLOSED_LENGTH: f64 = 1e-15;
}

/// Resolves gap `id` in the half-wavelength period starting at each coarse
/// position and regresses the signed half gap linearly on position.
///
/// The sign comes from `V_ab`, so a gap that closes and reopens stays on one
/// straight line instead of folding into a V.
pub fn gap_vs_displacement(scenario: &Scenario, id: GapId, coarse: &[f64], options: &ResolveOptions) -> Result<GapTuning> {
    if coarse.len() < 2 {
        return Err(invalid("coarse", "gap tuning needs at least two coarse positions"));
    }
    let period = 0.5 * scenario.geometry.wavelength;
    let mut crossings = Vec::with_capacity(coarse.len());
    for &x0 in coarse {
        let found = find_crossings(scenario, id.a, id.b, x0, x0 + period, 64)?;
        let Some(&(x, _)) = found.iter().find(|(_, g)| g.rising == id.rising) else {
            return Err(Error::UnresolvedGap { at: x0, reason: format!("no {id} crossing within one period") });
        };
        let resolved = resolve_crossing(scenario, id, x, options)?;
        if !resolved.fit.is_valid() {
            return Err(Error::UnresolvedGap { at: x0, reason: format!("fit residual {:.3e} exceeds {:.0e}", resolved.fit.residual, CrossingFit::MAX_RESIDUAL) });
        }
        crossings.push(resolved);
    }
    let closed = crossings.iter().all(|c| c.fit.half_gap <= GapTuning::CLOSED_LENGTH * c.fit.slope);
    if closed {
        let points = coarse.iter().map(|&x0| (x0, 0.0)).collect();
        return Ok(GapTuning { id, crossings, points, slope: 0.0, intercept: 0.0, r_squared: 1.0, closed });
    }
    let points: Vec<(f64, f64)> = coarse.iter().zip(&crossings).map(|(&x0, c)| (x0, c.signed_half_gap())).collect();
    let (slope, intercept, r_squared) = linear_regression(&points)?;
    Ok(GapTuning { id, crossings, points, slope, intercept, r_squared, closed })
}

/// Ordinary least-squares line through `(x, y)` with its `R²`.
pub fn linear_regression(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("regression needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, my - slope * mx, r_squared))
}

/// Samples of the branch dominated by `mode` at the middle of `grid`.
pub fn branch_samples(scenario: &Scenario, mode: ModeIndex, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let sweep = scenario.sweep(SweepAxis::AxialPosition, grid)?;
    let label = sweep.branch_of(mode, grid.len() / 2).ok_or_else(|| invalid("mode", format!("{mode} is not in the basis")))?;
    Ok(sweep.branch(label))
}

/// Fitted `ω″` at the extremum of the `mode` branch nearest `center`.
pub fn extremum_curvature(scenario: &Scenario, mode: ModeIndex, center: f64, half_width: f64, samples: usize, thresholds: &Thresholds) -> Result<CouplingReport> {
    let grid = linspace(center - half_width, center + half_width, samples);
    quartic_fit(&branch_samples(scenario, mode, &grid)?, thresholds)
}

/// Outcome of bracketing the tilt at which an extremum turns quartic.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticTransition {
    pub tilt: f64,
    /// Final bracket width, rad.
    pub bracket: f64,
    pub report: CouplingReport,
    /// `(tilt, ω″)` evaluated along the way, in order.
    pub history: Vec<(f64, f64)>,
}

/// Bisects the membrane tilt in `[lo, hi]` for the zero of the fitted `ω″`
/// of the `mode` branch at its extremum near `center`.
///
/// Stops once the bracket is narrower than `tilt_tol` and the report is free
/// of linear and quadratic terms, or when the bracket stops shrinking.
#[allow(clippy::too_many_arguments)]
pub fn quartic_transition(
    scenario: &Scenario,
    mode: ModeIndex,
    center: f64,
    half_width: f64,
    samples: usize,
    lo: f64,
    hi: f64,
    tilt_tol: f64,
    thresholds: &Thresholds,
) -> Result<QuarticTransition> {
    let eval = |tilt: f64| -> Result<CouplingReport> {
        let s = Scenario { membrane: crate::perturbation::MembraneConfig { tilt, ..scenario.membrane }, ..scenario.clone() };
        extremum_curvature(&s, mode, center, half_width, samples, thresholds)
    };
    let mut history = Vec::new();
    let (mut a, mut b) = (lo, hi);
    let ra = eval(a)?;
    let rb = eval(b)?;
    history.push((a, ra.omega_pp));
    history.push((b, rb.omega_pp));
    if ra.omega_pp.signum() == rb.omega_pp.signum() {
        return Err(Error::RootBracket(format!("omega'' has the same sign at tilts {a:.6e} and {b:.6e}")));
    }
    let mut fa = ra.omega_pp;
    let mut best = if ra.omega_pp.abs() < rb.omega_pp.abs() { (a, ra) } else { (b, rb) };
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let r = eval(m)?;
        history.push((m, r.omega_pp));
        if r.omega_pp.abs() <= best.1.omega_pp.abs() {
            best = (m, r);
        }
        if (r.omega_pp < 0.0) == (fa < 0.0) {
            a = m;
            fa = r.omega_pp;
        } else {
            b = m;
        }
        if b - a <= tilt_tol && best.1.classification == Coupling::Quartic {
            break;
        }
    }
    Ok(QuarticTransition { tilt: best.0, bracket: b - a, report: best.1, history })
}
