//! Exact planar model of a dielectric slab between two perfect mirrors.
//!
//! The field is `sin` of the distance to each mirror outside the slab and is
//! carried through it by the single-layer characteristic matrix. A resonance
//! is a wavenumber at which the two outer solutions match across the slab.

use num_complex::Complex64;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{invalid, Error, Result};
use crate::lsq::bisect;

/// Amplitude reflection and transmission of a free-standing slab at normal
/// incidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabResponse {
    pub r: Complex64,
    pub t: Complex64,
}

impl SlabResponse {
    /// `|r|² + |t|²`, which is 1 for a lossless slab.
    pub fn energy(&self) -> f64 {
        self.r.norm_sqr() + self.t.norm_sqr()
    }
}

/// Response of a slab of `thickness` and complex `index` in vacuum.
pub fn slab_response(thickness: f64, index: Complex64, wavelength: f64) -> Result<SlabResponse> {
    if !(thickness >= 0.0) {
        return Err(invalid("thickness", format!("must be non-negative, got {thickness}")));
    }
    if !(index.re >= 1.0) {
        return Err(invalid("index", format!("real part must be at least 1, got {}", index.re)));
    }
    if !(wavelength > 0.0) {
        return Err(invalid("wavelength", format!("must be positive, got {wavelength}")));
    }
    let delta = index * (std::f64::consts::TAU * thickness / wavelength);
    let (c, s) = (delta.cos(), delta.sin());
    let i = Complex64::i();
    let m11 = c;
    let m12 = -i * s / index;
    let m21 = -i * s * index;
    let m22 = c;
    let denom = m11 + m12 + m21 + m22;
    Ok(SlabResponse { r: (m11 + m12 - m21 - m22) / denom, t: Complex64::new(2.0, 0.0) / denom })
}

/// Planar cavity of length `length` with a lossless slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarCavity {
    pub length: f64,
    pub thickness: f64,
    pub index: f64,
    pub wavelength: f64,
}

impl PlanarCavity {
    pub fn new(length: f64, thickness: f64, index: f64, wavelength: f64) -> Result<Self> {
        if !(length > 0.0 && wavelength > 0.0 && wavelength < length) {
            return Err(invalid("length", "need 0 < wavelength < length"));
        }
        if !(thickness >= 0.0 && thickness < 0.5 * length) {
            return Err(invalid("thickness", format!("must lie in [0, L/2), got {thickness}")));
        }
        if !(index >= 1.0) {
            return Err(invalid("index", format!("must be at least 1, got {index}")));
        }
        Ok(PlanarCavity { length, thickness, index, wavelength })
    }

    /// Longitudinal order nearest the nominal wavelength.
    pub fn order(&self) -> f64 {
        (2.0 * self.length / self.wavelength).round()
    }

    /// Empty-cavity wavenumber of that order.
    pub fn empty_wavenumber(&self) -> f64 {
        self.order() * std::f64::consts::PI / self.length
    }

    /// Matching function whose zeros in `k` are the resonances with the slab
    /// centred at `x`.
    pub fn matching(&self, x: f64, k: f64) -> f64 {
        let a = 0.5 * self.length + x - 0.5 * self.thickness;
        let b = 0.5 * self.length - x - 0.5 * self.thickness;
        let delta = self.index * k * self.thickness;
        let (sd, cd) = delta.sin_cos();
        let (sa, ca) = (k * a).sin_cos();
        let v1 = cd * sa + sd / self.index * ca;
        let v2 = -self.index * sd * sa + cd * ca;
        let (sb, cb) = (k * b).sin_cos();
        v1 * cb + v2 * sb
    }

    /// Detuning of the resonance continuing the reference order, rad/s.
    pub fn detuning(&self, x: f64) -> Result<f64> {
        if x.abs() >= 0.5 * self.length - self.thickness {
            return Err(invalid("position", "slab must lie strictly between the mirrors"));
        }
        if self.thickness == 0.0 || self.index == 1.0 {
            return Ok(0.0);
        }
        let kq = self.empty_wavenumber();
        let half = 0.5 * std::f64::consts::PI / self.length;
        let (lo, hi) = (kq - half, kq + half);
        let f = |k: f64| self.matching(x, k);
        let (flo, fhi) = (f(lo), f(hi));
        if flo * fhi > 0.0 {
            return Err(Error::RootBracket(format!("no resonance within half a free spectral range at x = {x:e}")));
        }
        let k = bisect(f, lo, hi, flo);
        Ok(SPEED_OF_LIGHT * (k - kq))
    }
}

/// Exact planar detuning (rad/s) with the slab centred at `x`.
pub fn resonance_detuning(x: f64, thickness: f64, index: f64, wavelength: f64, length: f64) -> Result<f64> {
    PlanarCavity::new(length, thickness, index, wavelength)?.detuning(x)
}

/// Second central difference of `f` at `x`, Richardson-extrapolated over
/// halving steps starting from `h` until two levels agree to `rel_tol`.
pub fn second_derivative<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64, rel_tol: f64) -> Result<f64> {
    let f0 = f(x)?;
    let central = |h: f64| -> Result<f64> { Ok((f(x + h)? - 2.0 * f0 + f(x - h)?) / (h * h)) };
    let mut table: Vec<Vec<f64>> = vec![vec![central(h)?]];
    let mut step = h;
    for level in 1..8 {
        step *= 0.5;
        let mut row = vec![central(step)?];
        for j in 1..=level {
            let factor = 4f64.powi(j as i32);
            let v = (factor * row[j - 1] - table[level - 1][j - 1]) / (factor - 1.0);
            row.push(v);
        }
        let best = row[level];
        let prev = table[level - 1][level - 1];
        table.push(row);
        if (best - prev).abs() <= rel_tol * best.abs() {
            return Ok(best);
        }
    }
    Ok(table.last().and_then(|r| r.last().copied()).unwrap_or(f64::NAN))
}

/// Curvature of the planar detuning at an extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature1d {
    /// Slab position of the extremum, m.
    pub position: f64,
    pub detuning: f64,
    /// `ω″`, rad/s per m².
    pub curvature: f64,
}

/// Locates both detuning extrema in one `λ/2` period around the cavity
/// centre and returns the one with the larger `|ω″|`.
pub fn curvature_1d(thickness: f64, index: f64, wavelength: f64, length: f64) -> Result<Curvature1d> {
    let cavity = PlanarCavity::new(length, thickness, index, wavelength)?;
    if thickness == 0.0 || index == 1.0 {
        return Ok(Curvature1d { position: 0.0, detuning: 0.0, curvature: 0.0 });
    }
    let period = 0.5 * wavelength;
    let n = 64;
    let grid: Vec<f64> = (0..n).map(|i| period * i as f64 / n as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| cavity.detuning(x)).collect::<Result<_>>()?;
    let imax = (0..n).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    let imin = (0..n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    let step = period / n as f64;
    let mut best: Option<Curvature1d> = None;
    for (i, sign) in [(imax, -1.0), (imin, 1.0)] {
        let x = golden_minimum(|x| sign * cavity.detuning(x).unwrap_or(f64::NAN), grid[i] - step, grid[i] + step, 1e-15);
        let curvature = second_derivative(|y| cavity.detuning(y), x, 8e-9, 1e-9)?;
        let candidate = Curvature1d { position: x, detuning: cavity.detuning(x)?, curvature };
        if best.is_none_or(|b| candidate.curvature.abs() > b.curvature.abs()) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| Error::DegenerateData("no extremum found".into()))
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_minimum<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if c == d {
            break;
        }
    }
    0.5 * (a + b)
}
