//! The empty symmetric Fabry-Perot cavity: Gaussian beam parameters,
//! Hermite-Gauss standing-wave eigenmodes and their resonance frequencies.
//!
//! Coordinates: `x` runs along the cavity axis with the waist at `x = 0` and
//! the mirrors at `x = ±L/2`; `(y, z)` are transverse. The first transverse
//! index `m` belongs to `y`, the second `n` to `z`.

use std::fmt;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{invalid, Error, Result};
use crate::quadrature::hermite_functions;

/// Two identical spherical mirrors facing each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    /// Mirror separation `L`, m.
    pub length: f64,
    /// Radius of curvature `R` of both mirrors, m.
    pub mirror_radius: f64,
    /// Wavelength used to select the longitudinal order, m.
    pub wavelength: f64,
    pub finesse: f64,
}

impl CavityGeometry {
    pub fn new(length: f64, mirror_radius: f64, wavelength: f64, finesse: f64) -> Result<Self> {
        let g = CavityGeometry { length, mirror_radius, wavelength, finesse };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.mirror_radius > 0.0 && self.length < 2.0 * self.mirror_radius) {
            return Err(Error::UnstableResonator { length: self.length, radius: self.mirror_radius });
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(invalid("wavelength", format!("must be positive, got {}", self.wavelength)));
        }
        if !(self.finesse > 0.0) {
            return Err(invalid("finesse", format!("must be positive, got {}", self.finesse)));
        }
        Ok(())
    }

    /// Mirror g-parameter `1 - L/R`.
    pub fn g_parameter(&self) -> f64 {
        1.0 - self.length / self.mirror_radius
    }

    /// Free spectral range `c/2L`, Hz.
    pub fn fsr_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.length)
    }

    /// Empty-cavity linewidth `FSR/F`, Hz.
    pub fn linewidth_hz(&self) -> f64 {
        self.fsr_hz() / self.finesse
    }

    pub fn beam(&self) -> Result<GaussianBeam> {
        beam_params(self)
    }

    /// One-way Gouy phase accumulated between the mirrors, from the
    /// g-parameter: `arccos(g)`.
    pub fn one_way_gouy_from_g(&self) -> f64 {
        self.g_parameter().acos()
    }

    /// Longitudinal index of the TEM00 resonance closest to the nominal
    /// wavelength.
    pub fn reference_q(&self) -> Result<u32> {
        let beam = self.beam()?;
        let gouy = 2.0 * beam.gouy_phase(0.5 * self.length);
        let q = (2.0 * self.length / self.wavelength - gouy / std::f64::consts::PI).round();
        if q < 1.0 || q > u32::MAX as f64 {
            return Err(invalid("wavelength", "no positive longitudinal order fits the cavity"));
        }
        Ok(q as u32)
    }

    /// Absolute resonance frequency of a mode, rad/s.
    pub fn empty_frequency(&self, idx: ModeIndex) -> Result<f64> {
        empty_frequency(self, idx)
    }

    /// Empty-cavity frequency of `idx` relative to `reference`, rad/s.
    ///
    /// Computed from the index differences directly so that nearly equal
    /// optical frequencies do not cancel catastrophically.
    pub fn empty_detuning(&self, idx: ModeIndex, reference: ModeIndex) -> Result<f64> {
        let beam = self.beam()?;
        let gouy = 2.0 * beam.gouy_phase(0.5 * self.length);
        let dq = idx.q as f64 - reference.q as f64;
        let dorder = idx.order() as f64 - reference.order() as f64;
        Ok(SPEED_OF_LIGHT / self.length * (dq * std::f64::consts::PI + dorder * gouy))
    }
}

/// Gaussian beam supported by the resonator, waist at the cavity centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    pub waist: f64,
    pub rayleigh_range: f64,
    pub wavelength: f64,
}

impl GaussianBeam {
    /// `w(x) = w0 sqrt(1 + (x/zR)^2)`.
    pub fn spot_size(&self, x: f64) -> f64 {
        self.waist * (1.0 + (x / self.rayleigh_range).powi(2)).sqrt()
    }

    /// Gouy phase `atan(x/zR)`.
    pub fn gouy_phase(&self, x: f64) -> f64 {
        (x / self.rayleigh_range).atan()
    }

    /// `d(gouy)/dx`.
    pub fn gouy_slope(&self, x: f64) -> f64 {
        self.rayleigh_range / (x * x + self.rayleigh_range * self.rayleigh_range)
    }

    /// Signed wavefront radius `x + zR²/x`; infinite at the waist.
    pub fn wavefront_radius(&self, x: f64) -> f64 {
        if x == 0.0 {
            f64::INFINITY
        } else {
            x + self.rayleigh_range * self.rayleigh_range / x
        }
    }

    /// Wavefront curvature `1/R(x)`, finite everywhere.
    pub fn wavefront_curvature(&self, x: f64) -> f64 {
        x / (x * x + self.rayleigh_range * self.rayleigh_range)
    }
}

/// Derives the resonator's Gaussian beam from the mirror-match condition
/// `R(±L/2) = ±R`, which for identical mirrors gives `zR² = L(2R − L)/4`.
pub fn beam_params(geometry: &CavityGeometry) -> Result<GaussianBeam> {
    geometry.validate()?;
    let l = geometry.length;
    let zr = (l * (2.0 * geometry.mirror_radius - l)).sqrt() / 2.0;
    let waist = (geometry.wavelength * zr / std::f64::consts::PI).sqrt();
    Ok(GaussianBeam { waist, rayleigh_range: zr, wavelength: geometry.wavelength })
}

/// Label of a Hermite-Gauss cavity mode TEM_mn with longitudinal order `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub q: u32,
    pub m: u32,
    pub n: u32,
}

impl ModeIndex {
    pub fn new(q: u32, m: u32, n: u32) -> Result<Self> {
        if q < 1 {
            return Err(invalid("q", "longitudinal order must be at least 1"));
        }
        Ok(ModeIndex { q, m, n })
    }

    /// Transverse order `m + n`.
    pub fn order(&self) -> u32 {
        self.m + self.n
    }

    /// Same transverse pattern, longitudinal order shifted by `dq`.
    pub fn shifted(&self, dq: i64) -> Result<Self> {
        let q = self.q as i64 + dq;
        if q < 1 || q > u32::MAX as i64 {
            return Err(invalid("q", format!("longitudinal order {q} out of range")));
        }
        Ok(ModeIndex { q: q as u32, ..*self })
    }

    /// Parity of `(m, n)`: `true` for odd.
    pub fn parity(&self) -> (bool, bool) {
        (self.m % 2 == 1, self.n % 2 == 1)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TEM{}{}[q={}]", self.m, self.n, self.q)
    }
}

/// Resonance condition `kL − (m+n+1)·2ζ(L/2) = qπ`, returned as `ω = ck`.
pub fn empty_frequency(geometry: &CavityGeometry, idx: ModeIndex) -> Result<f64> {
    let beam = geometry.beam()?;
    let gouy = 2.0 * beam.gouy_phase(0.5 * geometry.length);
    let k = (idx.q as f64 * std::f64::consts::PI + (idx.order() as f64 + 1.0) * gouy) / geometry.length;
    Ok(SPEED_OF_LIGHT * k)
}

/// A single empty-cavity standing-wave eigenmode, ready for evaluation.
///
/// `ψ(x, y, z) = sqrt(2/L) · u_m(y; w(x)) · u_n(z; w(x)) · sin φ(x, r²)` with
/// `φ = k(x + L/2) + k r²/2R(x) − (m+n+1)(ζ(x) + ζ(L/2))`, so that the
/// field has a node at the left mirror and, by the resonance condition, at
/// the right one too. The transverse profiles are unit-normalized in every
/// plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    pub index: ModeIndex,
    pub beam: GaussianBeam,
    pub length: f64,
    /// Wavenumber `ω/c`, 1/m.
    pub wavenumber: f64,
    /// Angular frequency, rad/s.
    pub frequency: f64,
}

impl CavityMode {
    pub fn new(geometry: &CavityGeometry, index: ModeIndex) -> Result<Self> {
        let beam = geometry.beam()?;
        let frequency = empty_frequency(geometry, index)?;
        Ok(CavityMode {
            index,
            beam,
            length: geometry.length,
            wavenumber: frequency / SPEED_OF_LIGHT,
            frequency,
        })
    }

    /// Amplitude normalization `sqrt(2/L)`.
    pub fn axial_norm(&self) -> f64 {
        (2.0 / self.length).sqrt()
    }

    /// Standing-wave phase at axial position `x` and squared transverse radius `r2`,
    /// reduced modulo 2π.
    ///
    /// The resonance condition turns `kL/2 − (m+n+1)ζ(L/2)` into exactly `qπ/2`,
    /// so the large axial phase never has to be rounded.
    pub fn phase(&self, x: f64, r2: f64) -> f64 {
        let base = (self.index.q % 4) as f64 * std::f64::consts::FRAC_PI_2;
        let gouy = (self.index.order() as f64 + 1.0) * self.beam.gouy_phase(x);
        base + self.wavenumber * x + 0.5 * self.wavenumber * r2 * self.beam.wavefront_curvature(x) - gouy
    }

    /// `dφ/dx` on axis: wavenumber minus the Gouy slope.
    pub fn phase_slope(&self, x: f64) -> f64 {
        self.wavenumber - (self.index.order() as f64 + 1.0) * self.beam.gouy_slope(x)
    }

    /// Unit-normalized transverse profile `u_m(y) u_n(z)` in the plane `x`.
    pub fn transverse(&self, x: f64, y: f64, z: f64) -> f64 {
        let w = self.beam.spot_size(x);
        transverse_factor(self.index.m as usize, y, w) * transverse_factor(self.index.n as usize, z, w)
    }

    /// Full real field `ψ(x, y, z)`.
    pub fn value(&self, x: f64, y: f64, z: f64) -> f64 {
        let r2 = y * y + z * z;
        self.axial_norm() * self.transverse(x, y, z) * self.phase(x, r2).sin()
    }
}

/// `u_m(s; w) = (sqrt(2)/w)^(1/2) h_m(sqrt(2) s / w)`.
pub fn transverse_factor(order: usize, s: f64, spot: f64) -> f64 {
    let mut buf = vec![0.0; order + 1];
    let scale = std::f64::consts::SQRT_2 / spot;
    hermite_functions(scale * s, &mut buf);
    scale.sqrt() * buf[order]
}

/// Evaluates `ψ_idx` at `point = [x, y, z]`.
pub fn mode_field(geometry: &CavityGeometry, idx: ModeIndex, point: [f64; 3]) -> Result<f64> {
    let mode = CavityMode::new(geometry, idx)?;
    Ok(mode.value(point[0], point[1], point[2]))
}

/// All modes with `m + n <= cap` whose empty frequency lies within
/// `window_hz` of `reference`, ordered by detuning, then by index.
pub fn standard_basis(geometry: &CavityGeometry, reference: ModeIndex, cap: u32, window_hz: f64) -> Result<Vec<ModeIndex>> {
    let window = window_hz * crate::constants::TWO_PI;
    let fsr = crate::constants::TWO_PI * geometry.fsr_hz();
    let span = (window / fsr).ceil() as i64 + cap as i64 + 1;
    let mut modes = Vec::new();
    for dq in -span..=span {
        for order in 0..=cap {
            for m in (0..=order).rev() {
                let Ok(idx) = reference.shifted(dq).map(|r| ModeIndex { m, n: order - m, ..r }) else {
                    continue;
                };
                let det = geometry.empty_detuning(idx, reference)?;
                if det.abs() <= window {
                    modes.push((det, idx));
                }
            }
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(modes.into_iter().map(|(_, i)| i).collect())
}
