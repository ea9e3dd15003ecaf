//! Feasibility arithmetic for phonon-number measurements.
//!
//! The single-jump signal-to-noise `Σ⁽⁰⁾` is taken as an input: it depends
//! on the readout scheme and is not derived here. Everything else follows
//! from the mechanical and optical parameters.

use std::fmt;

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{invalid, Result};

/// Mechanical resonator, drive and readout cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams {
    /// Mechanical angular frequency ω_m, rad/s.
    pub omega_m: f64,
    /// Effective mass, kg.
    pub mass: f64,
    pub quality: f64,
    /// Bath temperature, K.
    pub bath_temperature: f64,
    /// Coherent drive amplitude x₀, m.
    pub drive_amplitude: f64,
    /// ω″, rad/s per m².
    pub coupling_wpp: f64,
    /// ω⁽⁴⁾, rad/s per m⁴.
    pub coupling_w4: f64,
    pub finesse: f64,
    /// Optical power incident on the cavity, W.
    pub input_power: f64,
    /// m.
    pub wavelength: f64,
    /// m.
    pub cavity_length: f64,
}

impl MechanicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_m", self.omega_m),
            ("mass", self.mass),
            ("bath_temperature", self.bath_temperature),
            ("finesse", self.finesse),
            ("input_power", self.input_power),
            ("wavelength", self.wavelength),
            ("cavity_length", self.cavity_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("drive_amplitude", self.drive_amplitude), ("coupling_wpp", self.coupling_wpp), ("coupling_w4", self.coupling_w4)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if !(self.quality >= 1.0) {
            return Err(invalid("quality", format!("must be at least 1, got {}", self.quality)));
        }
        Ok(())
    }
}

/// `√(ħ/2mω_m)`, m.
pub fn zero_point(mass: f64, omega_m: f64) -> f64 {
    (HBAR / (2.0 * mass * omega_m)).sqrt()
}

/// `k_B T/ħω_m`.
pub fn thermal_occupancy(temperature: f64, omega_m: f64) -> f64 {
    BOLTZMANN * temperature / (HBAR * omega_m)
}

/// Mean phonon number of a coherent state with peak displacement `x0`,
/// using `x0 = 2·x_zpf·√n̄`.
pub fn coherent_occupancy(x0: f64, x_zpf: f64) -> f64 {
    let a = x0 / (2.0 * x_zpf);
    a * a
}

/// `S = 8·n̄_m·n_T·Σ⁽⁰⁾`.
pub fn shot_noise_ratio(n_bar_m: f64, n_t: f64, sigma0: f64) -> f64 {
    8.0 * n_bar_m * n_t * sigma0
}

/// The `Σ⁽⁰⁾` that makes `S` equal `target`.
pub fn closing_sigma0(target: f64, n_bar_m: f64, n_t: f64) -> f64 {
    target / (8.0 * n_bar_m * n_t)
}

/// `ω⁽⁴⁾·x_zpf⁴`, the rate multiplying `ħ·n_γ·n_m²` in the quartic
/// coupling Hamiltonian, rad/s.
pub fn quartic_coefficient(omega4: f64, x_zpf: f64) -> f64 {
    omega4 * x_zpf.powi(4)
}

/// Where `n_T` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalModel {
    /// `k_B T/ħω_m` at the bath temperature.
    Bath,
    /// A fixed occupancy reached by laser cooling.
    LaserCooled(f64),
}

impl fmt::Display for ThermalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThermalModel::Bath => write!(f, "bath"),
            ThermalModel::LaserCooled(_) => write!(f, "laser_cooled"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QndEstimate {
    pub thermal: ThermalModel,
    pub x_zpf: f64,
    pub n_t: f64,
    pub n_bar_m: f64,
    pub sigma0: f64,
    pub s: f64,
    /// rad/s per photon per phonon².
    pub h4_coefficient: f64,
}

/// Evaluates every quantity for one `n_T` interpretation.
pub fn estimate(params: &MechanicalParams, sigma0: f64, thermal: ThermalModel) -> Result<QndEstimate> {
    params.validate()?;
    if !(sigma0 >= 0.0 && sigma0.is_finite()) {
        return Err(invalid("sigma0", format!("must be non-negative, got {sigma0}")));
    }
    let x_zpf = zero_point(params.mass, params.omega_m);
    let n_t = match thermal {
        ThermalModel::Bath => thermal_occupancy(params.bath_temperature, params.omega_m),
        ThermalModel::LaserCooled(n) if n >= 0.0 && n.is_finite() => n,
        ThermalModel::LaserCooled(n) => return Err(invalid("laser_cooled_n_t", format!("must be non-negative, got {n}"))),
    };
    let n_bar_m = coherent_occupancy(params.drive_amplitude, x_zpf);
    Ok(QndEstimate {
        thermal,
        x_zpf,
        n_t,
        n_bar_m,
        sigma0,
        s: shot_noise_ratio(n_bar_m, n_t, sigma0),
        h4_coefficient: quartic_coefficient(params.coupling_w4, x_zpf),
    })
}

/// Estimates under both readings of `n_T`.
pub fn estimate_both(params: &MechanicalParams, sigma0: f64, laser_cooled_n_t: f64) -> Result<[QndEstimate; 2]> {
    Ok([estimate(params, sigma0, ThermalModel::Bath)?, estimate(params, sigma0, ThermalModel::LaserCooled(laser_cooled_n_t))?])
}

/// `Σ⁽⁰⁾` from a user model evaluated on the parameters.
pub fn estimate_with<F: Fn(&MechanicalParams) -> f64>(params: &MechanicalParams, sigma0: F, thermal: ThermalModel) -> Result<QndEstimate> {
    estimate(params, sigma0(params), thermal)
}
