//! Cavity decay rates along a sweep.
//!
//! Each eigenbranch's `κ` is the incoherent mix of the base losses of the
//! basis modes it contains plus absorption in the membrane. Absorption
//! uses the same slab overlaps as the frequency shifts:
//! `K_ij = 2√(ω_i ω_j)·Re(n)·Im(n)·∭_slab ψ_i ψ_j`, and a mode with
//! coefficients `c` loses energy at `cᵀKc`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::eigen::SymMatrix;
use crate::error::{invalid, Error, Result};
use crate::lsq::least_squares;
use crate::perturbation::{build_matrix, MembraneConfig, PerturbationMatrix, Scenario, SpectrumSweep};

/// Per-basis-mode energy decay rates without the membrane's absorption, rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseLosses {
    kappa: Vec<f64>,
}

impl BaseLosses {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.is_empty() {
            return Err(invalid("kappa", "no base losses given"));
        }
        if let Some(k) = kappa.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(invalid("kappa", format!("base losses must be positive, got {k}")));
        }
        Ok(BaseLosses { kappa })
    }

    pub fn uniform(modes: usize, kappa: f64) -> Result<Self> {
        Self::new(vec![kappa; modes])
    }

    pub fn values(&self) -> &[f64] {
        &self.kappa
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    /// Copy with the losses of modes `a` and `b` exchanged.
    pub fn swapped(&self, a: usize, b: usize) -> Self {
        let mut kappa = self.kappa.clone();
        kappa.swap(a, b);
        BaseLosses { kappa }
    }
}

/// `Σ|c_k|²κ_k + absorption` for a normalized eigenvector.
pub fn eigenmode_kappa(vector: &[f64], base: &BaseLosses, absorption: f64) -> Result<f64> {
    if vector.len() != base.len() {
        return Err(invalid("kappa", format!("{} base losses for a {}-mode eigenvector", base.len(), vector.len())));
    }
    Ok(vector.iter().zip(&base.kappa).map(|(c, k)| c * c * k).sum::<f64>() + absorption)
}

/// Absorption matrix `K` for the membrane material of `index`.
pub fn absorption_matrix(matrix: &PerturbationMatrix, index: Complex64) -> SymMatrix {
    let n = matrix.dim();
    let mut k = SymMatrix::zeros(n);
    if index.im == 0.0 {
        return k;
    }
    for i in 0..n {
        for j in 0..=i {
            let w = (matrix.frequencies[i] * matrix.frequencies[j]).sqrt();
            k.set(i, j, 2.0 * w * index.re * index.im * matrix.overlaps.get(i, j));
        }
    }
    k
}

/// Energy decay rate from absorption for the mode with basis coefficients
/// `vector` and the membrane at `membrane`, rad/s.
pub fn absorption_kappa(scenario: &Scenario, membrane: &MembraneConfig, vector: &[f64]) -> Result<f64> {
    if vector.len() != scenario.basis.len() {
        return Err(invalid("vector", format!("{} coefficients for a {}-mode basis", vector.len(), scenario.basis.len())));
    }
    if membrane.index.im == 0.0 {
        return Ok(0.0);
    }
    let matrix = build_matrix(&scenario.geometry, membrane, &scenario.basis, &scenario.options)?;
    Ok(absorption_matrix(&matrix, membrane.index).quadratic_form(vector))
}

/// `κ` per branch along a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LossProfile {
    pub values: Vec<f64>,
    /// `kappa[label][point]`, rad/s.
    pub kappa: Vec<Vec<f64>>,
    /// Absorption part of `kappa`, same layout.
    pub absorption: Vec<Vec<f64>>,
}

impl LossProfile {
    /// `(sweep value, κ)` along one branch.
    pub fn branch(&self, label: usize) -> Vec<(f64, f64)> {
        self.values.iter().copied().zip(self.kappa[label].iter().copied()).collect()
    }

    /// `∂κ/∂x` at every sample: central differences inside, one-sided at
    /// the ends.
    pub fn gradient(&self, label: usize) -> Vec<f64> {
        let x = &self.values;
        let k = &self.kappa[label];
        let n = x.len();
        (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (k[b] - k[a]) / (x[b] - x[a])
            })
            .collect()
    }
}

/// Composes base losses with membrane absorption for every branch and point
/// of `sweep`, which must come from `scenario` swept along the axis.
pub fn loss_profile(scenario: &Scenario, sweep: &SpectrumSweep, base: &BaseLosses) -> Result<LossProfile> {
    if base.len() != sweep.basis.len() {
        return Err(invalid("kappa", format!("{} base losses for a {}-mode basis", base.len(), sweep.basis.len())));
    }
    let index = scenario.membrane.index;
    let per_point: Vec<(Vec<f64>, Vec<f64>)> = sweep
        .points
        .par_iter()
        .map(|p| {
            let membrane = scenario.membrane.with_parameter(sweep.axis, p.value);
            let absorption = if index.im == 0.0 {
                SymMatrix::zeros(sweep.basis.len())
            } else {
                absorption_matrix(&build_matrix(&scenario.geometry, &membrane, &sweep.basis, &scenario.options)?, index)
            };
            let mut kappa = vec![0.0; p.labels.len()];
            let mut abs = vec![0.0; p.labels.len()];
            for (col, &label) in p.labels.iter().enumerate() {
                let v = &p.eigen.vectors[col];
                abs[label] = absorption.quadratic_form(v);
                kappa[label] = eigenmode_kappa(v, base, abs[label])?;
            }
            Ok((kappa, abs))
        })
        .collect::<Result<_>>()?;
    let branches = sweep.branch_count();
    let mut kappa = vec![Vec::with_capacity(per_point.len()); branches];
    let mut absorption = vec![Vec::with_capacity(per_point.len()); branches];
    for (k, a) in per_point {
        for label in 0..branches {
            kappa[label].push(k[label]);
            absorption[label].push(a[label]);
        }
    }
    Ok(LossProfile { values: sweep.points.iter().map(|p| p.value).collect(), kappa, absorption })
}

/// `∂κ/∂x` of one branch at sweep value `at`, from the quadratic through the
/// nearest sample and its two neighbours. Exact for linear and quadratic κ.
pub fn kappa_gradient(profile: &LossProfile, label: usize, at: f64) -> Result<f64> {
    let x = &profile.values;
    let k = profile.kappa.get(label).ok_or_else(|| invalid("branch", format!("no branch {label}")))?;
    if x.len() < 3 {
        return Err(invalid("profile", "a gradient needs at least 3 samples"));
    }
    let i = (0..x.len()).min_by(|&a, &b| (x[a] - at).abs().total_cmp(&(x[b] - at).abs())).unwrap_or(0);
    if i == 0 || i == x.len() - 1 {
        return Err(Error::SweepBoundary { at });
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (k0, k1, k2) = (k[i - 1], k[i], k[i + 1]);
    // derivative of the Lagrange quadratic
    let d0 = k0 * ((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2));
    let d1 = k1 * ((at - x0) + (at - x2)) / ((x1 - x0) * (x1 - x2));
    let d2 = k2 * ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1));
    Ok(d0 + d1 + d2)
}

/// The `λ/2`-periodic component of a `κ(x)` record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierBound {
    /// Amplitude of the `cos(4πx/λ + phase)` component, rad/s.
    pub amplitude: f64,
    pub phase: f64,
    /// `Im(n)` that would produce that amplitude on its own.
    pub im_index: f64,
}

/// Least-squares amplitude and phase of the `λ/2`-periodic sinusoid in `samples`.
pub fn standing_wave_component(samples: &[(f64, f64)], wavelength: f64) -> Result<(f64, f64)> {
    if samples.len() < 4 {
        return Err(Error::DegenerateData(format!("need at least 4 samples, got {}", samples.len())));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let periods = (hi - lo) / (0.5 * wavelength);
    if periods < 2.0 {
        return Err(Error::InsufficientSpan { periods, required: 2.0 });
    }
    let q = 2.0 * std::f64::consts::TAU / wavelength;
    let rows: Vec<Vec<f64>> = samples.iter().map(|(x, _)| vec![1.0, (q * (x - lo)).cos(), (q * (x - lo)).sin()]).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let p = least_squares(&rows, &ys).ok_or_else(|| Error::DegenerateData("samples do not resolve the standing-wave period".into()))?;
    let amplitude = p[1].hypot(p[2]);
    // κ ≈ c + A cos(q x + phase), with the phase referred back to x = 0
    let phase = (-p[2]).atan2(p[1]) - q * lo;
    Ok((amplitude, phase.rem_euclid(std::f64::consts::TAU)))
}

/// Absorption bound from the standing-wave component of a measured or
/// simulated `κ(x)`. `unit_amplitude` is the same component of the
/// absorption alone per unit `Im(n)`, at the same geometry.
pub fn fourier_absorption_bound(samples: &[(f64, f64)], wavelength: f64, unit_amplitude: f64) -> Result<FourierBound> {
    if !(unit_amplitude > 0.0) {
        return Err(invalid("unit_amplitude", format!("must be positive, got {unit_amplitude}")));
    }
    let (amplitude, phase) = standing_wave_component(samples, wavelength)?;
    Ok(FourierBound { amplitude, phase, im_index: amplitude / unit_amplitude })
}

/// Standing-wave amplitude of the absorption per unit `Im(n)` for a single
/// basis mode sampled at `positions`.
pub fn unit_absorption_amplitude(scenario: &Scenario, mode: usize, positions: &[f64]) -> Result<f64> {
    if mode >= scenario.basis.len() {
        return Err(invalid("mode", format!("basis has {} modes", scenario.basis.len())));
    }
    let probe = 1e-6;
    let index = Complex64::new(scenario.membrane.index.re, probe);
    let mut vector = vec![0.0; scenario.basis.len()];
    vector[mode] = 1.0;
    let samples: Vec<(f64, f64)> = positions
        .par_iter()
        .map(|&x| {
            let membrane = MembraneConfig { position: x, index, ..scenario.membrane };
            Ok((x, absorption_kappa(scenario, &membrane, &vector)?))
        })
        .collect::<Result<_>>()?;
    Ok(standing_wave_component(&samples, scenario.geometry.wavelength)?.0 / probe)
}
