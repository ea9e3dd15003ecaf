//! First-order degenerate perturbation theory for a thin dielectric slab
//! inside the cavity.
//!
//! The slab couples the empty-cavity modes through
//! `V_ij = −(√(ω_i ω_j)/2)(Re(n)² − 1) ∭_slab ψ_i ψ_j dV`; the perturbed
//! frequencies are the eigenvalues of `diag(ω_i − ω_ref) + V`.
//!
//! The volume integral is factored: a tensor Gauss-Hermite rule over the
//! transverse plane, and at every transverse node a closed-form integral of
//! the two standing waves across the local slab thickness. The slab mid-plane
//! sits at `x + tan θ · ((y − y0) cos φ + (z − z0) sin φ)`.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cavity::{CavityGeometry, CavityMode, ModeIndex};
use crate::eigen::{symmetric_eigen, Eigen, SymMatrix};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{hermite_functions, GaussHermite};

/// Membrane pose and material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneConfig {
    /// Centre of the slab along the cavity axis, relative to the waist, m.
    pub position: f64,
    /// Tilt magnitude θ, rad.
    pub tilt: f64,
    /// Direction of the slope in the transverse plane, rad. Zero tilts the
    /// slab about the z axis, so its surface climbs along y.
    pub tilt_axis: f64,
    /// Thickness, m.
    pub thickness: f64,
    pub index: Complex64,
    /// Side of the square membrane, m.
    pub side_length: f64,
    /// Transverse centre of the membrane `(y0, z0)`, m.
    pub offset: [f64; 2],
}

impl Default for MembraneConfig {
    fn default() -> Self {
        MembraneConfig {
            position: 0.0,
            tilt: 0.0,
            tilt_axis: 0.0,
            thickness: 39e-9,
            index: Complex64::new(2.0, 0.0),
            side_length: 1e-3,
            offset: [0.0, 0.0],
        }
    }
}

impl MembraneConfig {
    /// Checks the material and the lateral-size assumption against the local
    /// spot size.
    pub fn validate(&self, geometry: &CavityGeometry) -> Result<()> {
        if !(self.thickness >= 0.0 && self.thickness.is_finite()) {
            return Err(invalid("thickness", format!("must be non-negative, got {}", self.thickness)));
        }
        if !(self.tilt >= 0.0 && self.tilt < std::f64::consts::FRAC_PI_2) {
            return Err(invalid("tilt", format!("must lie in [0, pi/2), got {}", self.tilt)));
        }
        if !(self.index.re >= 1.0) {
            return Err(invalid("index", format!("real part must be at least 1, got {}", self.index.re)));
        }
        if !(self.index.im >= 0.0 && self.index.im < 0.1 * self.index.re) {
            return Err(invalid("index", format!("imaginary part must satisfy 0 <= Im(n) << Re(n), got {}", self.index.im)));
        }
        if self.position.abs() + self.thickness >= 0.5 * geometry.length {
            return Err(invalid("position", "membrane must lie strictly between the mirrors"));
        }
        let spot = geometry.beam()?.spot_size(self.position);
        let half = 0.5 * self.side_length;
        let clearance = half - self.offset[0].abs().max(self.offset[1].abs());
        if clearance < 4.0 * spot {
            return Err(invalid(
                "side_length",
                format!("membrane edge {clearance:.3e} m from the axis is not large against the {spot:.3e} m spot"),
            ));
        }
        Ok(())
    }

    /// Copy with one sweepable parameter replaced.
    pub fn with_parameter(&self, axis: SweepAxis, value: f64) -> Self {
        let mut m = *self;
        match axis {
            SweepAxis::AxialPosition => m.position = value,
            SweepAxis::TiltMagnitude => m.tilt = value,
            SweepAxis::TiltAxisAngle => m.tilt_axis = value,
        }
        m
    }

    pub fn parameter(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::AxialPosition => self.position,
            SweepAxis::TiltMagnitude => self.tilt,
            SweepAxis::TiltAxisAngle => self.tilt_axis,
        }
    }

    /// Local mid-plane position along the axis at transverse point `(y, z)`.
    pub fn surface(&self, y: f64, z: f64) -> f64 {
        let (s, c) = self.tilt_axis.sin_cos();
        self.position + self.tilt.tan() * ((y - self.offset[0]) * c + (z - self.offset[1]) * s)
    }

    /// Axial extent of the tilted slab, `t / cos θ`.
    pub fn axial_thickness(&self) -> f64 {
        self.thickness / self.tilt.cos()
    }

    fn covers(&self, y: f64, z: f64) -> bool {
        let half = 0.5 * self.side_length;
        (y - self.offset[0]).abs() <= half && (z - self.offset[1]).abs() <= half
    }
}

/// Which membrane parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    AxialPosition,
    TiltMagnitude,
    TiltAxisAngle,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::AxialPosition => "axial_position",
            SweepAxis::TiltMagnitude => "tilt_magnitude",
            SweepAxis::TiltAxisAngle => "tilt_axis_angle",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "axial_position" => Ok(SweepAxis::AxialPosition),
            "tilt_magnitude" => Ok(SweepAxis::TiltMagnitude),
            "tilt_axis_angle" => Ok(SweepAxis::TiltAxisAngle),
            other => Err(invalid("axis", format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// Transverse quadrature control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Nodes per transverse axis on the first pass.
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Accept once doubling the node count changes no element by more than
    /// this fraction of the largest element.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { initial_nodes: 64, max_nodes: 256, rel_tol: 1e-6 }
    }
}

impl QuadratureOptions {
    /// A single `nodes`-point rule with no refinement. Results then vary
    /// smoothly with the membrane pose, which fine bisections rely on.
    pub fn fixed(nodes: usize) -> Self {
        QuadratureOptions { initial_nodes: nodes, max_nodes: nodes, rel_tol: f64::INFINITY }
    }
}

/// Ordered mode basis together with the mode detunings are measured from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    pub modes: Vec<ModeIndex>,
    pub reference: ModeIndex,
}

impl ModeBasis {
    pub fn new(modes: Vec<ModeIndex>, reference: ModeIndex) -> Result<Self> {
        if modes.is_empty() {
            return Err(invalid("basis", "mode basis is empty"));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(invalid("basis", format!("duplicate mode {m}")));
            }
        }
        Ok(ModeBasis { modes, reference })
    }

    /// TEM00 at `q` and the TEM{20,11,02} triplet one order below, which
    /// sits a few hundred MHz away in a 6 cm cavity with 5 cm mirrors.
    pub fn singlet_triplet(q: u32) -> Self {
        let modes = vec![
            ModeIndex { q, m: 0, n: 0 },
            ModeIndex { q: q - 1, m: 2, n: 0 },
            ModeIndex { q: q - 1, m: 1, n: 1 },
            ModeIndex { q: q - 1, m: 0, n: 2 },
        ];
        ModeBasis { modes, reference: ModeIndex { q, m: 0, n: 0 } }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn position(&self, mode: ModeIndex) -> Option<usize> {
        self.modes.iter().position(|m| *m == mode)
    }

    pub fn max_order(&self) -> u32 {
        self.modes.iter().map(|m| m.m.max(m.n)).max().unwrap_or(0)
    }
}

/// Options for building perturbation matrices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerturbationOptions {
    pub quadrature: QuadratureOptions,
    /// Phenomenological per-mode diagonal offsets, Hz, standing in for
    /// empty-cavity asymmetry. Empty means all zero.
    pub asymmetry_hz: Vec<f64>,
}

/// Computes `∭_slab ψ_i ψ_j dV` for every pair in `modes`, refining the
/// transverse rule until converged.
pub fn slab_overlaps(geometry: &CavityGeometry, membrane: &MembraneConfig, modes: &[ModeIndex], opts: &QuadratureOptions) -> Result<SymMatrix> {
    membrane.validate(geometry)?;
    let cavity: Vec<CavityMode> = modes.iter().map(|&m| CavityMode::new(geometry, m)).collect::<Result<_>>()?;
    if membrane.thickness == 0.0 {
        return Ok(SymMatrix::zeros(modes.len()));
    }
    let mut nodes = opts.initial_nodes.max(2);
    let mut coarse = overlaps_fixed(&cavity, membrane, &GaussHermite::new(nodes));
    if 2 * nodes > opts.max_nodes {
        return Ok(coarse);
    }
    let mut change = f64::NAN;
    while 2 * nodes <= opts.max_nodes {
        nodes *= 2;
        let fine = overlaps_fixed(&cavity, membrane, &GaussHermite::new(nodes));
        let scale = fine.max_abs();
        let diff = (0..modes.len())
            .flat_map(|i| (0..modes.len()).map(move |j| (i, j)))
            .map(|(i, j)| (fine.get(i, j) - coarse.get(i, j)).abs())
            .fold(0.0, f64::max);
        if scale == 0.0 || diff <= opts.rel_tol * scale {
            return Ok(fine);
        }
        change = diff / scale;
        coarse = fine;
    }
    Err(Error::QuadratureNonConvergence { nodes, tolerance: opts.rel_tol, change })
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

fn overlaps_fixed(modes: &[CavityMode], membrane: &MembraneConfig, rule: &GaussHermite) -> SymMatrix {
    let dim = modes.len();
    let beam = modes[0].beam;
    let length = modes[0].length;
    let scale = beam.spot_size(membrane.position) / std::f64::consts::SQRT_2;
    let half = 0.5 * membrane.axial_thickness();
    let max_order = modes.iter().map(|m| m.index.m.max(m.index.n)).max().unwrap_or(0) as usize;
    let mut hy = vec![0.0; max_order + 1];
    let mut hz = vec![0.0; max_order + 1];
    let mut amp = vec![0.0; dim];
    let mut phase = vec![0.0; dim];
    let mut slope = vec![0.0; dim];
    let mut acc = vec![0.0; dim * dim];
    for (&xi, &wi) in rule.nodes().iter().zip(rule.scaled_weights()) {
        let y = scale * xi;
        for (&xj, &wj) in rule.nodes().iter().zip(rule.scaled_weights()) {
            let z = scale * xj;
            if !membrane.covers(y, z) {
                continue;
            }
            let weight = wi * wj * scale * scale;
            let center = membrane.surface(y, z);
            let spot = beam.spot_size(center);
            let s = std::f64::consts::SQRT_2 / spot;
            hermite_functions(s * y, &mut hy);
            hermite_functions(s * z, &mut hz);
            let r2 = y * y + z * z;
            for (k, mode) in modes.iter().enumerate() {
                amp[k] = s * hy[mode.index.m as usize] * hz[mode.index.n as usize];
                phase[k] = mode.phase(center, r2);
                slope[k] = mode.phase_slope(center);
            }
            for a in 0..dim {
                for b in 0..=a {
                    let diff = (phase[a] - phase[b]).cos() * sinc((slope[a] - slope[b]) * half);
                    let sum = (phase[a] + phase[b]).cos() * sinc((slope[a] + slope[b]) * half);
                    acc[a * dim + b] += weight * amp[a] * amp[b] * (diff - sum);
                }
            }
        }
    }
    // (2/L) from the axial norms, ½·2h from the product-to-sum integral
    let factor = 2.0 * half / length;
    let mut out = SymMatrix::zeros(dim);
    for a in 0..dim {
        for b in 0..=a {
            out.set(a, b, factor * acc[a * dim + b]);
        }
    }
    out
}

/// Single element `V_ij`, rad/s.
pub fn overlap_element(geometry: &CavityGeometry, membrane: &MembraneConfig, i: ModeIndex, j: ModeIndex) -> Result<f64> {
    let modes = if i == j { vec![i] } else { vec![i, j] };
    let overlaps = slab_overlaps(geometry, membrane, &modes, &QuadratureOptions::default())?;
    let wi = geometry.empty_frequency(i)?;
    let wj = geometry.empty_frequency(j)?;
    let contrast = membrane.index.re * membrane.index.re - 1.0;
    Ok(-0.5 * (wi * wj).sqrt() * contrast * overlaps.get(0, modes.len() - 1))
}

/// `V` over a basis, plus what is needed to assemble the full detuning matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMatrix {
    pub basis: ModeBasis,
    /// `V` plus any asymmetry offsets, rad/s.
    pub elements: SymMatrix,
    /// Empty-cavity detunings from the reference mode, rad/s.
    pub empty_detuning: Vec<f64>,
    /// Raw slab overlaps `∭ψ_iψ_j`, shared with the absorption model.
    pub overlaps: SymMatrix,
    /// Absolute empty-cavity frequencies, rad/s.
    pub frequencies: Vec<f64>,
}

impl PerturbationMatrix {
    /// `diag(empty detunings) + V`: the matrix whose eigenvalues are the
    /// perturbed frequencies relative to the reference mode.
    pub fn hamiltonian(&self) -> SymMatrix {
        let mut h = self.elements.clone();
        h.add_diagonal(&self.empty_detuning);
        h
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn build_matrix(geometry: &CavityGeometry, membrane: &MembraneConfig, basis: &ModeBasis, options: &PerturbationOptions) -> Result<PerturbationMatrix> {
    if !options.asymmetry_hz.is_empty() && options.asymmetry_hz.len() != basis.len() {
        return Err(invalid("asymmetry", format!("{} offsets for {} basis modes", options.asymmetry_hz.len(), basis.len())));
    }
    let overlaps = slab_overlaps(geometry, membrane, &basis.modes, &options.quadrature)?;
    let frequencies: Vec<f64> = basis.modes.iter().map(|&m| geometry.empty_frequency(m)).collect::<Result<_>>()?;
    let empty_detuning: Vec<f64> = basis.modes.iter().map(|&m| geometry.empty_detuning(m, basis.reference)).collect::<Result<_>>()?;
    let contrast = membrane.index.re * membrane.index.re - 1.0;
    let n = basis.len();
    let mut elements = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            elements.set(i, j, -0.5 * (frequencies[i] * frequencies[j]).sqrt() * contrast * overlaps.get(i, j));
        }
    }
    if !options.asymmetry_hz.is_empty() {
        let offsets: Vec<f64> = options.asymmetry_hz.iter().map(|hz| hz * crate::constants::TWO_PI).collect();
        elements.add_diagonal(&offsets);
    }
    Ok(PerturbationMatrix { basis: basis.clone(), elements, empty_detuning, overlaps, frequencies })
}

/// Everything needed to rebuild the detuning matrix at any membrane pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: CavityGeometry,
    pub membrane: MembraneConfig,
    pub basis: ModeBasis,
    pub options: PerturbationOptions,
}

impl Scenario {
    pub fn new(geometry: CavityGeometry, membrane: MembraneConfig, basis: ModeBasis) -> Self {
        Scenario { geometry, membrane, basis, options: PerturbationOptions::default() }
    }

    /// Detuning matrix with the membrane moved to `position`.
    pub fn hamiltonian_at(&self, position: f64) -> Result<SymMatrix> {
        let membrane = MembraneConfig { position, ..self.membrane };
        Ok(build_matrix(&self.geometry, &membrane, &self.basis, &self.options)?.hamiltonian())
    }

    /// The two-mode problem spanned by `a` and `b`, keeping their asymmetry offsets.
    pub fn reduced(&self, a: ModeIndex, b: ModeIndex) -> Result<Scenario> {
        let ia = self.basis.position(a).ok_or_else(|| invalid("basis", format!("{a} is not in the basis")))?;
        let ib = self.basis.position(b).ok_or_else(|| invalid("basis", format!("{b} is not in the basis")))?;
        let basis = ModeBasis::new(vec![a, b], self.basis.reference)?;
        let asymmetry_hz = if self.options.asymmetry_hz.is_empty() {
            Vec::new()
        } else {
            vec![self.options.asymmetry_hz[ia], self.options.asymmetry_hz[ib]]
        };
        let options = PerturbationOptions { asymmetry_hz, ..self.options.clone() };
        Ok(Scenario { basis, options, ..self.clone() })
    }

    pub fn sweep(&self, axis: SweepAxis, grid: &[f64]) -> Result<SpectrumSweep> {
        sweep(&self.geometry, &self.membrane, axis, grid, &self.basis, &self.options)
    }
}

/// Perturbed frequencies (ascending, rad/s relative to the reference mode)
/// and their orthonormal eigenvectors in the basis.
pub fn eigensolve(matrix: &PerturbationMatrix) -> Eigen {
    symmetric_eigen(&matrix.hamiltonian())
}

/// Result of matching one step's eigenvectors to the previous step's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchMatch {
    /// `assignment[a]` is the current eigenvector continuing previous vector `a`.
    pub assignment: Vec<usize>,
    pub ambiguous: bool,
}

/// Greedy maximum-overlap matching between two orthonormal eigenbases.
///
/// Pairs are taken in order of descending `|⟨prev_a, curr_b⟩|`, skipping
/// anything already used, so the result is always a bijection. The match is
/// flagged ambiguous when some previous vector's two best overlaps lie
/// within 1e-3 of each other.
pub fn track_branches(previous: &[Vec<f64>], current: &[Vec<f64>]) -> BranchMatch {
    let n = previous.len();
    assert_eq!(n, current.len(), "eigenbases must have the same dimension");
    let mut pairs = Vec::with_capacity(n * n);
    let mut ambiguous = false;
    for (a, p) in previous.iter().enumerate() {
        let mut row: Vec<f64> = current.iter().map(|c| p.iter().zip(c).map(|(x, y)| x * y).sum::<f64>().abs()).collect();
        for (b, &o) in row.iter().enumerate() {
            pairs.push((o, a, b));
        }
        if n > 1 {
            row.sort_by(|x, y| y.total_cmp(x));
            if row[0] - row[1] < 1e-3 {
                ambiguous = true;
            }
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, a, b) in pairs {
        if assignment[a] == usize::MAX && !used[b] {
            assignment[a] = b;
            used[b] = true;
        }
    }
    BranchMatch { assignment, ambiguous }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub eigen: Eigen,
    /// `labels[k]` is the branch id of eigenpair `k`.
    pub labels: Vec<usize>,
    /// Trace of the detuning matrix at this point.
    pub trace: f64,
}

impl SweepPoint {
    /// Column index of `label` at this point.
    pub fn column(&self, label: usize) -> usize {
        self.labels.iter().position(|&l| l == label).expect("label present at every point")
    }
}

/// Eigenfrequencies along a sweep with branch ids that follow mode
/// character from point to point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSweep {
    pub basis: ModeBasis,
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    /// Indices of points whose match to the previous point was ambiguous.
    pub ambiguous_steps: Vec<usize>,
}

impl SpectrumSweep {
    pub fn branch_count(&self) -> usize {
        self.basis.len()
    }

    /// `(sweep value, frequency rad/s)` along one branch.
    pub fn branch(&self, label: usize) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.value, p.eigen.values[p.column(label)])).collect()
    }

    pub fn branch_vector(&self, label: usize, point: usize) -> &[f64] {
        let p = &self.points[point];
        &p.eigen.vectors[p.column(label)]
    }

    /// Basis mode with the largest weight in `label` at `point`.
    pub fn dominant_mode(&self, label: usize, point: usize) -> ModeIndex {
        let v = self.branch_vector(label, point);
        let k = (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
        self.basis.modes[k]
    }

    /// Branch whose eigenvector is dominated by `mode` at `point`.
    pub fn branch_of(&self, mode: ModeIndex, point: usize) -> Option<usize> {
        let k = self.basis.position(mode)?;
        let p = &self.points[point];
        let col = (0..p.eigen.dim()).max_by(|&a, &b| p.eigen.vectors[a][k].abs().total_cmp(&p.eigen.vectors[b][k].abs()))?;
        Some(p.labels[col])
    }
}

/// Full eigensolve at every grid value, then a sequential branch-tracking pass.
pub fn sweep(
    geometry: &CavityGeometry,
    template: &MembraneConfig,
    axis: SweepAxis,
    grid: &[f64],
    basis: &ModeBasis,
    options: &PerturbationOptions,
) -> Result<SpectrumSweep> {
    if grid.len() < 2 {
        return Err(invalid("grid", "a sweep needs at least two points"));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(invalid("grid", "sweep grid must be strictly monotone"));
    }
    let solved: Vec<(Eigen, f64)> = grid
        .par_iter()
        .map(|&value| {
            let membrane = template.with_parameter(axis, value);
            let matrix = build_matrix(geometry, &membrane, basis, options)?;
            let h = matrix.hamiltonian();
            Ok((symmetric_eigen(&h), h.trace()))
        })
        .collect::<Result<_>>()?;

    let mut points: Vec<SweepPoint> = Vec::with_capacity(grid.len());
    let mut ambiguous_steps = Vec::new();
    for (i, ((eigen, trace), &value)) in solved.into_iter().zip(grid).enumerate() {
        let labels = match points.last() {
            None => (0..eigen.dim()).collect(),
            Some(prev) => {
                let m = track_branches(&prev.eigen.vectors, &eigen.vectors);
                if m.ambiguous {
                    ambiguous_steps.push(i);
                }
                let mut labels = vec![0; eigen.dim()];
                for (a, &b) in m.assignment.iter().enumerate() {
                    labels[b] = prev.labels[a];
                }
                labels
            }
        };
        points.push(SweepPoint { value, eigen, labels, trace });
    }
    if !ambiguous_steps.is_empty() {
        warn!("branch tracking was ambiguous at {} of {} steps", ambiguous_steps.len(), grid.len());
    }
    Ok(SpectrumSweep { basis: basis.clone(), axis, points, ambiguous_steps })
}

/// Evenly spaced grid including both ends.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
    }
}
