//! Scenarios and property checks shared by the integration targets.
#![allow(dead_code)]

use mimcav::cavity::{CavityGeometry, ModeIndex};
use mimcav::coupling::{curvature_at_crossing, fit_hyperbola, quartic_fit, Thresholds};
use mimcav::eigen::{symmetric_eigen, SymMatrix};
use mimcav::loss::{eigenmode_kappa, BaseLosses};
use mimcav::output::write_sweep;
use mimcav::perturbation::{build_matrix, linspace, track_branches, MembraneConfig, ModeBasis, PerturbationOptions, QuadratureOptions, Scenario, SweepAxis};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const LENGTH: f64 = 0.06313;
pub const RADIUS: f64 = 0.05;
pub const WAVELENGTH: f64 = 1064e-9;
pub const FINESSE: f64 = 50_000.0;
pub const THICKNESS: f64 = 39e-9;

pub fn geometry() -> CavityGeometry {
    CavityGeometry::new(LENGTH, RADIUS, WAVELENGTH, FINESSE).unwrap()
}

pub fn q() -> u32 {
    geometry().reference_q().unwrap()
}

pub fn tem(q: u32, m: u32, n: u32) -> ModeIndex {
    ModeIndex { q, m, n }
}

/// Singlet-triplet scenario with the membrane tilted about z.
pub fn tilted(tilt: f64) -> Scenario {
    let membrane = MembraneConfig { tilt, thickness: THICKNESS, ..MembraneConfig::default() };
    Scenario::new(geometry(), membrane, ModeBasis::singlet_triplet(q()))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// Membrane poses well inside the validity range.
pub fn pose() -> impl Strategy<Value = MembraneConfig> {
    (-2e-4..2e-4f64, 0.0..1.5e-3f64, 0.0..std::f64::consts::TAU, 10e-9..100e-9f64, 1.5..3.0f64).prop_map(|(position, tilt, tilt_axis, thickness, n)| {
        MembraneConfig { position, tilt, tilt_axis, thickness, index: Complex64::new(n, 0.0), ..MembraneConfig::default() }
    })
}

/// `V` is symmetric and the eigenvalues sum to the trace.
pub fn symmetry_and_trace(m: MembraneConfig) -> Result<(), TestCaseError> {
    let g = geometry();
    let opts = PerturbationOptions { quadrature: QuadratureOptions::fixed(48), ..Default::default() };
    let pm = build_matrix(&g, &m, &ModeBasis::singlet_triplet(q()), &opts).map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(pm.elements.is_symmetric(), || "V is not symmetric".into())?;
    let h = pm.hamiltonian();
    let e = symmetric_eigen(&h);
    let sum: f64 = e.values.iter().sum();
    let scale = e.values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
    check((sum - h.trace()).abs() <= 1e-10 * scale, || format!("eigenvalue sum {sum} vs trace {}", h.trace()))
}

/// With zero tilt, mode pairs of different transverse parity do not couple.
pub fn parity_rule(position: f64, thickness: f64) -> Result<(), TestCaseError> {
    let g = geometry();
    let q = q();
    let modes = vec![tem(q, 0, 0), tem(q, 1, 0), tem(q, 0, 1), tem(q, 1, 1), tem(q, 2, 0), tem(q, 0, 2), tem(q - 1, 2, 1)];
    let basis = ModeBasis::new(modes, tem(q, 0, 0)).unwrap();
    let m = MembraneConfig { position, thickness, ..MembraneConfig::default() };
    let opts = PerturbationOptions { quadrature: QuadratureOptions::fixed(48), ..Default::default() };
    let v = build_matrix(&g, &m, &basis, &opts).map_err(|e| TestCaseError::fail(e.to_string()))?.elements;
    let max = v.max_abs();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if basis.modes[i].parity() != basis.modes[j].parity() {
                check(v.get(i, j).abs() < 1e-8 * max, || format!("V[{i}][{j}] = {:e} of {max:e}", v.get(i, j)))?;
            }
        }
    }
    Ok(())
}

pub fn symmetric_matrix() -> impl Strategy<Value = SymMatrix> {
    (2usize..8).prop_flat_map(|n| prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |a| {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] + a[j * n + i]).collect()).collect();
        SymMatrix::from_rows(&rows)
    }))
}

/// Eigenvectors are orthonormal and reproduce the matrix.
pub fn orthonormal_eigenvectors(h: SymMatrix) -> Result<(), TestCaseError> {
    let e = symmetric_eigen(&h);
    check(e.orthonormality_error() < 1e-12, || format!("orthonormality error {:e}", e.orthonormality_error()))?;
    let r = e.reconstruct();
    let n = h.dim();
    let err = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (r.get(i, j) - h.get(i, j)).abs()).fold(0.0, f64::max);
    check(err < 1e-12 * h.max_abs().max(1.0), || format!("reconstruction error {err:e}"))?;
    check(e.values.windows(2).all(|w| w[0] <= w[1]), || "eigenvalues not ascending".into())
}

/// A permutation plus a small rotation is tracked back to the permutation.
pub fn tracking_under_rotation(h: SymMatrix, perm_seed: u64, angle: f64) -> Result<(), TestCaseError> {
    let e = symmetric_eigen(&h);
    let n = e.dim();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut s = perm_seed;
    for i in (1..n).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        perm.swap(i, (s >> 33) as usize % (i + 1));
    }
    let (i, j) = (perm[0], perm[n - 1]);
    let (sn, cs) = angle.sin_cos();
    let mut rotated = e.vectors.clone();
    for k in 0..n {
        let (a, b) = (e.vectors[i][k], e.vectors[j][k]);
        rotated[i][k] = cs * a + sn * b;
        rotated[j][k] = -sn * a + cs * b;
    }
    let current: Vec<Vec<f64>> = perm.iter().map(|&p| rotated[p].clone()).collect();
    let m = track_branches(&e.vectors, &current);
    for (a, &b) in m.assignment.iter().enumerate() {
        check(perm[b] == a, || format!("vector {a} matched to {b}, expected {}", perm.iter().position(|&p| p == a).unwrap()))?;
    }
    Ok(())
}

/// `(centre, slope, half gap, offset)` in lab-like magnitudes.
pub fn hyperbola_params() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-1e-9..1e-9f64, 14.0..17.0f64, 4.0..8.0f64, -1e8..1e8f64).prop_map(|(c, ls, lg, o)| (c, 10f64.powf(ls), 10f64.powf(lg), o))
}

fn hyperbola(p: (f64, f64, f64, f64), scale: f64) -> Vec<(f64, f64)> {
    let (c, a, s, o) = p;
    let half = 4.0 * s / a;
    linspace(c - half, c + half, 41).into_iter().map(|x| (scale * x, o + (a * (x - c)).hypot(s))).collect()
}

/// Refitting a fit's reconstruction changes nothing, and the curvature
/// identity matches a finite difference of the fitted curve.
pub fn fit_idempotence(p: (f64, f64, f64, f64)) -> Result<(), TestCaseError> {
    let data = hyperbola(p, 1.0);
    let first = fit_hyperbola(&data, None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let again: Vec<(f64, f64)> = data.iter().map(|&(x, _)| (x, first.eval(x))).collect();
    let second = fit_hyperbola(&again, None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    check(rel(first.slope, second.slope) < 1e-9, || format!("slope {} vs {}", first.slope, second.slope))?;
    check(rel(first.half_gap, second.half_gap) < 1e-9, || format!("gap {} vs {}", first.half_gap, second.half_gap))?;
    check((first.center_x - second.center_x).abs() < 1e-9 * first.half_gap / first.slope, || "centre moved".into())?;
    // Richardson-extrapolated central difference of the curve without its offset
    let c = first.center_x;
    let f = |x: f64| first.eval(x) - first.offset;
    let d2 = |h: f64| (f(c + h) - 2.0 * f(c) + f(c - h)) / (h * h);
    let h = 1e-2 * first.half_gap / first.slope;
    let numeric = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
    let w2 = curvature_at_crossing(&first).map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(rel(numeric, w2) < 1e-6, || format!("curvature {w2:e} vs finite difference {numeric:e}"))
}

/// Rescaling x by `s` rescales ω′, ω″ and ω⁽⁴⁾ by `1/s`, `1/s²`, `1/s⁴`.
pub fn scale_equivariance(p: (f64, f64, f64, f64), s: f64) -> Result<(), TestCaseError> {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let base = fit_hyperbola(&hyperbola(p, 1.0), None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let scaled = fit_hyperbola(&hyperbola(p, s), None).map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(rel(scaled.slope, base.slope / s) < 1e-9, || format!("slope {} vs {}", scaled.slope, base.slope / s))?;
    let (w2, w2s) = (curvature_at_crossing(&base).unwrap(), curvature_at_crossing(&scaled).unwrap());
    check(rel(w2s, w2 / (s * s)) < 1e-9, || format!("curvature {w2s} vs {}", w2 / (s * s)))?;

    let (c, a, _, _) = p;
    let a2 = a * 1e-9;
    let a4 = a * 1e6;
    let quartic: Vec<(f64, f64)> = linspace(c - 10e-9, c + 10e-9, 21).into_iter().map(|x| (x, a2 * (x - c).powi(2) + a4 * (x - c).powi(4))).collect();
    let t = Thresholds::default();
    let q1 = quartic_fit(&quartic, &t).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let q2 = quartic_fit(&quartic.iter().map(|&(x, w)| (s * x, w)).collect::<Vec<_>>(), &t).map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(rel(q2.omega_pp, q1.omega_pp / (s * s)) < 1e-8, || format!("omega'' {} vs {}", q2.omega_pp, q1.omega_pp / (s * s)))?;
    check(rel(q2.omega4, q1.omega4 / s.powi(4)) < 1e-8, || format!("omega4 {} vs {}", q2.omega4, q1.omega4 / s.powi(4)))?;
    let slope_floor = 1e-9 * q1.omega_pp.abs() * 20e-9;
    check((q2.omega_prime - q1.omega_prime / s).abs() <= slope_floor / s, || format!("omega' {} vs {}", q2.omega_prime, q1.omega_prime / s))
}

/// `min κ_k ≤ κ ≤ max κ_k + κ_abs` for any normalized mixture.
pub fn kappa_convexity(raw: Vec<f64>, base: Vec<f64>, absorption: f64) -> Result<(), TestCaseError> {
    let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(());
    }
    let v: Vec<f64> = raw.iter().map(|c| c / norm).collect();
    let b = BaseLosses::new(base.clone()).unwrap();
    let k = eigenmode_kappa(&v, &b, absorption).unwrap();
    let lo = base.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = base.iter().copied().fold(0.0, f64::max);
    check(k >= lo * (1.0 - 1e-12) && k <= (hi + absorption) * (1.0 + 1e-12), || format!("kappa {k} outside [{lo}, {}]", hi + absorption))
}

/// Sweep CSV bytes under a pool of `threads` workers.
pub fn sweep_csv(threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let s = tilted(4.8e-4);
        let sweep = s.sweep(SweepAxis::AxialPosition, &linspace(0.0, 0.5 * WAVELENGTH, 33)).unwrap();
        let mut buf = Vec::new();
        write_sweep(&mut buf, &sweep).unwrap();
        buf
    })
}

pub fn csv_determinism() -> Result<(), TestCaseError> {
    let one = sweep_csv(1);
    for threads in [2, 4, 7] {
        check(sweep_csv(threads) == one, || format!("CSV differs between 1 and {threads} threads"))?;
    }
    Ok(())
}
