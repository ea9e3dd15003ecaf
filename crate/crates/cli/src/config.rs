//! Scenario files: a strict, sectioned `key = value` format.
//!
//! Every key is listed in `SCHEMA`; anything else is rejected with the
//! offending `section.key`. The resolved configuration can be echoed back in
//! canonical form with all defaults filled in.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ini::Ini;
use mimcav::cavity::{standard_basis, CavityGeometry, ModeIndex};
use mimcav::coupling::{GapId, ResolveOptions, Thresholds};
use mimcav::feasibility::MechanicalParams;
use mimcav::output::fmt_float;
use mimcav::perturbation::{linspace, MembraneConfig, ModeBasis, PerturbationOptions, QuadratureOptions, Scenario, SweepAxis};
use mimcav::constants::{NANOMETER, TWO_PI};
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` is given more than once")]
    Duplicate(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}

/// Accepted keys per section.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("geometry", &["length", "radius", "wavelength", "finesse"]),
    ("membrane", &["thickness", "index", "position", "tilt", "tilt_axis", "side_length", "offset_y", "offset_z"]),
    ("basis", &["modes", "cap", "window_hz", "quadrature_nodes", "quadrature_max_nodes", "quadrature_tol"]),
    ("losses", &["kappa_hz", "im_index"]),
    ("sweep", &["axis", "start", "stop", "count", "values"]),
    ("analysis", &["gaps", "coarse", "samples", "width_factor", "min_half_width", "max_half_width", "epsilon", "x_scale", "branch_csv"]),
    ("quartic", &["mode", "center", "half_width", "samples", "tilt_lo", "tilt_hi", "tilt_tol", "quadrature_nodes"]),
    (
        "feasibility",
        &["frequency_hz", "mass", "quality", "temperature", "drive_amplitude", "wpp_hz_per_nm2", "w4_hz_per_nm4", "finesse", "input_power", "sigma0", "laser_cooled_n_t"],
    ),
    ("asymmetry", &[]),
];

/// Raw `section -> key -> value` view of a file, validated against `SCHEMA`.
struct Raw {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(ConfigError::UnknownKey(k.to_string()));
                }
                continue;
            };
            let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| *s == name) else {
                return Err(ConfigError::UnknownSection(name.to_string()));
            };
            let section = sections.entry(name.to_string()).or_default();
            for (k, v) in props.iter() {
                let full = format!("{name}.{k}");
                if name != "asymmetry" && !keys.contains(&k) {
                    return Err(ConfigError::UnknownKey(full));
                }
                if section.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(ConfigError::Duplicate(full));
                }
            }
        }
        Ok(Raw { sections })
    }

    fn has(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn str(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    fn f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.str(section, key)
            .map(|v| {
                let x: f64 = v.parse().map_err(|_| invalid(&format!("{section}.{key}"), format!("`{v}` is not a number")))?;
                if !x.is_finite() {
                    return Err(invalid(&format!("{section}.{key}"), "must be finite"));
                }
                Ok(x)
            })
            .transpose()
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(section, key)?.unwrap_or(default))
    }

    fn required(&self, section: &str, key: &str) -> Result<f64> {
        self.f64(section, key)?.ok_or_else(|| ConfigError::Missing(format!("{section}.{key}")))
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.str(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| invalid(&format!("{section}.{key}"), format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn list(&self, section: &str, key: &str) -> Option<Vec<&str>> {
        self.str(section, key).map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
    }

    fn f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(items) = self.list(section, key) else {
            return Ok(None);
        };
        items
            .into_iter()
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| invalid(&format!("{section}.{key}"), format!("`{v}` is not a finite number"))))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// Mode written as `<m><n>@<dq>`, e.g. `20@-1`; `dq` is relative to the
/// reference TEM00 order and defaults to 0.
pub fn parse_mode(text: &str, reference_q: u32, key: &str) -> Result<ModeIndex> {
    let (mn, dq) = text.split_once('@').unwrap_or((text, "0"));
    let bad = || invalid(key, format!("`{text}` is not a mode like `20@-1`"));
    let digits: Vec<u32> = mn.chars().map(|c| c.to_digit(10)).collect::<Option<_>>().ok_or_else(bad)?;
    let [m, n] = digits[..] else {
        return Err(bad());
    };
    let dq: i64 = dq.parse().map_err(|_| bad())?;
    let q = u32::try_from(reference_q as i64 + dq).map_err(|_| invalid(key, format!("`{text}` has a negative longitudinal order")))?;
    Ok(ModeIndex { q, m, n })
}

pub fn mode_label(mode: ModeIndex, reference_q: u32) -> String {
    format!("{}{}@{}", mode.m, mode.n, mode.q as i64 - reference_q as i64)
}

/// Sweep grid, either evenly spaced or listed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// `Some((start, stop, count))` when the grid was given as a range.
    pub range: Option<(f64, f64, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub gaps: Vec<GapId>,
    pub coarse: Vec<f64>,
    pub resolve: ResolveOptions,
    pub thresholds: Thresholds,
    pub branch_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarticConfig {
    pub mode: ModeIndex,
    pub center: f64,
    pub half_width: f64,
    pub samples: usize,
    pub tilt_lo: f64,
    pub tilt_hi: f64,
    pub tilt_tol: f64,
    pub quadrature_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityConfig {
    pub params: MechanicalParams,
    pub sigma0: f64,
    pub laser_cooled_n_t: f64,
}

/// A fully resolved scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub reference_q: u32,
    pub cap: u32,
    pub window_hz: f64,
    /// Per basis mode, rad/s.
    pub kappa: Vec<f64>,
    pub sweep: SweepConfig,
    pub analysis: AnalysisConfig,
    pub quartic: QuarticConfig,
    pub feasibility: Option<FeasibilityConfig>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses `text`; relative paths inside resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw = Raw::parse(text)?;

        let length = raw.required("geometry", "length")?;
        let radius = raw.required("geometry", "radius")?;
        let wavelength = raw.f64_or("geometry", "wavelength", 1064e-9)?;
        let finesse = raw.f64_or("geometry", "finesse", 50_000.0)?;
        let geometry = CavityGeometry::new(length, radius, wavelength, finesse).map_err(|e| invalid("geometry", e.to_string()))?;
        let reference_q = geometry.reference_q().map_err(|e| invalid("geometry.wavelength", e.to_string()))?;

        let im_index = raw.f64_or("losses", "im_index", 0.0)?;
        let membrane = MembraneConfig {
            position: raw.f64_or("membrane", "position", 0.0)?,
            tilt: raw.f64_or("membrane", "tilt", 0.0)?,
            tilt_axis: raw.f64_or("membrane", "tilt_axis", 0.0)?,
            thickness: raw.required("membrane", "thickness")?,
            index: Complex64::new(raw.required("membrane", "index")?, im_index),
            side_length: raw.f64_or("membrane", "side_length", 1e-3)?,
            offset: [raw.f64_or("membrane", "offset_y", 0.0)?, raw.f64_or("membrane", "offset_z", 0.0)?],
        };
        membrane.validate(&geometry).map_err(|e| invalid("membrane", e.to_string()))?;

        let reference = ModeIndex { q: reference_q, m: 0, n: 0 };
        let cap = raw.usize_or("basis", "cap", 4)? as u32;
        let window_hz = raw.f64_or("basis", "window_hz", 2e9)?;
        let modes = match raw.list("basis", "modes") {
            Some(items) if !(items.len() == 1 && items[0] == "auto") => {
                items.iter().map(|t| parse_mode(t, reference_q, "basis.modes")).collect::<Result<Vec<_>>>()?
            }
            _ => standard_basis(&geometry, reference, cap, window_hz).map_err(|e| invalid("basis", e.to_string()))?,
        };
        let basis = ModeBasis::new(modes, reference).map_err(|e| invalid("basis.modes", e.to_string()))?;
        let defaults = QuadratureOptions::default();
        let quadrature = QuadratureOptions {
            initial_nodes: raw.usize_or("basis", "quadrature_nodes", defaults.initial_nodes)?,
            max_nodes: raw.usize_or("basis", "quadrature_max_nodes", defaults.max_nodes)?,
            rel_tol: raw.f64_or("basis", "quadrature_tol", defaults.rel_tol)?,
        };
        if quadrature.initial_nodes == 0 || quadrature.max_nodes < quadrature.initial_nodes {
            return Err(invalid("basis.quadrature_max_nodes", "node counts must satisfy 0 < quadrature_nodes <= quadrature_max_nodes"));
        }

        let mut asymmetry_hz = vec![0.0; basis.len()];
        if let Some(section) = raw.sections.get("asymmetry") {
            for (k, v) in section {
                let key = format!("asymmetry.{k}");
                let mode = parse_mode(k, reference_q, &key).map_err(|_| ConfigError::UnknownKey(key.clone()))?;
                let i = basis.position(mode).ok_or_else(|| invalid(&key, "mode is not in the basis"))?;
                asymmetry_hz[i] = v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| invalid(&key, format!("`{v}` is not a finite number")))?;
            }
        }
        let asymmetry_hz = if asymmetry_hz.iter().all(|&a| a == 0.0) { Vec::new() } else { asymmetry_hz };
        let scenario = Scenario { geometry, membrane, basis, options: PerturbationOptions { quadrature, asymmetry_hz } };

        let kappa = match raw.f64_list("losses", "kappa_hz")? {
            None => vec![TWO_PI * geometry.linewidth_hz(); scenario.basis.len()],
            Some(v) if v.len() == 1 => vec![TWO_PI * v[0]; scenario.basis.len()],
            Some(v) if v.len() == scenario.basis.len() => v.iter().map(|k| TWO_PI * k).collect(),
            Some(v) => return Err(invalid("losses.kappa_hz", format!("{} values for {} basis modes", v.len(), scenario.basis.len()))),
        };
        if kappa.iter().any(|&k| k <= 0.0) {
            return Err(invalid("losses.kappa_hz", "losses must be positive"));
        }

        let sweep = parse_sweep(&raw, wavelength)?;
        let analysis = parse_analysis(&raw, &scenario, reference_q, base)?;
        let quartic = parse_quartic(&raw, &scenario, reference_q)?;
        let feasibility = if raw.has("feasibility") { Some(parse_feasibility(&raw, &geometry)?) } else { None };

        Ok(ScenarioConfig { scenario, reference_q, cap, window_hz, kappa, sweep, analysis, quartic, feasibility })
    }

    /// Canonical text of the resolved configuration.
    pub fn echo(&self) -> String {
        let s = &self.scenario;
        let q = self.reference_q;
        let f = |v: f64| fmt_float(v);
        let join = |v: &[String]| v.join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "[geometry]\nlength = {}\nradius = {}\nwavelength = {}\nfinesse = {}", f(s.geometry.length), f(s.geometry.mirror_radius), f(s.geometry.wavelength), f(s.geometry.finesse));
        let m = &s.membrane;
        let _ = writeln!(
            out,
            "\n[membrane]\nthickness = {}\nindex = {}\nposition = {}\ntilt = {}\ntilt_axis = {}\nside_length = {}\noffset_y = {}\noffset_z = {}",
            f(m.thickness),
            f(m.index.re),
            f(m.position),
            f(m.tilt),
            f(m.tilt_axis),
            f(m.side_length),
            f(m.offset[0]),
            f(m.offset[1])
        );
        let modes: Vec<String> = s.basis.modes.iter().map(|&m| mode_label(m, q)).collect();
        let qd = &s.options.quadrature;
        let _ = writeln!(
            out,
            "\n[basis]\nmodes = {}\ncap = {}\nwindow_hz = {}\nquadrature_nodes = {}\nquadrature_max_nodes = {}\nquadrature_tol = {}",
            join(&modes),
            self.cap,
            f(self.window_hz),
            qd.initial_nodes,
            qd.max_nodes,
            f(qd.rel_tol)
        );
        let kappa: Vec<String> = self.kappa.iter().map(|k| f(k / TWO_PI)).collect();
        let _ = writeln!(out, "\n[losses]\nkappa_hz = {}\nim_index = {}", join(&kappa), f(m.index.im));
        let _ = writeln!(out, "\n[sweep]\naxis = {}", self.sweep.axis.name());
        match self.sweep.range {
            Some((a, b, n)) => {
                let _ = writeln!(out, "start = {}\nstop = {}\ncount = {n}", f(a), f(b));
            }
            None => {
                let _ = writeln!(out, "values = {}", join(&self.sweep.values.iter().map(|&v| f(v)).collect::<Vec<_>>()));
            }
        }
        let a = &self.analysis;
        let gaps: Vec<String> = a.gaps.iter().map(|g| format!("{}/{}{}", mode_label(g.a, q), mode_label(g.b, q), if g.rising { '+' } else { '-' })).collect();
        let _ = writeln!(
            out,
            "\n[analysis]\ngaps = {}\ncoarse = {}\nsamples = {}\nwidth_factor = {}\nmin_half_width = {}\nmax_half_width = {}\nepsilon = {}\nx_scale = {}",
            join(&gaps),
            join(&a.coarse.iter().map(|&v| f(v)).collect::<Vec<_>>()),
            a.resolve.samples,
            f(a.resolve.width_factor),
            f(a.resolve.min_half_width),
            f(a.resolve.max_half_width),
            f(a.thresholds.epsilon),
            f(a.thresholds.x_scale)
        );
        if let Some(p) = &a.branch_csv {
            let _ = writeln!(out, "branch_csv = {}", p.display());
        }
        let qc = &self.quartic;
        let _ = writeln!(
            out,
            "\n[quartic]\nmode = {}\ncenter = {}\nhalf_width = {}\nsamples = {}\ntilt_lo = {}\ntilt_hi = {}\ntilt_tol = {}\nquadrature_nodes = {}",
            mode_label(qc.mode, q),
            f(qc.center),
            f(qc.half_width),
            qc.samples,
            f(qc.tilt_lo),
            f(qc.tilt_hi),
            f(qc.tilt_tol),
            qc.quadrature_nodes
        );
        if let Some(fc) = &self.feasibility {
            let p = &fc.params;
            let nm = NANOMETER;
            let _ = writeln!(
                out,
                "\n[feasibility]\nfrequency_hz = {}\nmass = {}\nquality = {}\ntemperature = {}\ndrive_amplitude = {}\nwpp_hz_per_nm2 = {}\nw4_hz_per_nm4 = {}\nfinesse = {}\ninput_power = {}\nsigma0 = {}\nlaser_cooled_n_t = {}",
                f(p.omega_m / TWO_PI),
                f(p.mass),
                f(p.quality),
                f(p.bath_temperature),
                f(p.drive_amplitude),
                f(p.coupling_wpp / TWO_PI * nm * nm),
                f(p.coupling_w4 / TWO_PI * nm.powi(4)),
                f(p.finesse),
                f(p.input_power),
                f(fc.sigma0),
                f(fc.laser_cooled_n_t)
            );
        }
        if !s.options.asymmetry_hz.is_empty() {
            let _ = writeln!(out, "\n[asymmetry]");
            for (mode, a) in s.basis.modes.iter().zip(&s.options.asymmetry_hz) {
                let _ = writeln!(out, "{} = {}", mode_label(*mode, q), f(*a));
            }
        }
        out
    }
}

fn parse_sweep(raw: &Raw, wavelength: f64) -> Result<SweepConfig> {
    let axis: SweepAxis = raw.str("sweep", "axis").unwrap_or("axial_position").parse().map_err(|e: mimcav::Error| invalid("sweep.axis", e.to_string()))?;
    let listed = raw.f64_list("sweep", "values")?;
    let ranged = ["start", "stop", "count"].iter().any(|k| raw.str("sweep", k).is_some());
    let (values, range) = match listed {
        Some(_) if ranged => return Err(invalid("sweep.values", "give either values or start/stop/count, not both")),
        Some(v) => (v, None),
        None => {
            let start = raw.f64_or("sweep", "start", 0.0)?;
            let stop = raw.f64_or("sweep", "stop", wavelength)?;
            let count = raw.usize_or("sweep", "count", 201)?;
            (linspace(start, stop, count), Some((start, stop, count)))
        }
    };
    if values.len() < 2 {
        return Err(invalid("sweep", "a sweep needs at least two points"));
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(invalid("sweep", "grid must be strictly monotone"));
    }
    Ok(SweepConfig { axis, values, range })
}

fn parse_gap(text: &str, basis: &ModeBasis, reference_q: u32) -> Result<GapId> {
    let key = "analysis.gaps";
    let bad = || invalid(key, format!("`{text}` is not a gap like `00@0/20@-1+`"));
    let (body, rising) = match text.chars().last() {
        Some('+') => (&text[..text.len() - 1], true),
        Some('-') => (&text[..text.len() - 1], false),
        _ => return Err(bad()),
    };
    let (a, b) = body.split_once('/').ok_or_else(bad)?;
    let (a, b) = (parse_mode(a, reference_q, key)?, parse_mode(b, reference_q, key)?);
    for m in [a, b] {
        if basis.position(m).is_none() {
            return Err(invalid(key, format!("{} is not in the basis", mode_label(m, reference_q))));
        }
    }
    if a == b {
        return Err(bad());
    }
    Ok(GapId { a, b, rising })
}

fn parse_analysis(raw: &Raw, scenario: &Scenario, reference_q: u32, base: &Path) -> Result<AnalysisConfig> {
    let basis = &scenario.basis;
    let gaps = match raw.list("analysis", "gaps") {
        Some(items) => items.iter().map(|t| parse_gap(t, basis, reference_q)).collect::<Result<Vec<_>>>()?,
        None => basis
            .modes
            .iter()
            .filter(|&&m| m != basis.reference && basis.position(basis.reference).is_some())
            .flat_map(|&b| [GapId { a: basis.reference, b, rising: true }, GapId { a: basis.reference, b, rising: false }])
            .collect(),
    };
    let coarse = raw.f64_list("analysis", "coarse")?.unwrap_or_else(|| vec![0.0]);
    if coarse.is_empty() {
        return Err(invalid("analysis.coarse", "needs at least one position"));
    }
    let d = ResolveOptions::default();
    let resolve = ResolveOptions {
        samples: raw.usize_or("analysis", "samples", d.samples)?,
        width_factor: raw.f64_or("analysis", "width_factor", d.width_factor)?,
        min_half_width: raw.f64_or("analysis", "min_half_width", d.min_half_width)?,
        max_half_width: raw.f64_or("analysis", "max_half_width", d.max_half_width)?,
    };
    if resolve.samples < 7 {
        return Err(invalid("analysis.samples", "a crossing window needs at least 7 points"));
    }
    let t = Thresholds::default();
    let thresholds = Thresholds { epsilon: raw.f64_or("analysis", "epsilon", t.epsilon)?, x_scale: raw.f64_or("analysis", "x_scale", t.x_scale)? };
    let branch_csv = raw.str("analysis", "branch_csv").map(|p| base.join(p));
    Ok(AnalysisConfig { gaps, coarse, resolve, thresholds, branch_csv })
}

fn parse_quartic(raw: &Raw, scenario: &Scenario, reference_q: u32) -> Result<QuarticConfig> {
    let basis = &scenario.basis;
    let mode = match raw.str("quartic", "mode") {
        Some(t) => parse_mode(t, reference_q, "quartic.mode")?,
        None => basis.modes.iter().copied().find(|m| m.m == 2 && m.n == 0).unwrap_or(basis.reference),
    };
    if basis.position(mode).is_none() {
        return Err(invalid("quartic.mode", format!("{} is not in the basis", mode_label(mode, reference_q))));
    }
    let c = QuarticConfig {
        mode,
        center: raw.f64_or("quartic", "center", 0.0)?,
        half_width: raw.f64_or("quartic", "half_width", 30e-9)?,
        samples: raw.usize_or("quartic", "samples", 21)?,
        tilt_lo: raw.f64_or("quartic", "tilt_lo", 1.0e-3)?,
        tilt_hi: raw.f64_or("quartic", "tilt_hi", 1.6e-3)?,
        tilt_tol: raw.f64_or("quartic", "tilt_tol", 1e-6)?,
        quadrature_nodes: raw.usize_or("quartic", "quadrature_nodes", 128)?,
    };
    if c.samples < 9 {
        return Err(invalid("quartic.samples", "the quartic fit needs at least 9 points"));
    }
    if !(c.tilt_lo < c.tilt_hi) {
        return Err(invalid("quartic.tilt_hi", "must exceed tilt_lo"));
    }
    Ok(c)
}

fn parse_feasibility(raw: &Raw, geometry: &CavityGeometry) -> Result<FeasibilityConfig> {
    let s = "feasibility";
    let nm = NANOMETER;
    let params = MechanicalParams {
        omega_m: TWO_PI * raw.required(s, "frequency_hz")?,
        mass: raw.required(s, "mass")?,
        quality: raw.required(s, "quality")?,
        bath_temperature: raw.required(s, "temperature")?,
        drive_amplitude: raw.required(s, "drive_amplitude")?,
        coupling_wpp: TWO_PI * raw.f64_or(s, "wpp_hz_per_nm2", 0.0)? / (nm * nm),
        coupling_w4: TWO_PI * raw.f64_or(s, "w4_hz_per_nm4", 0.0)? / nm.powi(4),
        finesse: raw.f64_or(s, "finesse", geometry.finesse)?,
        input_power: raw.f64_or(s, "input_power", 5e-6)?,
        wavelength: geometry.wavelength,
        cavity_length: geometry.length,
    };
    params.validate().map_err(|e| invalid(s, e.to_string()))?;
    Ok(FeasibilityConfig { params, sigma0: raw.f64_or(s, "sigma0", 1.0)?, laser_cooled_n_t: raw.f64_or(s, "laser_cooled_n_t", 0.2)? })
}
