//! Physical constants (CODATA 2018, exact where the SI defines them).

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817_00e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649_000_00e-23;

/// Angular frequency per hertz.
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// One nanometre in metres; the natural length unit for membrane displacements.
pub const NANOMETER: f64 = 1e-9;
