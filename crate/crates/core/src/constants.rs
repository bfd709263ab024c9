//! Physical constants (SI).

/// Elementary charge (C).
pub const Q: f64 = 1.602_176_634e-19;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permittivity (F/m).
pub const EPS_0: f64 = 8.854_187_812_8e-12;

/// Thermal voltage kT/q (V).
pub fn thermal_voltage(temperature: f64) -> f64 {
    K_B * temperature / Q
}
