//! Physical constants shared by every module.

/// Free-electron gyromagnetic ratio, MHz/T.
pub const GAMMA_E_MHZ_PER_T: f64 = 28024.9514;
/// Proton gyromagnetic ratio, MHz/T.
pub const GAMMA_1H_MHZ_PER_T: f64 = 42.577478;
/// Carbon-13 gyromagnetic ratio, MHz/T.
pub const GAMMA_13C_MHZ_PER_T: f64 = 10.7084;
/// μ0/4π in T·m/A.
pub const MU0_OVER_4PI: f64 = 1e-7;
/// Planck constant, J·s.
pub const PLANCK_J_S: f64 = 6.62607015e-34;
/// Boltzmann constant, eV/K.
pub const K_B_EV_PER_K: f64 = 8.617333262e-5;

/// Offset between Celsius and kelvin.
pub const CELSIUS_OFFSET: f64 = 273.15;

/// 1 Å² expressed in cm².
pub const ANGSTROM2_TO_CM2: f64 = 1e-16;

/// Equilibrium lattice parameter of diamond used by the presets, Å.
pub const DIAMOND_LATTICE_A: f64 = 3.57;

/// Electron part of the dipolar prefactor: multiply by γ_n (MHz/T) to get MHz·Å³.
pub fn electron_dipolar_factor() -> f64 {
    // μ0/4π · h · γe · γn in SI gives Hz·m³; convert to MHz·Å³.
    MU0_OVER_4PI * PLANCK_J_S * (GAMMA_E_MHZ_PER_T * 1e6) * 1e6 / 1e-30 / 1e6
}
