//! Secular S = 1/2, I = 1/2 spin pair: levels, nuclear frequencies and
//! two-pulse echo modulation.

use crate::error::{Error, Result};
use crate::hyperfine::IsotopeSpec;
use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Nuclear Larmor frequency, MHz.
pub fn larmor(isotope: &IsotopeSpec, field_t: f64) -> Result<f64> {
    if !(field_t >= 0.0) || !field_t.is_finite() {
        return Err(Error::InvalidInput("field must be finite and non-negative".into()));
    }
    Ok(isotope.gamma_mhz_per_t * field_t)
}

/// All entries in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinPairHamiltonian {
    pub omega_s: f64,
    pub omega_i: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldFrequencies {
    pub omega_alpha: f64,
    pub omega_beta: f64,
    pub k: f64,
}

/// ω_S S_z + ω_I I_z + a S_z I_z + b S_z I_x in the basis
/// |αα⟩, |αβ⟩, |βα⟩, |ββ⟩ (electron first).
pub fn build_hamiltonian(h: &SpinPairHamiltonian) -> Matrix4<f64> {
    let sz = [0.5, 0.5, -0.5, -0.5];
    let iz = [0.5, -0.5, 0.5, -0.5];
    let mut m = Matrix4::zeros();
    for k in 0..4 {
        m[(k, k)] = h.omega_s * sz[k] + h.omega_i * iz[k] + h.a * sz[k] * iz[k];
    }
    // S_z I_x couples the two nuclear states inside each electron manifold.
    for (p, q, s) in [(0, 1, 0.5), (2, 3, -0.5)] {
        m[(p, q)] = h.b * s * 0.5;
        m[(q, p)] = h.b * s * 0.5;
    }
    m
}

pub fn nuclear_frequencies(h: &SpinPairHamiltonian) -> ManifoldFrequencies {
    let half_b = h.b / 2.0;
    let omega_alpha = (h.omega_i + h.a / 2.0).hypot(half_b);
    let omega_beta = (h.omega_i - h.a / 2.0).hypot(half_b);
    let k = if omega_alpha > 0.0 && omega_beta > 0.0 {
        let r = h.b * h.omega_i / (omega_alpha * omega_beta);
        r * r
    } else {
        0.0
    };
    ManifoldFrequencies {
        omega_alpha,
        omega_beta,
        k,
    }
}

/// Normalized two-pulse echo amplitude at each τ (µs).
pub fn two_pulse_eseem(h: &SpinPairHamiltonian, tau_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if tau_grid.is_empty() {
        return Err(Error::InvalidInput("τ grid is empty".into()));
    }
    if tau_grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("τ values must be finite and non-negative".into()));
    }
    if tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("τ grid must be strictly increasing".into()));
    }
    let f = nuclear_frequencies(h);
    let wa = 2.0 * PI * f.omega_alpha;
    let wb = 2.0 * PI * f.omega_beta;
    Ok(tau_grid
        .iter()
        .map(|&tau| {
            let e = 1.0
                - f.k / 4.0
                    * (2.0 - 2.0 * (wa * tau).cos() - 2.0 * (wb * tau).cos()
                        + ((wa - wb) * tau).cos()
                        + ((wa + wb) * tau).cos());
            (tau, e)
        })
        .collect())
}
