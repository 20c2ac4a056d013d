//! Polanyi-Wigner desorption kinetics.

use crate::constants::K_B_EV_PER_K;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Annealing temperatures at which the surface spins disappear, K.
pub const MARKER_TEMPERATURES_K: [f64; 2] = [738.15, 873.15];
/// Desorption barriers of the three edge models, eV.
pub const PAPER_BARRIERS_EV: [f64; 3] = [0.89, 0.96, 1.12];
/// Attempt frequency, 1/s.
pub const PAPER_PREFACTOR: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesorptionModel {
    pub e_des: f64,
    pub nu: f64,
    pub order: f64,
}

impl DesorptionModel {
    pub fn new(e_des: f64, nu: f64, order: f64) -> Result<Self> {
        if !(e_des >= 0.0) || !e_des.is_finite() {
            return Err(Error::InvalidInput("barrier must be non-negative".into()));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidInput("prefactor must be positive".into()));
        }
        if !(order > 0.0) || !order.is_finite() {
            return Err(Error::InvalidInput("reaction order must be positive".into()));
        }
        Ok(DesorptionModel { e_des, nu, order })
    }

    pub fn first_order(e_des: f64, nu: f64) -> Result<Self> {
        DesorptionModel::new(e_des, nu, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateFlag {
    Ok,
    /// The Boltzmann factor underflowed; the rate was clamped to 0.
    Underflow,
    /// The rate exceeded the largest double; clamped to f64::MAX.
    Overflow,
}

impl RateFlag {
    pub fn label(self) -> &'static str {
        match self {
            RateFlag::Ok => "ok",
            RateFlag::Underflow => "underflow",
            RateFlag::Overflow => "overflow",
        }
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("temperature must be positive, got {t} K")));
    }
    Ok(())
}

/// ν·exp(−E/k_B T) together with a clamp flag.
pub fn rate_with_flag(m: &DesorptionModel, t: f64) -> Result<(f64, RateFlag)> {
    check_temperature(t)?;
    let exponent = -m.e_des / (K_B_EV_PER_K * t);
    let ln_rate = m.nu.ln() + exponent;
    if ln_rate < f64::MIN_POSITIVE.ln() {
        return Ok((0.0, RateFlag::Underflow));
    }
    let rate = m.nu * exponent.exp();
    if !rate.is_finite() {
        return Ok((f64::MAX, RateFlag::Overflow));
    }
    if rate == 0.0 {
        return Ok((0.0, RateFlag::Underflow));
    }
    Ok((rate, RateFlag::Ok))
}

/// Desorption rate constant, 1/s.
pub fn rate_constant(m: &DesorptionModel, t: f64) -> Result<f64> {
    rate_with_flag(m, t).map(|r| r.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTrajectory {
    /// (t in s, θ)
    pub samples: Vec<(f64, f64)>,
}

fn check_grid(theta0: f64, grid: &[f64]) -> Result<()> {
    if !(theta0 > 0.0 && theta0 <= 1.0) {
        return Err(Error::InvalidInput(format!("θ0 must lie in (0, 1], got {theta0}")));
    }
    if grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("times must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// θ(t) for dθ/dt = −kθⁿ; exact for n = 1, adaptive integration otherwise.
pub fn coverage_trajectory(
    m: &DesorptionModel,
    t: f64,
    theta0: f64,
    grid: &[f64],
) -> Result<CoverageTrajectory> {
    check_grid(theta0, grid)?;
    let k = rate_constant(m, t)?;
    if m.order == 1.0 {
        return Ok(CoverageTrajectory {
            samples: grid.iter().map(|&s| (s, theta0 * (-k * s).exp())).collect(),
        });
    }
    integrate_coverage(m, t, theta0, grid)
}

/// Always integrates numerically (Dormand–Prince 5(4)), regardless of order.
pub fn integrate_coverage(
    m: &DesorptionModel,
    t: f64,
    theta0: f64,
    grid: &[f64],
) -> Result<CoverageTrajectory> {
    check_grid(theta0, grid)?;
    let k = rate_constant(m, t)?;
    let n = m.order;
    // Dimensionless time s = k·t.
    let f = |y: f64| -> f64 { -(y.max(0.0)).powf(n) };
    let mut samples = Vec::with_capacity(grid.len());
    let (mut s, mut y) = (0.0f64, theta0);
    let mut h: f64 = 1e-3;
    for &tt in grid {
        let target = k * tt;
        while s < target && y > 0.0 {
            let step = h.min(target - s);
            let (y_new, err) = dopri_step(&f, y, step);
            let tol = 1e-13 + 1e-12 * y.abs();
            if err <= tol || step < 1e-14 {
                s = if step == target - s { target } else { s + step };
                y = y_new.max(0.0);
            }
            let scale = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 5.0 };
            h = step * scale.clamp(0.2, 5.0);
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::Numerical("step size collapsed".into()));
            }
        }
        samples.push((tt, y));
    }
    Ok(CoverageTrajectory { samples })
}

fn dopri_step(f: &impl Fn(f64) -> f64, y: f64, h: f64) -> (f64, f64) {
    let k1 = f(y);
    let k2 = f(y + h * (k1 / 5.0));
    let k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    let k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    let k5 = f(y + h
        * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3
            - 212.0 / 729.0 * k4));
    let k6 = f(y + h
        * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4
            - 5103.0 / 18656.0 * k5));
    let y5 = y + h
        * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5
            + 11.0 / 84.0 * k6);
    let k7 = f(y5);
    let y4 = y + h
        * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4
            - 92097.0 / 339200.0 * k5
            + 187.0 / 2100.0 * k6
            + 1.0 / 40.0 * k7);
    (y5, (y5 - y4).abs())
}

/// Time for θ/θ0 to fall to `fraction`, s.
pub fn time_to_fraction(m: &DesorptionModel, t: f64, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let k = rate_constant(m, t)?;
    if k == 0.0 {
        return Err(Error::Numerical("rate underflows; the coverage never decays".into()));
    }
    if m.order == 1.0 {
        return Ok(-fraction.ln() / k);
    }
    let remaining = |time: f64| -> Result<f64> {
        Ok(integrate_coverage(m, t, 1.0, &[time])?.samples[0].1)
    };
    let mut hi = 1.0 / k;
    while remaining(hi)? > fraction {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("could not bracket the decay time".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if remaining(mid)? > fraction {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t_k: f64,
    pub rate: f64,
    pub flag: RateFlag,
}

/// Rates on an evenly spaced grid from `t_min` to `t_max` (K), with the
/// marker temperatures added when the range covers them.
pub fn temperature_sweep(
    m: &DesorptionModel,
    t_min: f64,
    t_max: f64,
    steps: usize,
) -> Result<Vec<SweepRow>> {
    check_temperature(t_min)?;
    check_temperature(t_max)?;
    if t_max < t_min {
        return Err(Error::InvalidInput("temperature range is reversed".into()));
    }
    let mut temps: Vec<f64> = if t_min == t_max {
        vec![t_min]
    } else {
        if steps < 2 {
            return Err(Error::InvalidInput("a sweep needs at least 2 steps".into()));
        }
        (0..steps)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    for marker in MARKER_TEMPERATURES_K {
        if marker >= t_min && marker <= t_max && !temps.iter().any(|&t| (t - marker).abs() < 1e-9) {
            temps.push(marker);
        }
    }
    temps.sort_by(f64::total_cmp);
    temps
        .into_iter()
        .map(|tk| {
            let (rate, flag) = rate_with_flag(m, tk)?;
            Ok(SweepRow { t_k: tk, rate, flag })
        })
        .collect()
}

/// (desorbed, remaining) areal densities after `duration` seconds.
pub fn desorbed_after(m: &DesorptionModel, t: f64, duration: f64, n0: f64) -> Result<(f64, f64)> {
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::InvalidInput("initial density must be positive".into()));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidInput("duration must be non-negative".into()));
    }
    let theta = coverage_trajectory(m, t, 1.0, &[duration])?.samples[0].1;
    let desorbed = n0 - n0 * theta;
    Ok((desorbed, n0 - desorbed))
}
