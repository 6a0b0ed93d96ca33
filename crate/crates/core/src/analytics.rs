//! Closed-form slow-quench predictions: adiabatic perturbation theory away
//! from the critical point and the Kibble-Zurek freeze-out estimate at it.
//!
//! All energies are in units of `hbar w`, all durations are `w tau`.

use serde::{Deserialize, Serialize};

use crate::disorder::{disorder_expectation, AveragingScheme, DisorderModel};
use crate::error::{Error, Result};

/// Prefactor `1 / (4 * 2^(1/3))` of the critical `tau^(-1/3)` law.
pub fn kzm_prefactor() -> f64 {
    1.0 / (4.0 * 2f64.cbrt())
}

/// Residual energy of a slow ramp ending at `g_f < 1`:
/// `g_f^4 / (16 (1 - g_f^2)^(5/2)) (w tau)^(-2)`.
///
/// Only meaningful for `w tau >> 1`; below roughly `1e2` the oscillating
/// corrections are not small.
pub fn apt_residual_energy(g_f: f64, omega_tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&g_f) {
        return Err(Error::Domain(format!(
            "adiabatic perturbation theory needs 0 <= g_f < 1, got {g_f}"
        )));
    }
    if !(omega_tau > 0.0) {
        return Err(Error::Domain(format!("omega_tau must be positive, got {omega_tau}")));
    }
    let gap2 = (1.0 - g_f) * (1.0 + g_f);
    Ok(g_f.powi(4) / (16.0 * gap2.powf(2.5)) / (omega_tau * omega_tau))
}

/// Coupling at which the relaxation time equals the transition time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreezeOut {
    pub g_hat: f64,
    pub eps_hat: f64,
    pub omega_tau_delta: f64,
}

impl FreezeOut {
    /// `(1 - g^2)^(3/2) / g - 1 / (2 w tau_delta)` at the stored root.
    pub fn residual(&self) -> f64 {
        freezeout_balance(self.g_hat, self.omega_tau_delta)
    }
}

fn freezeout_balance(g: f64, omega_tau_delta: f64) -> f64 {
    let one_minus_g2 = (1.0 - g) * (1.0 + g);
    one_minus_g2.powf(1.5) / g - 0.5 / omega_tau_delta
}

/// Largest tolerated `|residual|` of the freeze-out root.
pub const FREEZEOUT_RESIDUAL_TOL: f64 = 1e-10;

/// Solve `(1 - g^2)^(3/2) / g = 1 / (2 w tau_delta)` on `(0, 1)` by
/// bisection. The left side falls monotonically from +inf to 0, so the root
/// is unique; bisection runs until the bracket cannot shrink further.
pub fn freezeout_g(omega_tau_delta: f64) -> Result<FreezeOut> {
    if !(omega_tau_delta.is_finite() && omega_tau_delta > 0.0) {
        return Err(Error::Domain(format!(
            "omega_tau_delta must be positive and finite, got {omega_tau_delta}"
        )));
    }
    let f = |g: f64| freezeout_balance(g, omega_tau_delta);
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = 1.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g_hat = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let out = FreezeOut {
        g_hat,
        eps_hat: 1.0 - g_hat,
        omega_tau_delta,
    };
    let residual = out.residual();
    if residual.abs() > FREEZEOUT_RESIDUAL_TOL {
        return Err(Error::ConvergenceFailure(format!(
            "freeze-out residual {residual:e} at omega_tau_delta = {omega_tau_delta}"
        )));
    }
    Ok(out)
}

/// Linearized freeze-out coupling `1 - 1 / (2/3 + 2^(5/3) (w tau_delta)^(2/3))`.
pub fn freezeout_g_series(omega_tau_delta: f64) -> f64 {
    1.0 - 1.0 / (2.0 / 3.0 + 2f64.powf(5.0 / 3.0) * omega_tau_delta.powf(2.0 / 3.0))
}

/// The large-duration form with a `2^(5/2)` prefactor,
/// `1 - 1 / (2^(5/2) (w tau_delta)^(2/3))`. Kept for comparison only: it is
/// not consistent with [`kzm_averaged_prediction`]'s prefactor, whereas
/// [`freezeout_g_series`] is.
pub fn freezeout_g_series_alt(omega_tau_delta: f64) -> f64 {
    1.0 - 1.0 / (2f64.powf(2.5) * omega_tau_delta.powf(2.0 / 3.0))
}

/// Adiabatic residual energy accumulated up to the freeze-out coupling,
/// `g_hat^2 / (16 (1 - g_hat^2)^(5/2)) (w tau_delta)^(-2)`.
pub fn freezeout_residual_energy(freeze: &FreezeOut) -> f64 {
    let g = freeze.g_hat;
    let one_minus_g2 = (1.0 - g) * (1.0 + g);
    g * g / (16.0 * one_minus_g2.powf(2.5)) / freeze.omega_tau_delta.powi(2)
}

/// Residual energy of one time-disordered ramp of ordered duration
/// `omega_tau` stretched by `1 + delta`:
///
/// `[4 2^(1/3) (w tau)^(1/3)]^-1 [(1+delta)^(-1/3) - (1+delta)^(-1) / (12 sqrt2 (w tau)^(2/3))]`
pub fn kzm_residual_energy(omega_tau: f64, delta: f64) -> Result<f64> {
    let stretch = 1.0 + delta;
    if !(stretch > 0.0) {
        return Err(Error::Domain(format!("1 + delta must be positive, got {stretch}")));
    }
    if !(omega_tau > 0.0) {
        return Err(Error::Domain(format!("omega_tau must be positive, got {omega_tau}")));
    }
    let correction = 1.0 / (stretch * 12.0 * 2f64.sqrt() * omega_tau.powf(2.0 / 3.0));
    Ok(kzm_prefactor() * omega_tau.powf(-1.0 / 3.0) * (stretch.powf(-1.0 / 3.0) - correction))
}

/// Leading-order disorder average, `(w tau)^(-1/3) / (4 2^(1/3))`. The
/// `delta` moments are of order one for `sigma <= 1/3` and are dropped, so
/// the result does not depend on `sigma`.
pub fn kzm_averaged_prediction(omega_tau: f64, _sigma: f64) -> f64 {
    kzm_prefactor() * omega_tau.powf(-1.0 / 3.0)
}

/// [`kzm_residual_energy`] averaged over the time-disorder density with the
/// given scheme, without dropping the `delta` moments.
pub fn kzm_disorder_average(
    omega_tau: f64,
    model: &DisorderModel,
    scheme: &AveragingScheme,
) -> Result<f64> {
    kzm_residual_energy(omega_tau, 0.0)?;
    disorder_expectation(model, scheme, |d| {
        kzm_residual_energy(omega_tau, d).unwrap_or(f64::NAN)
    })
}
