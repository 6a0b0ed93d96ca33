//! Bogoliubov dynamics of the normal-phase Hamiltonian under a linear ramp
//! of the coupling.
//!
//! The Heisenberg-picture evolution of the cavity mode reduces to a pair of
//! complex amplitudes `(u, v)` obeying
//!
//! ```text
//!  i du/d(wt) = (1 - g^2/2) u - (g^2/2) v
//! -i dv/d(wt) = (1 - g^2/2) v - (g^2/2) u
//! ```
//!
//! with `u(0) = 1`, `v(0) = 0` and the conserved hyperbolic norm
//! `|u|^2 - |v|^2 = 1`. Time is measured as `wt` and energies in units of
//! `hbar * w` throughout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How energies handed back by [`residual_energy`] are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnit {
    /// `E / (hbar w)`, dimensionless.
    #[default]
    HbarOmega,
    /// `E / hbar`, i.e. an angular frequency in the units of `omega`.
    AngularFrequency,
}

/// Cavity parameters. The atomic frequency only contributes a constant
/// offset to the normal-phase Hamiltonian and drops out of the residual
/// energy, so it is not carried.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega: f64,
    pub energy_unit: EnergyUnit,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            energy_unit: EnergyUnit::HbarOmega,
        }
    }
}

impl PhysicalParams {
    pub fn new(omega: f64, energy_unit: EnergyUnit) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "cavity frequency must be positive, got {omega}"
            )));
        }
        Ok(Self { omega, energy_unit })
    }

    fn express(&self, energy_hbar_omega: f64) -> f64 {
        match self.energy_unit {
            EnergyUnit::HbarOmega => energy_hbar_omega,
            EnergyUnit::AngularFrequency => energy_hbar_omega * self.omega,
        }
    }
}

/// A linear ramp `g(t) = g_final * t / tau` for `0 <= t <= tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpec {
    g_final: f64,
    omega_tau: f64,
}

impl QuenchSpec {
    /// Rejects `g_final` outside `[0, 1]` (superradiant side is not modelled)
    /// and non-positive durations.
    pub fn new(g_final: f64, omega_tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&g_final) {
            return Err(Error::InvalidSpec(format!(
                "g_final = {g_final} must lie in the normal phase [0, 1]"
            )));
        }
        if !(omega_tau.is_finite() && omega_tau > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "omega_tau = {omega_tau} must be positive and finite"
            )));
        }
        Ok(Self { g_final, omega_tau })
    }

    pub fn g_final(&self) -> f64 {
        self.g_final
    }

    pub fn omega_tau(&self) -> f64 {
        self.omega_tau
    }

    /// Coupling at dimensionless time `omega_t`, clamped to the ramp.
    pub fn coupling_at(&self, omega_t: f64) -> f64 {
        let s = (omega_t / self.omega_tau).clamp(0.0, 1.0);
        self.g_final * s
    }
}

/// Bogoliubov amplitudes at a given instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovState {
    pub u: Complex64,
    pub v: Complex64,
    pub omega_t: f64,
}

impl BogoliubovState {
    /// Vacuum of the uncoupled cavity, `u = 1`, `v = 0` at `wt = 0`.
    pub fn initial() -> Self {
        Self {
            u: Complex64::new(1.0, 0.0),
            v: Complex64::new(0.0, 0.0),
            omega_t: 0.0,
        }
    }

    /// `|u|^2 - |v|^2 - 1`, zero for an exact trajectory.
    pub fn constraint_drift(&self) -> f64 {
        self.u.norm_sqr() - self.v.norm_sqr() - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    /// Classical fourth-order Runge-Kutta on a uniform grid.
    #[default]
    Fixed,
    /// Dormand-Prince 5(4) with local error control.
    Adaptive,
    /// Fourth-order Magnus (two Gauss points, one commutator) on a uniform
    /// grid. Every step is an exact hyperbolic rotation, so the norm only
    /// drifts by rounding; suited to tiny residual energies deep in the
    /// adiabatic regime.
    Magnus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step_mode: StepMode,
    /// Step in units of `1/w` for the uniform-grid modes; initial step for
    /// adaptive mode.
    pub omega_dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest tolerated `| |u|^2 - |v|^2 - 1 |` along the trajectory.
    pub constraint_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step_mode: StepMode::Fixed,
            omega_dt: 5e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            constraint_tol: 1e-8,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed(omega_dt: f64) -> Self {
        Self {
            omega_dt,
            ..Self::default()
        }
    }

    pub fn magnus(omega_dt: f64) -> Self {
        Self {
            step_mode: StepMode::Magnus,
            omega_dt,
            ..Self::default()
        }
    }

    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            step_mode: StepMode::Adaptive,
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.omega_dt) {
            return Err(Error::InvalidConfig(format!(
                "omega_dt must be positive, got {}",
                self.omega_dt
            )));
        }
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive, got rel_tol = {}, abs_tol = {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !positive(self.constraint_tol) {
            return Err(Error::InvalidConfig(format!(
                "constraint_tol must be positive, got {}",
                self.constraint_tol
            )));
        }
        Ok(())
    }
}

/// Final state plus diagnostics gathered along the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationReport {
    pub state: BogoliubovState,
    /// Largest `| |u|^2 - |v|^2 - 1 |` over every accepted step.
    pub max_drift: f64,
    pub steps: usize,
    pub rejected_steps: usize,
}

#[inline(always)]
fn mul_neg_i(z: Complex64) -> Complex64 {
    Complex64::new(z.im, -z.re)
}

#[inline(always)]
fn mul_i(z: Complex64) -> Complex64 {
    Complex64::new(-z.im, z.re)
}

#[inline(always)]
fn derivative(u: Complex64, v: Complex64, g: f64) -> (Complex64, Complex64) {
    let half_g2 = 0.5 * g * g;
    let diag = 1.0 - half_g2;
    (
        mul_neg_i(u * diag - v * half_g2),
        mul_i(v * diag - u * half_g2),
    )
}

/// Time derivatives `(du/d(wt), dv/d(wt))` at coupling `g`.
pub fn rhs(state: &BogoliubovState, g: f64) -> (Complex64, Complex64) {
    derivative(state.u, state.v, g)
}

/// Integrate the ramp from the uncoupled vacuum up to `wt = omega_tau`.
pub fn integrate_quench(spec: &QuenchSpec, cfg: &IntegratorConfig) -> Result<BogoliubovState> {
    integrate_quench_report(spec, cfg).map(|r| r.state)
}

pub fn integrate_quench_report(
    spec: &QuenchSpec,
    cfg: &IntegratorConfig,
) -> Result<IntegrationReport> {
    integrate_quench_observed(spec, cfg, |_| {})
}

/// Like [`integrate_quench_report`], calling `observer` after every accepted
/// step. The state is never renormalized; the drift is only monitored.
pub fn integrate_quench_observed<F>(
    spec: &QuenchSpec,
    cfg: &IntegratorConfig,
    observer: F,
) -> Result<IntegrationReport>
where
    F: FnMut(&BogoliubovState),
{
    cfg.validate()?;
    match cfg.step_mode {
        StepMode::Fixed => integrate_fixed(spec, cfg, observer),
        StepMode::Adaptive => integrate_adaptive(spec, cfg, observer),
        StepMode::Magnus => integrate_magnus(spec, cfg, observer),
    }
}

fn check_drift(state: &BogoliubovState, max_drift: &mut f64, tol: f64) -> Result<()> {
    let drift = state.constraint_drift().abs();
    if drift > *max_drift {
        *max_drift = drift;
    }
    // NaN must fail too
    if !(drift <= tol) {
        return Err(Error::ConstraintViolation {
            drift,
            omega_t: state.omega_t,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Fixed-step RK4, carried out on `p = u + v`, `m = u - v`, where the
/// equations decouple into `p' = -i m`, `m' = -i (1 - g^2) p`. RK4 commutes
/// with constant linear changes of variables, so this is the same scheme as
/// stepping `(u, v)` directly, only cheaper.
fn integrate_fixed<F>(
    spec: &QuenchSpec,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<IntegrationReport>
where
    F: FnMut(&BogoliubovState),
{
    let duration = spec.omega_tau;
    let n = (duration / cfg.omega_dt).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let half = 0.5 * h;
    let sixth = h / 6.0;
    let rate = spec.g_final / duration;
    let w2 = |t: f64| {
        let g = rate * t;
        1.0 - g * g
    };

    let mut p = Complex64::new(1.0, 0.0);
    let mut m = Complex64::new(1.0, 0.0);
    let mut max_drift = 0.0;

    for k in 0..n {
        let t0 = k as f64 * h;
        let last = k + 1 == n;
        let w0 = w2(t0);
        let wm = w2(t0 + half);
        let w1 = if last {
            1.0 - spec.g_final * spec.g_final
        } else {
            w2(t0 + h)
        };

        let kp1 = mul_neg_i(m);
        let km1 = mul_neg_i(p * w0);
        let kp2 = mul_neg_i(m + km1 * half);
        let km2 = mul_neg_i((p + kp1 * half) * wm);
        let kp3 = mul_neg_i(m + km2 * half);
        let km3 = mul_neg_i((p + kp2 * half) * wm);
        let kp4 = mul_neg_i(m + km3 * h);
        let km4 = mul_neg_i((p + kp3 * h) * w1);

        p += (kp1 + (kp2 + kp3) * 2.0 + kp4) * sixth;
        m += (km1 + (km2 + km3) * 2.0 + km4) * sixth;

        let state = BogoliubovState {
            u: (p + m) * 0.5,
            v: (p - m) * 0.5,
            omega_t: if last { duration } else { t0 + h },
        };
        check_drift(&state, &mut max_drift, cfg.constraint_tol)?;
        observer(&state);
    }

    Ok(IntegrationReport {
        state: BogoliubovState {
            u: (p + m) * 0.5,
            v: (p - m) * 0.5,
            omega_t: duration,
        },
        max_drift,
        steps: n,
        rejected_steps: 0,
    })
}

/// Fourth-order Magnus in the `(p, m)` variables, where the generator is
/// `-i [[0, 1], [w^2(t), 0]]`. The truncated exponent
/// `h/2 (A1 + A2) + sqrt(3)/12 h^2 [A2, A1]` is traceless, so its
/// exponential is `cos(theta) I + sin(theta)/theta * Omega`.
fn integrate_magnus<F>(
    spec: &QuenchSpec,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<IntegrationReport>
where
    F: FnMut(&BogoliubovState),
{
    let duration = spec.omega_tau;
    let n = (duration / cfg.omega_dt).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let rate = spec.g_final / duration;
    let offset = 3f64.sqrt() / 6.0;
    let (c1, c2) = (0.5 - offset, 0.5 + offset);
    let comm = 3f64.sqrt() / 12.0 * h * h;

    let mut p = Complex64::new(1.0, 0.0);
    let mut m = Complex64::new(1.0, 0.0);
    let mut max_drift = 0.0;

    for k in 0..n {
        let t0 = k as f64 * h;
        let g1 = rate * (t0 + c1 * h);
        let g2 = rate * (t0 + c2 * h);
        let w1 = 1.0 - g1 * g1;
        let w2 = 1.0 - g2 * g2;
        // Omega = [[d, -i h], [-i h s, -d]]
        let s = 0.5 * (w1 + w2);
        let d = -comm * (w1 - w2);
        let q = d * d - h * h * s;
        let (cos_part, sin_part) = if q.abs() < 1e-8 {
            (1.0 + q / 2.0 + q * q / 24.0, 1.0 + q / 6.0 + q * q / 120.0)
        } else if q < 0.0 {
            let theta = (-q).sqrt();
            (theta.cos(), theta.sin() / theta)
        } else {
            let theta = q.sqrt();
            (theta.cosh(), theta.sinh() / theta)
        };
        let np = p * (cos_part + sin_part * d) + mul_neg_i(m) * (sin_part * h);
        let nm = mul_neg_i(p) * (sin_part * h * s) + m * (cos_part - sin_part * d);
        p = np;
        m = nm;

        let last = k + 1 == n;
        let state = BogoliubovState {
            u: (p + m) * 0.5,
            v: (p - m) * 0.5,
            omega_t: if last { duration } else { t0 + h },
        };
        check_drift(&state, &mut max_drift, cfg.constraint_tol)?;
        observer(&state);
    }

    Ok(IntegrationReport {
        state: BogoliubovState {
            u: (p + m) * 0.5,
            v: (p - m) * 0.5,
            omega_t: duration,
        },
        max_drift,
        steps: n,
        rejected_steps: 0,
    })
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn integrate_adaptive<F>(
    spec: &QuenchSpec,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<IntegrationReport>
where
    F: FnMut(&BogoliubovState),
{
    let duration = spec.omega_tau;
    let g_at = |t: f64| spec.g_final * (t / duration).min(1.0);
    let min_step = duration * 1e-14;

    let mut t = 0.0;
    let mut u = Complex64::new(1.0, 0.0);
    let mut v = Complex64::new(0.0, 0.0);
    let mut h = cfg.omega_dt.min(duration);
    let mut max_drift = 0.0;
    let mut steps = 0;
    let mut rejected = 0;
    let (mut k1u, mut k1v) = derivative(u, v, 0.0);

    while t < duration {
        let last = t + h >= duration;
        if last {
            h = duration - t;
        }

        let (k2u, k2v) = derivative(u + k1u * (h * A21), v + k1v * (h * A21), g_at(t + C2 * h));
        let (k3u, k3v) = derivative(
            u + (k1u * A31 + k2u * A32) * h,
            v + (k1v * A31 + k2v * A32) * h,
            g_at(t + C3 * h),
        );
        let (k4u, k4v) = derivative(
            u + (k1u * A41 + k2u * A42 + k3u * A43) * h,
            v + (k1v * A41 + k2v * A42 + k3v * A43) * h,
            g_at(t + C4 * h),
        );
        let (k5u, k5v) = derivative(
            u + (k1u * A51 + k2u * A52 + k3u * A53 + k4u * A54) * h,
            v + (k1v * A51 + k2v * A52 + k3v * A53 + k4v * A54) * h,
            g_at(t + C5 * h),
        );
        let (k6u, k6v) = derivative(
            u + (k1u * A61 + k2u * A62 + k3u * A63 + k4u * A64 + k5u * A65) * h,
            v + (k1v * A61 + k2v * A62 + k3v * A63 + k4v * A64 + k5v * A65) * h,
            g_at(t + h),
        );
        let un = u + (k1u * B1 + k3u * B3 + k4u * B4 + k5u * B5 + k6u * B6) * h;
        let vn = v + (k1v * B1 + k3v * B3 + k4v * B4 + k5v * B5 + k6v * B6) * h;
        let t_new = if last { duration } else { t + h };
        let (k7u, k7v) = derivative(un, vn, g_at(t_new));

        let eu = (k1u * E1 + k3u * E3 + k4u * E4 + k5u * E5 + k6u * E6 + k7u * E7) * h;
        let ev = (k1v * E1 + k3v * E3 + k4v * E4 + k5v * E5 + k6v * E6 + k7v * E7) * h;

        let scale_u = cfg.abs_tol + cfg.rel_tol * u.norm().max(un.norm());
        let scale_v = cfg.abs_tol + cfg.rel_tol * v.norm().max(vn.norm());
        let err = [
            eu.re / scale_u,
            eu.im / scale_u,
            ev.re / scale_v,
            ev.im / scale_v,
        ]
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()));

        if err <= 1.0 {
            t = t_new;
            u = un;
            v = vn;
            k1u = k7u;
            k1v = k7v;
            steps += 1;
            let state = BogoliubovState { u, v, omega_t: t };
            check_drift(&state, &mut max_drift, cfg.constraint_tol)?;
            observer(&state);
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last {
                h *= grow;
            }
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < min_step {
                return Err(Error::StepUnderflow { step: h, omega_t: t });
            }
        }
    }

    Ok(IntegrationReport {
        state: BogoliubovState {
            u,
            v,
            omega_t: duration,
        },
        max_drift,
        steps,
        rejected_steps: rejected,
    })
}

fn check_coupling(g: f64) -> Result<()> {
    if (0.0..=1.0).contains(&g) {
        Ok(())
    } else {
        Err(Error::InvalidCoupling(g))
    }
}

/// Ground-state energy of the normal-phase Hamiltonian at coupling `g`,
/// relative to the uncoupled vacuum: `(sqrt(1 - g^2) - 1) / 2`.
pub fn ground_energy_shift(g: f64) -> Result<f64> {
    check_coupling(g)?;
    Ok(0.5 * ((1.0 - g * g).sqrt() - 1.0))
}

/// Gap between the ground and first excited level, `2 sqrt(1 - g^2)`.
pub fn energy_gap(g: f64) -> Result<f64> {
    check_coupling(g)?;
    Ok(2.0 * (1.0 - g * g).sqrt())
}

/// Energy above the instantaneous ground state of `H_np(g_f)`:
///
/// `|v|^2 - (g_f^2 / 4) |u + v|^2 - (sqrt(1 - g_f^2) - 1) / 2`
/// on states with `|u|^2 - |v|^2 = 1`.
///
/// The literal expression shifts by `-(1 - w) eps / 2` under a normalization
/// drift `eps`, with `w = sqrt(1 - g_f^2)`, which swamps small energies.
/// With `p = u + v`, `m = u - v` it is rewritten as a sum of nonnegative
/// terms `[(w|p| - |m|)^2 + 2w(|p||m| - Re p m*)] / 4` with the drift term
/// dropped, so the result is evaluated on the normalized manifold.
pub fn residual_energy(state: &BogoliubovState, g_f: f64, params: &PhysicalParams) -> Result<f64> {
    check_coupling(g_f)?;
    let w = ((1.0 - g_f) * (1.0 + g_f)).sqrt();
    let p = state.u + state.v;
    let m = state.u - state.v;
    let pm = p * m.conj();
    let (ap, am) = (p.norm(), m.norm());
    // |p||m| - Re(p m*) without cancellation
    let gap = if pm.re > 0.0 {
        pm.im * pm.im / (ap * am + pm.re)
    } else {
        ap * am - pm.re
    };
    let e = 0.25 * ((w * ap - am).powi(2) + 2.0 * w * gap);
    Ok(params.express(e))
}

/// Integrate `spec` and return its residual energy in units of `hbar w`.
pub fn quench_residual_energy(spec: &QuenchSpec, cfg: &IntegratorConfig) -> Result<f64> {
    let state = integrate_quench(spec, cfg)?;
    residual_energy(&state, spec.g_final, &PhysicalParams::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn state(u: Complex64, v: Complex64) -> BogoliubovState {
        BogoliubovState { u, v, omega_t: 0.0 }
    }

    #[test]
    fn rhs_uncoupled() {
        let (du, dv) = rhs(&state(c(1.0, 0.0), c(0.0, 0.0)), 0.0);
        assert_eq!(du, c(0.0, -1.0));
        assert_eq!(dv, c(0.0, 0.0));
    }

    #[test]
    fn rhs_critical() {
        let (du, dv) = rhs(&state(c(1.0, 0.0), c(0.0, 0.0)), 1.0);
        assert_eq!(du, c(0.0, -0.5));
        assert_eq!(dv, c(0.0, -0.5));
    }

    #[test]
    fn rhs_half_coupling() {
        // 1 - g^2/2 = 0.875, g^2/2 = 0.125
        let (du, dv) = rhs(&state(c(1.0, 0.0), c(0.5, 0.0)), 0.5);
        assert_abs_diff_eq!(du.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(du.im, -0.8125, epsilon = 1e-15);
        assert_abs_diff_eq!(dv.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dv.im, 0.3125, epsilon = 1e-15);
    }

    #[test]
    fn quench_spec_rejects_superradiant_side() {
        assert!(matches!(QuenchSpec::new(1.01, 10.0), Err(Error::InvalidSpec(_))));
        assert!(matches!(QuenchSpec::new(-0.1, 10.0), Err(Error::InvalidSpec(_))));
        assert!(QuenchSpec::new(0.5, 0.0).is_err());
        assert!(QuenchSpec::new(0.5, f64::NAN).is_err());
        assert!(QuenchSpec::new(1.0, 10.0).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::fixed(0.0).validate().is_err());
        assert!(IntegratorConfig::adaptive(-1.0, 1e-12).validate().is_err());
        assert!(IntegratorConfig::default().validate().is_ok());
    }

    #[test]
    fn uncoupled_quench_is_a_free_rotation() {
        let spec = QuenchSpec::new(0.0, 10.0).unwrap();
        let s = integrate_quench(&spec, &IntegratorConfig::default()).unwrap();
        let exact = Complex64::from_polar(1.0, -10.0);
        assert!((s.u - exact).norm() < 1e-8);
        assert!(s.v.norm() < 1e-10);
        assert_eq!(s.omega_t, 10.0);
    }

    #[test]
    fn adaptive_matches_fixed() {
        let spec = QuenchSpec::new(1.0, 50.0).unwrap();
        let a = integrate_quench(&spec, &IntegratorConfig::adaptive(1e-11, 1e-13)).unwrap();
        let f = integrate_quench(&spec, &IntegratorConfig::default()).unwrap();
        assert!((a.u - f.u).norm() < 1e-7, "{:?} vs {:?}", a, f);
        assert!((a.v - f.v).norm() < 1e-7);
    }

    #[test]
    fn coarse_step_trips_constraint_monitor() {
        let spec = QuenchSpec::new(1.0, 100.0).unwrap();
        let err = integrate_quench(&spec, &IntegratorConfig::fixed(0.5)).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { .. }), "{err}");
    }

    #[test]
    fn observer_sees_every_step() {
        let spec = QuenchSpec::new(0.7, 1.0).unwrap();
        let mut count = 0;
        let report =
            integrate_quench_observed(&spec, &IntegratorConfig::fixed(0.01), |_| count += 1)
                .unwrap();
        assert_eq!(count, 100);
        assert_eq!(report.steps, 100);
    }

    #[test]
    fn ground_shift_and_gap() {
        assert_eq!(ground_energy_shift(0.0).unwrap(), 0.0);
        assert_eq!(ground_energy_shift(1.0).unwrap(), -0.5);
        assert_abs_diff_eq!(ground_energy_shift(0.6).unwrap(), -0.1, epsilon = 1e-15);
        assert_eq!(energy_gap(0.0).unwrap(), 2.0);
        assert_eq!(energy_gap(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(energy_gap(0.6).unwrap(), 1.6, epsilon = 1e-15);
        assert_eq!(energy_gap(1.5), Err(Error::InvalidCoupling(1.5)));
        assert!(ground_energy_shift(-0.1).is_err());
    }

    #[test]
    fn residual_energy_of_vacuum() {
        let p = PhysicalParams::default();
        assert_eq!(residual_energy(&BogoliubovState::initial(), 0.0, &p).unwrap(), 0.0);
        for theta in [0.3, 1.7, -2.9] {
            let s = state(Complex64::from_polar(1.0, -theta), c(0.0, 0.0));
            assert_eq!(residual_energy(&s, 0.0, &p).unwrap(), 0.0);
        }
        assert!(residual_energy(&BogoliubovState::initial(), 1.2, &p).is_err());
    }

    fn literal_energy(s: &BogoliubovState, g: f64) -> f64 {
        s.v.norm_sqr() - 0.25 * g * g * (s.u + s.v).norm_sqr() - 0.5 * ((1.0 - g * g).sqrt() - 1.0)
    }

    #[test]
    fn residual_energy_of_squeezed_states() {
        let p = PhysicalParams::default();
        for (r, phi, g) in [(0.3, 0.4, 0.5), (1.2, -2.0, 0.9), (0.05, 3.0, 0.1), (2.0, 1.0, 1.0)] {
            let s = state(c(f64::cosh(r), 0.0), Complex64::from_polar(f64::sinh(r), phi));
            let want = literal_energy(&s, g);
            let got = residual_energy(&s, g, &p).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-12 * (1.0 + want.abs()));
            assert!(got >= 0.0);
        }
        // the instantaneous ground state has zero residual energy
        for g in [0.3f64, 0.8, 0.99] {
            let r = -0.5 * (1.0 - g * g).sqrt().ln();
            let s = state(c(r.cosh(), 0.0), c(r.sinh(), 0.0));
            assert_abs_diff_eq!(residual_energy(&s, g, &p).unwrap(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn residual_energy_ignores_normalization_drift() {
        let p = PhysicalParams::default();
        let g: f64 = 0.6;
        let w = (1.0 - g * g).sqrt();
        let s = state(c(1.1_f64.cosh(), 0.0), Complex64::from_polar(1.1_f64.sinh(), 0.7));
        let eps: f64 = 1e-6;
        let scale = (1.0 + eps).sqrt();
        let drifted = state(s.u * scale, s.v * scale);
        let shift = literal_energy(&drifted, g) - residual_energy(&drifted, g, &p).unwrap();
        assert_abs_diff_eq!(shift, -0.5 * (1.0 - w) * eps, epsilon = 1e-12);
    }

    #[test]
    fn residual_energy_units() {
        let spec = QuenchSpec::new(1.0, 20.0).unwrap();
        let s = integrate_quench(&spec, &IntegratorConfig::default()).unwrap();
        let e1 = residual_energy(&s, 1.0, &PhysicalParams::default()).unwrap();
        let p = PhysicalParams::new(2.5, EnergyUnit::AngularFrequency).unwrap();
        let e2 = residual_energy(&s, 1.0, &p).unwrap();
        assert_abs_diff_eq!(e2, 2.5 * e1, epsilon = 1e-15);
        assert!(PhysicalParams::new(0.0, EnergyUnit::HbarOmega).is_err());
    }
}
