//! Quick invariant suite behind `verify`. Each check runs in well under a
//! second with the default step.

use std::fmt::Write as _;

use num_complex::Complex64;

use rabi_quench::analytics::{freezeout_g, freezeout_g_series, FREEZEOUT_RESIDUAL_TOL};
use rabi_quench::disorder::{averaged_g_final, ensemble_residual_energy, realizations, truncated_gaussian_pdf};
use rabi_quench::dynamics::{
    energy_gap, ground_energy_shift, integrate_quench_report, quench_residual_energy,
    residual_energy, rhs, PhysicalParams,
};
use rabi_quench::quadrature::gauss_legendre_on;
use rabi_quench::reference::{reference_integrate, REFERENCE_OMEGA_DT};
use rabi_quench::scaling::{fit_power_law, log_grid};
use rabi_quench::{AveragingScheme, BogoliubovState, DisorderModel, IntegratorConfig, QuenchSpec};

type Check = Result<(), String>;

fn ensure(ok: bool, detail: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

fn err(e: rabi_quench::Error) -> String {
    e.to_string()
}

fn rhs_examples() -> Check {
    let c = Complex64::new;
    let st = |u, v| BogoliubovState { u, v, omega_t: 0.0 };
    let cases = [
        (st(c(1.0, 0.0), c(0.0, 0.0)), 0.0, (c(0.0, -1.0), c(0.0, 0.0))),
        (st(c(1.0, 0.0), c(0.0, 0.0)), 1.0, (c(0.0, -0.5), c(0.0, -0.5))),
        (st(c(1.0, 0.0), c(0.5, 0.0)), 0.5, (c(0.0, -0.8125), c(0.0, 0.3125))),
    ];
    for (s, g, want) in cases {
        let got = rhs(&s, g);
        ensure((got.0 - want.0).norm() < 1e-15 && (got.1 - want.1).norm() < 1e-15, || {
            format!("g = {g}: got {got:?}, want {want:?}")
        })?;
    }
    Ok(())
}

fn closed_forms() -> Check {
    let pairs = [
        (ground_energy_shift(0.6).map_err(err)?, -0.1),
        (ground_energy_shift(1.0).map_err(err)?, -0.5),
        (energy_gap(0.6).map_err(err)?, 1.6),
        (energy_gap(1.0).map_err(err)?, 0.0),
        (averaged_g_final(0.1), 0.920212),
    ];
    for (got, want) in pairs {
        ensure((got - want).abs() < 1e-6, || format!("{got} vs {want}"))?;
    }
    Ok(())
}

fn decoupled(cfg: &IntegratorConfig) -> Check {
    for wt in [10.0, 1e3] {
        let spec = QuenchSpec::new(0.0, wt).map_err(err)?;
        let r = integrate_quench_report(&spec, cfg).map_err(err)?;
        let e = residual_energy(&r.state, 0.0, &PhysicalParams::default()).map_err(err)?;
        ensure(r.state.v.norm() <= 1e-10 && e.abs() <= 1e-10, || {
            format!("omega_tau = {wt}: |v| = {:e}, E_r = {e:e}", r.state.v.norm())
        })?;
    }
    Ok(())
}

fn normalization(cfg: &IntegratorConfig) -> Check {
    for (g, wt) in [(0.5, 10.0), (1.0, 10.0), (0.5, 1e3), (1.0, 1e3)] {
        let spec = QuenchSpec::new(g, wt).map_err(err)?;
        let r = integrate_quench_report(&spec, cfg).map_err(err)?;
        ensure(r.max_drift <= 1e-8, || format!("g = {g}, omega_tau = {wt}: drift {:e}", r.max_drift))?;
    }
    Ok(())
}

fn oracle(cfg: &IntegratorConfig) -> Check {
    for (g, wt) in [(1.0, 10.0), (0.7, 20.0), (0.4, 5.0)] {
        let spec = QuenchSpec::new(g, wt).map_err(err)?;
        let got = integrate_quench_report(&spec, cfg).map_err(err)?.state;
        let want = reference_integrate(&spec, REFERENCE_OMEGA_DT);
        let rel = ((got.u - want.u).norm() / want.u.norm()).max((got.v - want.v).norm() / want.v.norm());
        ensure(rel <= 1e-6, || format!("g = {g}, omega_tau = {wt}: relative error {rel:e}"))?;
    }
    Ok(())
}

fn pdf_normalization() -> Check {
    for sigma in [0.01, 0.1, 0.33] {
        let width = 6.0 * sigma / 64.0;
        let mut total = 0.0;
        for k in 0..64 {
            let lo = -3.0 * sigma + k as f64 * width;
            for (x, w) in gauss_legendre_on(10, lo, lo + width) {
                total += w * truncated_gaussian_pdf(x, sigma).map_err(err)?;
            }
        }
        ensure((total - 1.0).abs() <= 1e-10, || format!("sigma = {sigma}: {total}"))?;
    }
    Ok(())
}

fn weights() -> Check {
    for model in [DisorderModel::time(0.2).map_err(err)?, DisorderModel::param(0.05).map_err(err)?] {
        let rule = realizations(&model, &AveragingScheme::default()).map_err(err)?;
        let total: f64 = rule.iter().map(|r| r.weight).sum();
        ensure((total - 1.0).abs() <= 1e-12, || format!("{model:?}: {total}"))?;
    }
    Ok(())
}

fn ordered_ensemble(cfg: &IntegratorConfig) -> Check {
    let base = QuenchSpec::new(1.0, 50.0).map_err(err)?;
    let single = quench_residual_energy(&base, cfg).map_err(err)?;
    let model = DisorderModel::param(0.0).map_err(err)?;
    let avg = ensemble_residual_energy(&base, &model, &AveragingScheme::default(), cfg).map_err(err)?;
    ensure(avg.mean == single && avg.stderr == 0.0, || format!("{} vs {single}", avg.mean))
}

fn freezeout() -> Check {
    for wt in log_grid(1e2, 1e6, 2) {
        let f = freezeout_g(wt).map_err(err)?;
        ensure(f.residual().abs() <= FREEZEOUT_RESIDUAL_TOL, || format!("omega_tau = {wt}"))?;
    }
    let exact = freezeout_g(1e3).map_err(err)?.g_hat;
    let series = freezeout_g_series(1e3);
    ensure((exact - series).abs() <= 1e-4, || format!("{series} vs {exact}"))
}

fn fit_recovery() -> Check {
    let pts: Vec<(f64, f64)> = log_grid(1e3, 1e4, 8)
        .into_iter()
        .map(|x| (x, 0.02 * x.powf(-1.0 / 3.0)))
        .collect();
    let f = fit_power_law(&pts, (1e3, 1e4)).map_err(err)?;
    ensure((f.nu + 1.0 / 3.0).abs() <= 1e-12, || format!("nu = {}", f.nu))
}

/// Run every check, returning the report text and the number of failures.
pub fn run(cfg: &IntegratorConfig) -> (String, usize) {
    let checks: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("rhs examples", Box::new(rhs_examples)),
        ("ground shift, gap, averaged end point", Box::new(closed_forms)),
        ("decoupled ramp stays in vacuum", Box::new(|| decoupled(cfg))),
        ("hyperbolic normalization", Box::new(|| normalization(cfg))),
        ("fine-step oracle", Box::new(|| oracle(cfg))),
        ("disorder density normalization", Box::new(pdf_normalization)),
        ("quadrature weights", Box::new(weights)),
        ("ordered ensemble equals single ramp", Box::new(|| ordered_ensemble(cfg))),
        ("freeze-out root", Box::new(freezeout)),
        ("power-law fit", Box::new(fit_recovery)),
    ];
    let mut out = String::new();
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => {
                let _ = writeln!(out, "[PASS] {name}");
            }
            Err(detail) => {
                failures += 1;
                let _ = writeln!(out, "[FAIL] {name}: {detail}");
            }
        }
    }
    (out, failures)
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes_with_defaults() {
        let (text, failures) = super::run(&rabi_quench::IntegratorConfig::default());
        assert_eq!(failures, 0, "{text}");
    }

    #[test]
    fn coarse_step_fails_some_checks() {
        let (text, failures) = super::run(&rabi_quench::IntegratorConfig::fixed(0.5));
        assert!(failures > 0);
        assert!(text.contains("[FAIL]"));
    }
}
