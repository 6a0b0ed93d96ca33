use proptest::prelude::*;

use rabi_quench::disorder::{
    ensemble_residual_energy, ensemble_sweep, realizations, truncated_gaussian_pdf,
};
use rabi_quench::dynamics::quench_residual_energy;
use rabi_quench::quadrature::gauss_legendre_on;
use rabi_quench::{AveragingScheme, DisorderModel, IntegratorConfig, QuenchSpec};

#[test]
fn pdf_integrates_to_one() {
    for sigma in [0.01, 0.1, 0.33] {
        // piecewise rule on the support, independent of the averaging code
        let a = -3.0 * sigma;
        let panels = 64;
        let width = 6.0 * sigma / panels as f64;
        let total: f64 = (0..panels)
            .flat_map(|k| {
                let lo = a + k as f64 * width;
                gauss_legendre_on(10, lo, lo + width)
            })
            .map(|(x, w)| w * truncated_gaussian_pdf(x, sigma).unwrap())
            .sum();
        assert!((total - 1.0).abs() <= 1e-10, "sigma={sigma}: {total}");
    }
}

#[test]
fn pdf_peak_value() {
    assert!((truncated_gaussian_pdf(0.0, 0.1).unwrap() - 4.00022).abs() < 1e-5);
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let base = QuenchSpec::new(1.0, 1e3).unwrap();
    let model = DisorderModel::time(0.1).unwrap();
    let cfg = IntegratorConfig::default();
    let quad = ensemble_residual_energy(&base, &model, &AveragingScheme::Quadrature { n_nodes: 33 }, &cfg)
        .unwrap();
    let mc = ensemble_residual_energy(
        &base,
        &model,
        &AveragingScheme::MonteCarlo {
            n_samples: 10_000,
            seed: 2024,
        },
        &cfg,
    )
    .unwrap();
    assert!(mc.stderr > 0.0);
    assert!(
        (mc.mean - quad.mean).abs() <= 3.0 * mc.stderr,
        "mc {} +- {}, quadrature {}",
        mc.mean,
        mc.stderr,
        quad.mean
    );
}

#[test]
fn small_dispersion_recovers_ordered_ramp() {
    let cfg = IntegratorConfig::default();
    let scheme = AveragingScheme::default();
    let base = QuenchSpec::new(1.0, 1e3).unwrap();
    let ordered = quench_residual_energy(&base, &cfg).unwrap();
    let model = DisorderModel::time(1e-4).unwrap();
    let avg = ensemble_residual_energy(&base, &model, &scheme, &cfg).unwrap().mean;
    assert!((avg - ordered).abs() <= 0.01 * ordered, "{avg} vs {ordered}");
}

#[test]
fn small_parameter_dispersion_converges_like_square_root() {
    // the ground-state shift has a square-root cusp at the critical point,
    // so the end-point spread enters as sqrt(sigma)
    let cfg = IntegratorConfig::default();
    let scheme = AveragingScheme::default();
    let base = QuenchSpec::new(1.0, 1e2).unwrap();
    let ordered = quench_residual_energy(&base, &cfg).unwrap();
    let gaps: Vec<f64> = [1e-4, 1e-6, 1e-8]
        .iter()
        .map(|&s| {
            let model = DisorderModel::param(s).unwrap();
            let avg = ensemble_residual_energy(&base, &model, &scheme, &cfg).unwrap().mean;
            (avg - ordered).abs() / ordered
        })
        .collect();
    for w in gaps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((5.0..=20.0).contains(&ratio), "{gaps:?}");
    }
    assert!(gaps[2] <= 0.01, "{gaps:?}");
}

#[test]
fn sweeps_are_bit_reproducible() {
    let cfg = IntegratorConfig::fixed(0.01);
    let grid = [300.0, 100.0, 200.0];
    for (model, scheme) in [
        (DisorderModel::time(0.2).unwrap(), AveragingScheme::Quadrature { n_nodes: 9 }),
        (
            DisorderModel::param(0.05).unwrap(),
            AveragingScheme::MonteCarlo {
                n_samples: 16,
                seed: 11,
            },
        ),
    ] {
        let a = ensemble_sweep(1.0, &grid, &model, &scheme, &cfg).unwrap();
        let b = ensemble_sweep(1.0, &grid, &model, &scheme, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.omega_tau_grid, vec![100.0, 200.0, 300.0]);
        assert!(a.mean_er.iter().all(|&e| e >= -1e-10));
        assert_eq!(a.mean_er.len(), a.stderr_er.len());
    }
}

#[test]
fn parallel_and_serial_sweeps_match() {
    let cfg = IntegratorConfig::fixed(0.01);
    let model = DisorderModel::time(0.1).unwrap();
    let scheme = AveragingScheme::Quadrature { n_nodes: 7 };
    let grid = [50.0, 150.0];
    let parallel = ensemble_sweep(1.0, &grid, &model, &scheme, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| ensemble_sweep(1.0, &grid, &model, &scheme, &cfg).unwrap());
    assert_eq!(parallel, serial);
}

proptest! {
    #[test]
    fn pdf_is_even(delta in -0.4..0.4f64, sigma in 1e-3..(1.0 / 3.0)) {
        let a = truncated_gaussian_pdf(delta, sigma).unwrap();
        let b = truncated_gaussian_pdf(-delta, sigma).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn quadrature_weights_are_normalized(n in 3usize..80, sigma in 1e-4..0.1f64, time in any::<bool>()) {
        let model = if time { DisorderModel::time(sigma) } else { DisorderModel::param(sigma) }.unwrap();
        let rule = realizations(&model, &AveragingScheme::Quadrature { n_nodes: n }).unwrap();
        let total: f64 = rule.iter().map(|r| r.weight).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(rule.iter().all(|r| r.weight > 0.0));
    }

    #[test]
    fn monte_carlo_stays_in_support(seed in any::<u64>(), sigma in 1e-3..(1.0 / 3.0)) {
        let model = DisorderModel::time(sigma).unwrap();
        let draws = realizations(&model, &AveragingScheme::MonteCarlo { n_samples: 200, seed }).unwrap();
        prop_assert_eq!(draws.len(), 200);
        prop_assert!(draws.iter().all(|r| r.delta.abs() <= 3.0 * sigma));
        let again = realizations(&model, &AveragingScheme::MonteCarlo { n_samples: 200, seed }).unwrap();
        prop_assert_eq!(draws, again);
    }
}
