//! Quenched disorder in the ramp and disorder-averaged residual energies.
//!
//! Two channels are modelled:
//!
//! * [`DisorderChannel::Time`]: the ramp duration becomes `tau (1 + delta)`,
//!   with `delta` drawn from a Gaussian truncated to `|delta| <= 3 sigma`.
//! * [`DisorderChannel::Param`]: the ramp ends at `g_f = 1 - |delta|`, with
//!   `delta` drawn from a zero-mean Gaussian of standard deviation `sigma`.
//!
//! Averages are weighted sums over realizations, either Monte Carlo draws
//! from a seeded generator or deterministic Gauss-Legendre nodes reweighted
//! by the density. Reductions always run in index order, so results do not
//! depend on how many threads evaluated the realizations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::dynamics::{quench_residual_energy, IntegratorConfig, QuenchSpec};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

/// Half-width of the truncated time-disorder support, in units of sigma.
pub const TIME_SUPPORT_SIGMAS: f64 = 3.0;
/// Largest dispersion for which `tau (1 + delta)` stays positive on the support.
pub const TIME_SIGMA_MAX: f64 = 1.0 / 3.0;
/// Largest parameter-disorder dispersion accepted.
pub const PARAM_SIGMA_MAX: f64 = 0.1;
/// The half-line quadrature for parameter disorder is cut at this many sigmas;
/// the Gaussian mass beyond it is below 1e-15.
pub const PARAM_CUTOFF_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderChannel {
    Time,
    Param,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    channel: DisorderChannel,
    sigma: f64,
}

impl DisorderModel {
    pub fn new(channel: DisorderChannel, sigma: f64) -> Result<Self> {
        let max = match channel {
            DisorderChannel::Time => TIME_SIGMA_MAX,
            DisorderChannel::Param => PARAM_SIGMA_MAX,
        };
        // a small slack lets the tabulated 0.33 and 1/3 both through
        if !(sigma.is_finite() && sigma >= 0.0 && sigma <= max * (1.0 + 1e-12)) {
            return Err(Error::InvalidModel(format!(
                "sigma = {sigma} outside [0, {max}] for {channel:?} disorder"
            )));
        }
        Ok(Self { channel, sigma })
    }

    pub fn time(sigma: f64) -> Result<Self> {
        Self::new(DisorderChannel::Time, sigma)
    }

    pub fn param(sigma: f64) -> Result<Self> {
        Self::new(DisorderChannel::Param, sigma)
    }

    pub fn channel(&self) -> DisorderChannel {
        self.channel
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_ordered(&self) -> bool {
        self.sigma == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AveragingScheme {
    MonteCarlo { n_samples: usize, seed: u64 },
    Quadrature { n_nodes: usize },
}

impl Default for AveragingScheme {
    fn default() -> Self {
        AveragingScheme::Quadrature { n_nodes: 33 }
    }
}

impl AveragingScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AveragingScheme::MonteCarlo { n_samples, .. } if n_samples < 2 => Err(
                Error::InvalidScheme(format!("Monte Carlo needs n_samples >= 2, got {n_samples}")),
            ),
            AveragingScheme::Quadrature { n_nodes } if n_nodes < 3 => Err(Error::InvalidScheme(
                format!("quadrature needs n_nodes >= 3, got {n_nodes}"),
            )),
            _ => Ok(()),
        }
    }

    /// The same scheme with a different number of realizations.
    pub fn with_count(&self, n: usize) -> Self {
        match *self {
            AveragingScheme::MonteCarlo { seed, .. } => AveragingScheme::MonteCarlo {
                n_samples: n,
                seed,
            },
            AveragingScheme::Quadrature { .. } => AveragingScheme::Quadrature { n_nodes: n },
        }
    }

    pub fn count(&self) -> usize {
        match *self {
            AveragingScheme::MonteCarlo { n_samples, .. } => n_samples,
            AveragingScheme::Quadrature { n_nodes } => n_nodes,
        }
    }
}

/// One disorder value and its weight in the quenched average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realization {
    pub delta: f64,
    pub weight: f64,
}

/// Density of the time disorder: a Gaussian truncated to `|delta| <= 3 sigma`
/// and renormalized by `erf(3 / sqrt 2)`.
pub fn truncated_gaussian_pdf(delta: f64, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidDispersion(sigma));
    }
    if delta.abs() > TIME_SUPPORT_SIGMAS * sigma {
        return Ok(0.0);
    }
    let norm = (2.0 * PI).sqrt() * sigma * erf(TIME_SUPPORT_SIGMAS * FRAC_1_SQRT_2);
    Ok((-delta * delta / (2.0 * sigma * sigma)).exp() / norm)
}

/// Disorder average of the ramp end point, `1 - sqrt(2/pi) sigma`.
pub fn averaged_g_final(sigma: f64) -> f64 {
    1.0 - (2.0 / PI).sqrt() * sigma
}

/// The concrete ramp realized for disorder value `delta`.
///
/// Time disorder stretches the duration and keeps `base.g_final`; parameter
/// disorder ends the ramp at `1 - |delta|` and keeps the duration.
pub fn effective_quench(model: &DisorderModel, base: &QuenchSpec, delta: f64) -> Result<QuenchSpec> {
    if !delta.is_finite() {
        return Err(Error::OutOfSupport { delta });
    }
    match model.channel {
        DisorderChannel::Time => {
            // rounding slack at the support edge
            let edge = TIME_SUPPORT_SIGMAS * model.sigma * (1.0 + 1e-12);
            if delta.abs() > edge || 1.0 + delta <= 0.0 {
                return Err(Error::OutOfSupport { delta });
            }
            QuenchSpec::new(base.g_final(), base.omega_tau() * (1.0 + delta))
        }
        DisorderChannel::Param => {
            if delta.abs() >= 1.0 {
                return Err(Error::OutOfSupport { delta });
            }
            QuenchSpec::new(1.0 - delta.abs(), base.omega_tau())
        }
    }
}

/// Disorder values and weights for the quenched average. Weights sum to one.
pub fn realizations(model: &DisorderModel, scheme: &AveragingScheme) -> Result<Vec<Realization>> {
    scheme.validate()?;
    if model.is_ordered() {
        return Ok(vec![Realization {
            delta: 0.0,
            weight: 1.0,
        }]);
    }
    match *scheme {
        AveragingScheme::MonteCarlo { n_samples, seed } => {
            Ok(monte_carlo(model, n_samples, seed))
        }
        AveragingScheme::Quadrature { n_nodes } => quadrature_nodes(model, n_nodes),
    }
}

fn monte_carlo(model: &DisorderModel, n: usize, seed: u64) -> Vec<Realization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // sigma > 0 was checked by the caller
    let normal = Normal::new(0.0, model.sigma).expect("positive finite sigma");
    let accept = |d: f64| match model.channel {
        DisorderChannel::Time => d.abs() <= TIME_SUPPORT_SIGMAS * model.sigma,
        DisorderChannel::Param => d.abs() < 1.0,
    };
    let weight = 1.0 / n as f64;
    (0..n)
        .map(|_| loop {
            let d = normal.sample(&mut rng);
            if accept(d) {
                break Realization { delta: d, weight };
            }
        })
        .collect()
}

fn quadrature_nodes(model: &DisorderModel, n: usize) -> Result<Vec<Realization>> {
    let sigma = model.sigma;
    let raw: Vec<(f64, f64)> = match model.channel {
        DisorderChannel::Time => {
            let edge = TIME_SUPPORT_SIGMAS * sigma;
            gauss_legendre_on(n, -edge, edge)
                .into_iter()
                .map(|(d, w)| Ok((d, w * truncated_gaussian_pdf(d, sigma)?)))
                .collect::<Result<_>>()?
        }
        DisorderChannel::Param => {
            // g_f depends on |delta| only: fold onto delta >= 0 with twice the
            // Gaussian density.
            let cut = (PARAM_CUTOFF_SIGMAS * sigma).min(1.0 - 1e-9);
            let norm = 2.0 / ((2.0 * PI).sqrt() * sigma);
            param_half_line_rule(n, cut)
                .into_iter()
                .map(|(d, w)| (d, w * norm * (-d * d / (2.0 * sigma * sigma)).exp()))
                .collect()
        }
    };
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    Ok(raw
        .into_iter()
        .map(|(delta, w)| Realization {
            delta,
            weight: w / total,
        })
        .collect())
}

/// Gauss-Legendre in `x` with `delta = cut * x^3`. For slow ramps the
/// residual energy is sharply peaked within `(w tau)^(-2/3)` of
/// `delta = 0`, far narrower than sigma; the cubic grading puts enough nodes
/// there while leaving the integrand smooth in `x`.
fn param_half_line_rule(n: usize, cut: f64) -> Vec<(f64, f64)> {
    gauss_legendre_on(n, 0.0, 1.0)
        .into_iter()
        .map(|(x, w)| (cut * x * x * x, w * 3.0 * cut * x * x))
        .collect()
}

/// `sum_i w_i f(delta_i)` over the scheme's realizations.
pub fn disorder_expectation<F>(model: &DisorderModel, scheme: &AveragingScheme, f: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    Ok(realizations(model, scheme)?
        .iter()
        .map(|r| r.weight * f(r.delta))
        .sum())
}

/// Quenched average of the residual energy at a single ramp duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEstimate {
    pub mean: f64,
    /// Sample standard error for Monte Carlo; `|Q_n - Q_ceil(n/2)|` for
    /// quadrature; zero for an ordered model.
    pub stderr: f64,
    pub n_realizations: usize,
}

/// Disorder-averaged residual energies over a grid of ordered ramp durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub g_final: f64,
    pub omega_tau_grid: Vec<f64>,
    pub mean_er: Vec<f64>,
    pub stderr_er: Vec<f64>,
    pub n_realizations: usize,
    pub model: DisorderModel,
    pub scheme: AveragingScheme,
}

impl EnsembleResult {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.omega_tau_grid
            .iter()
            .copied()
            .zip(self.mean_er.iter().copied())
            .collect()
    }
}

pub fn ensemble_residual_energy(
    base: &QuenchSpec,
    model: &DisorderModel,
    scheme: &AveragingScheme,
    cfg: &IntegratorConfig,
) -> Result<EnsembleEstimate> {
    let grid = [base.omega_tau()];
    let sweep = ensemble_sweep(base.g_final(), &grid, model, scheme, cfg)?;
    Ok(EnsembleEstimate {
        mean: sweep.mean_er[0],
        stderr: sweep.stderr_er[0],
        n_realizations: sweep.n_realizations,
    })
}

/// Quenched averages at every `omega_tau` in `grid` (sorted ascending in the
/// result). All realizations of all grid points are evaluated as one
/// parallel batch.
pub fn ensemble_sweep(
    g_final: f64,
    grid: &[f64],
    model: &DisorderModel,
    scheme: &AveragingScheme,
    cfg: &IntegratorConfig,
) -> Result<EnsembleResult> {
    cfg.validate()?;
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let bases = grid
        .iter()
        .map(|&wt| QuenchSpec::new(g_final, wt))
        .collect::<Result<Vec<_>>>()?;

    let full = realizations(model, scheme)?;
    let refinement = match scheme {
        AveragingScheme::Quadrature { n_nodes } if !model.is_ordered() => {
            Some(quadrature_nodes(model, n_nodes.div_ceil(2))?)
        }
        _ => None,
    };

    let rule_sets: Vec<&[Realization]> = std::iter::once(full.as_slice())
        .chain(refinement.as_deref())
        .collect();

    // (grid index, rule index, node) flattened in a fixed order
    let jobs: Vec<(usize, usize, Realization)> = (0..bases.len())
        .flat_map(|gi| {
            rule_sets.iter().enumerate().flat_map(move |(ri, rule)| {
                rule.iter().map(move |r| (gi, ri, *r))
            })
        })
        .collect();

    let energies = jobs
        .par_iter()
        .map(|&(gi, _, r)| {
            let base = &bases[gi];
            let annotate = |e: Error| Error::Realization {
                delta: r.delta,
                omega_tau: base.omega_tau(),
                source: Box::new(e),
            };
            let spec = effective_quench(model, base, r.delta).map_err(annotate)?;
            quench_residual_energy(&spec, cfg).map_err(annotate)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut mean_er = Vec::with_capacity(bases.len());
    let mut stderr_er = Vec::with_capacity(bases.len());
    let per_point: usize = rule_sets.iter().map(|r| r.len()).sum();
    for gi in 0..bases.len() {
        let chunk = &energies[gi * per_point..(gi + 1) * per_point];
        let (main, rest) = chunk.split_at(full.len());
        let mean = weighted_mean(&full, main);
        let stderr = match (scheme, &refinement) {
            (_, _) if model.is_ordered() => 0.0,
            (AveragingScheme::Quadrature { .. }, Some(half)) => {
                (mean - weighted_mean(half, rest)).abs()
            }
            _ => weighted_standard_error(&full, main, mean),
        };
        mean_er.push(mean);
        stderr_er.push(stderr);
    }

    Ok(EnsembleResult {
        g_final,
        omega_tau_grid: grid,
        mean_er,
        stderr_er,
        n_realizations: full.len(),
        model: *model,
        scheme: *scheme,
    })
}

fn weighted_mean(rule: &[Realization], values: &[f64]) -> f64 {
    rule.iter().zip(values).map(|(r, e)| r.weight * e).sum()
}

fn weighted_standard_error(rule: &[Realization], values: &[f64], mean: f64) -> f64 {
    let n = rule.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let var: f64 = rule
        .iter()
        .zip(values)
        .map(|(r, e)| r.weight * (e - mean).powi(2))
        .sum::<f64>()
        * n
        / (n - 1.0);
    (var / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pdf_outside_support_is_zero() {
        assert_eq!(truncated_gaussian_pdf(0.31, 0.1).unwrap(), 0.0);
        assert_eq!(truncated_gaussian_pdf(-0.31, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn pdf_peak_value() {
        assert_abs_diff_eq!(truncated_gaussian_pdf(0.0, 0.1).unwrap(), 4.00022, epsilon = 1e-5);
    }

    #[test]
    fn pdf_rejects_nonpositive_sigma() {
        assert_eq!(
            truncated_gaussian_pdf(0.0, 0.0),
            Err(Error::InvalidDispersion(0.0))
        );
        assert!(truncated_gaussian_pdf(0.0, -1.0).is_err());
    }

    #[test]
    fn model_ranges() {
        assert!(DisorderModel::time(0.33).is_ok());
        assert!(DisorderModel::time(1.0 / 3.0).is_ok());
        assert!(DisorderModel::time(0.34).is_err());
        assert!(DisorderModel::param(0.1).is_ok());
        assert!(DisorderModel::param(0.2).is_err());
        assert!(DisorderModel::param(-0.01).is_err());
    }

    #[test]
    fn scheme_validation() {
        assert!(AveragingScheme::Quadrature { n_nodes: 2 }.validate().is_err());
        assert!(AveragingScheme::MonteCarlo { n_samples: 1, seed: 0 }.validate().is_err());
        assert!(AveragingScheme::Quadrature { n_nodes: 3 }.validate().is_ok());
        let m = DisorderModel::time(0.1).unwrap();
        assert!(matches!(
            realizations(&m, &AveragingScheme::Quadrature { n_nodes: 1 }),
            Err(Error::InvalidScheme(_))
        ));
    }

    #[test]
    fn effective_quench_time_channel() {
        let m = DisorderModel::time(0.1).unwrap();
        let base = QuenchSpec::new(1.0, 1e3).unwrap();
        let q = effective_quench(&m, &base, 0.2).unwrap();
        assert_abs_diff_eq!(q.omega_tau(), 1200.0, epsilon = 1e-9);
        assert_eq!(q.g_final(), 1.0);
        assert!(matches!(
            effective_quench(&m, &base, 0.31),
            Err(Error::OutOfSupport { .. })
        ));
    }

    #[test]
    fn effective_quench_param_channel() {
        let m = DisorderModel::param(0.1).unwrap();
        let base = QuenchSpec::new(1.0, 1e3).unwrap();
        assert_eq!(effective_quench(&m, &base, 0.0).unwrap().g_final(), 1.0);
        let q = effective_quench(&m, &base, -0.05).unwrap();
        assert_abs_diff_eq!(q.g_final(), 0.95, epsilon = 1e-15);
        assert_eq!(q.omega_tau(), 1e3);
        assert!(effective_quench(&m, &base, 1.0).is_err());
        assert!(effective_quench(&m, &base, -1.5).is_err());
    }

    #[test]
    fn averaged_end_point() {
        assert_eq!(averaged_g_final(0.0), 1.0);
        assert_abs_diff_eq!(averaged_g_final(0.1), 0.920212, epsilon = 5e-7);
        assert_abs_diff_eq!(averaged_g_final(0.01), 0.992021, epsilon = 5e-7);
    }

    #[test]
    fn quadrature_weights_normalized() {
        for model in [
            DisorderModel::time(0.01).unwrap(),
            DisorderModel::time(0.33).unwrap(),
            DisorderModel::param(1e-4).unwrap(),
            DisorderModel::param(0.1).unwrap(),
        ] {
            for n in [3, 17, 33] {
                let r = realizations(&model, &AveragingScheme::Quadrature { n_nodes: n }).unwrap();
                let s: f64 = r.iter().map(|r| r.weight).sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(r.iter().all(|r| r.weight > 0.0));
            }
        }
    }

    #[test]
    fn param_quadrature_reproduces_averaged_end_point() {
        let m = DisorderModel::param(0.1).unwrap();
        let s = AveragingScheme::Quadrature { n_nodes: 21 };
        let mean_gf = disorder_expectation(&m, &s, |d| 1.0 - d.abs()).unwrap();
        assert_abs_diff_eq!(mean_gf, 0.920212, epsilon = 1e-3);
    }

    #[test]
    fn ordered_model_has_a_single_realization() {
        let m = DisorderModel::param(0.0).unwrap();
        for s in [
            AveragingScheme::Quadrature { n_nodes: 33 },
            AveragingScheme::MonteCarlo { n_samples: 100, seed: 3 },
        ] {
            assert_eq!(
                realizations(&m, &s).unwrap(),
                vec![Realization { delta: 0.0, weight: 1.0 }]
            );
        }
    }

    #[test]
    fn monte_carlo_time_draws() {
        let m = DisorderModel::time(0.1).unwrap();
        let r = realizations(&m, &AveragingScheme::MonteCarlo { n_samples: 100_000, seed: 42 })
            .unwrap();
        assert_eq!(r.len(), 100_000);
        assert!(r.iter().all(|r| r.delta.abs() <= 0.3));
        let mean = r.iter().map(|r| r.delta).sum::<f64>() / r.len() as f64;
        assert!(mean.abs() <= 3e-3, "{mean}");
    }

    #[test]
    fn monte_carlo_param_draws_are_gaussian() {
        let m = DisorderModel::param(0.1).unwrap();
        let r = realizations(&m, &AveragingScheme::MonteCarlo { n_samples: 50_000, seed: 9 })
            .unwrap();
        let var = r.iter().map(|r| r.delta * r.delta).sum::<f64>() / r.len() as f64;
        assert!((var.sqrt() - 0.1).abs() < 2e-3, "{}", var.sqrt());
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let m = DisorderModel::time(0.2).unwrap();
        let a = realizations(&m, &AveragingScheme::MonteCarlo { n_samples: 50, seed: 1 }).unwrap();
        let b = realizations(&m, &AveragingScheme::MonteCarlo { n_samples: 50, seed: 1 }).unwrap();
        let c = realizations(&m, &AveragingScheme::MonteCarlo { n_samples: 50, seed: 2 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ordered_ensemble_equals_single_quench() {
        let cfg = IntegratorConfig::default();
        let base = QuenchSpec::new(1.0, 300.0).unwrap();
        let single = quench_residual_energy(&base, &cfg).unwrap();
        for model in [DisorderModel::time(0.0).unwrap(), DisorderModel::param(0.0).unwrap()] {
            for s in [
                AveragingScheme::Quadrature { n_nodes: 9 },
                AveragingScheme::MonteCarlo { n_samples: 10, seed: 0 },
            ] {
                let e = ensemble_residual_energy(&base, &model, &s, &cfg).unwrap();
                assert_eq!(e.mean, single);
                assert_eq!(e.stderr, 0.0);
            }
        }
    }

    #[test]
    fn sweep_sorts_grid_and_is_repeatable() {
        let cfg = IntegratorConfig::fixed(1e-2);
        let model = DisorderModel::time(0.1).unwrap();
        let scheme = AveragingScheme::Quadrature { n_nodes: 5 };
        let a = ensemble_sweep(1.0, &[40.0, 20.0, 30.0], &model, &scheme, &cfg).unwrap();
        assert_eq!(a.omega_tau_grid, vec![20.0, 30.0, 40.0]);
        assert!(a.mean_er.windows(2).all(|w| w[0] > w[1]));
        let b = ensemble_sweep(1.0, &[20.0, 30.0, 40.0], &model, &scheme, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn integration_failure_names_the_realization() {
        let cfg = IntegratorConfig::fixed(0.5);
        let model = DisorderModel::time(0.1).unwrap();
        let base = QuenchSpec::new(1.0, 200.0).unwrap();
        let err = ensemble_residual_energy(&base, &model, &AveragingScheme::Quadrature { n_nodes: 3 }, &cfg)
            .unwrap_err();
        assert!(matches!(err, Error::Realization { .. }), "{err}");
    }
}
