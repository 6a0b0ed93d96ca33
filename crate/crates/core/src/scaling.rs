//! Power-law exponents of residual energy against ramp duration, and the
//! three exponent tables (time disorder, parameter disorder, averaged ramp).

use serde::{Deserialize, Serialize};

use crate::disorder::{
    averaged_g_final, ensemble_residual_energy, ensemble_sweep, AveragingScheme, DisorderChannel,
    DisorderModel, EnsembleResult,
};
use crate::dynamics::{quench_residual_energy, IntegratorConfig, QuenchSpec};
use crate::error::{Error, Result};

const WINDOW_SLACK: f64 = 1e-9;

/// Least-squares line through `(ln w tau, ln E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Slope, the exponent in `E ~ tau^nu`.
    pub nu: f64,
    /// Natural-log intercept, `E ~ exp(log_intercept) (w tau)^nu`.
    pub log_intercept: f64,
    pub stderr_nu: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub n_points: usize,
}

fn in_window(x: f64, window: (f64, f64)) -> bool {
    x >= window.0 * (1.0 - WINDOW_SLACK) && x <= window.1 * (1.0 + WINDOW_SLACK)
}

/// Ordinary least squares on the log-log points inside `window` (inclusive).
pub fn fit_power_law(points: &[(f64, f64)], window: (f64, f64)) -> Result<ScalingFit> {
    let selected: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, _)| in_window(x, window))
        .collect();
    if selected.len() < 3 {
        return Err(Error::InsufficientData(selected.len()));
    }
    for &(x, y) in &selected {
        if !(y > 0.0) {
            return Err(Error::NonPositiveEnergy {
                omega_tau: x,
                energy: y,
            });
        }
        if !(x > 0.0) {
            return Err(Error::Domain(format!("omega_tau must be positive, got {x}")));
        }
    }

    let n = selected.len() as f64;
    let xs: Vec<f64> = selected.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = selected.iter().map(|p| p.1.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }

    let nu = sxy / sxx;
    let log_intercept = mean_y - nu * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - log_intercept - nu * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let stderr_nu = (ss_res / (n - 2.0) / sxx).sqrt();

    Ok(ScalingFit {
        nu,
        log_intercept,
        stderr_nu,
        window,
        r_squared,
        n_points: selected.len(),
    })
}

/// Log-spaced grid from `min` to `max` inclusive with `points_per_decade`
/// intervals per factor of ten (rounded to a whole number of intervals).
pub fn log_grid(min: f64, max: f64, points_per_decade: usize) -> Vec<f64> {
    assert!(min > 0.0 && max > min && points_per_decade > 0);
    let (lo, hi) = (min.log10(), max.log10());
    let intervals = ((hi - lo) * points_per_decade as f64).round().max(1.0) as usize;
    let step = (hi - lo) / intervals as f64;
    (0..=intervals)
        .map(|k| match k {
            0 => min,
            k if k == intervals => max,
            k => 10f64.powf(lo + k as f64 * step),
        })
        .collect()
}

fn merged_grid(windows: &[(f64, f64)], points_per_decade: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = windows
        .iter()
        .flat_map(|&(a, b)| log_grid(a, b, points_per_decade))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum TableId {
    /// Time disorder on a ramp ending at the critical point.
    TimeDisorder = 1,
    /// Parameter disorder in the ramp end point, two windows.
    ParamDisorder = 2,
    /// Parameter disorder against the ramp to the averaged end point.
    AveragedQuench = 3,
}

impl TryFrom<u8> for TableId {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(TableId::TimeDisorder),
            2 => Ok(TableId::ParamDisorder),
            3 => Ok(TableId::AveragedQuench),
            other => Err(format!("table id must be 1, 2 or 3, got {other}")),
        }
    }
}

impl From<TableId> for u8 {
    fn from(id: TableId) -> u8 {
        id as u8
    }
}

impl TableId {
    pub fn channel(&self) -> DisorderChannel {
        match self {
            TableId::TimeDisorder => DisorderChannel::Time,
            TableId::ParamDisorder | TableId::AveragedQuench => DisorderChannel::Param,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub table_id: TableId,
    pub sigma_list: Vec<f64>,
    pub windows: Vec<(f64, f64)>,
    pub points_per_decade: usize,
    pub scheme: AveragingScheme,
    pub cfg: IntegratorConfig,
}

pub const DEFAULT_POINTS_PER_DECADE: usize = 8;
/// Window of the averaged-ramp exponent.
pub const AVERAGED_QUENCH_WINDOW: (f64, f64) = (1e3, 1e4);

impl TableSpec {
    /// The dispersions and windows of the standard tables, with default
    /// quadrature and integrator settings.
    pub fn standard(table_id: TableId) -> Self {
        let (sigma_list, windows) = match table_id {
            TableId::TimeDisorder => (vec![0.01, 0.1, 0.2, 0.3, 0.33], vec![(1e3, 1e4)]),
            TableId::ParamDisorder => (
                vec![0.0, 1e-4, 1e-3, 1e-2, 0.1],
                vec![(1e3, 1e4), (1e4, 1e5)],
            ),
            TableId::AveragedQuench => {
                (vec![0.0, 1e-4, 1e-3, 1e-2, 0.1], vec![AVERAGED_QUENCH_WINDOW])
            }
        };
        Self {
            table_id,
            sigma_list,
            windows,
            points_per_decade: DEFAULT_POINTS_PER_DECADE,
            scheme: AveragingScheme::default(),
            cfg: IntegratorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_decade < 4 {
            return Err(Error::InvalidSpec(format!(
                "points_per_decade must be at least 4, got {}",
                self.points_per_decade
            )));
        }
        if self.windows.is_empty() || self.sigma_list.is_empty() {
            return Err(Error::InvalidSpec("table needs at least one window and one sigma".into()));
        }
        for &(a, b) in &self.windows {
            if !(a < b && a >= 1e2 * (1.0 - WINDOW_SLACK) && b <= 1e5 * (1.0 + WINDOW_SLACK)) {
                return Err(Error::InvalidSpec(format!(
                    "window [{a}, {b}] must be increasing and inside [1e2, 1e5]"
                )));
            }
        }
        for &s in &self.sigma_list {
            DisorderModel::new(self.table_id.channel(), s)?;
        }
        self.scheme.validate()?;
        self.cfg.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub sigma: f64,
    pub window: (f64, f64),
    pub fit: ScalingFit,
    /// Exponent of the single ramp to the averaged end point (table 3 only).
    pub averaged_fit: Option<ScalingFit>,
}

impl TableRow {
    pub fn nu(&self) -> f64 {
        self.fit.nu
    }

    pub fn nu_prime(&self) -> Option<f64> {
        self.averaged_fit.map(|f| f.nu)
    }
}

/// Residual energies of the ordered ramp to `averaged_g_final(sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedQuenchCurve {
    pub sigma: f64,
    pub g_final: f64,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub spec: TableSpec,
    pub rows: Vec<TableRow>,
    /// One ensemble per sigma, on the union grid of all windows.
    pub ensembles: Vec<EnsembleResult>,
    pub averaged: Vec<AveragedQuenchCurve>,
}

/// Recompute an exponent table. Every sigma is swept once on the union of
/// the windows' grids, then fitted per window.
pub fn reproduce_table(spec: &TableSpec) -> Result<TableReport> {
    spec.validate()?;
    let grid = merged_grid(&spec.windows, spec.points_per_decade);
    let channel = spec.table_id.channel();

    let mut rows = Vec::new();
    let mut ensembles = Vec::new();
    let mut averaged = Vec::new();

    for &sigma in &spec.sigma_list {
        let model = DisorderModel::new(channel, sigma)?;
        let ensemble = ensemble_sweep(1.0, &grid, &model, &spec.scheme, &spec.cfg)?;
        let points = ensemble.points();

        let curve = if spec.table_id == TableId::AveragedQuench {
            let g = averaged_g_final(sigma);
            let avg_grid = log_grid(
                AVERAGED_QUENCH_WINDOW.0,
                AVERAGED_QUENCH_WINDOW.1,
                spec.points_per_decade,
            );
            let pts = ordered_curve(g, &avg_grid, &spec.cfg)?;
            Some(AveragedQuenchCurve {
                sigma,
                g_final: g,
                points: pts,
            })
        } else {
            None
        };

        for &window in &spec.windows {
            let fit = fit_power_law(&points, window)?;
            let averaged_fit = match &curve {
                Some(c) => Some(fit_power_law(&c.points, AVERAGED_QUENCH_WINDOW)?),
                None => None,
            };
            rows.push(TableRow {
                sigma,
                window,
                fit,
                averaged_fit,
            });
        }
        ensembles.push(ensemble);
        averaged.extend(curve);
    }

    Ok(TableReport {
        spec: spec.clone(),
        rows,
        ensembles,
        averaged,
    })
}

/// `(w tau, E_r)` for the ordered ramp to `g_final` at each grid point.
pub fn ordered_curve(g_final: f64, grid: &[f64], cfg: &IntegratorConfig) -> Result<Vec<(f64, f64)>> {
    use rayon::prelude::*;
    grid.par_iter()
        .map(|&wt| {
            let e = quench_residual_energy(&QuenchSpec::new(g_final, wt)?, cfg)?;
            Ok((wt, e))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStep {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub delta_vs_prev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub steps: Vec<ConvergenceStep>,
    /// False when the last refinement moved the mean by more than 1%.
    pub converged: bool,
}

/// Relative change of the last refinement above which the average is
/// flagged as unconverged.
pub const CONVERGENCE_THRESHOLD: f64 = 0.01;

/// Re-run the quenched average with each realization count in `counts`
/// (ascending) and report how far the mean moves between refinements.
/// `scheme` selects the averaging mode; its own count is ignored.
pub fn convergence_report(
    base: &QuenchSpec,
    model: &DisorderModel,
    scheme: &AveragingScheme,
    counts: &[usize],
    cfg: &IntegratorConfig,
) -> Result<ConvergenceReport> {
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidScheme("realization counts must be ascending".into()));
    }
    let mut steps: Vec<ConvergenceStep> = Vec::with_capacity(counts.len());
    for &n in counts {
        let est = ensemble_residual_energy(base, model, &scheme.with_count(n), cfg)?;
        let delta_vs_prev = steps.last().map(|p| (est.mean - p.mean).abs());
        steps.push(ConvergenceStep {
            n,
            mean: est.mean,
            stderr: est.stderr,
            delta_vs_prev,
        });
    }
    let converged = match steps.last() {
        Some(ConvergenceStep {
            mean,
            delta_vs_prev: Some(d),
            ..
        }) => *d <= CONVERGENCE_THRESHOLD * mean.abs(),
        _ => true,
    };
    Ok(ConvergenceReport { steps, converged })
}
