//! Subcommand bodies. Each returns an [`Output`] and never touches the
//! filesystem itself, except `fit`, which reads its input CSV.

use std::fmt::Write as _;

use rabi_quench::analytics::{
    apt_residual_energy, freezeout_g, freezeout_g_series, kzm_averaged_prediction,
    kzm_residual_energy,
};
use rabi_quench::disorder::ensemble_sweep;
use rabi_quench::dynamics::{integrate_quench_report, residual_energy, PhysicalParams};
use rabi_quench::scaling::{fit_power_law, reproduce_table, TableId, TableReport};
use rabi_quench::EnsembleResult;

use crate::cache::Output;
use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Below this `w tau` the slow-ramp closed forms are unreliable.
pub const PREDICT_MIN_OMEGA_TAU: f64 = 1e2;

pub(crate) fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn simulate(config: &ExperimentConfig) -> Result<Output, CliError> {
    let spec = config.quench()?;
    let cfg = config.integrator()?;
    let report = integrate_quench_report(&spec, &cfg)?;
    let s = report.state;
    let e = residual_energy(&s, spec.g_final(), &PhysicalParams::default())?;
    let csv = csv_text(
        &[
            "g_final", "omega_tau", "u_re", "u_im", "v_re", "v_im", "E_r", "max_drift", "steps",
        ],
        [vec![
            spec.g_final().to_string(),
            spec.omega_tau().to_string(),
            sci(s.u.re),
            sci(s.u.im),
            sci(s.v.re),
            sci(s.v.im),
            sci(e),
            sci(report.max_drift),
            report.steps.to_string(),
        ]],
    )?;
    let stdout = format!(
        "g_final = {}, omega_tau = {}\nu = {} {:+}i\nv = {} {:+}i\nE_r = {} hbar*omega\nmax drift = {:e} over {} steps\n",
        spec.g_final(),
        spec.omega_tau(),
        sci(s.u.re),
        s.u.im,
        sci(s.v.re),
        s.v.im,
        sci(e),
        report.max_drift,
        report.steps
    );
    Ok(Output {
        files: vec![("simulate.csv".into(), csv)],
        stdout,
    })
}

fn ensemble_csv(result: &EnsembleResult) -> Result<String, CliError> {
    let rows = (0..result.omega_tau_grid.len()).map(|i| {
        vec![
            result.omega_tau_grid[i].to_string(),
            sci(result.mean_er[i]),
            sci(result.stderr_er[i]),
            result.n_realizations.to_string(),
        ]
    });
    csv_text(&["omega_tau", "mean_Er", "stderr_Er", "n_realizations"], rows)
}

pub fn ensemble(config: &ExperimentConfig) -> Result<Output, CliError> {
    let model = config.model()?;
    let scheme = config.scheme()?;
    let cfg = config.integrator()?;
    let grid = config.grid()?;
    rabi_quench::QuenchSpec::new(config.g_final, config.grid_min)?;
    let result = ensemble_sweep(config.g_final, &grid, &model, &scheme, &cfg)?;
    let csv = ensemble_csv(&result)?;
    let stdout = format!(
        "{} grid points, {} realizations each, sigma = {}\n",
        grid.len(),
        result.n_realizations,
        config.sigma
    );
    Ok(Output {
        files: vec![("ensemble.csv".into(), csv)],
        stdout,
    })
}

/// Read `(omega_tau, energy)` pairs. Columns named `omega_tau` and `mean_Er`
/// (or `E_r`) are used when present, else the first two columns.
pub fn read_points(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let find = |names: &[&str]| headers.iter().position(|h| names.contains(&h.trim()));
    let xi = find(&["omega_tau"]).unwrap_or(0);
    let yi = find(&["mean_Er", "E_r"]).unwrap_or(1);
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64, CliError> {
            let field = rec.get(i).unwrap_or("").trim();
            field.parse().map_err(|_| {
                CliError::Config(format!("row {}: cannot parse {field:?} as a number", line + 2))
            })
        };
        out.push((parse(xi)?, parse(yi)?));
    }
    Ok(out)
}

pub fn fit(config: &ExperimentConfig) -> Result<Output, CliError> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("fit needs `input` (path to a CSV)".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let points = read_points(&text)?;
    let window = config.fit_window();
    let f = fit_power_law(&points, window)?;
    let csv = csv_text(
        &["nu", "log_intercept", "stderr_nu", "window_min", "window_max", "r_squared", "n_points"],
        [vec![
            sci(f.nu),
            sci(f.log_intercept),
            sci(f.stderr_nu),
            window.0.to_string(),
            window.1.to_string(),
            sci(f.r_squared),
            f.n_points.to_string(),
        ]],
    )?;
    let stdout = format!(
        "nu = {:.4} +- {:.4} over [{}, {}], {} points, r^2 = {:.6}\n",
        f.nu, f.stderr_nu, window.0, window.1, f.n_points, f.r_squared
    );
    Ok(Output {
        files: vec![("fit.csv".into(), csv)],
        stdout,
    })
}

pub fn predict(config: &ExperimentConfig) -> Result<(Output, Vec<String>), CliError> {
    let grid = config.grid()?;
    let mut warnings = Vec::new();
    if config.grid_min < PREDICT_MIN_OMEGA_TAU {
        warnings.push(format!(
            "warning: omega_tau below {PREDICT_MIN_OMEGA_TAU} is outside the slow-ramp regime; predictions are indicative only"
        ));
    }
    let g = config.g_final;
    if !(0.0..=1.0).contains(&g) {
        return Err(CliError::Config(format!("g_final must lie in [0, 1], got {g}")));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &wt in &grid {
        let apt = if g < 1.0 {
            sci(apt_residual_energy(g, wt)?)
        } else {
            String::new()
        };
        let freeze = freezeout_g(wt)?;
        rows.push(vec![
            wt.to_string(),
            apt,
            sci(kzm_residual_energy(wt, 0.0)?),
            sci(kzm_averaged_prediction(wt, config.sigma)),
            sci(freeze.g_hat),
            sci(freezeout_g_series(wt)),
        ]);
    }
    let csv = csv_text(
        &["omega_tau", "apt_Er", "kzm_Er", "kzm_avg_Er", "g_hat", "g_hat_series"],
        rows,
    )?;
    let mut stdout = String::new();
    for &wt in &[grid[0], *grid.last().unwrap()] {
        let _ = writeln!(
            stdout,
            "omega_tau = {wt}: kzm average {} hbar*omega",
            sci(kzm_averaged_prediction(wt, config.sigma))
        );
    }
    Ok((
        Output {
            files: vec![("predict.csv".into(), csv)],
            stdout,
        },
        warnings,
    ))
}

fn table_title(id: TableId) -> &'static str {
    match id {
        TableId::TimeDisorder => "exponent nu of the averaged residual energy, ramp-duration disorder",
        TableId::ParamDisorder => "exponent nu of the averaged residual energy, end-point disorder",
        TableId::AveragedQuench => "disordered exponent nu vs exponent nu' of the ramp to the averaged end point",
    }
}

fn fmt_window(w: (f64, f64)) -> String {
    format!("[{:e}, {:e}]", w.0, w.1)
}

/// Fixed-width layout: one row per sigma, one column per window, plus nu'
/// for the averaged-ramp table.
pub fn table_text(id: TableId, report: &TableReport) -> String {
    let windows = &report.spec.windows;
    let mut out = String::new();
    let _ = writeln!(out, "Table {}: {}", u8::from(id), table_title(id));
    let _ = writeln!(out);
    let mut header = format!("{:>10}", "sigma");
    for w in windows {
        let _ = write!(header, "  {:>22}", format!("nu {}", fmt_window(*w)));
    }
    if id == TableId::AveragedQuench {
        let _ = write!(header, "  {:>22}", "nu' [1e3, 1e4]");
    }
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{}", "-".repeat(header.len()));
    for &sigma in &report.spec.sigma_list {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.sigma == sigma).collect();
        let mut line = format!("{:>10}", format!("{sigma}"));
        for w in windows {
            match rows.iter().find(|r| r.window == *w) {
                Some(r) => {
                    let _ = write!(line, "  {:>22}", format!("{:.3} +- {:.3}", r.nu(), r.fit.stderr_nu));
                }
                None => {
                    let _ = write!(line, "  {:>22}", "-");
                }
            }
        }
        if let Some(np) = rows.first().and_then(|r| r.nu_prime()) {
            let _ = write!(line, "  {:>22}", format!("{np:.3}"));
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

pub fn table(config: &ExperimentConfig, id: TableId) -> Result<Output, CliError> {
    let spec = config.table(id)?;
    let report = reproduce_table(&spec)?;
    let n = u8::from(id);

    let rows = report.rows.iter().map(|r| {
        vec![
            r.sigma.to_string(),
            r.window.0.to_string(),
            r.window.1.to_string(),
            sci(r.fit.nu),
            sci(r.fit.stderr_nu),
            sci(r.fit.r_squared),
            r.fit.n_points.to_string(),
            r.nu_prime().map(sci).unwrap_or_default(),
        ]
    });
    let summary = csv_text(
        &["sigma", "window_min", "window_max", "nu", "stderr_nu", "r_squared", "n_points", "nu_prime"],
        rows,
    )?;

    let data_rows = report.ensembles.iter().flat_map(|e| {
        (0..e.omega_tau_grid.len()).map(move |i| {
            vec![
                e.model.sigma().to_string(),
                e.omega_tau_grid[i].to_string(),
                sci(e.mean_er[i]),
                sci(e.stderr_er[i]),
                e.n_realizations.to_string(),
            ]
        })
    });
    let data = csv_text(
        &["sigma", "omega_tau", "mean_Er", "stderr_Er", "n_realizations"],
        data_rows,
    )?;

    let text = table_text(id, &report);
    let mut files = vec![
        (format!("table{n}.csv"), summary),
        (format!("table{n}_data.csv"), data),
    ];
    if !report.averaged.is_empty() {
        let rows = report.averaged.iter().flat_map(|c| {
            c.points
                .iter()
                .map(move |&(wt, e)| vec![c.sigma.to_string(), sci(c.g_final), wt.to_string(), sci(e)])
        });
        files.push((
            format!("table{n}_averaged.csv"),
            csv_text(&["sigma", "g_final", "omega_tau", "E_r"], rows)?,
        ));
    }
    files.push((format!("table{n}.txt"), text.clone()));
    Ok(Output { files, stdout: text })
}
