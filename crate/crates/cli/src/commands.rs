use serde_json::{json, Value};
use yule_core::density::{fit_density, MAX_DEGREE};
use yule_core::mgf::{ProcessKind, ProcessSpec};
use yule_core::moments::{self, QuadratureConfig};
use yule_core::montecarlo::{self, CltConfig, SimConfig};
use yule_core::riccati::{self, IntegrationOptions};

use crate::args::{check_orders, CltArgs, Command, DensityArgs, MomentsArgs, SimulateArgs, VerifyArgs};
use crate::error::CliError;
use crate::render::{csv_err, csv_value};

/// Verification thresholds on `max |φ_closed − φ_riccati|`.
pub const VERIFY_TOL: f64 = 1e-6;
pub const VERIFY_TOL_BRIDGE: f64 = 1e-5;

/// Output of one command in both renderings.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub csv: String,
    pub json: Value,
    /// Extra files written next to `--out` in CSV mode, as `(suffix, contents)`.
    pub sidecars: Vec<(String, String)>,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub routes: Vec<&'static str>,
    /// Set when the command ran but its check failed.
    pub failure: Option<String>,
}

impl Report {
    fn new(command: &'static str, parameters: Value) -> Self {
        Report {
            command,
            csv: String::new(),
            json: Value::Null,
            sidecars: Vec::new(),
            parameters,
            seed: None,
            routes: Vec::new(),
            failure: None,
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Moments(a) => cmd_moments(a),
        Command::Density(a) => cmd_density(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Clt(a) => cmd_clt(a),
        Command::Rerun { .. } => Err(CliError::Usage("rerun is handled before dispatch".into())),
    }
}

fn params<T: serde::Serialize>(a: &T) -> Value {
    serde_json::to_value(a).unwrap_or(Value::Null)
}

pub fn process_json(spec: &ProcessSpec) -> Value {
    let (family, r, c) = match spec.kind() {
        ProcessKind::Bm => ("bm", None, None),
        ProcessKind::Ou { r } => ("ou", Some(r), None),
        ProcessKind::Bb => ("bb", None, None),
        ProcessKind::CorrelatedBm { c } => ("cbm", None, Some(c)),
    };
    json!({ "family": family, "r": r, "c": c, "horizon": spec.horizon() })
}

fn quadrature(tol: f64, scheme: moments::Scheme, max_level: usize) -> Result<QuadratureConfig, CliError> {
    let cfg = QuadratureConfig {
        abs_tol: tol,
        scheme,
        max_level,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_moments(a: &MomentsArgs) -> Result<Report, CliError> {
    let spec = a.process.spec()?;
    let orders = a.orders.clone().unwrap_or_else(|| {
        if spec.is_symmetric() {
            vec![2, 4, 6, 8]
        } else {
            vec![1, 2]
        }
    });
    check_orders(&orders)?;
    let cfg = quadrature(a.tol, a.scheme.into(), a.max_level)?;
    let results = orders
        .iter()
        .map(|&k| moments::moment(&spec, k, &cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rep = Report::new("moments", params(a));
    rep.routes = vec!["jet_quadrature"];
    rep.csv = String::from("k,value,err_estimate,route\n");
    for m in &results {
        rep.csv
            .push_str(&format!("{},{},{},jet_quadrature\n", m.k, csv_value(m.value), csv_err(m.err_estimate)));
    }
    rep.json = json!({
        "command": "moments",
        "process": process_json(&spec),
        "tol": a.tol,
        "results": results,
    });
    Ok(rep)
}

pub fn cmd_density(a: &DensityArgs) -> Result<Report, CliError> {
    let spec = a.process.spec()?;
    if a.order > MAX_DEGREE {
        return Err(CliError::Usage(format!("--order must be at most {MAX_DEGREE}")));
    }
    if spec.is_symmetric() && a.order % 2 == 1 {
        return Err(CliError::Usage(format!(
            "--order must be even for the symmetric family {} (got {})",
            spec.label(),
            a.order
        )));
    }
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let cfg = quadrature(a.tol, moments::Scheme::GaussLegendrePanels, QuadratureConfig::default().max_level)?;
    let mut mom = vec![1.0];
    for k in 1..=a.order {
        mom.push(moments::moment(&spec, k, &cfg)?.value);
    }
    let poly = fit_density(&mom).map_err(|e| CliError::Numerical(e.to_string()))?;
    let (min_x, min_pdf) = poly.min_on_grid(a.points);

    let mut rep = Report::new("density", params(a));
    rep.routes = vec!["jet_quadrature"];
    rep.csv = poly.to_csv(a.points);
    let coeffs = json!({
        "process": process_json(&spec),
        "order": a.order,
        "coefficients": poly.coeffs,
    });
    rep.sidecars.push(("coeffs.json".into(), crate::render::json_string(&coeffs)));
    let curve: Vec<Value> = poly.table(a.points).into_iter().map(|(x, y)| json!({ "x": x, "pdf": y })).collect();
    rep.json = json!({
        "command": "density",
        "process": process_json(&spec),
        "order": a.order,
        "moments": mom,
        "coefficients": poly.coeffs,
        "min_on_grid": { "x": min_x, "pdf": min_pdf },
        "curve": curve,
    });
    Ok(rep)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Report, CliError> {
    let spec = a.process.spec()?;
    check_orders(&a.orders)?;
    let cfg = SimConfig {
        n_paths: a.paths,
        n_steps: a.steps.unwrap_or_else(|| montecarlo::default_steps(spec.horizon())),
        seed: a.seed,
        spec,
    };
    let res = montecarlo::estimate_moments(&cfg, &a.orders)?;
    if res.rejected > 0 {
        eprintln!("rejected {} degenerate paths", res.rejected);
    }

    let mut rep = Report::new("simulate", params(a));
    rep.seed = Some(a.seed);
    rep.routes = vec!["monte_carlo"];
    rep.csv = String::from("k,estimate,std_error\n");
    for e in &res.estimates {
        rep.csv.push_str(&format!("{},{},{}\n", e.k, csv_value(e.estimate), csv_err(e.std_error)));
    }
    rep.json = json!({
        "command": "simulate",
        "process": process_json(&spec),
        "paths": cfg.n_paths,
        "steps": cfg.n_steps,
        "seed": cfg.seed,
        "accepted": res.accepted,
        "rejected": res.rejected,
        "results": res.estimates,
    });
    Ok(rep)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Report, CliError> {
    let spec = a.process.spec()?;
    if a.steps < 1 || !(a.cutoff > 0.0 && a.cutoff < 1.0) {
        return Err(CliError::Usage("--steps must be positive and --cutoff in (0, 1)".into()));
    }
    let opts = IntegrationOptions {
        steps: a.steps,
        cutoff: a.cutoff,
    };
    let grid = riccati::verify_grid();
    let v = riccati::verify_closed_form(&spec, &grid, &opts).map_err(|e| CliError::Numerical(e.to_string()))?;
    let threshold = if spec.kind() == ProcessKind::Bb {
        VERIFY_TOL_BRIDGE
    } else {
        VERIFY_TOL
    };
    let passed = v.max_dev < threshold;
    let w = &v.worst;

    let mut rep = Report::new("verify", params(a));
    rep.routes = vec!["closed_form", "riccati_oracle"];
    rep.csv = format!(
        "process,points,max_dev,threshold,worst_s11,worst_s12,worst_s22,passed\n{},{},{},{},{},{},{},{}\n",
        spec.label().replace(',', ";"),
        v.points,
        csv_err(v.max_dev),
        csv_err(threshold),
        csv_value(w.s11),
        csv_value(w.s12),
        csv_value(w.s22),
        passed
    );
    rep.json = json!({
        "command": "verify",
        "process": process_json(&spec),
        "points": v.points,
        "max_dev": v.max_dev,
        "max_residual": v.max_residual,
        "threshold": threshold,
        "worst": { "s11": w.s11, "s12": w.s12, "s22": w.s22 },
        "passed": passed,
    });
    if !passed {
        rep.failure = Some(format!(
            "max deviation {:e} ≥ {threshold:e} at (s11, s12, s22) = ({}, {}, {})",
            v.max_dev, w.s11, w.s12, w.s22
        ));
    }
    Ok(rep)
}

pub fn cmd_clt(a: &CltArgs) -> Result<Report, CliError> {
    if !(a.r.is_finite() && a.r > 0.0) {
        return Err(CliError::Usage(format!("--r must be positive (got {})", a.r)));
    }
    if a.horizons.is_empty() || a.horizons.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(CliError::Usage("--T must list positive horizons".into()));
    }
    let cfg = CltConfig {
        n_paths: a.paths,
        seed: a.seed,
        steps_per_unit: a.steps,
    };
    let rows = montecarlo::clt_experiment(a.r, &a.horizons, &cfg)?;

    let mut rep = Report::new("clt", params(a));
    rep.seed = Some(a.seed);
    rep.routes = vec!["monte_carlo"];
    rep.csv = String::from(
        "T,var_scaled_rho,var_scaled_rho_se,var_scaled_cross,var_scaled_cross_se,\
mean_y11_over_t,mean_y11_over_t_se,mean_rho,mean_rho_se,ks_half_rate,ks_rate\n",
    );
    for row in &rows {
        rep.csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.horizon,
            csv_value(row.var_scaled_rho),
            csv_err(row.var_scaled_rho_se),
            csv_value(row.var_scaled_cross),
            csv_err(row.var_scaled_cross_se),
            csv_value(row.mean_y11_over_t),
            csv_err(row.mean_y11_over_t_se),
            csv_value(row.mean_rho),
            csv_err(row.mean_rho_se),
            csv_value(row.ks_half_rate),
            csv_value(row.ks_rate),
        ));
    }
    rep.json = json!({
        "command": "clt",
        "r": a.r,
        "paths": a.paths,
        "steps_per_unit": a.steps,
        "seed": a.seed,
        "reference": {
            "variance_half_rate": 0.5 / a.r,
            "variance_rate": 1.0 / a.r,
            "mean_y11_over_t": 0.5 / a.r,
        },
        "rows": rows,
    });
    Ok(rep)
}
