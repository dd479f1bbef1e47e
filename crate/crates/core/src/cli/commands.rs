use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Model, RunConfig, DEFAULT_BUDGET};
use super::output::{csv_estimates, csv_values, real, to_document};
use super::{CliError, Format, Overrides};
use crate::analysis::analyze;
use crate::calibrate::{calibrate, Method};
use crate::model::ModelParams;
use crate::red::{cl_moments, RedAnalysis, RedModel, DEFAULT_KMAX};
use crate::sim::{simulate_red, simulate_renovation, SimConfig, SimEstimate, SimReport};

/// Longest run length compared against simulation.
pub const COMPARE_KMAX: usize = 10;

pub enum Rendered {
    Json(Value),
    Csv(String),
}

fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| real(*x)).collect())
}

pub fn analyze_cmd(config: &RunConfig, format: Format, ov: &Overrides) -> Result<Rendered, CliError> {
    match config.model()? {
        Model::Renovation(section) => {
            let params = section.params()?;
            let a = analyze(&params)?;
            Ok(match format {
                Format::Csv => Rendered::Csv(csv_values(0, &a.profile.pn)),
                Format::Json => Rendered::Json(json!({
                    "model": "renovation",
                    "params": to_document(&params),
                    "pn": reals(&a.profile.pn),
                    "embedded_pn": reals(&a.chain.pplus),
                    "mean_cycle_time": real(a.profile.fstar),
                    "moments": reals(&a.moments(4)),
                    "loss": {
                        "pi": real(a.loss.pi),
                        "blocked": real(a.loss.blocked),
                        "renovated": real(a.loss.renovated),
                    },
                    "boundary_densities": reals(&a.profile.p0),
                })),
            })
        }
        Model::Red(model) => {
            let kmax = ov.kmax.unwrap_or(DEFAULT_KMAX);
            let a = RedAnalysis::new(&model, kmax.max(1))?;
            let moment = |m| cl_moments(&a.cl, m).map(real).unwrap_or(Value::Null);
            Ok(match format {
                Format::Csv => Rendered::Csv(csv_values(0, &a.pn)),
                Format::Json => Rendered::Json(json!({
                    "model": "red",
                    "params": to_document(&a.model),
                    "pn": reals(&a.pn),
                    "mean_queue": real(a.mean_queue()),
                    "loss_prob": real(a.loss()),
                    "cl": {
                        "pmf": reals(&a.cl.pmf),
                        "delta": real(a.cl.delta),
                        "tail_deficit": real(a.cl.tail_deficit),
                        "mean": moment(1),
                        "second_moment": moment(2),
                    },
                })),
            })
        }
    }
}

pub fn simulate_cmd(config: &RunConfig, format: Format, ov: &Overrides) -> Result<Rendered, CliError> {
    let sim = config.simulation(ov.seed, ov.kmax)?;
    let report = match config.model()? {
        Model::Renovation(section) => simulate_renovation(&section.params()?, &sim)?,
        Model::Red(model) => simulate_red(&model, &sim)?,
    };
    Ok(match format {
        Format::Csv => Rendered::Csv(csv_estimates(0, &report.occupancy)),
        Format::Json => Rendered::Json(json!({
            "model": model_name(config),
            "simulation": to_document(&sim),
            "report": to_document(&report),
        })),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Contained,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub metric: String,
    pub analytic: f64,
    pub simulated: f64,
    pub half_width_99: f64,
    pub verdict: Verdict,
}

impl Comparison {
    fn new(analytic: f64, estimate: &SimEstimate) -> Self {
        Comparison {
            metric: estimate.metric.clone(),
            analytic,
            simulated: estimate.mean,
            half_width_99: estimate.half_width_99,
            verdict: if estimate.contains(analytic) {
                Verdict::Contained
            } else {
                Verdict::Outside
            },
        }
    }
}

fn occupancy_rows(pn: &[f64], report: &SimReport) -> Vec<Comparison> {
    pn.iter()
        .zip(&report.occupancy)
        .map(|(p, e)| Comparison::new(*p, e))
        .collect()
}

/// Analytic values of `analytic` against a simulation of `simulated`. The
/// two coincide outside of test harnesses.
pub fn compare_renovation(
    analytic: &ModelParams,
    simulated: &ModelParams,
    sim: &SimConfig,
) -> Result<Vec<Comparison>, CliError> {
    let a = analyze(analytic)?;
    let report = simulate_renovation(simulated, sim)?;
    let mut rows = vec![
        Comparison::new(a.loss.pi, &report.loss_prob),
        Comparison::new(a.loss.blocked, &report.blocked_prob),
        Comparison::new(a.loss.renovated, &report.renovated_prob),
        Comparison::new(a.mean_queue(), &report.mean_queue),
    ];
    rows.extend(occupancy_rows(&a.profile.pn, &report));
    Ok(rows)
}

pub fn compare_red(model: &RedModel, sim: &SimConfig) -> Result<Vec<Comparison>, CliError> {
    let kmax = sim.kmax.min(COMPARE_KMAX);
    let a = RedAnalysis::new(model, DEFAULT_KMAX)?;
    let report = simulate_red(model, sim)?;
    let mut rows = vec![
        Comparison::new(a.loss(), &report.loss_prob),
        Comparison::new(a.mean_queue(), &report.mean_queue),
    ];
    rows.extend(occupancy_rows(&a.pn, &report));
    rows.extend(
        a.cl.pmf[..kmax]
            .iter()
            .zip(&report.cl_histogram)
            .map(|(p, e)| Comparison::new(*p, e)),
    );
    Ok(rows)
}

pub fn all_contained(rows: &[Comparison]) -> bool {
    rows.iter().all(|r| r.verdict == Verdict::Contained)
}

pub fn compare_document(model: &str, rows: &[Comparison]) -> Value {
    json!({
        "model": model,
        "all_contained": all_contained(rows),
        "comparisons": to_document(&rows),
    })
}

fn compare_csv(rows: &[Comparison]) -> String {
    let mut out = String::from("metric,analytic,simulated,ci_half_width,verdict\n");
    for r in rows {
        let cells: Vec<String> = [r.analytic, r.simulated, r.half_width_99]
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        let verdict = match r.verdict {
            Verdict::Contained => "contained",
            Verdict::Outside => "outside",
        };
        out.push_str(&format!("{},{},{verdict}\n", r.metric, cells.join(",")));
    }
    out
}

/// Returns the rendered table and whether every metric was contained.
pub fn compare_cmd(config: &RunConfig, format: Format, ov: &Overrides) -> Result<(Rendered, bool), CliError> {
    let sim = config.simulation(ov.seed, ov.kmax)?;
    let rows = match config.model()? {
        Model::Renovation(section) => {
            let params = section.params()?;
            compare_renovation(&params, &params, &sim)?
        }
        Model::Red(model) => compare_red(&model, &sim)?,
    };
    let ok = all_contained(&rows);
    let rendered = match format {
        Format::Csv => Rendered::Csv(compare_csv(&rows)),
        Format::Json => Rendered::Json(compare_document(model_name(config), &rows)),
    };
    Ok((rendered, ok))
}

pub fn calibrate_cmd(config: &RunConfig, format: Format, ov: &Overrides) -> Result<Rendered, CliError> {
    let section = match config.model()? {
        Model::Renovation(section) => section,
        Model::Red(_) => {
            return Err(CliError::Validation("calibration applies to the renovation model only".into()))
        }
    };
    let cal = config
        .calibration
        .clone()
        .ok_or_else(|| CliError::Validation("config has no `calibration` section".into()))?;
    let budget = ov.budget.or(cal.budget).unwrap_or(DEFAULT_BUDGET);
    let method = ov.method.or(cal.method).unwrap_or(Method::DirectSearch);
    let seed = ov.seed.or(cal.seed).unwrap_or(0);
    let base = section.base()?;
    let result = calibrate(&base, &cal.target(), budget, method, seed)?;
    Ok(match format {
        Format::Csv => Rendered::Csv(csv_values(0, &result.q)),
        Format::Json => Rendered::Json(json!({
            "model": "renovation",
            "method": method,
            "budget": budget,
            "seed": seed,
            "target": to_document(&cal.target()),
            "result": to_document(&result),
        })),
    })
}

fn model_name(config: &RunConfig) -> &'static str {
    match config.model {
        super::config::ModelKind::Renovation => "renovation",
        super::config::ModelKind::Red => "red",
    }
}
