//! Drivers for the four subcommands. Each returns the results object for the
//! report envelope, the human summary lines, optional CSV rows, and whether
//! the run counts as a success or a negative finding.

use crate::config::RunConfig;
use crate::report::CsvRow;
use crate::table::{load_table, TabulatedFn};
use crate::{CliError, Outcome};
use esl_core::defects::DefectSample;
use esl_core::domain::{
    make_sample_set, BinaryFn, Point3, Restriction, SampleSet, SolutionFamily, TernaryFn,
};
use esl_core::fitting::{fit_constant, fit_power, fit_shannon, FitMetric, FitResult};
use esl_core::harness::{
    measure_defects, perturb, run_property_suite, verify_stability, EpsilonMeasurement,
    PerturbedSolution, Verdict,
};
use esl_core::proofchain::{
    average_correct_cocycle, homogenize, reconstruct_potential, skew_bound_check,
    HomogenizationSchedule,
};
use serde_json::{json, Value};

/// What a subcommand hands back to `main` for rendering and exit-code logic.
#[derive(Debug)]
pub struct RunOutput {
    pub results: Value,
    pub outcome: Outcome,
    pub human: Vec<String>,
    pub csv_rows: Option<Vec<CsvRow>>,
}

/// The candidate under study: an exact member, a perturbed member, or a table.
pub enum Candidate {
    Exact(SolutionFamily),
    Perturbed(PerturbedSolution),
    Table(TabulatedFn),
}

impl TernaryFn for Candidate {
    fn eval(&self, p: Point3) -> esl_core::Result<f64> {
        match self {
            Candidate::Exact(f) => f.eval(p),
            Candidate::Perturbed(f) => f.eval(p),
            Candidate::Table(f) => f.eval(p),
        }
    }
}

fn build_candidate(cfg: &RunConfig) -> Result<Candidate, CliError> {
    if let Some(path) = &cfg.input.table {
        return Ok(Candidate::Table(load_table(path)?));
    }
    let family = cfg.family.to_family()?;
    Ok(match cfg.perturbation.to_spec(cfg.seed)? {
        None => Candidate::Exact(family),
        Some(spec) => Candidate::Perturbed(perturb(family, spec)),
    })
}

fn samples(cfg: &RunConfig) -> Result<SampleSet, CliError> {
    make_sample_set(&cfg.sample.to_spec(), cfg.seed).map_err(CliError::compute)
}

fn strip_residuals(mut m: EpsilonMeasurement) -> EpsilonMeasurement {
    m.symmetry.residuals = None;
    m.entropy.residuals = None;
    if let Some(h) = &mut m.homogeneity {
        h.residuals = None;
    }
    m
}

fn csv_rows(m: &EpsilonMeasurement) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    let reports = [&m.symmetry, &m.entropy]
        .into_iter()
        .chain(m.homogeneity.as_ref());
    for rep in reports {
        let Some(rs) = &rep.residuals else { continue };
        for r in rs {
            rows.push(match r.at {
                DefectSample::Triple { x, y, z } => CsvRow {
                    x,
                    y,
                    z,
                    kind: rep.kind.name(),
                    residual: r.residual,
                },
                // The scale factor rides in the third column: homogeneity
                // samples live on the boundary plane, so z would be 0 anyway.
                DefectSample::ScaledPair { t, x, y } => CsvRow {
                    x,
                    y,
                    z: t,
                    kind: rep.kind.name(),
                    residual: r.residual,
                },
            });
        }
    }
    rows
}

fn describe_sample(at: &DefectSample) -> String {
    match at {
        DefectSample::Triple { x, y, z } => format!("({x}, {y}, {z})"),
        DefectSample::ScaledPair { t, x, y } => format!("t={t} at ({x}, {y})"),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(CliError::compute)
}

pub fn cmd_defects(cfg: &RunConfig, want_csv: bool) -> Result<RunOutput, CliError> {
    let h = build_candidate(cfg)?;
    let s = samples(cfg)?;
    let alpha = cfg.regime()?;
    let retain = cfg.report.retain_residuals || want_csv;
    let m = measure_defects(&h, &s, Some(alpha), retain).map_err(CliError::compute)?;

    let rows = want_csv.then(|| csv_rows(&m));
    let mut human = Vec::new();
    for rep in [&m.symmetry, &m.entropy].into_iter().chain(m.homogeneity.as_ref()) {
        human.push(format!(
            "{}: sup {:.6e} at {} over {} samples",
            rep.kind.name(),
            rep.sup,
            describe_sample(&rep.argmax),
            rep.count
        ));
    }
    let kept = if cfg.report.retain_residuals {
        m
    } else {
        strip_residuals(m)
    };
    let results = json!({
        "alpha": alpha,
        "measurement": to_value(&kept)?,
        "sample_count": s.triples.len(),
    });
    Ok(RunOutput {
        results,
        outcome: Outcome::Success,
        human,
        csv_rows: rows,
    })
}

fn run_fit(
    h: &Candidate,
    s: &SampleSet,
    kind: &str,
    power_alpha: f64,
    metric: FitMetric,
) -> Result<FitResult, CliError> {
    let fit = match kind {
        "power" => fit_power(h, &s.triples, power_alpha, metric),
        "shannon" => fit_shannon(h, &s.triples, metric),
        "constant" => fit_constant(h, &s.triples, metric),
        other => {
            return Err(CliError::Config(format!(
                "unknown fit family {other:?}; expected power, shannon or constant"
            )))
        }
    };
    fit.map_err(CliError::compute)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let h = build_candidate(cfg)?;
    let s = samples(cfg)?;
    let metric = cfg.fit.to_metric()?;
    let kind = cfg.fit.family.as_deref().unwrap_or(&cfg.family.kind);
    let fit = run_fit(&h, &s, kind, cfg.family.alpha, metric)?;
    let human = vec![format!(
        "fit {}: parameter {:.6e}, residual_sup {:.6e}, residual_l2 {:.6e}",
        kind,
        fit.parameter(),
        fit.residual_sup,
        fit.residual_l2
    )];
    let results = json!({
        "fit": to_value(&fit)?,
        "sample_count": s.triples.len(),
    });
    Ok(RunOutput {
        results,
        outcome: Outcome::Success,
        human,
        csv_rows: None,
    })
}

pub fn cmd_verify(cfg: &RunConfig, want_csv: bool) -> Result<RunOutput, CliError> {
    let h = build_candidate(cfg)?;
    let s = samples(cfg)?;
    let declared = cfg.family.to_family()?;
    let metric = cfg.fit.to_metric()?;
    let retain = cfg.report.retain_residuals || want_csv;
    let mut report = verify_stability(&h, &s, &declared, cfg.alpha, metric, retain)
        .map_err(CliError::compute)?;

    let rows = want_csv.then(|| csv_rows(&report.measurement));
    if !cfg.report.retain_residuals {
        report.measurement = strip_residuals(report.measurement);
    }
    let outcome = match report.verdict {
        Verdict::WithinBound => Outcome::Success,
        Verdict::ExceedsBound => Outcome::Finding,
    };
    let comparator = match report.verdict {
        Verdict::WithinBound => "<=",
        Verdict::ExceedsBound => ">",
    };
    let human = vec![format!(
        "verdict {}: residual_sup {:.6e} {} bound {:.6e} (margin {:.6e})",
        match report.verdict {
            Verdict::WithinBound => "withinBound",
            Verdict::ExceedsBound => "exceedsBound",
        },
        report.fit.residual_sup,
        comparator,
        report.bound,
        report.margin
    )];
    Ok(RunOutput {
        results: to_value(&report)?,
        outcome,
        human,
        csv_rows: rows,
    })
}

pub fn cmd_proofchain(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let h = build_candidate(cfg)?;
    if matches!(h, Candidate::Table(_)) {
        return Err(CliError::Config(
            "the proofchain command needs an analytic candidate (family plus \
             perturbation); a finite table cannot supply the off-grid points \
             the constructive steps evaluate"
                .to_owned(),
        ));
    }
    let s = samples(cfg)?;
    let degree = cfg.regime()?;
    let pc = &cfg.proofchain;
    let mut steps = serde_json::Map::new();
    let mut human = Vec::new();
    let mut outcome = Outcome::Success;

    for step in &pc.steps {
        match step.as_str() {
            "homogenize" => {
                if degree == 0.0 {
                    if pc.steps_are_default() {
                        steps.insert(
                            "homogenize".to_owned(),
                            json!({"skipped": "degree zero has no contracting scaling limit"}),
                        );
                        human.push("homogenize: skipped (degree zero)".to_owned());
                        continue;
                    }
                    return Err(CliError::Config(
                        "the homogenize step needs a nonzero degree; the flat \
                         regime is handled by the average step"
                            .to_owned(),
                    ));
                }
                let sched =
                    HomogenizationSchedule::new(degree, pc.t_magnitudes.clone())
                        .map_err(CliError::config)?;
                let trace = homogenize(&h, &sched, pc.probe_x, pc.probe_y)
                    .map_err(CliError::compute)?;
                let limit = trace.limit_estimate();
                steps.insert(
                    "homogenize".to_owned(),
                    json!({
                        "trace": to_value(&trace)?,
                        "direction": to_value(&sched.direction())?,
                        "limit_estimate": limit,
                    }),
                );
                human.push(format!(
                    "homogenize: limit estimate {:.6e} at ({}, {}) after {} steps",
                    limit,
                    pc.probe_x,
                    pc.probe_y,
                    trace.steps.len()
                ));
            }
            "skew" => {
                let check = skew_bound_check(&h, &s.triples).map_err(CliError::compute)?;
                if !check.holds {
                    outcome = Outcome::Finding;
                }
                human.push(format!(
                    "skew: |F(x,y)-F(y,x)| sup {:.6e} {} bound {:.6e}",
                    check.lhs,
                    if check.holds { "<=" } else { ">" },
                    check.rhs
                ));
                steps.insert("skew".to_owned(), to_value(&check)?);
            }
            "reconstruct" => {
                let f = Restriction::new(&h);
                let d = reconstruct_potential(&f, pc.reconstruct_h, pc.reconstruct_n)
                    .map_err(CliError::compute)?;
                let mut obj = json!({
                    "grid_step": d.grid_step,
                    "potential": d.potential,
                    "residual_sup": d.residual_sup,
                    "residual_count": d.residuals.len(),
                });
                if cfg.report.retain_residuals {
                    obj["residuals"] = to_value(&d.residuals)?;
                    obj["skew"] = to_value(&d.skew)?;
                }
                human.push(format!(
                    "reconstruct: {} grid points, residual sup {:.6e}",
                    pc.reconstruct_n, d.residual_sup
                ));
                steps.insert("reconstruct".to_owned(), obj);
            }
            "average" => {
                let f = Restriction::new(&h);
                let psi = average_correct_cocycle(
                    &f,
                    pc.probe_x,
                    pc.probe_y,
                    pc.average_window,
                    pc.average_count,
                )
                .map_err(CliError::compute)?;
                let direct = f
                    .eval(pc.probe_x, pc.probe_y)
                    .map_err(CliError::compute)?;
                steps.insert(
                    "average".to_owned(),
                    json!({
                        "psi": psi,
                        "direct": direct,
                        "difference": (psi - direct).abs(),
                        "window": pc.average_window,
                        "count": pc.average_count,
                    }),
                );
                human.push(format!(
                    "average: corrected value {:.6e}, direct {:.6e}, difference {:.6e}",
                    psi,
                    direct,
                    (psi - direct).abs()
                ));
            }
            "suite" => {
                let report =
                    run_property_suite(&s, cfg.seed, pc.suite_candidates, pc.suite_amplitude)
                        .map_err(CliError::compute)?;
                if !report.all_hold {
                    outcome = Outcome::Finding;
                }
                let held = report.lines.iter().filter(|l| l.holds).count();
                human.push(format!(
                    "suite: {}/{} checks hold over {} candidates",
                    held,
                    report.lines.len(),
                    report.candidates
                ));
                steps.insert("suite".to_owned(), to_value(&report)?);
            }
            other => {
                // validate() already rejected unknown names; stay defensive.
                return Err(CliError::Config(format!(
                    "unknown proofchain step {other:?}"
                )));
            }
        }
    }

    Ok(RunOutput {
        results: json!({"degree": degree, "steps": Value::Object(steps)}),
        outcome,
        human,
        csv_rows: None,
    })
}
