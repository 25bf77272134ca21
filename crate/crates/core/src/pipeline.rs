//! Scenario-level commands shared by the CLI and the C interface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate_modified, Trajectory};
use crate::regions::{
    check_lower_solution, check_solution_region, check_transversality, check_upper_solution,
    classify_pair, complement_sampler, uniform_grid, CheckReport, Classification, PairClass,
};
use crate::scenario::{Built, ScenarioConfig};
use crate::verify::{certify, CertReport};

/// Everything `run` computes, in report order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub passed: bool,
    /// Names of failed conditions.
    pub failed: Vec<String>,
    pub events: usize,
    /// Stage evaluations whose projected point left the region.
    pub outside_evaluations: usize,
    pub region: CheckReport,
    pub transversality: Option<CheckReport>,
    pub certificate: CertReport,
}

impl RunReport {
    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(format!("report rendering: {e}")))
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub trajectory: Trajectory,
    pub built: Built,
}

fn envelope(cfg: &ScenarioConfig) -> crate::krasovskij::EnvelopeOptions {
    let mut env = cfg.checks.envelope.clone();
    env.seed = cfg.seed;
    env
}

fn region_check(cfg: &ScenarioConfig, built: &Built) -> Result<CheckReport> {
    let mut sampler = complement_sampler(&built.pair, cfg.horizon, cfg.seed)?;
    check_solution_region(
        &built.pair,
        &built.model,
        &cfg.x0,
        &mut sampler,
        cfg.checks.samples,
        cfg.checks.region_tolerance,
        cfg.checks.mode,
        &envelope(cfg),
    )
}

fn transversality_check(cfg: &ScenarioConfig, built: &Built) -> Result<CheckReport> {
    check_transversality(
        &built.model,
        &built.pair,
        cfg.checks.transversality_samples,
        cfg.checks.transversality_margin,
        cfg.seed,
        &envelope(cfg),
    )
}

/// Region check, transversality (when surfaces exist), integration of the
/// modified problem and all trajectory certificates.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let built = cfg.build()?;
    let region = region_check(cfg, &built)?;
    let transversality = if built.model.surfaces().is_empty() {
        None
    } else {
        Some(transversality_check(cfg, &built)?)
    };
    let mut integ = cfg.integrator.clone();
    integ.seed = cfg.seed;
    let trajectory = integrate_modified(&built.model, &built.pair, &cfg.x0, &integ)?;
    let event_tol = integ.resolve(cfg.horizon)?.event_tol;
    let certificate = certify(
        &trajectory,
        &built.model,
        &built.pair,
        event_tol,
        &cfg.checks.certify,
    )?;

    let mut failed = Vec::new();
    if !region.passed {
        failed.push("solution_region".to_string());
    }
    if transversality.as_ref().is_some_and(|t| !t.passed) {
        failed.push("transversality".to_string());
    }
    if !certificate.region.passed {
        failed.push("trajectory_region".to_string());
    }
    if certificate
        .residual_check
        .as_ref()
        .is_some_and(|c| !c.passed)
    {
        failed.push("residual".to_string());
    }
    if !certificate.surface_time.passed {
        failed.push("surface_time".to_string());
    }
    let report = RunReport {
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        passed: failed.is_empty(),
        failed,
        events: trajectory.events.len(),
        outside_evaluations: trajectory.outside_evaluations,
        region,
        transversality,
        certificate,
    };
    Ok(RunOutput {
        report,
        trajectory,
        built,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Region,
    Transversality,
    Classify,
    Lower,
    Upper,
}

impl std::str::FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "region" => Which::Region,
            "transversality" => Which::Transversality,
            "classify" => Which::Classify,
            "lower" => Which::Lower,
            "upper" => Which::Upper,
            _ => {
                return Err(Error::usage(format!(
                "unknown checker {s:?}; expected region, transversality, classify, lower or upper"
            )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub which: Which,
    pub passed: bool,
    /// Present for `classify`.
    pub classification: Option<PairClass>,
    pub report: CheckReport,
}

impl CheckOutcome {
    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(format!("report rendering: {e}")))
    }
}

/// Run exactly one checker.
pub fn check(cfg: &ScenarioConfig, which: Which) -> Result<CheckOutcome> {
    cfg.validate()?;
    let built = cfg.build()?;
    let grid = || uniform_grid(cfg.horizon, cfg.checks.bound_grid);
    let scalar_x0 = || -> Result<f64> {
        if cfg.dimension != 1 {
            return Err(Error::usage("lower/upper checks need a scalar scenario"));
        }
        Ok(cfg.x0[0])
    };
    let (report, classification) = match which {
        Which::Region => (region_check(cfg, &built)?, None),
        Which::Transversality => (transversality_check(cfg, &built)?, None),
        Which::Classify => {
            let mut sampler = complement_sampler(&built.pair, cfg.horizon, cfg.seed)?;
            let Classification { class, report, .. } =
                classify_pair(&built.pair, &mut sampler, cfg.checks.samples)?;
            (report, Some(class))
        }
        Which::Lower => {
            let lower = cfg
                .bound_candidates()
                .0
                .ok_or_else(|| Error::usage("no lower-solution candidate for this scenario"))?;
            let r = check_lower_solution(
                &built.model,
                &lower,
                scalar_x0()?,
                &grid(),
                cfg.checks.bound_tolerance,
            )?;
            (r, None)
        }
        Which::Upper => {
            let upper = cfg
                .bound_candidates()
                .1
                .ok_or_else(|| Error::usage("no upper-solution candidate for this scenario"))?;
            let r = check_upper_solution(
                &built.model,
                &upper,
                scalar_x0()?,
                &grid(),
                cfg.checks.bound_tolerance,
            )?;
            (r, None)
        }
    };
    Ok(CheckOutcome {
        which,
        passed: report.passed,
        classification,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub passed: bool,
    /// `"pass"`, `"fail"` or `"n/a"` without surfaces.
    pub transversality: String,
    pub max_h: f64,
    pub surface_time: f64,
    pub residual: f64,
}

/// `run` once per value of `param`.
pub fn sweep(cfg: &ScenarioConfig, param: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::usage("sweep needs at least one value"));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut c = cfg.clone();
        c.set_param(param, value)?;
        rows.push(SweepRow::from_report(value, &run(&c)?.report));
    }
    Ok(rows)
}

impl SweepRow {
    pub fn from_report(value: f64, r: &RunReport) -> Self {
        SweepRow {
            value,
            passed: r.passed,
            transversality: r
                .transversality
                .as_ref()
                .map_or("n/a", |t| t.verdict())
                .to_string(),
            max_h: r.certificate.max_h,
            surface_time: r.certificate.surface_time_fraction,
            residual: r.certificate.residual,
        }
    }
}

/// Fixed-width summary table.
pub fn sweep_table(param: &str, rows: &[SweepRow]) -> String {
    let mut s = format!(
        "{:>16} {:>6} {:>14} {:>12} {:>12} {:>12}\n",
        param, "run", "transversality", "max_h", "surface_time", "residual"
    );
    for r in rows {
        s.push_str(&format!(
            "{:>16} {:>6} {:>14} {:>12.4e} {:>12.4e} {:>12.4e}\n",
            r.value,
            if r.passed { "pass" } else { "fail" },
            r.transversality,
            r.max_h,
            r.surface_time,
            r.residual
        ));
    }
    s
}
