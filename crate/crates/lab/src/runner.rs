//! Validation, parallel execution and the single output collector.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lpsq_core::estimate::{constant_report, ConstantReport, Outcome, Verdict};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiments::{self, Entry, Output, Params, Table};

/// Worker-count override for the experiment pool.
pub const WORKERS_ENV: &str = "LPSQ_WORKERS";

pub struct Planned {
    pub entry: &'static Entry,
    pub params: Params,
}

/// Resolves every experiment and checks all preconditions up front.
pub fn plan(cfg: &ExperimentConfig) -> Result<Vec<Planned>> {
    cfg.experiments
        .iter()
        .map(|name| {
            let entry = experiments::find(name).ok_or_else(|| LabError::UnknownExperiment(name.clone()))?;
            let params = entry.params(&cfg.overrides);
            entry
                .validate(&params)
                .map_err(|source| LabError::Precondition { experiment: name.clone(), source })?;
            Ok(Planned { entry, params })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub experiment: String,
    pub error: String,
}

pub struct RunSummary {
    pub report: ConstantReport,
    pub failures: Vec<Failure>,
    pub tables: Vec<Table>,
    pub params: Vec<(String, Params)>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    /// All verdicts pass and no experiment errored.
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.report.passed()
    }
}

fn workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs the planned experiments on a worker pool, then writes every artifact
/// from the calling thread.
pub fn execute(planned: &[Planned], output: &Path) -> Result<RunSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers())
        .build()
        .expect("thread pool");
    let results: Vec<std::result::Result<Output, lpsq_core::Error>> =
        pool.install(|| planned.par_iter().map(|p| (p.entry.run)(&p.params)).collect());

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    let mut tables = Vec::new();
    for (p, r) in planned.iter().zip(results) {
        match r {
            Ok(out) => {
                let mut o = out.outcome;
                for v in &mut o.verdicts {
                    if v.outcome != Outcome::Exploratory {
                        v.citation = p.entry.citation.into();
                    }
                }
                outcomes.push(o);
                tables.extend(out.tables);
            }
            Err(e) => failures.push(Failure { experiment: p.entry.name.into(), error: e.to_string() }),
        }
    }
    let report = constant_report(&outcomes);
    let params = planned.iter().map(|p| (p.entry.name.to_string(), p.params.clone())).collect();
    let mut summary = RunSummary { report, failures, tables, params, files: Vec::new() };
    summary.files = write_artifacts(&summary, output)?;
    Ok(summary)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let planned = plan(cfg)?;
    execute(&planned, &cfg.output)
}

#[derive(Serialize)]
struct VerdictRow<'a> {
    experiment: &'a str,
    #[serde(rename = "claim-citation")]
    citation: &'a str,
    window: Option<(f64, f64)>,
    slope: Option<f64>,
    observed: f64,
    /// `null` for exploratory rows.
    pass: Option<bool>,
}

impl<'a> From<&'a Verdict> for VerdictRow<'a> {
    fn from(v: &'a Verdict) -> Self {
        Self {
            experiment: &v.experiment,
            citation: &v.citation,
            window: v.window,
            slope: v.slope,
            observed: v.observed,
            pass: match v.outcome {
                Outcome::Pass => Some(true),
                Outcome::Fail => Some(false),
                Outcome::Exploratory => None,
            },
        }
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema: &'a str,
    passed: bool,
    experiments: &'a [String],
    parameters: &'a [(String, Params)],
    verdicts: Vec<VerdictRow<'a>>,
    fits: &'a [(String, lpsq_core::estimate::ExponentFit)],
    failures: &'a [Failure],
}

pub const CURVES_FILE: &str = "curves.csv";
pub const REPORT_FILE: &str = "report.json";

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| LabError::io(path, e))
}

fn write_artifacts(s: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut files = Vec::new();

    let path = dir.join(CURVES_FILE);
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["experiment", "operator", "family", "kind", "p", "value", "err", "argmax-id"])?;
    for (exp, c) in &s.report.curves {
        let kind = match c.kind {
            lpsq_core::estimate::RatioKind::Cotype => "c",
            lpsq_core::estimate::RatioKind::Type => "t",
        };
        for q in &c.points {
            w.write_record([
                exp.as_str(),
                &c.operator,
                &c.family,
                kind,
                &q.p.to_string(),
                &q.value.to_string(),
                &q.error.to_string(),
                &q.argmax.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| LabError::io(&path, e))?;
    files.push(path);

    for t in &s.tables {
        let path = dir.join(format!("{}.csv", t.name));
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| LabError::io(&path, e))?;
        files.push(path);
    }

    let json = ReportJson {
        schema: &s.report.schema,
        passed: s.passed(),
        experiments: &s.report.experiments,
        parameters: &s.params,
        verdicts: s.report.verdicts.iter().map(VerdictRow::from).collect(),
        fits: &s.report.fits,
        failures: &s.failures,
    };
    let path = dir.join(REPORT_FILE);
    let mut f = create(&path)?;
    serde_json::to_writer_pretty(&mut f, &json)?;
    f.write_all(b"\n").map_err(|e| LabError::io(&path, e))?;
    files.push(path);
    Ok(files)
}

/// Every experiment at its default parameters.
pub fn smoke_config(output: PathBuf) -> ExperimentConfig {
    ExperimentConfig {
        experiments: experiments::names().into_iter().map(String::from).collect(),
        output,
        overrides: Default::default(),
    }
}
