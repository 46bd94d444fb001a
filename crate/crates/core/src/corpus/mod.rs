//! Batch analysis of a project directory, per-perfume aggregation and the
//! correlation of perfume counts with externally supplied test results.

mod stats;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

pub use stats::{ln_gamma, pearson, regularized_incomplete_beta, CorrelationResult, StatsError};

use crate::perfumes::PerfumeKind;
use crate::report::{analyze_file, project_id_of, Format, ProjectReport};

pub const SUMMARY_CSV_HEADER: &str = "perfume,total_instances,projects,avg_wmc";
pub const RESULTS_CSV_HEADER: &str = "project_id,passed_tests";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("results file: {0}")]
    Format(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KindSummary {
    pub total_instances: u64,
    pub projects_containing: u64,
    /// Sum of wmc over the containing projects. Kept as an integer so that
    /// merging partial sums never depends on order.
    pub wmc_sum: u64,
}

impl KindSummary {
    pub fn avg_wmc(&self) -> Option<f64> {
        (self.projects_containing > 0)
            .then(|| self.wmc_sum as f64 / self.projects_containing as f64)
    }

    fn merge(&mut self, other: &KindSummary) {
        self.total_instances += other.total_instances;
        self.projects_containing += other.projects_containing;
        self.wmc_sum += other.wmc_sum;
    }
}

/// Table-style aggregate over a set of reports. Forms a commutative monoid
/// under [`CorpusSummary::merge`] with [`CorpusSummary::default`] as unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSummary {
    pub per_kind: BTreeMap<PerfumeKind, KindSummary>,
    pub total_instances: u64,
    pub projects_with_any_perfume: u64,
    /// wmc summed over projects with at least one perfume.
    pub wmc_sum_with_any: u64,
    pub project_count: u64,
    pub failed_project_count: u64,
}

impl Default for CorpusSummary {
    fn default() -> Self {
        CorpusSummary {
            per_kind: PerfumeKind::ALL
                .iter()
                .map(|&k| (k, KindSummary::default()))
                .collect(),
            total_instances: 0,
            projects_with_any_perfume: 0,
            wmc_sum_with_any: 0,
            project_count: 0,
            failed_project_count: 0,
        }
    }
}

impl CorpusSummary {
    pub fn of_report(report: &ProjectReport) -> Self {
        let mut s = CorpusSummary::default();
        s.add(report);
        s
    }

    pub fn add(&mut self, report: &ProjectReport) {
        let wmc = report.metrics.wmc;
        for (kind, &n) in &report.counts {
            if n == 0 {
                continue;
            }
            let entry = self.per_kind.entry(*kind).or_default();
            entry.total_instances += n as u64;
            entry.projects_containing += 1;
            entry.wmc_sum += wmc;
        }
        let total = report.total_instances() as u64;
        self.total_instances += total;
        if total > 0 {
            self.projects_with_any_perfume += 1;
            self.wmc_sum_with_any += wmc;
        }
        self.project_count += 1;
    }

    pub fn merge(mut self, other: CorpusSummary) -> Self {
        for (kind, s) in &other.per_kind {
            self.per_kind.entry(*kind).or_default().merge(s);
        }
        self.total_instances += other.total_instances;
        self.projects_with_any_perfume += other.projects_with_any_perfume;
        self.wmc_sum_with_any += other.wmc_sum_with_any;
        self.project_count += other.project_count;
        self.failed_project_count += other.failed_project_count;
        self
    }

    /// Sequential left fold over reports.
    pub fn fold<'a>(reports: impl IntoIterator<Item = &'a ProjectReport>) -> Self {
        reports
            .into_iter()
            .fold(CorpusSummary::default(), |mut acc, r| {
                acc.add(r);
                acc
            })
    }

    pub fn kind(&self, kind: PerfumeKind) -> KindSummary {
        self.per_kind.get(&kind).copied().unwrap_or_default()
    }

    pub fn avg_wmc_with_any(&self) -> Option<f64> {
        (self.projects_with_any_perfume > 0)
            .then(|| self.wmc_sum_with_any as f64 / self.projects_with_any_perfume as f64)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusAnalysis {
    /// Sorted by project id.
    pub reports: Vec<ProjectReport>,
    pub summary: CorpusSummary,
    /// (file, error message) for every candidate that could not be analyzed.
    pub failures: Vec<(PathBuf, String)>,
}

fn is_candidate(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .map(|e| {
                let e = e.to_string_lossy().to_ascii_lowercase();
                e == "sb3" || e == "json"
            })
            .unwrap_or(false)
}

/// Candidate project files directly inside `dir`, sorted by project id and
/// then file name.
pub fn list_candidates(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if is_candidate(&path) {
            files.push(path);
        }
    }
    files.sort_by(|a, b| (project_id_of(a), a.file_name()).cmp(&(project_id_of(b), b.file_name())));
    Ok(files)
}

/// Analyzes every candidate in `dir` on `jobs` worker threads.
pub fn analyze_corpus(dir: &Path, jobs: usize) -> Result<CorpusAnalysis, CorpusError> {
    let files = list_candidates(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CorpusError::Pool(e.to_string()))?;

    let results: Vec<_> = pool.install(|| files.par_iter().map(|p| analyze_file(p)).collect());

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (path, result) in files.into_iter().zip(results) {
        match result {
            Ok(report) => reports.push(report),
            Err(e) => failures.push((path, e.to_string())),
        }
    }

    let mut summary = pool.install(|| {
        reports
            .par_iter()
            .fold(CorpusSummary::default, |mut acc, r| {
                acc.add(r);
                acc
            })
            .reduce(CorpusSummary::default, CorpusSummary::merge)
    });
    summary.failed_project_count = failures.len() as u64;

    Ok(CorpusAnalysis {
        reports,
        summary,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinedRow {
    pub project_id: String,
    pub passed_tests: f64,
    pub perfume_count: usize,
    pub block_count: usize,
    pub perfumes_per_block: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct JoinOutcome {
    /// In report order.
    pub rows: Vec<JoinedRow>,
    pub warnings: Vec<String>,
}

/// Inner join of reports with a `project_id,passed_tests` CSV.
pub fn join_results(
    reports: &[ProjectReport],
    results_csv: impl io::Read,
) -> Result<JoinOutcome, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(results_csv);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::Format(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["project_id", "passed_tests"] {
        return Err(CorpusError::Format(format!(
            "expected header `{RESULTS_CSV_HEADER}`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut passed: BTreeMap<String, f64> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CorpusError::Format(e.to_string()))?;
        let id = record[0].to_string();
        let value: f64 = record[1].parse().map_err(|_| {
            CorpusError::Format(format!(
                "row {}: passed_tests `{}` is not a number",
                line + 2,
                &record[1]
            ))
        })?;
        if passed.insert(id.clone(), value).is_some() {
            warnings.push(format!(
                "duplicate results row for `{id}`; using the last one"
            ));
        }
    }

    let known: HashSet<&str> = reports.iter().map(|r| r.project_id.as_str()).collect();
    for id in passed.keys().filter(|id| !known.contains(id.as_str())) {
        warnings.push(format!("results row `{id}` matches no analyzed project"));
    }

    let mut rows = Vec::new();
    for report in reports {
        let Some(&passed_tests) = passed.get(&report.project_id) else {
            warnings.push(format!(
                "project `{}` has no results row",
                report.project_id
            ));
            continue;
        };
        let block_count = report.metrics.block_count;
        if block_count == 0 {
            warnings.push(format!(
                "project `{}` has no blocks; dropped from the join",
                report.project_id
            ));
            continue;
        }
        let perfume_count = report.total_instances();
        rows.push(JoinedRow {
            project_id: report.project_id.clone(),
            passed_tests,
            perfume_count,
            block_count,
            perfumes_per_block: perfume_count as f64 / block_count as f64,
        });
    }
    Ok(JoinOutcome { rows, warnings })
}

/// Perfume count and perfumes per block, each against passed tests.
pub fn correlate(rows: &[JoinedRow]) -> Vec<(String, Result<CorrelationResult, StatsError>)> {
    let passed: Vec<f64> = rows.iter().map(|r| r.passed_tests).collect();
    let count: Vec<f64> = rows.iter().map(|r| r.perfume_count as f64).collect();
    let density: Vec<f64> = rows.iter().map(|r| r.perfumes_per_block).collect();
    [
        ("perfume_count~passed_tests", count),
        ("perfumes_per_block~passed_tests", density),
    ]
    .into_iter()
    .map(|(name, xs)| {
        let res = pearson(&xs, &passed).map(|mut c| {
            c.name = name.to_string();
            c
        });
        (name.to_string(), res)
    })
    .collect()
}

fn fmt_avg(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_default()
}

pub fn render_summary(
    summary: &CorpusSummary,
    correlations: &[(String, Result<CorrelationResult, StatsError>)],
    format: Format,
) -> Vec<u8> {
    match format {
        Format::Csv => render_csv(summary, correlations),
        Format::Json => {
            let mut out = serde_json::to_string(&summary_json(summary, correlations))
                .expect("json value serializes");
            out.push('\n');
            out.into_bytes()
        }
        Format::Text => render_text(summary, correlations).into_bytes(),
    }
}

fn render_csv(
    summary: &CorpusSummary,
    correlations: &[(String, Result<CorrelationResult, StatsError>)],
) -> Vec<u8> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .flexible(true)
        .from_writer(Vec::new());
    let mut write = |rec: &[String]| wtr.write_record(rec).expect("in-memory write");
    write(
        &SUMMARY_CSV_HEADER
            .split(',')
            .map(String::from)
            .collect::<Vec<_>>(),
    );
    for (kind, s) in &summary.per_kind {
        write(&[
            kind.machine_name().to_string(),
            s.total_instances.to_string(),
            s.projects_containing.to_string(),
            fmt_avg(s.avg_wmc()),
        ]);
    }
    write(&[
        "TOTAL".to_string(),
        summary.total_instances.to_string(),
        summary.projects_with_any_perfume.to_string(),
        fmt_avg(summary.avg_wmc_with_any()),
    ]);
    let mut out = wtr.into_inner().expect("in-memory flush");
    if !correlations.is_empty() {
        out.push(b'\n');
        out.extend_from_slice(b"variables,n,r,p\n");
        for (name, res) in correlations {
            let line = match res {
                Ok(c) => format!("{name},{},{:.10},{:.10e}\n", c.n, c.r, c.p),
                Err(_) => format!("{name},,,\n"),
            };
            out.extend_from_slice(line.as_bytes());
        }
    }
    out
}

fn summary_json(
    summary: &CorpusSummary,
    correlations: &[(String, Result<CorrelationResult, StatsError>)],
) -> serde_json::Value {
    let perfumes: Vec<_> = summary
        .per_kind
        .iter()
        .map(|(kind, s)| {
            json!({
                "perfume": kind.machine_name(),
                "total_instances": s.total_instances,
                "projects": s.projects_containing,
                "avg_wmc": s.avg_wmc(),
            })
        })
        .collect();
    let mut value = json!({
        "perfumes": perfumes,
        "total": {
            "total_instances": summary.total_instances,
            "projects": summary.projects_with_any_perfume,
            "avg_wmc": summary.avg_wmc_with_any(),
        },
        "project_count": summary.project_count,
        "failed_project_count": summary.failed_project_count,
    });
    if !correlations.is_empty() {
        let corr: Vec<_> = correlations
            .iter()
            .map(|(name, res)| match res {
                Ok(c) => json!({ "variables": name, "n": c.n, "r": c.r, "p": c.p }),
                Err(e) => json!({ "variables": name, "error": e.to_string() }),
            })
            .collect();
        value["correlations"] = json!(corr);
    }
    value
}

fn render_text(
    summary: &CorpusSummary,
    correlations: &[(String, Result<CorrelationResult, StatsError>)],
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<30} {:>10} {:>9} {:>9}",
        "Perfume", "Instances", "Projects", "Avg WMC"
    );
    for (kind, s) in &summary.per_kind {
        let _ = writeln!(
            out,
            "{:<30} {:>10} {:>9} {:>9}",
            kind.display_name(),
            s.total_instances,
            s.projects_containing,
            fmt_avg(s.avg_wmc())
        );
    }
    let _ = writeln!(
        out,
        "{:<30} {:>10} {:>9} {:>9}",
        "Total",
        summary.total_instances,
        summary.projects_with_any_perfume,
        fmt_avg(summary.avg_wmc_with_any())
    );
    let _ = writeln!(
        out,
        "\n{} project(s) analyzed, {} failed",
        summary.project_count, summary.failed_project_count
    );
    if !correlations.is_empty() {
        let _ = writeln!(out);
        for (name, res) in correlations {
            let _ = match res {
                Ok(c) => writeln!(out, "{name}: n={} r={:.4} p={:.4e}", c.n, c.r, c.p),
                Err(e) => writeln!(out, "{name}: {e}"),
            };
        }
    }
    out
}
