//! Per-project results and their text, JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::ast::{build_ast, ProgramAst};
use crate::ingest::load_project;
use crate::metrics::{project_metrics, ProjectMetrics};
use crate::perfumes::{find_all, PerfumeInstance, PerfumeKind};
use crate::Error;

pub const CSV_HEADER: &str = "project_id,perfume,target,block_id,detail";

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectReport {
    pub project_id: String,
    pub instances: Vec<PerfumeInstance>,
    /// One entry per perfume kind, zeros included.
    pub counts: BTreeMap<PerfumeKind, usize>,
    pub metrics: ProjectMetrics,
    pub diagnostics: Vec<String>,
}

impl ProjectReport {
    pub fn total_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn count(&self, kind: PerfumeKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }
}

pub fn build_report(project_id: &str, ast: &ProgramAst) -> ProjectReport {
    let instances = find_all(ast);
    let mut counts: BTreeMap<PerfumeKind, usize> =
        PerfumeKind::ALL.iter().map(|&k| (k, 0)).collect();
    for instance in &instances {
        *counts.entry(instance.kind).or_default() += 1;
    }
    ProjectReport {
        project_id: project_id.to_string(),
        instances,
        counts,
        metrics: project_metrics(ast),
        diagnostics: ast.diagnostics.clone(),
    }
}

/// Project id used for a file: its stem.
pub fn project_id_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads, parses and analyzes one project file.
pub fn analyze_file(path: &Path) -> Result<ProjectReport, Error> {
    let raw = load_project(path)?;
    let id = project_id_of(path);
    let ast = build_ast(&id, &raw)?;
    Ok(build_report(&id, &ast))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!(
                "unknown format `{other}` (expected text, json or csv)"
            )),
        }
    }
}

pub fn render(report: &ProjectReport, format: Format) -> Vec<u8> {
    match format {
        Format::Text => render_text(report).into_bytes(),
        Format::Json => {
            let mut out =
                serde_json::to_string(&report_json(report)).expect("json value serializes");
            out.push('\n');
            out.into_bytes()
        }
        Format::Csv => render_csv(report),
    }
}

/// JSON form of a report. Object keys come out sorted because
/// `serde_json::Map` is ordered.
pub fn report_json(report: &ProjectReport) -> Value {
    let counts: serde_json::Map<String, Value> = report
        .counts
        .iter()
        .map(|(k, n)| (k.machine_name().to_string(), json!(n)))
        .collect();
    let instances: Vec<Value> = report
        .instances
        .iter()
        .map(|i| {
            json!({
                "block_id": i.anchor_block_id,
                "detail": i.detail,
                "perfume": i.kind.machine_name(),
                "target": i.target_name,
            })
        })
        .collect();
    let per_script: Vec<Value> = report
        .metrics
        .per_script_cc
        .iter()
        .map(|(id, cc)| json!({ "block_id": id, "cc": cc }))
        .collect();
    json!({
        "project_id": report.project_id,
        "counts": counts,
        "instances": instances,
        "metrics": {
            "block_count": report.metrics.block_count,
            "script_count": report.metrics.script_count,
            "procedure_count": report.metrics.procedure_count,
            "wmc": report.metrics.wmc,
            "per_script_cc": per_script,
        },
        "diagnostics": report.diagnostics,
    })
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

/// CSV rows for a report, without the header.
pub fn csv_rows(
    report: &ProjectReport,
    wtr: &mut csv::Writer<impl std::io::Write>,
) -> csv::Result<()> {
    for i in &report.instances {
        wtr.write_record([
            report.project_id.as_str(),
            i.kind.machine_name(),
            i.target_name.as_str(),
            i.anchor_block_id.as_str(),
            i.detail.as_str(),
        ])?;
    }
    Ok(())
}

fn render_csv(report: &ProjectReport) -> Vec<u8> {
    let mut wtr = csv_writer();
    wtr.write_record(CSV_HEADER.split(','))
        .expect("in-memory write");
    csv_rows(report, &mut wtr).expect("in-memory write");
    wtr.into_inner().expect("in-memory flush")
}

fn render_text(report: &ProjectReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Project {}", report.project_id);
    let _ = writeln!(out, "{} code perfume(s) found", report.instances.len());
    for i in &report.instances {
        let _ = write!(
            out,
            "\n[{}] {} (block {})",
            i.kind.display_name(),
            i.target_name,
            i.anchor_block_id
        );
        if !i.detail.is_empty() {
            let _ = write!(out, " - {}", i.detail);
        }
        let _ = writeln!(out, "\n  {}", i.kind.feedback());
    }
    let found: Vec<_> = report.counts.iter().filter(|(_, &n)| n > 0).collect();
    if !found.is_empty() {
        let _ = writeln!(out, "\nSummary:");
        for (kind, n) in found {
            let _ = writeln!(out, "  {:<30} {n}", kind.display_name());
        }
    }
    let m = &report.metrics;
    let _ = writeln!(
        out,
        "\nBlocks: {}  Scripts: {}  Custom blocks: {}  WMC: {}",
        m.block_count, m.script_count, m.procedure_count, m.wmc
    );
    if !report.diagnostics.is_empty() {
        let _ = writeln!(out, "\nDiagnostics:");
        for d in &report.diagnostics {
            let _ = writeln!(out, "  {d}");
        }
    }
    out
}
