//! Size and complexity metrics.
//!
//! Cyclomatic complexity of a script is one plus its decision points, where
//! every `if`, `if else`, `forever`, `repeat`, `repeat until` and
//! `wait until` counts as one. The weighted method count (WMC) of a project
//! is the sum over all scripts, dead ones included, and all custom block
//! definitions.

use crate::ast::{flatten, ProgramAst, Stmt, StmtKind};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProjectMetrics {
    /// Non-shadow blocks that ended up in the AST.
    pub block_count: usize,
    pub script_count: usize,
    pub procedure_count: usize,
    pub wmc: u64,
    /// (anchor block id, complexity) for every script, then every custom
    /// block definition.
    pub per_script_cc: Vec<(String, u64)>,
}

fn is_decision_point(stmt: &Stmt) -> bool {
    matches!(
        stmt.kind,
        StmtKind::If { .. }
            | StmtKind::IfElse { .. }
            | StmtKind::Forever { .. }
            | StmtKind::Repeat { .. }
            | StmtKind::RepeatUntil { .. }
            | StmtKind::WaitUntil(_)
    )
}

pub fn cyclomatic(body: &[Stmt]) -> u64 {
    1 + flatten(body)
        .into_iter()
        .filter(|s| is_decision_point(s))
        .count() as u64
}

pub fn project_metrics(ast: &ProgramAst) -> ProjectMetrics {
    let mut per_script_cc = Vec::new();
    let mut script_count = 0;
    let mut procedure_count = 0;
    for target in &ast.targets {
        for script in &target.scripts {
            script_count += 1;
            per_script_cc.push((script.anchor_block_id.clone(), cyclomatic(&script.body)));
        }
        for def in &target.procedures {
            procedure_count += 1;
            per_script_cc.push((def.block_id.clone(), cyclomatic(&def.body)));
        }
    }
    ProjectMetrics {
        block_count: ast.node_count(),
        script_count,
        procedure_count,
        wmc: per_script_cc.iter().map(|(_, cc)| cc).sum(),
        per_script_cc,
    }
}
