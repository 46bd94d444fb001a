use std::collections::{BTreeMap, BTreeSet};

use super::{PerfumeInstance, PerfumeKind};
use crate::ast::{
    flatten, iter_statements, Expr, ExprKind, HatKind, MenuValue, ObjectRef, ProgramAst, Stmt,
    StmtKind, StmtVisit, TargetAst,
};

/// True iff a comparison has a literal on both sides.
pub fn is_comparing_literals(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Gt(a, b) | ExprKind::Lt(a, b) | ExprKind::Equals(a, b) => {
            a.is_literal() && b.is_literal()
        }
        _ => false,
    }
}

/// True iff `inner` is the only statement of its enclosing sequence.
pub fn has_nested_loop_smell(inner: &Stmt, enclosing: &[Stmt]) -> bool {
    enclosing.len() == 1 && std::ptr::eq(&enclosing[0], inner)
}

struct Collector<'a> {
    kind: PerfumeKind,
    ast: &'a ProgramAst,
    out: Vec<PerfumeInstance>,
}

impl<'a> Collector<'a> {
    fn new(kind: PerfumeKind, ast: &'a ProgramAst) -> Self {
        Collector {
            kind,
            ast,
            out: Vec::new(),
        }
    }

    fn push(&mut self, target_index: usize, anchor: &str, detail: impl Into<String>) {
        self.out.push(PerfumeInstance {
            kind: self.kind,
            target_index,
            target_name: self.ast.targets[target_index].name.clone(),
            anchor_block_id: anchor.to_string(),
            detail: detail.into(),
        });
    }

    fn finish(mut self) -> Vec<PerfumeInstance> {
        self.out.sort_by(|a, b| {
            (a.target_index, &a.anchor_block_id).cmp(&(b.target_index, &b.anchor_block_id))
        });
        self.out
    }
}

fn hat_scripts(ast: &ProgramAst) -> impl Iterator<Item = (usize, &crate::ast::Script, &HatKind)> {
    ast.targets.iter().enumerate().flat_map(|(i, t)| {
        t.scripts
            .iter()
            .filter_map(move |s| s.hat.as_ref().map(|h| (i, s, &h.kind)))
    })
}

/// Statements strictly inside `stmt`, document order.
fn inner(stmt: &Stmt) -> Vec<&Stmt> {
    stmt.child_sequences()
        .into_iter()
        .flat_map(flatten)
        .collect()
}

fn branches_contain(stmt: &Stmt, pred: impl Fn(&Stmt) -> bool) -> bool {
    inner(stmt).into_iter().any(pred)
}

fn condition(stmt: &Stmt) -> Option<&Expr> {
    match &stmt.kind {
        StmtKind::If { cond, .. } | StmtKind::IfElse { cond, .. } => Some(cond),
        _ => None,
    }
}

/// Whether `first` occurs before some `second` in document order.
fn precedes<'s>(
    stmts: impl IntoIterator<Item = &'s Stmt>,
    first: impl Fn(&Stmt) -> bool,
    second: impl Fn(&Stmt) -> bool,
) -> bool {
    let mut seen_first = false;
    for s in stmts {
        if seen_first && second(s) {
            return true;
        }
        if first(s) {
            seen_first = true;
        }
    }
    false
}

fn loop_conditionals<'a>(ast: &'a ProgramAst) -> impl Iterator<Item = StmtVisit<'a>> {
    iter_statements(ast).filter(|v| v.stmt.is_conditional() && v.has_loop_ancestor())
}

pub fn find_backdrop_switch(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::BackdropSwitch, ast);
    let switched: BTreeSet<&str> = iter_statements(ast)
        .filter_map(|v| match &v.stmt.kind {
            StmtKind::SwitchBackdrop {
                backdrop: MenuValue::Named(n),
                ..
            } => Some(n.as_str()),
            _ => None,
        })
        .collect();
    for (i, script, hat) in hat_scripts(ast) {
        if let HatKind::BackdropSwitchesTo(name) = hat {
            if switched.contains(name.as_str()) {
                c.push(i, &script.anchor_block_id, name);
            }
        }
    }
    c.finish()
}

pub fn find_boolean_expression(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::BooleanExpression, ast);
    for v in ast.expressions() {
        let e = v.expr;
        if !e.is_boolean_operator() {
            continue;
        }
        let subtree = e.subtree();
        let has_comparison = subtree.iter().any(|n| n.is_comparison());
        let compares_literals = subtree.iter().any(|n| is_comparing_literals(n));
        if has_comparison && !compares_literals {
            let op = match e.kind {
                ExprKind::And(..) => "and",
                ExprKind::Or(..) => "or",
                _ => "not",
            };
            c.push(v.target_index, v.nearest_block, op);
        }
    }
    c.finish()
}

pub fn find_collision(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::Collision, ast);
    for v in loop_conditionals(ast) {
        let cond = condition(v.stmt).expect("conditional");
        if cond.any(Expr::is_touch_check)
            && branches_contain(v.stmt, |s| s.is_motion() || s.is_looks())
        {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_conditional_inside_loop(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::ConditionalInsideLoop, ast);
    for v in loop_conditionals(ast) {
        c.push(v.target_index, &v.stmt.id, "");
    }
    c.finish()
}

pub fn find_controlled_broadcast_or_stop(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::ControlledBroadcastOrStop, ast);
    for v in loop_conditionals(ast) {
        let controlled = branches_contain(v.stmt, |s| {
            matches!(s.kind, StmtKind::Broadcast { .. } | StmtKind::Stop(_))
        });
        if controlled {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_coordination(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::Coordination, ast);
    for v in iter_statements(ast) {
        if matches!(v.stmt.kind, StmtKind::WaitUntil(_)) {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_correct_broadcast(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::CorrectBroadcast, ast);
    let received: BTreeSet<&str> = hat_scripts(ast)
        .filter_map(|(_, _, hat)| match hat {
            HatKind::BroadcastReceived(m) => Some(m.as_str()),
            _ => None,
        })
        .collect();
    for v in iter_statements(ast) {
        if let StmtKind::Broadcast {
            message: MenuValue::Named(m),
            ..
        } = &v.stmt.kind
        {
            if received.contains(m.as_str()) {
                c.push(v.target_index, &v.stmt.id, m);
            }
        }
    }
    c.finish()
}

pub fn find_custom_block_usage(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::CustomBlockUsage, ast);
    let mut called: BTreeSet<(usize, &str)> = BTreeSet::new();
    for v in iter_statements(ast) {
        if let StmtKind::ProcedureCall { proccode, .. } = &v.stmt.kind {
            called.insert((v.target_index, proccode));
        }
    }
    for (i, target) in ast.targets.iter().enumerate() {
        for def in &target.procedures {
            if called.contains(&(i, def.proccode.as_str())) {
                c.push(i, &def.block_id, &def.proccode);
            }
        }
    }
    c.finish()
}

fn key_scripts(ast: &ProgramAst) -> impl Iterator<Item = (usize, &crate::ast::Script, &str)> {
    hat_scripts(ast).filter_map(|(i, s, hat)| match hat {
        HatKind::KeyPressed(k) => Some((i, s, k.as_str())),
        _ => None,
    })
}

pub fn find_directed_motion(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::DirectedMotion, ast);
    for (i, script, key) in key_scripts(ast) {
        let directed = precedes(
            flatten(&script.body),
            |s| matches!(s.kind, StmtKind::PointInDirection(_)),
            |s| matches!(s.kind, StmtKind::MoveSteps(_)),
        );
        if directed {
            c.push(i, &script.anchor_block_id, key);
        }
    }
    c.finish()
}

pub fn find_gliding_motion(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::GlidingMotion, ast);
    for (i, script, key) in key_scripts(ast) {
        let glides = flatten(&script.body).into_iter().any(|s| {
            matches!(
                s.kind,
                StmtKind::GlideSecsToXY { .. } | StmtKind::GlideTo { .. }
            )
        });
        if glides {
            c.push(i, &script.anchor_block_id, key);
        }
    }
    c.finish()
}

fn green_flag_statements(ast: &ProgramAst) -> impl Iterator<Item = StmtVisit<'_>> {
    iter_statements(ast).filter(|v| v.root.hat_kind() == Some(&HatKind::GreenFlag))
}

pub fn find_initialisation_of_looks(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    use StmtKind::*;
    let mut c = Collector::new(PerfumeKind::InitialisationOfLooks, ast);
    for v in green_flag_statements(ast) {
        let setter = match &v.stmt.kind {
            SwitchCostume(_) => "costume",
            SwitchBackdrop { .. } => "backdrop",
            SetSize(_) => "size",
            SetEffect { .. } | ClearEffects => "effect",
            Show | Hide => "visibility",
            _ => continue,
        };
        c.push(v.target_index, &v.stmt.id, setter);
    }
    c.finish()
}

pub fn find_initialisation_of_position(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::InitialisationOfPosition, ast);
    for v in green_flag_statements(ast) {
        if matches!(
            v.stmt.kind,
            StmtKind::GoToXY { .. }
                | StmtKind::GoToTarget(_)
                | StmtKind::SetX(_)
                | StmtKind::SetY(_)
        ) {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

/// Lists visible to a target: its own plus the stage's global ones.
fn declared_lists(ast: &ProgramAst, target: &TargetAst) -> BTreeSet<String> {
    let mut names = target.list_names.clone();
    if let Some(stage) = ast.stage() {
        names.extend(stage.list_names.iter().cloned());
    }
    names
}

pub fn find_list_usage(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::ListUsage, ast);
    let declared: Vec<BTreeSet<String>> =
        ast.targets.iter().map(|t| declared_lists(ast, t)).collect();
    for v in iter_statements(ast) {
        if let StmtKind::ListOp { list, .. } = &v.stmt.kind {
            if declared[v.target_index].contains(list) {
                c.push(v.target_index, &v.stmt.id, list);
            }
        }
    }
    for v in ast.expressions() {
        let list = match &v.expr.kind {
            ExprKind::ListRef(list) | ExprKind::ListReporter { list, .. } => list,
            _ => continue,
        };
        if declared[v.target_index].contains(list) {
            c.push(v.target_index, v.nearest_block, list);
        }
    }
    c.finish()
}

pub fn find_loop_sensing(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::LoopSensing, ast);
    for v in iter_statements(ast) {
        if let StmtKind::RepeatUntil { cond, .. } = &v.stmt.kind {
            if cond.any(Expr::is_sensing_check) {
                c.push(v.target_index, &v.stmt.id, "repeat until");
            }
        }
        let Some(cond) = condition(v.stmt) else {
            continue;
        };
        let continuous = v.ancestors.iter().any(|a| {
            matches!(
                a.kind,
                StmtKind::Forever { .. } | StmtKind::RepeatUntil { .. }
            )
        });
        if continuous && cond.any(Expr::is_sensing_check) {
            c.push(v.target_index, &v.stmt.id, "if");
        }
    }
    c.finish()
}

pub fn find_matching_parameter(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::MatchingParameter, ast);
    for (i, target) in ast.targets.iter().enumerate() {
        for def in &target.procedures {
            if def.parameters.is_empty() {
                continue;
            }
            let declared: BTreeSet<&str> = def.parameters.iter().map(|p| p.name.as_str()).collect();
            let all_declared = flatten(&def.body)
                .into_iter()
                .flat_map(Stmt::expressions)
                .flat_map(Expr::subtree)
                .all(|e| match &e.kind {
                    ExprKind::ArgumentReporter { name, .. } => declared.contains(name.as_str()),
                    _ => true,
                });
            if all_declared {
                c.push(i, &def.block_id, &def.proccode);
            }
        }
    }
    c.finish()
}

pub fn find_mouse_follower(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::MouseFollower, ast);
    for v in iter_statements(ast).filter(|v| v.stmt.is_loop()) {
        let body = inner(v.stmt);
        let goes_to_mouse = body
            .iter()
            .any(|s| matches!(s.kind, StmtKind::GoToTarget(ObjectRef::MousePointer)));
        let points_and_moves = precedes(
            body.iter().copied(),
            |s| matches!(s.kind, StmtKind::PointTowards(ObjectRef::MousePointer)),
            |s| matches!(s.kind, StmtKind::MoveSteps(_)),
        );
        if goes_to_mouse || points_and_moves {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_movement_in_loop(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::MovementInLoop, ast);
    for v in loop_conditionals(ast) {
        let cond = condition(v.stmt).expect("conditional");
        let keyed = cond.any(|e| matches!(e.kind, ExprKind::KeyPressed(_)));
        if keyed && branches_contain(v.stmt, Stmt::is_motion) {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_nested_conditional_checks(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::NestedConditionalChecks, ast);
    for v in iter_statements(ast) {
        if v.stmt.is_conditional() && v.ancestors.iter().any(|a| a.is_conditional()) {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_nested_loops(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::NestedLoops, ast);
    for v in iter_statements(ast) {
        if v.stmt.is_loop() && v.has_loop_ancestor() && !has_nested_loop_smell(v.stmt, v.sequence) {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_object_follower(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::ObjectFollower, ast);
    for v in iter_statements(ast).filter(|v| v.stmt.is_loop()) {
        let body = inner(v.stmt);
        let mut followed = None;
        for (n, s) in body.iter().enumerate() {
            if let StmtKind::PointTowards(ObjectRef::Sprite(name)) = &s.kind {
                if body[n + 1..]
                    .iter()
                    .any(|t| matches!(t.kind, StmtKind::MoveSteps(_)))
                {
                    followed = Some(name.as_str());
                    break;
                }
            }
        }
        if let Some(name) = followed {
            c.push(v.target_index, &v.stmt.id, name);
        }
    }
    c.finish()
}

/// Groups triggered scripts project-wide by event; every member of a group
/// of two or more is an instance.
pub fn find_parallelisation(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::Parallelisation, ast);
    let mut groups: BTreeMap<&HatKind, Vec<(usize, &str)>> = BTreeMap::new();
    for (i, script, hat) in hat_scripts(ast) {
        groups
            .entry(hat)
            .or_default()
            .push((i, &script.anchor_block_id));
    }
    for (hat, members) in groups {
        if members.len() < 2 {
            continue;
        }
        let detail = hat_signature(hat);
        for (i, anchor) in members {
            c.push(i, anchor, detail.clone());
        }
    }
    c.finish()
}

fn hat_signature(hat: &HatKind) -> String {
    match hat {
        HatKind::GreenFlag => "green flag".into(),
        HatKind::KeyPressed(k) => format!("key {k}"),
        HatKind::BroadcastReceived(m) => format!("receive {m}"),
        HatKind::BackdropSwitchesTo(b) => format!("backdrop {b}"),
        HatKind::SpriteClicked => "sprite clicked".into(),
        HatKind::StageClicked => "stage clicked".into(),
        HatKind::Other { opcode, .. } => opcode.clone(),
    }
}

pub fn find_say_sound_synchronisation(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::SaySoundSynchronisation, ast);
    let is_blank = |e: &Expr| match &e.kind {
        ExprKind::StringLiteral(s) => s.is_empty(),
        ExprKind::Empty => true,
        _ => false,
    };
    for v in iter_statements(ast) {
        let Some(window) = v.sequence.get(v.index..v.index + 3) else {
            continue;
        };
        let synced = matches!(&window[0].kind, StmtKind::Say(m) if !is_blank(m))
            && matches!(
                window[1].kind,
                StmtKind::PlaySound {
                    until_done: true,
                    ..
                }
            )
            && matches!(&window[2].kind, StmtKind::Say(Expr { kind: ExprKind::StringLiteral(s), .. }) if s.is_empty());
        if synced {
            c.push(v.target_index, &v.stmt.id, "");
        }
    }
    c.finish()
}

pub fn find_timer(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::Timer, ast);
    let fixed = |e: &Expr| matches!(e.kind, ExprKind::NumberLiteral(_));
    for v in iter_statements(ast).filter(|v| v.stmt.is_loop()) {
        let body = inner(v.stmt);
        let waits = body
            .iter()
            .any(|s| matches!(&s.kind, StmtKind::WaitSeconds(e) if fixed(e)));
        if !waits {
            continue;
        }
        let mut seen = BTreeSet::new();
        for s in &body {
            if let StmtKind::ChangeVariableBy { var, value } = &s.kind {
                if fixed(value) && seen.insert(var.as_str()) {
                    c.push(v.target_index, &s.id, var);
                }
            }
        }
    }
    c.finish()
}

pub fn find_useful_position_check(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::UsefulPositionCheck, ast);
    let positional = |e: &Expr| {
        matches!(
            e.kind,
            ExprKind::XPosition | ExprKind::YPosition | ExprKind::DistanceTo(_)
        )
    };
    for v in ast.expressions() {
        if let ExprKind::Gt(a, b) | ExprKind::Lt(a, b) = &v.expr.kind {
            if a.any(positional) || b.any(positional) {
                c.push(v.target_index, v.nearest_block, "");
            }
        }
    }
    c.finish()
}

pub fn find_valid_termination(ast: &ProgramAst) -> Vec<PerfumeInstance> {
    let mut c = Collector::new(PerfumeKind::ValidTermination, ast);
    for v in iter_statements(ast) {
        if let StmtKind::RepeatUntil { cond, .. } = &v.stmt.kind {
            if cond.kind != ExprKind::Empty {
                c.push(v.target_index, &v.stmt.id, "");
            }
        }
    }
    c.finish()
}
