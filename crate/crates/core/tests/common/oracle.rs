//! Naive perfume matcher working directly on the `project.json` block
//! graph. Shares no code with the library: no AST, no visitor, just
//! `parent`/`next` links, input slots and opcode strings.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use scratch_perfumes::perfumes::PerfumeKind;

/// (kind, target name, anchor block id)
pub type Inst = (PerfumeKind, String, String);

const HATS: &[&str] = &[
    "event_whenflagclicked",
    "event_whenkeypressed",
    "event_whenbroadcastreceived",
    "event_whenbackdropswitchesto",
    "event_whenthisspriteclicked",
    "event_whenstageclicked",
];
const LOOPS: &[&str] = &["control_forever", "control_repeat", "control_repeat_until"];
const IFS: &[&str] = &["control_if", "control_if_else"];
const SENSING: &[&str] = &[
    "sensing_touchingobject",
    "sensing_touchingcolor",
    "sensing_coloristouchingcolor",
    "sensing_keypressed",
    "sensing_mousedown",
];
const TOUCH: &[&str] = &[
    "sensing_touchingobject",
    "sensing_touchingcolor",
    "sensing_coloristouchingcolor",
];
const COMPARISONS: &[&str] = &["operator_gt", "operator_lt", "operator_equals"];
const LIST_STATEMENTS: &[&str] = &[
    "data_addtolist",
    "data_deleteoflist",
    "data_deletealloflist",
    "data_insertatlist",
    "data_replaceitemoflist",
    "data_showlist",
    "data_hidelist",
];
const LIST_REPORTERS: &[&str] = &[
    "data_itemoflist",
    "data_itemnumoflist",
    "data_lengthoflist",
    "data_listcontainsitem",
    "data_listcontents",
];
const STATEMENT_PREFIXES: &[&str] = &[
    "control_",
    "motion_",
    "looks_",
    "sound_",
    "data_",
    "event_broadcast",
    "procedures_call",
];
const REPORTERS: &[&str] = &[
    "motion_xposition",
    "motion_yposition",
    "data_variable",
    "data_itemoflist",
    "data_itemnumoflist",
    "data_lengthoflist",
    "data_listcontainsitem",
    "data_listcontents",
];

struct Target<'a> {
    name: &'a str,
    blocks: &'a Map<String, Value>,
    lists: BTreeSet<String>,
}

impl<'a> Target<'a> {
    fn b(&self, id: &str) -> &'a Value {
        &self.blocks[id]
    }

    fn op(&self, id: &str) -> &'a str {
        self.b(id)["opcode"].as_str().unwrap_or("")
    }

    fn shadow(&self, id: &str) -> bool {
        self.b(id)["shadow"].as_bool().unwrap_or(false)
    }

    fn parent(&self, id: &str) -> Option<&'a str> {
        self.b(id)["parent"].as_str()
    }

    fn next(&self, id: &str) -> Option<&'a str> {
        self.b(id)["next"].as_str()
    }

    fn field(&self, id: &str, name: &str) -> Option<&'a str> {
        self.b(id)["fields"][name][0].as_str()
    }

    fn slot(&self, id: &str, name: &str) -> Option<&'a Value> {
        self.b(id)["inputs"].get(name)
    }

    /// Block id held by an input slot, if it holds one.
    fn input_block(&self, id: &str, name: &str) -> Option<&'a str> {
        self.slot(id, name).and_then(|s| s[1].as_str())
    }

    /// Field value of the shadow menu in an input.
    fn menu(&self, id: &str, name: &str) -> Option<&'a str> {
        let m = self.input_block(id, name)?;
        if !self.shadow(m) {
            return None;
        }
        self.b(m)["fields"].as_object()?.values().next()?[0].as_str()
    }

    fn is_statement(&self, id: &str) -> bool {
        let op = self.op(id);
        !self.shadow(id)
            && !HATS.contains(&op)
            && !REPORTERS.contains(&op)
            && STATEMENT_PREFIXES.iter().any(|p| op.starts_with(p))
    }

    fn statements(&self) -> Vec<&'a str> {
        self.blocks
            .keys()
            .map(String::as_str)
            .filter(|id| self.is_statement(id))
            .collect()
    }

    fn ids_with(&self, ops: &[&str]) -> Vec<&'a str> {
        self.blocks
            .keys()
            .map(String::as_str)
            .filter(|id| !self.shadow(id) && ops.contains(&self.op(id)))
            .collect()
    }

    fn top(&self, id: &str) -> &'a str {
        let mut cur = self.blocks.get_key_value(id).unwrap().0.as_str();
        while let Some(p) = self.parent(cur) {
            cur = p;
        }
        cur
    }

    /// Enclosing blocks of a statement: parents that hold it in an input
    /// rather than through `next`.
    fn containers(&self, id: &str) -> Vec<&'a str> {
        let mut out = Vec::new();
        let mut cur = id.to_string();
        while let Some(p) = self.parent(&cur) {
            if self.next(p) != Some(cur.as_str()) {
                out.push(p);
            }
            cur = p.to_string();
        }
        out
    }

    /// Statement chain starting at `first`, nested statements included, in
    /// document order.
    fn walk(&self, first: Option<&str>) -> Vec<&'a str> {
        let mut out = Vec::new();
        let mut cur = first.map(|f| self.blocks.get_key_value(f).unwrap().0.as_str());
        while let Some(id) = cur {
            out.push(id);
            out.extend(self.inner(id));
            cur = self.next(id);
        }
        out
    }

    fn inner(&self, id: &str) -> Vec<&'a str> {
        let mut out = self.walk(self.input_block(id, "SUBSTACK"));
        out.extend(self.walk(self.input_block(id, "SUBSTACK2")));
        out
    }

    /// A reporter block and every non-shadow block below it.
    fn expr_subtree(&self, id: &str) -> Vec<&'a str> {
        let id = self.blocks.get_key_value(id).unwrap().0.as_str();
        let mut out = vec![id];
        if let Some(inputs) = self.b(id)["inputs"].as_object() {
            for (name, slot) in inputs {
                if name.starts_with("SUBSTACK") {
                    continue;
                }
                if let Some(child) = slot[1].as_str() {
                    if !self.shadow(child) {
                        out.extend(self.expr_subtree(child));
                    }
                }
            }
        }
        out
    }

    fn cond_subtree(&self, id: &str) -> Vec<&'a str> {
        self.input_block(id, "CONDITION")
            .map(|c| self.expr_subtree(c))
            .unwrap_or_default()
    }

    /// Compact literal (codes 4 to 10) in an input slot.
    fn literal(&self, id: &str, name: &str) -> Option<(i64, &'a str)> {
        let prim = self.slot(id, name)?[1].as_array()?;
        let code = prim[0].as_i64()?;
        (4..=10)
            .contains(&code)
            .then(|| (code, prim[1].as_str().unwrap_or("")))
    }

    fn number_literal(&self, id: &str, name: &str) -> bool {
        matches!(self.literal(id, name), Some((4..=8, _)))
    }

    fn has_loop_container(&self, id: &str) -> bool {
        self.containers(id)
            .iter()
            .any(|c| LOOPS.contains(&self.op(c)))
    }
}

fn any_op(t: &Target, ids: &[&str], ops: &[&str]) -> bool {
    ids.iter().any(|id| ops.contains(&t.op(id)))
}

fn follows(t: &Target, ids: &[&str], first: impl Fn(&str) -> bool, then_op: &str) -> bool {
    ids.iter()
        .position(|id| first(id))
        .is_some_and(|i| ids[i + 1..].iter().any(|id| t.op(id) == then_op))
}

pub fn naive_find(project: &Value) -> Vec<Inst> {
    use PerfumeKind::*;
    let raw_targets = project["targets"].as_array().unwrap();
    let list_names = |t: &Value| -> BTreeSet<String> {
        t["lists"]
            .as_object()
            .unwrap()
            .values()
            .map(|v| v[0].as_str().unwrap().to_string())
            .collect()
    };
    let stage_lists = raw_targets
        .iter()
        .find(|t| t["isStage"] == true)
        .map(list_names)
        .unwrap_or_default();
    let targets: Vec<Target> = raw_targets
        .iter()
        .map(|t| Target {
            name: t["name"].as_str().unwrap(),
            blocks: t["blocks"].as_object().unwrap(),
            lists: list_names(t).union(&stage_lists).cloned().collect(),
        })
        .collect();

    let mut out: Vec<Inst> = Vec::new();
    let mut emit =
        |kind, t: &Target, id: &str| out.push((kind, t.name.to_string(), id.to_string()));

    // Project-wide name sets and hat groups.
    let mut switched = BTreeSet::new();
    let mut received = BTreeSet::new();
    let mut hat_groups: BTreeMap<(String, String), Vec<(usize, String)>> = BTreeMap::new();
    for (ti, t) in targets.iter().enumerate() {
        for id in t.ids_with(&["looks_switchbackdropto", "looks_switchbackdroptoandwait"]) {
            if let Some(name) = t.menu(id, "BACKDROP") {
                switched.insert(name.to_string());
            }
        }
        for id in t.ids_with(&["event_whenbroadcastreceived"]) {
            received.insert(t.field(id, "BROADCAST_OPTION").unwrap_or("").to_string());
        }
        for id in t.ids_with(HATS) {
            let fields: Vec<String> = t.b(id)["fields"]
                .as_object()
                .map(|f| {
                    f.values()
                        .map(|v| v[0].as_str().unwrap_or("").to_string())
                        .collect()
                })
                .unwrap_or_default();
            hat_groups
                .entry((t.op(id).to_string(), fields.join("|")))
                .or_default()
                .push((ti, id.to_string()));
        }
    }

    for members in hat_groups.values().filter(|m| m.len() >= 2) {
        for (ti, id) in members {
            emit(Parallelisation, &targets[*ti], id);
        }
    }

    for t in &targets {
        for hat in t.ids_with(&["event_whenbackdropswitchesto"]) {
            if t.field(hat, "BACKDROP")
                .is_some_and(|n| switched.contains(n))
            {
                emit(BackdropSwitch, t, hat);
            }
        }

        for id in t.ids_with(&["operator_and", "operator_or", "operator_not"]) {
            let sub = t.expr_subtree(id);
            let comparisons: Vec<_> = sub
                .iter()
                .filter(|s| COMPARISONS.contains(&t.op(s)))
                .collect();
            let literal_pair = comparisons
                .iter()
                .any(|c| t.literal(c, "OPERAND1").is_some() && t.literal(c, "OPERAND2").is_some());
            if !comparisons.is_empty() && !literal_pair {
                emit(BooleanExpression, t, id);
            }
        }

        for id in t.ids_with(&["operator_gt", "operator_lt"]) {
            if any_op(
                t,
                &t.expr_subtree(id),
                &["motion_xposition", "motion_yposition", "sensing_distanceto"],
            ) {
                emit(UsefulPositionCheck, t, id);
            }
        }

        for id in t.statements() {
            let op = t.op(id);
            let top_op = t.op(t.top(id));
            let containers = t.containers(id);
            let in_loop = t.has_loop_container(id);

            if IFS.contains(&op) {
                let cond = t.cond_subtree(id);
                let inner = t.inner(id);
                if in_loop {
                    emit(ConditionalInsideLoop, t, id);
                    if any_op(t, &cond, TOUCH)
                        && inner.iter().any(|s| {
                            t.op(s).starts_with("motion_") || t.op(s).starts_with("looks_")
                        })
                    {
                        emit(Collision, t, id);
                    }
                    if any_op(
                        t,
                        &inner,
                        &["event_broadcast", "event_broadcastandwait", "control_stop"],
                    ) {
                        emit(ControlledBroadcastOrStop, t, id);
                    }
                    if any_op(t, &cond, &["sensing_keypressed"])
                        && inner.iter().any(|s| t.op(s).starts_with("motion_"))
                    {
                        emit(MovementInLoop, t, id);
                    }
                }
                let continuous = containers
                    .iter()
                    .any(|c| ["control_forever", "control_repeat_until"].contains(&t.op(c)));
                if continuous && any_op(t, &cond, SENSING) {
                    emit(LoopSensing, t, id);
                }
                if containers.iter().any(|c| IFS.contains(&t.op(c))) {
                    emit(NestedConditionalChecks, t, id);
                }
            }

            if op == "control_repeat_until" {
                if any_op(t, &t.cond_subtree(id), SENSING) {
                    emit(LoopSensing, t, id);
                }
                if t.input_block(id, "CONDITION").is_some() {
                    emit(ValidTermination, t, id);
                }
            }

            if op == "control_wait_until" {
                emit(Coordination, t, id);
            }

            if op == "event_broadcast" || op == "event_broadcastandwait" {
                let name = t.slot(id, "BROADCAST_INPUT").and_then(|s| s[1][1].as_str());
                if name.is_some_and(|n| received.contains(n)) {
                    emit(CorrectBroadcast, t, id);
                }
            }

            if top_op == "event_whenflagclicked" {
                if [
                    "looks_switchcostumeto",
                    "looks_switchbackdropto",
                    "looks_switchbackdroptoandwait",
                    "looks_setsizeto",
                    "looks_seteffectto",
                    "looks_cleargraphiceffects",
                    "looks_show",
                    "looks_hide",
                ]
                .contains(&op)
                {
                    emit(InitialisationOfLooks, t, id);
                }
                if ["motion_gotoxy", "motion_goto", "motion_setx", "motion_sety"].contains(&op) {
                    emit(InitialisationOfPosition, t, id);
                }
            }

            if LIST_STATEMENTS.contains(&op)
                && t.field(id, "LIST").is_some_and(|l| t.lists.contains(l))
            {
                emit(ListUsage, t, id);
            }
            // Compact list references sit directly in a statement's inputs.
            if let Some(inputs) = t.b(id)["inputs"].as_object() {
                for slot in inputs.values() {
                    if slot[1][0] == 13 && slot[1][1].as_str().is_some_and(|l| t.lists.contains(l))
                    {
                        emit(ListUsage, t, id);
                    }
                }
            }

            if LOOPS.contains(&op) {
                let inner = t.inner(id);
                if in_loop {
                    let alone = containers.first() == t.parent(id).as_ref() && t.next(id).is_none();
                    if !alone {
                        emit(NestedLoops, t, id);
                    }
                }

                let to_mouse = inner
                    .iter()
                    .any(|s| t.op(s) == "motion_goto" && t.menu(s, "TO") == Some("_mouse_"));
                let towards_mouse = follows(
                    t,
                    &inner,
                    |s| t.op(s) == "motion_pointtowards" && t.menu(s, "TOWARDS") == Some("_mouse_"),
                    "motion_movesteps",
                );
                if to_mouse || towards_mouse {
                    emit(MouseFollower, t, id);
                }

                let special = ["_mouse_", "_random_", "_edge_", "_stage_"];
                let follows_sprite = inner.iter().enumerate().any(|(i, s)| {
                    t.op(s) == "motion_pointtowards"
                        && t.menu(s, "TOWARDS").is_some_and(|m| !special.contains(&m))
                        && inner[i + 1..].iter().any(|n| t.op(n) == "motion_movesteps")
                });
                if follows_sprite {
                    emit(ObjectFollower, t, id);
                }

                let timed = inner
                    .iter()
                    .any(|s| t.op(s) == "control_wait" && t.number_literal(s, "DURATION"));
                if timed {
                    let mut seen = BTreeSet::new();
                    for s in &inner {
                        if t.op(s) == "data_changevariableby"
                            && t.number_literal(s, "VALUE")
                            && seen.insert(t.field(s, "VARIABLE").unwrap_or(""))
                        {
                            emit(Timer, t, s);
                        }
                    }
                }
            }

            if op == "looks_say" {
                let blank = match t.slot(id, "MESSAGE") {
                    None => true,
                    Some(_) => matches!(t.literal(id, "MESSAGE"), Some((9..=10, ""))),
                };
                let second = t.next(id);
                let third = second.and_then(|s| t.next(s));
                if let (false, Some(second), Some(third)) = (blank, second, third) {
                    if t.op(second) == "sound_playuntildone"
                        && t.op(third) == "looks_say"
                        && t.literal(third, "MESSAGE") == Some((10, ""))
                    {
                        emit(SaySoundSynchronisation, t, id);
                    }
                }
            }
        }

        // List reporters and compact list references inside expressions.
        for id in t.ids_with(LIST_REPORTERS) {
            if t.field(id, "LIST").is_some_and(|l| t.lists.contains(l)) {
                emit(ListUsage, t, id);
            }
        }
        for id in t
            .blocks
            .keys()
            .filter(|id| !t.shadow(id) && !t.is_statement(id) && !HATS.contains(&t.op(id)))
        {
            if let Some(inputs) = t.b(id)["inputs"].as_object() {
                for slot in inputs.values() {
                    if slot[1][0] == 13 && slot[1][1].as_str().is_some_and(|l| t.lists.contains(l))
                    {
                        emit(ListUsage, t, id);
                    }
                }
            }
        }

        for hat in t.ids_with(&["event_whenkeypressed"]) {
            let body = t.walk(t.next(hat));
            if follows(
                t,
                &body,
                |s| t.op(s) == "motion_pointindirection",
                "motion_movesteps",
            ) {
                emit(DirectedMotion, t, hat);
            }
            if any_op(t, &body, &["motion_glidesecstoxy", "motion_glideto"]) {
                emit(GlidingMotion, t, hat);
            }
        }

        let called: BTreeSet<&str> = t
            .ids_with(&["procedures_call"])
            .into_iter()
            .filter_map(|c| t.b(c)["mutation"]["proccode"].as_str())
            .collect();
        for def in t.ids_with(&["procedures_definition"]) {
            let Some(proto) = t.input_block(def, "custom_block") else {
                continue;
            };
            let mutation = &t.b(proto)["mutation"];
            let proccode = mutation["proccode"].as_str().unwrap_or("");
            if called.contains(proccode) {
                emit(CustomBlockUsage, t, def);
            }
            let names: Vec<String> =
                serde_json::from_str(mutation["argumentnames"].as_str().unwrap_or("[]"))
                    .unwrap_or_default();
            if names.is_empty() {
                continue;
            }
            let mut used = Vec::new();
            for s in t.walk(t.next(def)) {
                for (name, slot) in t.b(s)["inputs"].as_object().into_iter().flatten() {
                    if name.starts_with("SUBSTACK") {
                        continue;
                    }
                    if let Some(child) = slot[1].as_str().filter(|c| !t.shadow(c)) {
                        used.extend(t.expr_subtree(child));
                    }
                }
            }
            let all_declared = used
                .iter()
                .filter(|u| t.op(u).starts_with("argument_reporter_"))
                .all(|u| {
                    names
                        .iter()
                        .any(|n| Some(n.as_str()) == t.field(u, "VALUE"))
                });
            if all_declared {
                emit(MatchingParameter, t, def);
            }
        }
    }

    out.sort();
    out
}
