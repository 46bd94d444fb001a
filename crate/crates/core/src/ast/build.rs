use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use super::*;
use crate::ingest::{InputSlot, RawBlock, RawProject, RawTarget};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AstError {
    #[error("{target}: block chain revisits block {block_id}")]
    Cycle { target: String, block_id: BlockId },
}

/// Rebuilds scripts and custom block definitions from the raw block graph.
pub fn build_ast(project_id: &str, raw: &RawProject) -> Result<ProgramAst, AstError> {
    let mut diagnostics = raw.diagnostics.clone();
    let targets = raw
        .targets
        .iter()
        .map(|t| TargetBuilder::new(t, &mut diagnostics).build())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProgramAst {
        project_id: project_id.to_string(),
        targets,
        diagnostics,
    })
}

const HAT_OPCODES: &[&str] = &[
    "event_whenflagclicked",
    "event_whenkeypressed",
    "event_whenbroadcastreceived",
    "event_whenbackdropswitchesto",
    "event_whenthisspriteclicked",
    "event_whenstageclicked",
    "event_whengreaterthan",
    "event_whentouchingobject",
    "control_start_as_clone",
];

fn is_hat_opcode(opcode: &str) -> bool {
    HAT_OPCODES.contains(&opcode)
        || opcode
            .split_once('_')
            .is_some_and(|(_, rest)| rest.starts_with("when"))
}

const REPORTER_OPCODES: &[&str] = &[
    "motion_xposition",
    "motion_yposition",
    "motion_direction",
    "looks_costumenumbername",
    "looks_backdropnumbername",
    "looks_size",
    "sound_volume",
    "data_variable",
    "data_listcontents",
    "data_itemoflist",
    "data_itemnumoflist",
    "data_lengthoflist",
    "data_listcontainsitem",
    "argument_reporter_string_number",
    "argument_reporter_boolean",
];

/// Blocks that produce a value rather than run as a statement.
fn is_reporter_opcode(opcode: &str) -> bool {
    REPORTER_OPCODES.contains(&opcode)
        || opcode.starts_with("operator_")
        || (opcode.starts_with("sensing_")
            && !matches!(
                opcode,
                "sensing_askandwait" | "sensing_setdragmode" | "sensing_resettimer"
            ))
}

struct TargetBuilder<'a> {
    raw: &'a RawTarget,
    visited: HashSet<&'a str>,
    diagnostics: &'a mut Vec<String>,
}

impl<'a> TargetBuilder<'a> {
    fn new(raw: &'a RawTarget, diagnostics: &'a mut Vec<String>) -> Self {
        TargetBuilder {
            raw,
            visited: HashSet::new(),
            diagnostics,
        }
    }

    fn build(mut self) -> Result<TargetAst, AstError> {
        let raw = self.raw;
        let mut scripts = Vec::new();
        let mut procedures: Vec<ProcedureDef> = Vec::new();
        let mut detached = Vec::new();

        for (id, block) in &raw.blocks {
            if block.is_shadow {
                continue;
            }
            if !block.is_top_level {
                if block.parent.is_none() {
                    self.diagnostics.push(format!(
                        "{}: orphaned block {id} ({}) ignored",
                        raw.name, block.opcode
                    ));
                }
                continue;
            }
            if block.opcode == "procedures_definition" {
                self.enter(id)?;
                let def = self.procedure(id, block)?;
                if procedures.iter().any(|p| p.proccode == def.proccode) {
                    self.diagnostics.push(format!(
                        "{}: duplicate definition of custom block `{}` at {id} ignored",
                        raw.name, def.proccode
                    ));
                } else {
                    procedures.push(def);
                }
            } else if is_hat_opcode(&block.opcode) {
                self.enter(id)?;
                let hat = self.hat(id, block)?;
                let body = self.sequence(block.next.as_deref())?;
                scripts.push(Script {
                    anchor_block_id: id.clone(),
                    hat: Some(hat),
                    body,
                });
            } else if is_reporter_opcode(&block.opcode) {
                detached.push(self.expr_from_block(id)?);
            } else {
                let body = self.sequence(Some(id))?;
                scripts.push(Script {
                    anchor_block_id: id.clone(),
                    hat: None,
                    body,
                });
            }
        }

        for (id, block) in &raw.blocks {
            if !block.is_shadow && block.parent.is_some() && !self.visited.contains(id.as_str()) {
                self.diagnostics.push(format!(
                    "{}: block {id} ({}) is unreachable",
                    raw.name, block.opcode
                ));
            }
        }

        Ok(TargetAst {
            name: raw.name.clone(),
            is_stage: raw.is_stage,
            scripts,
            procedures,
            detached,
            variable_names: raw.variables.values().map(|(n, _)| n.clone()).collect(),
            list_names: raw.lists.values().map(|(n, _)| n.clone()).collect(),
            broadcast_names: raw.broadcasts.values().cloned().collect::<BTreeSet<_>>(),
        })
    }

    fn enter(&mut self, id: &'a str) -> Result<(), AstError> {
        if self.visited.insert(id) {
            Ok(())
        } else {
            Err(AstError::Cycle {
                target: self.raw.name.clone(),
                block_id: id.to_string(),
            })
        }
    }

    fn block(&self, id: &str) -> Option<(&'a str, &'a RawBlock)> {
        self.raw
            .blocks
            .get_key_value(id)
            .map(|(k, v)| (k.as_str(), v))
    }

    fn sequence(&mut self, first: Option<&'a str>) -> Result<Vec<Stmt>, AstError> {
        let mut out = Vec::new();
        let mut cursor = first;
        while let Some(id) = cursor {
            let Some((id, block)) = self.block(id) else {
                self.diagnostics.push(format!(
                    "{}: statement chain references missing block {id}",
                    self.raw.name
                ));
                break;
            };
            if block.is_shadow {
                cursor = block.next.as_deref();
                continue;
            }
            self.enter(id)?;
            out.push(self.statement(id, block)?);
            cursor = block.next.as_deref();
        }
        Ok(out)
    }

    fn substack(&mut self, block: &'a RawBlock, name: &str) -> Result<Vec<Stmt>, AstError> {
        match block.inputs.get(name) {
            Some(InputSlot::BlockRef(id)) => self.sequence(Some(id)),
            _ => Ok(Vec::new()),
        }
    }

    fn input(&mut self, block: &'a RawBlock, name: &str) -> Result<Expr, AstError> {
        match block.inputs.get(name) {
            Some(slot) => self.expr(slot),
            None => Ok(Expr::empty()),
        }
    }

    fn boxed(&mut self, block: &'a RawBlock, name: &str) -> Result<Box<Expr>, AstError> {
        self.input(block, name).map(Box::new)
    }

    /// A dropdown input: a (usually shadow) menu block holding one field, or
    /// a reporter dropped on top of it.
    fn menu(&mut self, block: &'a RawBlock, name: &str) -> Result<MenuValue, AstError> {
        let Some(slot) = block.inputs.get(name) else {
            return Ok(MenuValue::Named(String::new()));
        };
        Ok(match slot {
            InputSlot::BlockRef(id) => match self.block(id) {
                Some((_, menu)) if menu.is_shadow => MenuValue::Named(
                    menu.fields
                        .values()
                        .next()
                        .map(|(v, _)| v.clone())
                        .unwrap_or_default(),
                ),
                _ => MenuValue::Dynamic(Box::new(self.expr(slot)?)),
            },
            InputSlot::Literal { value, .. } => MenuValue::Named(value.clone()),
            InputSlot::BroadcastRef { name, .. } => MenuValue::Named(name.clone()),
            InputSlot::Empty => MenuValue::Named(String::new()),
            other => MenuValue::Dynamic(Box::new(self.expr(other)?)),
        })
    }

    fn object(&mut self, block: &'a RawBlock, name: &str) -> Result<ObjectRef, AstError> {
        self.menu(block, name).map(ObjectRef::from_menu)
    }

    fn field(block: &RawBlock, name: &str) -> String {
        block.field(name).unwrap_or_default().to_string()
    }

    fn expr(&mut self, slot: &InputSlot) -> Result<Expr, AstError> {
        let kind = match slot {
            InputSlot::Empty => ExprKind::Empty,
            InputSlot::Literal { kind, value } if kind.is_numeric() => {
                ExprKind::NumberLiteral(value.clone())
            }
            InputSlot::Literal { value, .. } => ExprKind::StringLiteral(value.clone()),
            InputSlot::BroadcastRef { name, .. } => ExprKind::StringLiteral(name.clone()),
            InputSlot::VariableRef { name, .. } => ExprKind::VariableRef(name.clone()),
            InputSlot::ListRef { name, .. } => ExprKind::ListRef(name.clone()),
            InputSlot::BlockRef(id) => return self.expr_from_block(id),
        };
        Ok(Expr { id: None, kind })
    }

    fn expr_from_block(&mut self, id: &str) -> Result<Expr, AstError> {
        let Some((id, block)) = self.block(id) else {
            self.diagnostics.push(format!(
                "{}: input references missing block {id}",
                self.raw.name
            ));
            return Ok(Expr {
                id: None,
                kind: ExprKind::Unknown {
                    opcode: String::new(),
                    args: vec![],
                },
            });
        };
        if block.is_shadow {
            return Ok(Expr {
                id: None,
                kind: shadow_value(block),
            });
        }
        self.enter(id)?;
        let kind = self.expr_kind(block)?;
        Ok(Expr {
            id: Some(id.to_string()),
            kind,
        })
    }

    fn expr_kind(&mut self, b: &'a RawBlock) -> Result<ExprKind, AstError> {
        use ExprKind::*;
        Ok(match b.opcode.as_str() {
            "operator_gt" => Gt(self.boxed(b, "OPERAND1")?, self.boxed(b, "OPERAND2")?),
            "operator_lt" => Lt(self.boxed(b, "OPERAND1")?, self.boxed(b, "OPERAND2")?),
            "operator_equals" => Equals(self.boxed(b, "OPERAND1")?, self.boxed(b, "OPERAND2")?),
            "operator_and" => And(self.boxed(b, "OPERAND1")?, self.boxed(b, "OPERAND2")?),
            "operator_or" => Or(self.boxed(b, "OPERAND1")?, self.boxed(b, "OPERAND2")?),
            "operator_not" => Not(self.boxed(b, "OPERAND")?),
            "sensing_touchingobject" => Touching(self.object(b, "TOUCHINGOBJECTMENU")?),
            "sensing_touchingcolor" => TouchingColor(self.boxed(b, "COLOR")?),
            "sensing_coloristouchingcolor" => {
                ColorTouchingColor(self.boxed(b, "COLOR")?, self.boxed(b, "COLOR2")?)
            }
            "sensing_keypressed" => KeyPressed(self.menu(b, "KEY_OPTION")?),
            "sensing_mousedown" => MouseDown,
            "sensing_distanceto" => DistanceTo(self.object(b, "DISTANCETOMENU")?),
            "motion_xposition" => XPosition,
            "motion_yposition" => YPosition,
            "data_variable" => VariableRef(Self::field(b, "VARIABLE")),
            "data_listcontents" => ListRef(Self::field(b, "LIST")),
            "data_itemoflist" => self.list_reporter(b, ListReporterKind::ItemOf, &["INDEX"])?,
            "data_itemnumoflist" => self.list_reporter(b, ListReporterKind::IndexOf, &["ITEM"])?,
            "data_lengthoflist" => self.list_reporter(b, ListReporterKind::Length, &[])?,
            "data_listcontainsitem" => {
                self.list_reporter(b, ListReporterKind::Contains, &["ITEM"])?
            }
            "argument_reporter_string_number" => ArgumentReporter {
                name: Self::field(b, "VALUE"),
                kind: ParamKind::StringNumber,
            },
            "argument_reporter_boolean" => ArgumentReporter {
                name: Self::field(b, "VALUE"),
                kind: ParamKind::Boolean,
            },
            _ => Unknown {
                opcode: b.opcode.clone(),
                args: self.all_inputs(b)?,
            },
        })
    }

    fn list_reporter(
        &mut self,
        b: &'a RawBlock,
        op: ListReporterKind,
        inputs: &[&str],
    ) -> Result<ExprKind, AstError> {
        let args = inputs
            .iter()
            .map(|n| self.input(b, n))
            .collect::<Result<_, _>>()?;
        Ok(ExprKind::ListReporter {
            op,
            list: Self::field(b, "LIST"),
            args,
        })
    }

    fn all_inputs(&mut self, b: &'a RawBlock) -> Result<Vec<Expr>, AstError> {
        b.inputs
            .iter()
            .filter(|(name, _)| !name.starts_with("SUBSTACK"))
            .map(|(_, slot)| self.expr(slot))
            .collect()
    }

    fn statement(&mut self, id: &'a str, b: &'a RawBlock) -> Result<Stmt, AstError> {
        use StmtKind::*;
        let kind = match b.opcode.as_str() {
            "control_if" => If {
                cond: self.input(b, "CONDITION")?,
                then: self.substack(b, "SUBSTACK")?,
            },
            "control_if_else" => IfElse {
                cond: self.input(b, "CONDITION")?,
                then: self.substack(b, "SUBSTACK")?,
                otherwise: self.substack(b, "SUBSTACK2")?,
            },
            "control_forever" => Forever {
                body: self.substack(b, "SUBSTACK")?,
            },
            "control_repeat" => Repeat {
                times: self.input(b, "TIMES")?,
                body: self.substack(b, "SUBSTACK")?,
            },
            "control_repeat_until" => RepeatUntil {
                cond: self.input(b, "CONDITION")?,
                body: self.substack(b, "SUBSTACK")?,
            },
            "control_wait" => WaitSeconds(self.input(b, "DURATION")?),
            "control_wait_until" => WaitUntil(self.input(b, "CONDITION")?),
            "control_stop" => Stop(match b.field("STOP_OPTION") {
                Some("this script") => StopScope::ThisScript,
                Some(o) if o.starts_with("other scripts") => StopScope::OtherScripts,
                _ => StopScope::All,
            }),
            "event_broadcast" => Broadcast {
                message: self.menu(b, "BROADCAST_INPUT")?,
                and_wait: false,
            },
            "event_broadcastandwait" => Broadcast {
                message: self.menu(b, "BROADCAST_INPUT")?,
                and_wait: true,
            },
            "motion_movesteps" => MoveSteps(self.input(b, "STEPS")?),
            "motion_pointindirection" => PointInDirection(self.input(b, "DIRECTION")?),
            "motion_pointtowards" => PointTowards(self.object(b, "TOWARDS")?),
            "motion_gotoxy" => GoToXY {
                x: self.input(b, "X")?,
                y: self.input(b, "Y")?,
            },
            "motion_goto" => GoToTarget(self.object(b, "TO")?),
            "motion_glidesecstoxy" => GlideSecsToXY {
                secs: self.input(b, "SECS")?,
                x: self.input(b, "X")?,
                y: self.input(b, "Y")?,
            },
            "motion_glideto" => GlideTo {
                secs: self.input(b, "SECS")?,
                target: self.object(b, "TO")?,
            },
            "motion_setx" => SetX(self.input(b, "X")?),
            "motion_sety" => SetY(self.input(b, "Y")?),
            "motion_changexby" => ChangeX(self.input(b, "DX")?),
            "motion_changeyby" => ChangeY(self.input(b, "DY")?),
            "looks_switchcostumeto" => SwitchCostume(self.menu(b, "COSTUME")?),
            "looks_switchbackdropto" => SwitchBackdrop {
                backdrop: self.menu(b, "BACKDROP")?,
                and_wait: false,
            },
            "looks_switchbackdroptoandwait" => SwitchBackdrop {
                backdrop: self.menu(b, "BACKDROP")?,
                and_wait: true,
            },
            "looks_setsizeto" => SetSize(self.input(b, "SIZE")?),
            "looks_seteffectto" => SetEffect {
                effect: Self::field(b, "EFFECT"),
                value: self.input(b, "VALUE")?,
            },
            "looks_cleargraphiceffects" => ClearEffects,
            "looks_show" => Show,
            "looks_hide" => Hide,
            "looks_say" => Say(self.input(b, "MESSAGE")?),
            "looks_sayforsecs" => SayForSecs {
                message: self.input(b, "MESSAGE")?,
                secs: self.input(b, "SECS")?,
            },
            "sound_play" => PlaySound {
                sound: self.menu(b, "SOUND_MENU")?,
                until_done: false,
            },
            "sound_playuntildone" => PlaySound {
                sound: self.menu(b, "SOUND_MENU")?,
                until_done: true,
            },
            "data_setvariableto" => SetVariable {
                var: Self::field(b, "VARIABLE"),
                value: self.input(b, "VALUE")?,
            },
            "data_changevariableby" => ChangeVariableBy {
                var: Self::field(b, "VARIABLE"),
                value: self.input(b, "VALUE")?,
            },
            "data_addtolist" => self.list_op(b, ListOpKind::Add, &["ITEM"])?,
            "data_deleteoflist" => self.list_op(b, ListOpKind::Delete, &["INDEX"])?,
            "data_deletealloflist" => self.list_op(b, ListOpKind::DeleteAll, &[])?,
            "data_insertatlist" => self.list_op(b, ListOpKind::Insert, &["ITEM", "INDEX"])?,
            "data_replaceitemoflist" => self.list_op(b, ListOpKind::Replace, &["INDEX", "ITEM"])?,
            "data_showlist" => self.list_op(b, ListOpKind::Show, &[])?,
            "data_hidelist" => self.list_op(b, ListOpKind::Hide, &[])?,
            "procedures_call" => ProcedureCall {
                proccode: b.mutation.get("proccode").cloned().unwrap_or_default(),
                args: self.call_args(b)?,
            },
            _ => {
                let args = self.all_inputs(b)?;
                let mut substacks = Vec::new();
                for name in b.inputs.keys().filter(|n| n.starts_with("SUBSTACK")) {
                    substacks.push(self.substack(b, name)?);
                }
                Unknown {
                    opcode: b.opcode.clone(),
                    args,
                    substacks,
                }
            }
        };
        Ok(Stmt {
            id: id.to_string(),
            kind,
        })
    }

    fn list_op(
        &mut self,
        b: &'a RawBlock,
        op: ListOpKind,
        inputs: &[&str],
    ) -> Result<StmtKind, AstError> {
        let args = inputs
            .iter()
            .map(|n| self.input(b, n))
            .collect::<Result<_, _>>()?;
        Ok(StmtKind::ListOp {
            op,
            list: Self::field(b, "LIST"),
            args,
        })
    }

    /// Call arguments in declaration order when the mutation lists argument
    /// ids, otherwise in input-name order.
    fn call_args(&mut self, b: &'a RawBlock) -> Result<Vec<Expr>, AstError> {
        let ids: Vec<String> = b
            .mutation
            .get("argumentids")
            .and_then(|s| serde_json::from_str(s).ok())
            .unwrap_or_default();
        let mut ordered: Vec<&'a InputSlot> = Vec::new();
        let mut seen = BTreeSet::new();
        for id in &ids {
            if let Some(slot) = b.inputs.get(id) {
                ordered.push(slot);
                seen.insert(id.as_str());
            }
        }
        ordered.extend(
            b.inputs
                .iter()
                .filter(|(k, _)| !seen.contains(k.as_str()))
                .map(|(_, v)| v),
        );
        ordered.into_iter().map(|slot| self.expr(slot)).collect()
    }

    fn hat(&mut self, id: &str, b: &'a RawBlock) -> Result<EventHandler, AstError> {
        let kind = match b.opcode.as_str() {
            "event_whenflagclicked" => HatKind::GreenFlag,
            "event_whenkeypressed" => HatKind::KeyPressed(Self::field(b, "KEY_OPTION")),
            "event_whenbroadcastreceived" => {
                HatKind::BroadcastReceived(Self::field(b, "BROADCAST_OPTION"))
            }
            "event_whenbackdropswitchesto" => {
                HatKind::BackdropSwitchesTo(Self::field(b, "BACKDROP"))
            }
            "event_whenthisspriteclicked" => HatKind::SpriteClicked,
            "event_whenstageclicked" => HatKind::StageClicked,
            _ => HatKind::Other {
                opcode: b.opcode.clone(),
                fields: b
                    .fields
                    .iter()
                    .map(|(k, (v, _))| (k.clone(), v.clone()))
                    .collect(),
            },
        };
        let args = match kind {
            HatKind::Other { .. } => self.all_inputs(b)?,
            _ => Vec::new(),
        };
        Ok(EventHandler {
            block_id: id.to_string(),
            kind,
            args,
        })
    }

    fn procedure(&mut self, id: &str, def: &'a RawBlock) -> Result<ProcedureDef, AstError> {
        let prototype = match def.inputs.get("custom_block") {
            Some(InputSlot::BlockRef(pid)) => self.block(pid),
            _ => None,
        };
        let Some((pid, prototype)) = prototype else {
            self.diagnostics.push(format!(
                "{}: custom block definition {id} has no prototype",
                self.raw.name
            ));
            return Ok(ProcedureDef {
                block_id: id.to_string(),
                proccode: String::new(),
                parameters: Vec::new(),
                body: self.sequence(def.next.as_deref())?,
                warp: false,
            });
        };
        if !prototype.is_shadow {
            self.enter(pid)?;
        }
        let proccode = prototype
            .mutation
            .get("proccode")
            .cloned()
            .unwrap_or_default();
        let names: Vec<String> = prototype
            .mutation
            .get("argumentnames")
            .and_then(|s| serde_json::from_str(s).ok())
            .unwrap_or_default();
        let ids: Vec<String> = prototype
            .mutation
            .get("argumentids")
            .and_then(|s| serde_json::from_str(s).ok())
            .unwrap_or_default();
        let placeholder_kinds = placeholder_kinds(&proccode);

        let mut parameters: Vec<Parameter> = Vec::new();
        for (i, name) in names.into_iter().enumerate() {
            let from_input = ids
                .get(i)
                .and_then(|arg_id| prototype.inputs.get(arg_id))
                .and_then(|slot| match slot {
                    InputSlot::BlockRef(r) => self.block(r),
                    _ => None,
                })
                .map(|(_, reporter)| match reporter.opcode.as_str() {
                    "argument_reporter_boolean" => ParamKind::Boolean,
                    _ => ParamKind::StringNumber,
                });
            let kind = from_input
                .or_else(|| placeholder_kinds.get(i).copied())
                .unwrap_or(ParamKind::StringNumber);
            if parameters.iter().any(|p| p.name == name) {
                self.diagnostics.push(format!(
                    "{}: custom block `{proccode}` declares parameter `{name}` twice",
                    self.raw.name
                ));
                continue;
            }
            parameters.push(Parameter { name, kind });
        }

        Ok(ProcedureDef {
            block_id: id.to_string(),
            proccode,
            parameters,
            body: self.sequence(def.next.as_deref())?,
            warp: prototype.mutation.get("warp").is_some_and(|w| w == "true"),
        })
    }
}

fn placeholder_kinds(proccode: &str) -> Vec<ParamKind> {
    let mut kinds = Vec::new();
    let mut chars = proccode.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '%' {
            match chars.peek() {
                Some('b') => kinds.push(ParamKind::Boolean),
                Some('s') | Some('n') => kinds.push(ParamKind::StringNumber),
                _ => continue,
            }
            chars.next();
        }
    }
    kinds
}

const NUMBER_SHADOWS: &[(&str, &str)] = &[
    ("math_number", "NUM"),
    ("math_positive_number", "NUM"),
    ("math_whole_number", "NUM"),
    ("math_integer", "NUM"),
    ("math_angle", "NUM"),
];

/// Value of a shadow block reached through an input slot.
fn shadow_value(block: &RawBlock) -> ExprKind {
    if let Some((_, field)) = NUMBER_SHADOWS.iter().find(|(op, _)| *op == block.opcode) {
        return ExprKind::NumberLiteral(block.field(field).unwrap_or_default().to_string());
    }
    let fields: BTreeMap<_, _> = block.fields.iter().collect();
    match fields.values().next() {
        Some((value, _)) => ExprKind::StringLiteral(value.clone()),
        None => ExprKind::Empty,
    }
}
