//! Typed program model rebuilt from the raw block graph.
//!
//! Every non-shadow block that is reachable from a top-level block becomes
//! exactly one node: a hat, a procedure definition, a statement, or an
//! expression. Literals typed into input slots and shadow menus are
//! expressions too but carry no block id.

mod build;
mod visit;

use std::collections::BTreeSet;

pub use build::{build_ast, AstError};
pub use visit::{iter_statements, ExprVisit, Root, Statements, StmtVisit};

use crate::ingest::BlockId;

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramAst {
    pub project_id: String,
    pub targets: Vec<TargetAst>,
    /// Orphaned blocks, missing references and similar non-fatal findings,
    /// including the ones reported during ingestion.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetAst {
    pub name: String,
    pub is_stage: bool,
    pub scripts: Vec<Script>,
    pub procedures: Vec<ProcedureDef>,
    /// Reporter blocks lying loose on the canvas.
    pub detached: Vec<Expr>,
    pub variable_names: BTreeSet<String>,
    pub list_names: BTreeSet<String>,
    pub broadcast_names: BTreeSet<String>,
}

impl TargetAst {
    pub fn procedure(&self, proccode: &str) -> Option<&ProcedureDef> {
        self.procedures.iter().find(|p| p.proccode == proccode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    /// The hat block, or the first statement of a dead script.
    pub anchor_block_id: BlockId,
    pub hat: Option<EventHandler>,
    pub body: Vec<Stmt>,
}

impl Script {
    /// A script without a hat is never triggered.
    pub fn is_dead(&self) -> bool {
        self.hat.is_none()
    }

    pub fn hat_kind(&self) -> Option<&HatKind> {
        self.hat.as_ref().map(|h| &h.kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHandler {
    pub block_id: BlockId,
    pub kind: HatKind,
    /// Expression inputs of hats such as `when loudness > (10)`.
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HatKind {
    GreenFlag,
    KeyPressed(String),
    BroadcastReceived(String),
    BackdropSwitchesTo(String),
    SpriteClicked,
    StageClicked,
    Other {
        opcode: String,
        fields: Vec<(String, String)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    Boolean,
    StringNumber,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureDef {
    pub block_id: BlockId,
    pub proccode: String,
    pub parameters: Vec<Parameter>,
    pub body: Vec<Stmt>,
    pub warp: bool,
}

/// A dropdown that holds either a fixed name or a dropped-in reporter.
#[derive(Debug, Clone, PartialEq)]
pub enum MenuValue {
    Named(String),
    Dynamic(Box<Expr>),
}

impl MenuValue {
    pub fn name(&self) -> Option<&str> {
        match self {
            MenuValue::Named(n) => Some(n),
            MenuValue::Dynamic(_) => None,
        }
    }
}

/// Targets of `go to`, `point towards`, `touching` and `distance to`.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectRef {
    MousePointer,
    Random,
    Edge,
    Stage,
    Sprite(String),
    Dynamic(Box<Expr>),
}

impl ObjectRef {
    pub(crate) fn from_menu(value: MenuValue) -> Self {
        match value {
            MenuValue::Dynamic(e) => ObjectRef::Dynamic(e),
            MenuValue::Named(n) => match n.as_str() {
                "_mouse_" => ObjectRef::MousePointer,
                "_random_" => ObjectRef::Random,
                "_edge_" => ObjectRef::Edge,
                "_stage_" => ObjectRef::Stage,
                _ => ObjectRef::Sprite(n),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopScope {
    All,
    ThisScript,
    OtherScripts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListOpKind {
    Add,
    Delete,
    DeleteAll,
    Insert,
    Replace,
    Show,
    Hide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ListReporterKind {
    ItemOf,
    IndexOf,
    Length,
    Contains,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: BlockId,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    If {
        cond: Expr,
        then: Vec<Stmt>,
    },
    IfElse {
        cond: Expr,
        then: Vec<Stmt>,
        otherwise: Vec<Stmt>,
    },
    Forever {
        body: Vec<Stmt>,
    },
    Repeat {
        times: Expr,
        body: Vec<Stmt>,
    },
    RepeatUntil {
        cond: Expr,
        body: Vec<Stmt>,
    },
    WaitSeconds(Expr),
    WaitUntil(Expr),
    Stop(StopScope),
    Broadcast {
        message: MenuValue,
        and_wait: bool,
    },
    MoveSteps(Expr),
    PointInDirection(Expr),
    PointTowards(ObjectRef),
    GoToXY {
        x: Expr,
        y: Expr,
    },
    GoToTarget(ObjectRef),
    GlideSecsToXY {
        secs: Expr,
        x: Expr,
        y: Expr,
    },
    GlideTo {
        secs: Expr,
        target: ObjectRef,
    },
    SetX(Expr),
    SetY(Expr),
    ChangeX(Expr),
    ChangeY(Expr),
    SwitchCostume(MenuValue),
    SwitchBackdrop {
        backdrop: MenuValue,
        and_wait: bool,
    },
    SetSize(Expr),
    SetEffect {
        effect: String,
        value: Expr,
    },
    ClearEffects,
    Show,
    Hide,
    Say(Expr),
    SayForSecs {
        message: Expr,
        secs: Expr,
    },
    PlaySound {
        sound: MenuValue,
        until_done: bool,
    },
    SetVariable {
        var: String,
        value: Expr,
    },
    ChangeVariableBy {
        var: String,
        value: Expr,
    },
    ListOp {
        op: ListOpKind,
        list: String,
        args: Vec<Expr>,
    },
    ProcedureCall {
        proccode: String,
        args: Vec<Expr>,
    },
    Unknown {
        opcode: String,
        args: Vec<Expr>,
        substacks: Vec<Vec<Stmt>>,
    },
}

impl Stmt {
    pub fn is_loop(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::Forever { .. } | StmtKind::Repeat { .. } | StmtKind::RepeatUntil { .. }
        )
    }

    pub fn is_conditional(&self) -> bool {
        matches!(self.kind, StmtKind::If { .. } | StmtKind::IfElse { .. })
    }

    pub fn is_motion(&self) -> bool {
        use StmtKind::*;
        match &self.kind {
            MoveSteps(_)
            | PointInDirection(_)
            | PointTowards(_)
            | GoToXY { .. }
            | GoToTarget(_)
            | GlideSecsToXY { .. }
            | GlideTo { .. }
            | SetX(_)
            | SetY(_)
            | ChangeX(_)
            | ChangeY(_) => true,
            Unknown { opcode, .. } => opcode.starts_with("motion_"),
            _ => false,
        }
    }

    pub fn is_looks(&self) -> bool {
        use StmtKind::*;
        match &self.kind {
            SwitchCostume(_)
            | SwitchBackdrop { .. }
            | SetSize(_)
            | SetEffect { .. }
            | ClearEffects
            | Show
            | Hide
            | Say(_)
            | SayForSecs { .. } => true,
            Unknown { opcode, .. } => opcode.starts_with("looks_"),
            _ => false,
        }
    }

    /// The branch or body of a conditional, in document order.
    pub fn child_sequences(&self) -> Vec<&[Stmt]> {
        use StmtKind::*;
        match &self.kind {
            If { then, .. } => vec![then],
            IfElse {
                then, otherwise, ..
            } => vec![then, otherwise],
            Forever { body } | Repeat { body, .. } | RepeatUntil { body, .. } => vec![body],
            Unknown { substacks, .. } => substacks.iter().map(Vec::as_slice).collect(),
            _ => Vec::new(),
        }
    }

    /// Direct expression children, in input order.
    pub fn expressions(&self) -> Vec<&Expr> {
        use StmtKind::*;
        fn menu(m: &MenuValue) -> Option<&Expr> {
            match m {
                MenuValue::Dynamic(e) => Some(e),
                MenuValue::Named(_) => None,
            }
        }
        fn object(o: &ObjectRef) -> Option<&Expr> {
            match o {
                ObjectRef::Dynamic(e) => Some(e),
                _ => None,
            }
        }
        match &self.kind {
            If { cond, .. } | IfElse { cond, .. } | RepeatUntil { cond, .. } => vec![cond],
            Repeat { times, .. } => vec![times],
            WaitSeconds(e) | WaitUntil(e) | MoveSteps(e) | PointInDirection(e) | SetX(e)
            | SetY(e) | ChangeX(e) | ChangeY(e) | SetSize(e) | Say(e) => vec![e],
            SetEffect { value, .. }
            | SetVariable { value, .. }
            | ChangeVariableBy { value, .. } => vec![value],
            GoToXY { x, y } => vec![x, y],
            GlideSecsToXY { secs, x, y } => vec![secs, x, y],
            GlideTo { secs, target } => std::iter::once(secs).chain(object(target)).collect(),
            PointTowards(o) | GoToTarget(o) => object(o).into_iter().collect(),
            Broadcast { message: m, .. }
            | SwitchCostume(m)
            | SwitchBackdrop { backdrop: m, .. }
            | PlaySound { sound: m, .. } => menu(m).into_iter().collect(),
            SayForSecs { message, secs } => vec![message, secs],
            ListOp { args, .. } | ProcedureCall { args, .. } | Unknown { args, .. } => {
                args.iter().collect()
            }
            Forever { .. } | Stop(_) | ClearEffects | Show | Hide => Vec::new(),
        }
    }

    /// This statement and everything nested below it, in document order.
    pub fn descendants_and_self(&self) -> Vec<&Stmt> {
        let mut out = vec![self];
        for seq in self.child_sequences() {
            out.extend(flatten(seq));
        }
        out
    }
}

/// All statements of a sequence in document (pre-)order, nested ones
/// included.
pub fn flatten(seq: &[Stmt]) -> Vec<&Stmt> {
    seq.iter().flat_map(Stmt::descendants_and_self).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    /// `None` for literals, compact variable/list references and shadow menus.
    pub id: Option<BlockId>,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    NumberLiteral(String),
    StringLiteral(String),
    Gt(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    Equals(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Touching(ObjectRef),
    TouchingColor(Box<Expr>),
    ColorTouchingColor(Box<Expr>, Box<Expr>),
    KeyPressed(MenuValue),
    MouseDown,
    DistanceTo(ObjectRef),
    XPosition,
    YPosition,
    VariableRef(String),
    ListRef(String),
    ListReporter {
        op: ListReporterKind,
        list: String,
        args: Vec<Expr>,
    },
    ArgumentReporter {
        name: String,
        kind: ParamKind,
    },
    /// An input slot with nothing in it.
    Empty,
    Unknown {
        opcode: String,
        args: Vec<Expr>,
    },
}

impl Expr {
    pub fn literal_number(text: impl Into<String>) -> Self {
        Expr {
            id: None,
            kind: ExprKind::NumberLiteral(text.into()),
        }
    }

    pub fn literal_string(text: impl Into<String>) -> Self {
        Expr {
            id: None,
            kind: ExprKind::StringLiteral(text.into()),
        }
    }

    pub fn empty() -> Self {
        Expr {
            id: None,
            kind: ExprKind::Empty,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::NumberLiteral(_) | ExprKind::StringLiteral(_)
        )
    }

    pub fn is_comparison(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Gt(..) | ExprKind::Lt(..) | ExprKind::Equals(..)
        )
    }

    pub fn is_boolean_operator(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::And(..) | ExprKind::Or(..) | ExprKind::Not(_)
        )
    }

    /// Touch, colour, key and mouse sensing predicates.
    pub fn is_sensing_check(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Touching(_)
                | ExprKind::TouchingColor(_)
                | ExprKind::ColorTouchingColor(..)
                | ExprKind::KeyPressed(_)
                | ExprKind::MouseDown
        )
    }

    pub fn is_touch_check(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Touching(_) | ExprKind::TouchingColor(_) | ExprKind::ColorTouchingColor(..)
        )
    }

    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Gt(a, b)
            | Lt(a, b)
            | Equals(a, b)
            | And(a, b)
            | Or(a, b)
            | ColorTouchingColor(a, b) => vec![a, b],
            Not(a) | TouchingColor(a) => vec![a],
            Touching(ObjectRef::Dynamic(e)) | DistanceTo(ObjectRef::Dynamic(e)) => vec![e],
            KeyPressed(MenuValue::Dynamic(e)) => vec![e],
            ListReporter { args, .. } | Unknown { args, .. } => args.iter().collect(),
            _ => Vec::new(),
        }
    }

    /// This node and all nodes below it, pre-order.
    pub fn subtree(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            out.push(e);
            stack.extend(e.children().into_iter().rev());
        }
        out
    }

    pub fn any(&self, pred: impl Fn(&Expr) -> bool) -> bool {
        self.subtree().into_iter().any(pred)
    }
}

impl ProgramAst {
    pub fn stage(&self) -> Option<&TargetAst> {
        self.targets.iter().find(|t| t.is_stage)
    }

    /// Number of nodes backed by a non-shadow block.
    pub fn node_count(&self) -> usize {
        let mut count = 0;
        for target in &self.targets {
            count += target.procedures.len();
            count += target.scripts.iter().filter(|s| s.hat.is_some()).count();
        }
        count += iter_statements(self).count();
        count += self
            .expressions()
            .iter()
            .filter(|v| v.expr.id.is_some())
            .count();
        count
    }

    /// Whether some node of the program carries this block id.
    pub fn contains_block(&self, id: &str) -> bool {
        self.targets.iter().any(|t| {
            t.procedures.iter().any(|p| p.block_id == id)
                || t.scripts
                    .iter()
                    .any(|s| s.hat.as_ref().is_some_and(|h| h.block_id == id))
        }) || iter_statements(self).any(|v| v.stmt.id == id)
            || self
                .expressions()
                .iter()
                .any(|v| v.expr.id.as_deref() == Some(id))
    }
}
