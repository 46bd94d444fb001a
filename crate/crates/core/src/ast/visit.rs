use super::*;

/// The root a statement belongs to. Custom block bodies are independent
/// roots; they are never inlined at call sites.
#[derive(Debug, Clone, Copy)]
pub enum Root<'a> {
    Script(&'a Script),
    Procedure(&'a ProcedureDef),
}

impl<'a> Root<'a> {
    pub fn body(&self) -> &'a [Stmt] {
        match self {
            Root::Script(s) => &s.body,
            Root::Procedure(p) => &p.body,
        }
    }

    pub fn hat_kind(&self) -> Option<&'a HatKind> {
        match self {
            Root::Script(s) => s.hat_kind(),
            Root::Procedure(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StmtVisit<'a> {
    pub target_index: usize,
    pub target: &'a TargetAst,
    pub root: Root<'a>,
    pub stmt: &'a Stmt,
    /// Enclosing statements, outermost first.
    pub ancestors: Vec<&'a Stmt>,
    /// The sequence holding `stmt`, and its position in it.
    pub sequence: &'a [Stmt],
    pub index: usize,
}

impl StmtVisit<'_> {
    pub fn has_loop_ancestor(&self) -> bool {
        self.ancestors.iter().any(|a| a.is_loop())
    }
}

struct Frame<'a> {
    seq: &'a [Stmt],
    pos: usize,
    pops_ancestor: bool,
}

/// Depth-first, document-order walk over every statement of a program.
pub struct Statements<'a> {
    ast: &'a ProgramAst,
    roots: Vec<(usize, Root<'a>)>,
    next_root: usize,
    current_root: Option<(usize, Root<'a>)>,
    stack: Vec<Frame<'a>>,
    ancestors: Vec<&'a Stmt>,
}

pub fn iter_statements(ast: &ProgramAst) -> Statements<'_> {
    let mut roots = Vec::new();
    for (i, target) in ast.targets.iter().enumerate() {
        roots.extend(target.scripts.iter().map(|s| (i, Root::Script(s))));
        roots.extend(target.procedures.iter().map(|p| (i, Root::Procedure(p))));
    }
    Statements {
        ast,
        roots,
        next_root: 0,
        current_root: None,
        stack: Vec::new(),
        ancestors: Vec::new(),
    }
}

impl<'a> Iterator for Statements<'a> {
    type Item = StmtVisit<'a>;

    fn next(&mut self) -> Option<StmtVisit<'a>> {
        loop {
            let Some(frame) = self.stack.last_mut() else {
                let root = *self.roots.get(self.next_root)?;
                self.next_root += 1;
                self.current_root = Some(root);
                self.stack.push(Frame {
                    seq: root.1.body(),
                    pos: 0,
                    pops_ancestor: false,
                });
                continue;
            };
            if frame.pos == frame.seq.len() {
                let done = self.stack.pop().expect("frame exists");
                if done.pops_ancestor {
                    self.ancestors.pop();
                }
                continue;
            }
            let seq = frame.seq;
            let index = frame.pos;
            frame.pos += 1;
            let stmt = &seq[index];
            let (target_index, root) = self.current_root.expect("root is set");
            let visit = StmtVisit {
                target_index,
                target: &self.ast.targets[target_index],
                root,
                stmt,
                ancestors: self.ancestors.clone(),
                sequence: seq,
                index,
            };
            let children = stmt.child_sequences();
            if !children.is_empty() {
                self.ancestors.push(stmt);
                for (i, &child) in children.iter().enumerate().rev() {
                    self.stack.push(Frame {
                        seq: child,
                        pos: 0,
                        pops_ancestor: i == children.len() - 1,
                    });
                }
            }
            return Some(visit);
        }
    }
}

/// An expression node together with where it sits.
#[derive(Debug, Clone)]
pub struct ExprVisit<'a> {
    pub target_index: usize,
    pub target: &'a TargetAst,
    pub expr: &'a Expr,
    /// Id of the closest enclosing node backed by a block (possibly the
    /// expression itself).
    pub nearest_block: &'a str,
}

impl ProgramAst {
    /// Every expression node of the program: statement inputs, hat inputs
    /// and loose reporters, each subtree in pre-order.
    pub fn expressions(&self) -> Vec<ExprVisit<'_>> {
        fn push<'a>(
            out: &mut Vec<ExprVisit<'a>>,
            target_index: usize,
            target: &'a TargetAst,
            expr: &'a Expr,
            enclosing: &'a str,
        ) {
            let nearest = expr.id.as_deref().unwrap_or(enclosing);
            out.push(ExprVisit {
                target_index,
                target,
                expr,
                nearest_block: nearest,
            });
            for child in expr.children() {
                push(out, target_index, target, child, nearest);
            }
        }

        let mut out = Vec::new();
        for (i, target) in self.targets.iter().enumerate() {
            for script in &target.scripts {
                if let Some(hat) = &script.hat {
                    for arg in &hat.args {
                        push(&mut out, i, target, arg, &hat.block_id);
                    }
                }
            }
            for expr in &target.detached {
                push(
                    &mut out,
                    i,
                    target,
                    expr,
                    expr.id.as_deref().unwrap_or_default(),
                );
            }
        }
        for visit in iter_statements(self) {
            for expr in visit.stmt.expressions() {
                push(
                    &mut out,
                    visit.target_index,
                    visit.target,
                    expr,
                    &visit.stmt.id,
                );
            }
        }
        out
    }
}
