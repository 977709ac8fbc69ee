//! The `w`-expression DSL: parse, print, evaluate to a labeled graph,
//! check niceness, and precompute the per-node label-class metadata the
//! clique-width solvers consume.
//!
//! Surface syntax is fully parenthesized prefix notation:
//!
//! ```text
//! expr := "(" "v" ID LABEL ")"        introduce vertex ID with a label
//!       | "(" "u" expr expr ")"       disjoint union
//!       | "(" "r" LABEL LABEL expr ")"  relabel i -> j
//!       | "(" "e" LABEL LABEL expr ")"  add all edges between labels i, j
//! ```
//!
//! `;` starts a comment to end of line. The width `w` is inferred as the
//! maximum label used. Vertex ids are `[A-Za-z0-9_]+`; when an expression
//! is paired with an instance, every id must parse as the instance vertex
//! number. Purely symbolic ids are numbered by leaf order for standalone
//! evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, Vertex};

/// Label in `1..=w`.
pub type Label = usize;

/// Index of a node in the expression arena. Nodes are stored in postorder,
/// so children always have smaller indices than their parents and the root
/// is the last node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CwOp {
    Introduce { id: String, label: Label },
    Union(NodeId, NodeId),
    Rename { from: Label, to: Label, child: NodeId },
    AddEdges { a: Label, b: Label, child: NodeId },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CwError {
    #[error("parse error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("vertex ids are numeric but not exactly 1..={n}: {detail}")]
    NonDenseIds { n: usize, detail: String },
    #[error("vertex id `{id}` does not parse as an instance vertex number")]
    SymbolicId { id: String },
    #[error("expression graph does not match the instance graph: {detail}")]
    GraphMismatch { detail: String },
    #[error("edge-introduction node {node} is partially redundant: {new} new edges, {old} pre-existing")]
    PartiallyRedundant { node: usize, new: usize, old: usize },
}

/// A `w`-expression as a postorder arena of operator nodes.
#[derive(Debug, Clone)]
pub struct CwExpression {
    nodes: Vec<CwOp>,
    root: NodeId,
}

impl PartialEq for CwExpression {
    /// Structural tree equality, independent of arena layout.
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self.root, other.root)];
        while let Some((a, b)) = stack.pop() {
            match (self.op(a), other.op(b)) {
                (CwOp::Introduce { id: ia, label: la }, CwOp::Introduce { id: ib, label: lb }) => {
                    if ia != ib || la != lb {
                        return false;
                    }
                }
                (CwOp::Union(al, ar), CwOp::Union(bl, br)) => {
                    stack.push((*al, *bl));
                    stack.push((*ar, *br));
                }
                (
                    CwOp::Rename { from: fa, to: ta, child: ca },
                    CwOp::Rename { from: fb, to: tb, child: cb },
                ) => {
                    if fa != fb || ta != tb {
                        return false;
                    }
                    stack.push((*ca, *cb));
                }
                (
                    CwOp::AddEdges { a: aa, b: ba, child: ca },
                    CwOp::AddEdges { a: ab, b: bb, child: cb },
                ) => {
                    if aa != ab || ba != bb {
                        return false;
                    }
                    stack.push((*ca, *cb));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for CwExpression {}

impl CwExpression {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn op(&self, id: NodeId) -> &CwOp {
        &self.nodes[id.0]
    }

    /// Node ids in postorder (children before parents).
    pub fn postorder(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    /// Inferred width: the maximum label used anywhere.
    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|op| match *op {
                CwOp::Introduce { label, .. } => label,
                CwOp::Union(..) => 0,
                CwOp::Rename { from, to, .. } => from.max(to),
                CwOp::AddEdges { a, b, .. } => a.max(b),
            })
            .max()
            .unwrap_or(0)
    }

    pub fn introduce_count(&self) -> usize {
        self.nodes.iter().filter(|op| matches!(op, CwOp::Introduce { .. })).count()
    }

    /// Maps each introduce leaf to its vertex number.
    ///
    /// If every id token is numeric the tokens themselves are the numbers
    /// (they must be distinct); otherwise leaves are numbered `1..` in
    /// left-to-right order.
    pub fn vertex_numbers(&self) -> Result<(BTreeMap<NodeId, Vertex>, bool), CwError> {
        let leaves: Vec<(NodeId, &str)> = self
            .postorder()
            .filter_map(|id| match self.op(id) {
                CwOp::Introduce { id: tok, .. } => Some((id, tok.as_str())),
                _ => None,
            })
            .collect();
        let all_numeric = leaves
            .iter()
            .all(|(_, tok)| tok.bytes().all(|b| b.is_ascii_digit()) && tok.parse::<usize>().is_ok());
        let mut map = BTreeMap::new();
        if all_numeric {
            let mut seen = BTreeMap::new();
            for (id, tok) in &leaves {
                let v: usize = tok.parse().unwrap();
                if v == 0 {
                    return Err(CwError::NonDenseIds {
                        n: leaves.len(),
                        detail: "vertex id 0 is not allowed".into(),
                    });
                }
                if let Some(prev) = seen.insert(v, *tok) {
                    return Err(CwError::NonDenseIds {
                        n: leaves.len(),
                        detail: format!("ids `{prev}` and `{tok}` denote the same vertex {v}"),
                    });
                }
                map.insert(*id, v);
            }
            Ok((map, true))
        } else {
            for (pos, (id, _)) in leaves.iter().enumerate() {
                map.insert(*id, pos + 1);
            }
            Ok((map, false))
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing and printing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokKind {
    LParen,
    RParen,
    Atom,
}

struct Token<'a> {
    kind: TokKind,
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token<'_>>, CwError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' | b')' => {
                let kind = if c == b'(' { TokKind::LParen } else { TokKind::RParen };
                toks.push(Token { kind, text: &text[i..i + 1], line, col });
                i += 1;
                col += 1;
            }
            c if c.is_ascii_whitespace() => {
                i += 1;
                col += 1;
            }
            _ => {
                let start = i;
                let start_col = col;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                    && bytes[i] != b';'
                {
                    i += 1;
                    col += 1;
                }
                let atom = &text[start..i];
                if !atom.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
                    return Err(CwError::Syntax {
                        line,
                        col: start_col,
                        message: format!("invalid token `{atom}`"),
                    });
                }
                toks.push(Token { kind: TokKind::Atom, text: atom, line, col: start_col });
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err_here(&self, message: impl Into<String>) -> CwError {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .toks
                .last()
                .map(|t| (t.line, t.col + t.text.len()))
                .unwrap_or((1, 1)),
        };
        CwError::Syntax { line, col, message: message.into() }
    }

    fn expect(&mut self, kind: TokKind, expected: &str) -> Result<&Token<'a>, CwError> {
        if self.pos >= self.toks.len() {
            return Err(self.err_here(format!("unexpected end of input, expected {expected}")));
        }
        let tok = &self.toks[self.pos];
        if tok.kind != kind {
            return Err(CwError::Syntax {
                line: tok.line,
                col: tok.col,
                message: format!("expected {expected}, found `{}`", tok.text),
            });
        }
        self.pos += 1;
        Ok(&self.toks[self.pos - 1])
    }

    fn label(&mut self) -> Result<Label, CwError> {
        let tok = self.expect(TokKind::Atom, "a label")?;
        let (line, col) = (tok.line, tok.col);
        match tok.text.parse::<usize>() {
            Ok(l) if l >= 1 => Ok(l),
            _ => {
                let text = tok.text.to_string();
                Err(CwError::Syntax {
                    line,
                    col,
                    message: format!("label out of range: `{text}` is not a positive integer"),
                })
            }
        }
    }
}

/// Pending parent constructions while parsing iteratively.
enum Frame {
    UnionLeft,
    UnionRight(NodeId),
    Rename(Label, Label),
    AddEdges(Label, Label),
}

/// Parses and validates a `w`-expression.
pub fn parse_expr(text: &str) -> Result<CwExpression, CwError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut nodes: Vec<CwOp> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut seen_ids: BTreeMap<String, (usize, usize)> = BTreeMap::new();

    let root = 'outer: loop {
        // Parse one operator head.
        p.expect(TokKind::LParen, "`(`")?;
        let head = p.expect(TokKind::Atom, "an operator (v, u, r, e)")?;
        let (hline, hcol, htext) = (head.line, head.col, head.text.to_string());
        let mut completed: NodeId = match htext.as_str() {
            "v" => {
                let idt = p.expect(TokKind::Atom, "a vertex id")?;
                let (iline, icol, id) = (idt.line, idt.col, idt.text.to_string());
                if let Some(_) = seen_ids.insert(id.clone(), (iline, icol)) {
                    return Err(CwError::Syntax {
                        line: iline,
                        col: icol,
                        message: format!("duplicate vertex id `{id}`"),
                    });
                }
                let label = p.label()?;
                p.expect(TokKind::RParen, "`)`")?;
                nodes.push(CwOp::Introduce { id, label });
                NodeId(nodes.len() - 1)
            }
            "u" => {
                stack.push(Frame::UnionLeft);
                continue;
            }
            "r" | "e" => {
                let i = p.label()?;
                let j = p.label()?;
                if i == j {
                    let what = if htext == "r" { "rename" } else { "edge introduction" };
                    return Err(CwError::Syntax {
                        line: hline,
                        col: hcol,
                        message: format!("{what} with identical labels {i}"),
                    });
                }
                stack.push(if htext == "r" { Frame::Rename(i, j) } else { Frame::AddEdges(i, j) });
                continue;
            }
            _ => {
                return Err(CwError::Syntax {
                    line: hline,
                    col: hcol,
                    message: format!("unknown operator `{htext}`"),
                });
            }
        };

        // Feed the completed subexpression to pending parents.
        loop {
            match stack.pop() {
                None => break 'outer completed,
                Some(Frame::UnionLeft) => {
                    stack.push(Frame::UnionRight(completed));
                    break;
                }
                Some(Frame::UnionRight(left)) => {
                    p.expect(TokKind::RParen, "`)`")?;
                    nodes.push(CwOp::Union(left, completed));
                    completed = NodeId(nodes.len() - 1);
                }
                Some(Frame::Rename(from, to)) => {
                    p.expect(TokKind::RParen, "`)`")?;
                    nodes.push(CwOp::Rename { from, to, child: completed });
                    completed = NodeId(nodes.len() - 1);
                }
                Some(Frame::AddEdges(a, b)) => {
                    p.expect(TokKind::RParen, "`)`")?;
                    nodes.push(CwOp::AddEdges { a, b, child: completed });
                    completed = NodeId(nodes.len() - 1);
                }
            }
        }
    };

    if p.pos < p.toks.len() {
        return Err(p.err_here("trailing input after expression"));
    }
    Ok(CwExpression { nodes, root })
}

/// Prints the canonical surface syntax; `parse_expr(print_expr(e)) == e`.
pub fn print_expr(expr: &CwExpression) -> String {
    enum Item {
        Node(NodeId),
        Text(String),
    }
    let mut out = String::new();
    let mut stack = vec![Item::Node(expr.root())];
    while let Some(item) = stack.pop() {
        match item {
            Item::Text(s) => out.push_str(&s),
            Item::Node(id) => match expr.op(id) {
                CwOp::Introduce { id, label } => {
                    let _ = write!(out, "(v {id} {label})");
                }
                CwOp::Union(l, r) => {
                    out.push_str("(u ");
                    stack.push(Item::Text(")".into()));
                    stack.push(Item::Node(*r));
                    stack.push(Item::Text(" ".into()));
                    stack.push(Item::Node(*l));
                }
                CwOp::Rename { from, to, child } => {
                    let _ = write!(out, "(r {from} {to} ");
                    stack.push(Item::Text(")".into()));
                    stack.push(Item::Node(*child));
                }
                CwOp::AddEdges { a, b, child } => {
                    let _ = write!(out, "(e {a} {b} ");
                    stack.push(Item::Text(")".into()));
                    stack.push(Item::Node(*child));
                }
            },
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Programmatic construction
// ---------------------------------------------------------------------------

/// Builds expressions node by node; `finish` compacts the reachable subtree
/// into postorder and validates it.
#[derive(Default)]
pub struct CwBuilder {
    nodes: Vec<CwOp>,
}

impl CwBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn introduce(&mut self, id: impl Into<String>, label: Label) -> NodeId {
        self.nodes.push(CwOp::Introduce { id: id.into(), label });
        NodeId(self.nodes.len() - 1)
    }

    pub fn union(&mut self, left: NodeId, right: NodeId) -> NodeId {
        self.nodes.push(CwOp::Union(left, right));
        NodeId(self.nodes.len() - 1)
    }

    pub fn rename(&mut self, from: Label, to: Label, child: NodeId) -> NodeId {
        self.nodes.push(CwOp::Rename { from, to, child });
        NodeId(self.nodes.len() - 1)
    }

    pub fn add_edges(&mut self, a: Label, b: Label, child: NodeId) -> NodeId {
        self.nodes.push(CwOp::AddEdges { a, b, child });
        NodeId(self.nodes.len() - 1)
    }

    pub fn finish(self, root: NodeId) -> Result<CwExpression, CwError> {
        // Compact the subtree under `root` into postorder.
        let mut order: Vec<usize> = Vec::new();
        let mut state: Vec<u8> = vec![0; self.nodes.len()];
        let mut stack = vec![root.0];
        while let Some(&top) = stack.last() {
            if state[top] == 0 {
                state[top] = 1;
                match &self.nodes[top] {
                    CwOp::Introduce { .. } => {}
                    CwOp::Union(l, r) => {
                        stack.push(r.0);
                        stack.push(l.0);
                        continue;
                    }
                    CwOp::Rename { child, .. } | CwOp::AddEdges { child, .. } => {
                        stack.push(child.0);
                        continue;
                    }
                }
            }
            stack.pop();
            if state[top] == 1 {
                state[top] = 2;
                order.push(top);
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(order.len());
        for (new_idx, &old_idx) in order.iter().enumerate() {
            remap[old_idx] = new_idx;
            let op = match &self.nodes[old_idx] {
                CwOp::Introduce { id, label } => CwOp::Introduce { id: id.clone(), label: *label },
                CwOp::Union(l, r) => CwOp::Union(NodeId(remap[l.0]), NodeId(remap[r.0])),
                CwOp::Rename { from, to, child } => {
                    CwOp::Rename { from: *from, to: *to, child: NodeId(remap[child.0]) }
                }
                CwOp::AddEdges { a, b, child } => {
                    CwOp::AddEdges { a: *a, b: *b, child: NodeId(remap[child.0]) }
                }
            };
            nodes.push(op);
        }
        let expr = CwExpression { nodes, root: NodeId(order.len() - 1) };
        validate(&expr)?;
        Ok(expr)
    }
}

fn validate(expr: &CwExpression) -> Result<(), CwError> {
    let mut seen = BTreeSet::new();
    for id in expr.postorder() {
        match expr.op(id) {
            CwOp::Introduce { id: tok, label } => {
                if *label == 0 {
                    return Err(err_validation(format!("label 0 on introduce `{tok}`")));
                }
                if !seen.insert(tok.clone()) {
                    return Err(err_validation(format!("duplicate vertex id `{tok}`")));
                }
                if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
                    return Err(err_validation(format!("invalid vertex id `{tok}`")));
                }
            }
            CwOp::Rename { from, to, .. } => {
                if from == to {
                    return Err(err_validation(format!("rename with identical labels {from}")));
                }
                if *from == 0 || *to == 0 {
                    return Err(err_validation("label 0 in rename".to_string()));
                }
            }
            CwOp::AddEdges { a, b, .. } => {
                if a == b {
                    return Err(err_validation(format!(
                        "edge introduction with identical labels {a}"
                    )));
                }
                if *a == 0 || *b == 0 {
                    return Err(err_validation("label 0 in edge introduction".to_string()));
                }
            }
            CwOp::Union(..) => {}
        }
    }
    Ok(())
}

fn err_validation(message: String) -> CwError {
    CwError::Syntax { line: 0, col: 0, message }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// A graph together with a label per vertex (the labels at the expression
/// root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    /// `labels[v]` for `v in 1..=n`; index 0 unused.
    pub labels: Vec<Label>,
}

struct EvalState {
    /// `classes[i]` is the set of vertices currently labeled `i`.
    classes: Vec<BTreeSet<Vertex>>,
    edges: BTreeSet<(Vertex, Vertex)>,
}

struct EtaInfo {
    new: usize,
    old: usize,
}

fn eval_states(
    expr: &CwExpression,
    numbers: &BTreeMap<NodeId, Vertex>,
) -> (EvalState, BTreeMap<NodeId, EtaInfo>) {
    let w = expr.width();
    let mut slots: Vec<Option<EvalState>> = (0..expr.node_count()).map(|_| None).collect();
    let mut eta = BTreeMap::new();
    for id in expr.postorder() {
        let state = match expr.op(id) {
            CwOp::Introduce { label, .. } => {
                let mut classes = vec![BTreeSet::new(); w + 1];
                classes[*label].insert(numbers[&id]);
                EvalState { classes, edges: BTreeSet::new() }
            }
            CwOp::Union(l, r) => {
                let mut left = slots[l.0].take().unwrap();
                let right = slots[r.0].take().unwrap();
                for (i, class) in right.classes.into_iter().enumerate() {
                    left.classes[i].extend(class);
                }
                left.edges.extend(right.edges);
                left
            }
            CwOp::Rename { from, to, child } => {
                let mut st = slots[child.0].take().unwrap();
                let moved = std::mem::take(&mut st.classes[*from]);
                st.classes[*to].extend(moved);
                st
            }
            CwOp::AddEdges { a, b, child } => {
                let mut st = slots[child.0].take().unwrap();
                let mut info = EtaInfo { new: 0, old: 0 };
                let pairs: Vec<(Vertex, Vertex)> = st.classes[*a]
                    .iter()
                    .flat_map(|&u| st.classes[*b].iter().map(move |&v| if u < v { (u, v) } else { (v, u) }))
                    .collect();
                for e in pairs {
                    if st.edges.insert(e) {
                        info.new += 1;
                    } else {
                        info.old += 1;
                    }
                }
                eta.insert(id, info);
                st
            }
        };
        slots[id.0] = Some(state);
    }
    (slots[expr.root().0].take().unwrap(), eta)
}

/// Evaluates the expression to the labeled graph it describes.
pub fn evaluate(expr: &CwExpression) -> Result<LabeledGraph, CwError> {
    let (numbers, numeric) = expr.vertex_numbers()?;
    let n = numbers.len();
    if numeric {
        let max = numbers.values().copied().max().unwrap_or(0);
        if max != n {
            return Err(CwError::NonDenseIds {
                n,
                detail: format!("{n} vertices but ids go up to {max}"),
            });
        }
    }
    let (state, _) = eval_states(expr, &numbers);
    let graph = Graph::new(n, state.edges.iter().copied()).expect("evaluation yields a simple graph");
    let mut labels = vec![0; n + 1];
    for (i, class) in state.classes.iter().enumerate() {
        for &v in class {
            labels[v] = i;
        }
    }
    Ok(LabeledGraph { graph, labels })
}

/// Niceness verdict: `nice` iff every edge-introduction node creates only
/// edges absent before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NicenessReport {
    pub nice: bool,
    pub offenders: Vec<NodeId>,
}

pub fn check_nice(expr: &CwExpression) -> Result<NicenessReport, CwError> {
    let (numbers, _) = expr.vertex_numbers()?;
    let (_, eta) = eval_states(expr, &numbers);
    let offenders: Vec<NodeId> =
        eta.iter().filter(|(_, info)| info.old > 0).map(|(&id, _)| id).collect();
    Ok(NicenessReport { nice: offenders.is_empty(), offenders })
}

/// Deletes edge-introduction nodes that create zero new edges; errors on
/// nodes that create some-but-not-all-new edges, since those need a general
/// irredundancy transformation this crate does not provide.
pub fn normalize_nice(expr: &CwExpression) -> Result<CwExpression, CwError> {
    let (numbers, _) = expr.vertex_numbers()?;
    let (_, eta) = eval_states(expr, &numbers);
    for (id, info) in &eta {
        if info.new > 0 && info.old > 0 {
            return Err(CwError::PartiallyRedundant { node: id.index(), new: info.new, old: info.old });
        }
    }
    let mut builder = CwBuilder::new();
    let mut remap: Vec<Option<NodeId>> = vec![None; expr.node_count()];
    for id in expr.postorder() {
        let new_id = match expr.op(id) {
            CwOp::Introduce { id: tok, label } => builder.introduce(tok.clone(), *label),
            CwOp::Union(l, r) => {
                let (l, r) = (remap[l.0].unwrap(), remap[r.0].unwrap());
                builder.union(l, r)
            }
            CwOp::Rename { from, to, child } => {
                let child = remap[child.0].unwrap();
                builder.rename(*from, *to, child)
            }
            CwOp::AddEdges { a, b, child } => {
                let child = remap[child.0].unwrap();
                if eta[&id].new == 0 {
                    child // drop the redundant node
                } else {
                    builder.add_edges(*a, *b, child)
                }
            }
        };
        remap[id.0] = Some(new_id);
    }
    builder.finish(remap[expr.root().0].unwrap())
}

// ---------------------------------------------------------------------------
// Per-node metadata for the dynamic programs
// ---------------------------------------------------------------------------

/// Per-node, per-label data: the label class `V_i`, its outer neighborhood
/// `Out_i = N_G(V_i) \ N_{G_Phi}(V_i)` in the final graph, and derived
/// containment/overlap flags. All vertices of a class share the same outer
/// neighborhood, so `Out_i` is computed from one representative.
#[derive(Debug, Clone)]
pub struct NodeMeta {
    classes: Vec<Vec<Vertex>>,
    outs: Vec<Vec<Vertex>>,
    class_in_out: Vec<Vec<bool>>,
    out_overlap: Vec<Vec<bool>>,
}

impl NodeMeta {
    pub fn width(&self) -> usize {
        self.classes.len() - 1
    }

    pub fn class(&self, i: Label) -> &[Vertex] {
        &self.classes[i]
    }

    pub fn out(&self, i: Label) -> &[Vertex] {
        &self.outs[i]
    }

    pub fn class_nonempty(&self, i: Label) -> bool {
        !self.classes[i].is_empty()
    }

    pub fn out_nonempty(&self, i: Label) -> bool {
        !self.outs[i].is_empty()
    }

    /// `V_j` is contained in `Out_i` (and `V_j` is nonempty).
    pub fn class_in_out(&self, i: Label, j: Label) -> bool {
        self.class_in_out[i][j]
    }

    /// `Out_i` and `Out_j` intersect.
    pub fn outs_overlap(&self, i: Label, j: Label) -> bool {
        self.out_overlap[i][j]
    }
}

/// Metadata for every node of an expression, indexed by `NodeId`.
#[derive(Debug, Clone)]
pub struct ExprMeta {
    width: usize,
    nodes: Vec<NodeMeta>,
}

impl ExprMeta {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn node(&self, id: NodeId) -> &NodeMeta {
        &self.nodes[id.index()]
    }
}

struct MetaState {
    classes: Vec<Vec<Vertex>>, // sorted
    /// Partial adjacency in the graph built so far, per vertex.
    adj: Vec<BTreeSet<Vertex>>,
}

/// Computes `NodeMeta` for every node, checking first that the expression
/// evaluates to exactly `graph`.
pub fn compute_meta(expr: &CwExpression, graph: &Graph) -> Result<ExprMeta, CwError> {
    let labeled = evaluate(expr)?;
    check_same_graph(&labeled.graph, graph)?;
    let (numbers, numeric) = expr.vertex_numbers()?;
    if !numeric {
        let tok = expr
            .postorder()
            .find_map(|id| match expr.op(id) {
                CwOp::Introduce { id: tok, .. } if !tok.bytes().all(|b| b.is_ascii_digit()) => {
                    Some(tok.clone())
                }
                _ => None,
            })
            .unwrap_or_default();
        return Err(CwError::SymbolicId { id: tok });
    }

    let w = expr.width();
    let n = graph.n();
    let mut metas: Vec<Option<NodeMeta>> = (0..expr.node_count()).map(|_| None).collect();
    let mut slots: Vec<Option<MetaState>> = (0..expr.node_count()).map(|_| None).collect();

    for id in expr.postorder() {
        let state = match expr.op(id) {
            CwOp::Introduce { label, .. } => {
                let mut classes = vec![Vec::new(); w + 1];
                classes[*label].push(numbers[&id]);
                MetaState { classes, adj: vec![BTreeSet::new(); n + 1] }
            }
            CwOp::Union(l, r) => {
                let mut left = slots[l.0].take().unwrap();
                let right = slots[r.0].take().unwrap();
                for (i, class) in right.classes.into_iter().enumerate() {
                    left.classes[i].extend(class);
                    left.classes[i].sort_unstable();
                }
                for (v, nbrs) in right.adj.into_iter().enumerate() {
                    if !nbrs.is_empty() {
                        left.adj[v] = nbrs;
                    }
                }
                left
            }
            CwOp::Rename { from, to, child } => {
                let mut st = slots[child.0].take().unwrap();
                let moved = std::mem::take(&mut st.classes[*from]);
                st.classes[*to].extend(moved);
                st.classes[*to].sort_unstable();
                st
            }
            CwOp::AddEdges { a, b, child } => {
                let mut st = slots[child.0].take().unwrap();
                for ai in 0..st.classes[*a].len() {
                    let u = st.classes[*a][ai];
                    for bi in 0..st.classes[*b].len() {
                        let v = st.classes[*b][bi];
                        st.adj[u].insert(v);
                        st.adj[v].insert(u);
                    }
                }
                st
            }
        };
        metas[id.index()] = Some(snapshot_meta(&state, graph, w));
        slots[id.index()] = Some(state);
    }

    let nodes: Vec<NodeMeta> = metas.into_iter().map(|m| m.unwrap()).collect();
    debug_assert!((1..=w).all(|i| nodes[expr.root().index()].out(i).is_empty()));
    Ok(ExprMeta { width: w, nodes })
}

fn snapshot_meta(state: &MetaState, graph: &Graph, w: usize) -> NodeMeta {
    let mut outs = vec![Vec::new(); w + 1];
    for i in 1..=w {
        if let Some(&rep) = state.classes[i].first() {
            let out: Vec<Vertex> = graph
                .neighbors(rep)
                .iter()
                .copied()
                .filter(|u| !state.adj[rep].contains(u))
                .collect();
            // All class members share the same outer neighborhood.
            debug_assert!(state.classes[i].iter().all(|&v| {
                let o: Vec<Vertex> = graph
                    .neighbors(v)
                    .iter()
                    .copied()
                    .filter(|u| !state.adj[v].contains(u))
                    .collect();
                o == out
            }));
            outs[i] = out;
        }
    }
    let mut class_in_out = vec![vec![false; w + 1]; w + 1];
    let mut out_overlap = vec![vec![false; w + 1]; w + 1];
    for i in 1..=w {
        for j in 1..=w {
            class_in_out[i][j] =
                !state.classes[j].is_empty() && subset_sorted(&state.classes[j], &outs[i]);
            out_overlap[i][j] = intersects_sorted(&outs[i], &outs[j]);
        }
    }
    NodeMeta { classes: state.classes.clone(), outs, class_in_out, out_overlap }
}

fn check_same_graph(got: &Graph, want: &Graph) -> Result<(), CwError> {
    if got.n() != want.n() {
        return Err(CwError::GraphMismatch {
            detail: format!("expression has {} vertices, instance has {}", got.n(), want.n()),
        });
    }
    for e in got.edges() {
        if !want.adjacent(e.0, e.1) {
            return Err(CwError::GraphMismatch {
                detail: format!("edge {} {} present in expression only", e.0, e.1),
            });
        }
    }
    for e in want.edges() {
        if !got.adjacent(e.0, e.1) {
            return Err(CwError::GraphMismatch {
                detail: format!("edge {} {} present in instance only", e.0, e.1),
            });
        }
    }
    Ok(())
}

pub(crate) fn subset_sorted(sub: &[Vertex], sup: &[Vertex]) -> bool {
    let mut it = sup.iter();
    'outer: for &x in sub {
        for &y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

pub(crate) fn intersects_sorted(a: &[Vertex], b: &[Vertex]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const P3_EXPR: &str = "(e 1 2 (u (u (v 1 1) (v 3 1)) (v 2 2)))";

    #[test]
    fn parse_single_introduce() {
        let e = parse_expr("(v a 1)").unwrap();
        assert_eq!(e.node_count(), 1);
        assert!(matches!(e.op(e.root()), CwOp::Introduce { id, label: 1 } if id == "a"));
    }

    #[test]
    fn parse_evaluate_p3() {
        let e = parse_expr(P3_EXPR).unwrap();
        let lg = evaluate(&e).unwrap();
        let edges: Vec<_> = lg.graph.edges().collect();
        assert_eq!(edges, vec![(1, 2), (2, 3)]);
        assert_eq!(&lg.labels[1..], &[1, 2, 1]);
    }

    #[test]
    fn parse_rejects_identical_rename_labels() {
        let err = parse_expr("(r 1 1 (v a 1))").unwrap_err();
        match err {
            CwError::Syntax { message, .. } => assert!(message.contains("rename with identical labels")),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_duplicate_ids_and_bad_labels() {
        assert!(matches!(
            parse_expr("(u (v a 1) (v a 2))").unwrap_err(),
            CwError::Syntax { message, .. } if message.contains("duplicate vertex id")
        ));
        assert!(matches!(
            parse_expr("(v a 0)").unwrap_err(),
            CwError::Syntax { message, .. } if message.contains("label out of range")
        ));
        assert!(matches!(
            parse_expr("(e 2 2 (v a 1))").unwrap_err(),
            CwError::Syntax { message, .. } if message.contains("identical labels")
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_expr("(u (v a 1)\n  (w b 2))").unwrap_err();
        match err {
            CwError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 4);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn print_round_trip_is_structural_identity() {
        for text in [P3_EXPR, "(v a 1)", "(r 2 1 (e 1 2 (u (v 1 1) (v 2 2))))"] {
            let e = parse_expr(text).unwrap();
            let printed = print_expr(&e);
            let again = parse_expr(&printed).unwrap();
            assert_eq!(e, again);
            // printing is byte-stable
            assert_eq!(printed, print_expr(&again));
        }
    }

    #[test]
    fn evaluate_k1_and_k2() {
        let k1 = evaluate(&parse_expr("(v a 1)").unwrap()).unwrap();
        assert_eq!(k1.graph.n(), 1);
        assert_eq!(k1.graph.edge_count(), 0);
        assert_eq!(k1.labels[1], 1);

        let k2 = evaluate(&parse_expr("(e 1 2 (u (v 1 1) (v 2 2)))").unwrap()).unwrap();
        assert_eq!(k2.graph.n(), 2);
        assert!(k2.graph.adjacent(1, 2));
    }

    #[test]
    fn addedges_is_idempotent_on_existing_edges() {
        let e = parse_expr("(e 1 2 (e 1 2 (u (v 1 1) (v 2 2))))").unwrap();
        let lg = evaluate(&e).unwrap();
        assert_eq!(lg.graph.edge_count(), 1);
    }

    #[test]
    fn check_nice_flags_doubled_eta() {
        let nice = parse_expr(P3_EXPR).unwrap();
        let report = check_nice(&nice).unwrap();
        assert!(report.nice);
        assert!(report.offenders.is_empty());

        let doubled = parse_expr("(e 1 2 (e 1 2 (u (v 1 1) (v 2 2))))").unwrap();
        let report = check_nice(&doubled).unwrap();
        assert!(!report.nice);
        assert_eq!(report.offenders.len(), 1);
        // the outer node is the root
        assert_eq!(report.offenders[0], doubled.root());

        let leaf = parse_expr("(v a 1)").unwrap();
        assert!(check_nice(&leaf).unwrap().nice);
    }

    #[test]
    fn normalize_drops_fully_redundant_eta() {
        let doubled = parse_expr("(e 1 2 (e 1 2 (u (v 1 1) (v 2 2))))").unwrap();
        let normalized = normalize_nice(&doubled).unwrap();
        let single = parse_expr("(e 1 2 (u (v 1 1) (v 2 2)))").unwrap();
        assert_eq!(normalized, single);
        assert!(check_nice(&normalized).unwrap().nice);
        assert_eq!(evaluate(&normalized).unwrap(), evaluate(&doubled).unwrap());
    }

    #[test]
    fn normalize_keeps_nice_expression_unchanged() {
        let e = parse_expr(P3_EXPR).unwrap();
        assert_eq!(normalize_nice(&e).unwrap(), e);
    }

    #[test]
    fn normalize_rejects_partial_redundancy() {
        // Inner eta builds K2 on labels {1,2}; the union adds vertex 3 with
        // label 2, so the outer eta re-creates 1-2 but freshly creates 1-3.
        let e = parse_expr("(e 1 2 (u (e 1 2 (u (v 1 1) (v 2 2))) (v 3 2)))").unwrap();
        match normalize_nice(&e).unwrap_err() {
            CwError::PartiallyRedundant { new, old, .. } => {
                assert_eq!(new, 1);
                assert_eq!(old, 1);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn meta_on_p3_expression() {
        let e = parse_expr(P3_EXPR).unwrap();
        let g = evaluate(&e).unwrap().graph;
        let meta = compute_meta(&e, &g).unwrap();

        // `(u (v 1 1) (v 3 1))` is the node right below the introduce of 2.
        let union13 = e
            .postorder()
            .find(|&id| match e.op(id) {
                CwOp::Union(..) => {
                    let m = meta.node(id);
                    m.class(1) == [1, 3] && m.class(2).is_empty()
                }
                _ => false,
            })
            .expect("inner union present");
        assert_eq!(meta.node(union13).out(1), &[2]);

        // introduce of vertex 2 has Out_2 = {1, 3}
        let intro2 = e
            .postorder()
            .find(|&id| matches!(e.op(id), CwOp::Introduce { id, .. } if id == "2"))
            .unwrap();
        assert_eq!(meta.node(intro2).out(2), &[1, 3]);

        // at the root every outer neighborhood is empty
        let root = meta.node(e.root());
        assert!(root.out(1).is_empty() && root.out(2).is_empty());
    }

    #[test]
    fn meta_rejects_graph_mismatch() {
        let e = parse_expr(P3_EXPR).unwrap();
        let wrong = Graph::new(3, [(1, 2)]).unwrap();
        assert!(matches!(compute_meta(&e, &wrong), Err(CwError::GraphMismatch { .. })));
    }

    #[test]
    fn meta_rejects_symbolic_ids() {
        let e = parse_expr("(v a 1)").unwrap();
        let g = Graph::new(1, []).unwrap();
        assert!(matches!(compute_meta(&e, &g), Err(CwError::SymbolicId { .. })));
    }

    #[test]
    fn vertex_count_equals_introduce_count() {
        let e = parse_expr(P3_EXPR).unwrap();
        assert_eq!(evaluate(&e).unwrap().graph.n(), e.introduce_count());
    }

    #[test]
    fn symbolic_ids_numbered_by_leaf_order() {
        let e = parse_expr("(e 1 2 (u (v left 1) (v right 2)))").unwrap();
        let lg = evaluate(&e).unwrap();
        assert_eq!(lg.graph.n(), 2);
        assert!(lg.graph.adjacent(1, 2));
    }

    #[test]
    fn numeric_ids_must_be_dense() {
        let e = parse_expr("(u (v 2 1) (v 5 1))").unwrap();
        assert!(matches!(evaluate(&e), Err(CwError::NonDenseIds { .. })));
    }
}
