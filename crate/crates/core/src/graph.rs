//! Graphs, colorings, happiness evaluation and the canonical instance
//! text format.
//!
//! Vertices are dense integers `1..=n`; colors are integers `1..=ell`.
//! The color `0` is a sentinel meaning "unconstrained" and never appears
//! in a coloring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

/// Vertex id, `1..=n`.
pub type Vertex = usize;
/// Color, `1..=ell`; `0` is reserved as the "unconstrained" sentinel.
pub type Color = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} out of range 1..={1}")]
    VertexOutOfRange(Vertex, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("color {0} out of range 1..={1}")]
    ColorOutOfRange(Color, usize),
    #[error("duplicate color directive for vertex {0}")]
    DuplicateColor(Vertex),
    #[error("vertex count must be at least 1")]
    EmptyGraph,
    #[error("number of colors must be at least 1")]
    NoColors,
}

/// Parse failure for the instance text format, with a 1-based line number.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

/// A simple undirected graph on vertices `1..=n`.
///
/// Adjacency is kept both as sorted neighbor lists (for iteration) and as
/// an edge set (for membership tests).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<Vertex>>,
    edges: BTreeSet<(Vertex, Vertex)>,
}

impl Graph {
    /// Builds a graph from normalized or unnormalized endpoint pairs.
    /// Rejects self-loops, duplicates and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        let mut adj = vec![Vec::new(); n + 1];
        for (a, b) in edges {
            if a == 0 || a > n {
                return Err(GraphError::VertexOutOfRange(a, n));
            }
            if b == 0 || b > n {
                return Err(GraphError::VertexOutOfRange(b, n));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !set.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, adj, edges: set })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as normalized pairs `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.contains(&key)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.n
    }
}

/// A partial coloring `p: S -> [ell]` on some subset `S` of the vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialColoring {
    ell: usize,
    assignment: BTreeMap<Vertex, Color>,
}

impl PartialColoring {
    pub fn empty(ell: usize) -> Result<Self, GraphError> {
        if ell == 0 {
            return Err(GraphError::NoColors);
        }
        Ok(PartialColoring { ell, assignment: BTreeMap::new() })
    }

    pub fn new(ell: usize, pairs: impl IntoIterator<Item = (Vertex, Color)>) -> Result<Self, GraphError> {
        let mut p = Self::empty(ell)?;
        for (v, c) in pairs {
            p.assign(v, c)?;
        }
        Ok(p)
    }

    pub fn assign(&mut self, v: Vertex, c: Color) -> Result<(), GraphError> {
        if c == 0 || c > self.ell {
            return Err(GraphError::ColorOutOfRange(c, self.ell));
        }
        if self.assignment.insert(v, c).is_some() {
            return Err(GraphError::DuplicateColor(v));
        }
        Ok(())
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn get(&self, v: Vertex) -> Option<Color> {
        self.assignment.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Assigned `(vertex, color)` pairs in ascending vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (Vertex, Color)> + '_ {
        self.assignment.iter().map(|(&v, &c)| (v, c))
    }
}

/// A total coloring of the vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullColoring {
    colors: Vec<Color>, // index 0 unused
}

impl FullColoring {
    /// `colors[i]` is the color of vertex `i + 1`.
    pub fn from_vec(colors: Vec<Color>) -> Self {
        let mut v = Vec::with_capacity(colors.len() + 1);
        v.push(0);
        v.extend(colors);
        FullColoring { colors: v }
    }

    pub fn n(&self) -> usize {
        self.colors.len() - 1
    }

    pub fn color(&self, v: Vertex) -> Color {
        self.colors[v]
    }

    pub fn set(&mut self, v: Vertex, c: Color) {
        self.colors[v] = c;
    }

    /// Colors of vertices `1..=n`, in vertex order.
    pub fn as_slice(&self) -> &[Color] {
        &self.colors[1..]
    }

    /// True iff this coloring agrees with `p` on every assigned vertex.
    pub fn extends(&self, p: &PartialColoring) -> bool {
        p.iter().all(|(v, c)| v <= self.n() && self.color(v) == c)
    }
}

/// An MHV/MHE problem instance: graph, precoloring and optional target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub precoloring: PartialColoring,
    pub target: Option<u64>,
}

impl Instance {
    pub fn new(graph: Graph, precoloring: PartialColoring, target: Option<u64>) -> Result<Self, GraphError> {
        let n = graph.n();
        for (v, _) in precoloring.iter() {
            if v == 0 || v > n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
        }
        Ok(Instance { graph, precoloring, target })
    }

    pub fn ell(&self) -> usize {
        self.precoloring.ell()
    }
}

/// All vertices happy with respect to `c`: every neighbour shares the
/// vertex's color. Isolated vertices are always happy. Sorted ascending.
pub fn happy_vertices(graph: &Graph, coloring: &FullColoring) -> Vec<Vertex> {
    graph
        .vertices()
        .filter(|&v| {
            let cv = coloring.color(v);
            graph.neighbors(v).iter().all(|&u| coloring.color(u) == cv)
        })
        .collect()
}

/// All edges whose endpoints share a color, as normalized pairs, ascending.
pub fn happy_edges(graph: &Graph, coloring: &FullColoring) -> Vec<(Vertex, Vertex)> {
    graph.edges().filter(|&(u, v)| coloring.color(u) == coloring.color(v)).collect()
}

/// Parses the line-oriented instance format.
///
/// ```text
/// happy <n> <ell>      # exactly once, first non-comment line
/// edge <u> <v>
/// color <v> <a>
/// target <k>           # optional, at most once
/// ```
///
/// `#` starts a comment to end of line; blank lines are ignored.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    let mut colors: Vec<(Vertex, Color)> = Vec::new();
    let mut target: Option<u64> = None;
    let mut seen_edges = BTreeSet::new();
    let mut seen_colors = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        let mut parts = line.split_whitespace();
        let Some(keyword) = parts.next() else { continue };
        let rest: Vec<&str> = parts.collect();
        match keyword {
            "happy" => {
                if header.is_some() {
                    return Err(ParseError::new(lineno, "duplicate header line"));
                }
                let [n, ell] = expect_fields(lineno, "happy <n> <ell>", &rest)?;
                if n == 0 {
                    return Err(ParseError::new(lineno, "vertex count must be at least 1"));
                }
                if ell == 0 {
                    return Err(ParseError::new(lineno, "number of colors must be at least 1"));
                }
                header = Some((n, ell));
            }
            "edge" => {
                let (n, _) = require_header(lineno, header)?;
                let [a, b] = expect_fields(lineno, "edge <u> <v>", &rest)?;
                check_vertex(lineno, a, n)?;
                check_vertex(lineno, b, n)?;
                if a == b {
                    return Err(ParseError::new(lineno, format!("self-loop at vertex {a}")));
                }
                let key = if a < b { (a, b) } else { (b, a) };
                if !seen_edges.insert(key) {
                    return Err(ParseError::new(lineno, format!("duplicate edge {} {}", key.0, key.1)));
                }
                edges.push(key);
            }
            "color" => {
                let (n, ell) = require_header(lineno, header)?;
                let [v, c] = expect_fields(lineno, "color <v> <a>", &rest)?;
                check_vertex(lineno, v, n)?;
                if c == 0 || c > ell {
                    return Err(ParseError::new(lineno, format!("color out of range: {c} not in 1..={ell}")));
                }
                if !seen_colors.insert(v) {
                    return Err(ParseError::new(lineno, format!("duplicate color directive for vertex {v}")));
                }
                colors.push((v, c));
            }
            "target" => {
                require_header(lineno, header)?;
                let [k] = expect_fields::<1>(lineno, "target <k>", &rest)?;
                if target.is_some() {
                    return Err(ParseError::new(lineno, "duplicate target line"));
                }
                target = Some(k as u64);
            }
            other => {
                return Err(ParseError::new(lineno, format!("unknown directive `{other}`")));
            }
        }
    }

    let Some((n, ell)) = header else {
        return Err(ParseError::new(1, "missing `happy <n> <ell>` header"));
    };
    let graph = Graph::new(n, edges).map_err(|e| ParseError::new(1, e.to_string()))?;
    let precoloring =
        PartialColoring::new(ell, colors).map_err(|e| ParseError::new(1, e.to_string()))?;
    Instance::new(graph, precoloring, target).map_err(|e| ParseError::new(1, e.to_string()))
}

/// Canonical writer; `parse_instance(write_instance(x))` is structurally `x`.
pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "happy {} {}", inst.graph.n(), inst.ell());
    for (u, v) in inst.graph.edges() {
        let _ = writeln!(out, "edge {u} {v}");
    }
    for (v, c) in inst.precoloring.iter() {
        let _ = writeln!(out, "color {v} {c}");
    }
    if let Some(k) = inst.target {
        let _ = writeln!(out, "target {k}");
    }
    out
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn require_header(lineno: usize, header: Option<(usize, usize)>) -> Result<(usize, usize), ParseError> {
    header.ok_or_else(|| ParseError::new(lineno, "directive before `happy <n> <ell>` header"))
}

fn check_vertex(lineno: usize, v: usize, n: usize) -> Result<(), ParseError> {
    if v == 0 || v > n {
        return Err(ParseError::new(lineno, format!("vertex out of range: {v} not in 1..={n}")));
    }
    Ok(())
}

pub(crate) fn expect_fields<const K: usize>(
    lineno: usize,
    usage: &str,
    rest: &[&str],
) -> Result<[usize; K], ParseError> {
    if rest.len() != K {
        return Err(ParseError::new(lineno, format!("malformed line, expected `{usage}`")));
    }
    let mut out = [0usize; K];
    for (slot, tok) in out.iter_mut().zip(rest) {
        *slot = tok
            .parse::<usize>()
            .map_err(|_| ParseError::new(lineno, format!("malformed number `{tok}`")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Graph {
        Graph::new(3, [(1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn happy_vertices_on_monochromatic_clique() {
        let g = Graph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let c = FullColoring::from_vec(vec![1, 1, 1]);
        assert_eq!(happy_vertices(&g, &c), vec![1, 2, 3]);
        assert_eq!(happy_edges(&g, &c).len(), 3);
    }

    #[test]
    fn happy_vertices_on_path() {
        let c = FullColoring::from_vec(vec![1, 1, 2]);
        assert_eq!(happy_vertices(&p3(), &c), vec![1]);
        assert_eq!(happy_edges(&p3(), &c), vec![(1, 2)]);
    }

    #[test]
    fn isolated_vertex_is_happy() {
        let g = Graph::new(1, []).unwrap();
        let c = FullColoring::from_vec(vec![2]);
        assert_eq!(happy_vertices(&g, &c), vec![1]);
        assert!(happy_edges(&g, &c).is_empty());
    }

    #[test]
    fn parse_p3_fixture() {
        let text = "happy 3 2\nedge 1 2\nedge 2 3\ncolor 1 1\ncolor 3 2\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.graph, p3());
        assert_eq!(inst.ell(), 2);
        assert_eq!(inst.precoloring.get(1), Some(1));
        assert_eq!(inst.precoloring.get(3), Some(2));
        assert_eq!(inst.target, None);
    }

    #[test]
    fn parse_k1() {
        let inst = parse_instance("happy 1 1\n").unwrap();
        assert_eq!(inst.graph.n(), 1);
        assert_eq!(inst.graph.edge_count(), 0);
        assert!(inst.precoloring.is_empty());
    }

    #[test]
    fn parse_rejects_color_out_of_range() {
        let err = parse_instance("happy 3 2\ncolor 1 5\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("color out of range"), "{}", err.message);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_instance("happy 3 2\nedge 1 2\nedge 2 1\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("duplicate edge"));

        let err = parse_instance("happy 3 2\ncolor 2 1\ncolor 2 2\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("duplicate color"));

        let err = parse_instance("happy 2 1\nedge 1 5\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("vertex out of range"));

        let err = parse_instance("happy 2 1\nedgy 1 2\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn parse_accepts_comments_and_either_edge_order() {
        let text = "# fixture\nhappy 3 2  # header\n\nedge 2 1\nedge 2 3\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.graph, p3());
    }

    #[test]
    fn round_trip_is_structural_identity() {
        let text = "happy 4 3\nedge 3 1\nedge 2 4\ncolor 4 3\ntarget 2\n";
        let inst = parse_instance(text).unwrap();
        let again = parse_instance(&write_instance(&inst)).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn happy_vertex_iff_all_incident_edges_happy() {
        let g = Graph::new(4, [(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        let c = FullColoring::from_vec(vec![1, 1, 2, 1]);
        let hv = happy_vertices(&g, &c);
        let he = happy_edges(&g, &c);
        for v in g.vertices() {
            let all_edges_happy = g.neighbors(v).iter().all(|&u| {
                let key = if v < u { (v, u) } else { (u, v) };
                he.contains(&key)
            });
            assert_eq!(hv.contains(&v), all_edges_happy);
        }
    }
}
