//! Hardness machinery for MHE on threshold graphs: recognition by peeling,
//! a SAT-to-MHE instance generator over threshold graphs with verified
//! structural invariants, satisfying-assignment extraction, and a nice
//! 2-expression builder for threshold graphs.
//!
//! Colors encode literals: `x_j` maps to color `2j - 1`, its negation to
//! color `2j`, so an instance built from a formula on `n` variables uses
//! `ell = 2n` colors.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::cwexpr::{check_nice, evaluate, CwBuilder, CwExpression};
use crate::graph::{
    happy_edges, Color, FullColoring, Graph, Instance, ParseError, PartialColoring, Vertex,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("graph is not a threshold graph")]
    NotThreshold,
    #[error("coloring disagrees with the instance precoloring at vertex {0}")]
    ColoringMismatch(Vertex),
    #[error("coloring reaches the target but decodes to a falsifying assignment")]
    UnsoundAssignment,
}

// ---------------------------------------------------------------------------
// CNF formulas
// ---------------------------------------------------------------------------

/// CNF formula with DIMACS-style literals: `+j` for `x_j`, `-j` for its
/// negation. Clauses are nonempty and free of duplicate literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self, String> {
        if num_vars == 0 {
            return Err("formula needs at least one variable".into());
        }
        for (ci, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(format!("clause {} is empty", ci + 1));
            }
            let mut seen = BTreeSet::new();
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(format!("literal {lit} out of range in clause {}", ci + 1));
                }
                if !seen.insert(lit) {
                    return Err(format!("duplicate literal {lit} in clause {}", ci + 1));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = assignment[lit.unsigned_abs() as usize - 1];
                (lit > 0) == value
            })
        })
    }
}

/// Parses DIMACS cnf: `c` comments, a `p cnf <vars> <clauses>` header, then
/// whitespace-separated literals with `0` terminating each clause.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::new(lineno, "duplicate problem line"));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(ParseError::new(lineno, "malformed problem line, expected `p cnf <vars> <clauses>`"));
            }
            let vars: usize = parts[2]
                .parse()
                .map_err(|_| ParseError::new(lineno, format!("malformed number `{}`", parts[2])))?;
            let m: usize = parts[3]
                .parse()
                .map_err(|_| ParseError::new(lineno, format!("malformed number `{}`", parts[3])))?;
            header = Some((vars, m));
            continue;
        }
        if header.is_none() {
            return Err(ParseError::new(lineno, "clause before problem line"));
        }
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| ParseError::new(lineno, format!("malformed literal `{tok}`")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(ParseError::new(lineno, "empty clause"));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    let Some((vars, m)) = header else {
        return Err(ParseError::new(1, "missing `p cnf` problem line"));
    };
    if !current.is_empty() {
        return Err(ParseError::new(1, "unterminated clause at end of input"));
    }
    if clauses.len() != m {
        return Err(ParseError::new(1, format!("problem line declares {m} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(vars, clauses).map_err(|e| ParseError::new(1, e))
}

/// Color of a literal: `x_j -> 2j - 1`, `not x_j -> 2j`.
pub fn literal_color(lit: i64) -> Color {
    let j = lit.unsigned_abs() as usize;
    if lit > 0 {
        2 * j - 1
    } else {
        2 * j
    }
}

// ---------------------------------------------------------------------------
// Threshold recognition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CreationKind {
    Isolated,
    Universal,
}

/// Constructive witness of thresholdness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdCert {
    /// Vertices in creation order, tagged by how they were added.
    pub creation: Vec<(Vertex, CreationKind)>,
    /// Universal-created vertices in creation order; their closed
    /// neighborhoods are nested ascending along this order.
    pub clique_order: Vec<Vertex>,
    /// Isolated-created vertices: an independent set.
    pub independent: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThresholdResult {
    Threshold(ThresholdCert),
    /// Peeling got stuck; no remaining vertex is isolated or universal.
    NotThreshold { remainder: Vec<Vertex> },
}

impl ThresholdResult {
    pub fn is_threshold(&self) -> bool {
        matches!(self, ThresholdResult::Threshold(_))
    }
}

/// Recognizes threshold graphs by repeatedly peeling an isolated or
/// universal vertex (isolated preferred, highest id first). The reverse
/// peel order is a creation sequence.
pub fn is_threshold(graph: &Graph) -> ThresholdResult {
    let n = graph.n();
    let mut alive = vec![true; n + 1];
    let mut degree: Vec<usize> = (0..=n).map(|v| if v == 0 { 0 } else { graph.degree(v) }).collect();
    let mut alive_count = n;
    let mut peel: Vec<(Vertex, CreationKind)> = Vec::new();

    while alive_count > 0 {
        let mut pick: Option<(Vertex, CreationKind)> = None;
        for v in (1..=n).rev() {
            if alive[v] && degree[v] == 0 {
                pick = Some((v, CreationKind::Isolated));
                break;
            }
        }
        if pick.is_none() {
            for v in (1..=n).rev() {
                if alive[v] && degree[v] == alive_count - 1 {
                    pick = Some((v, CreationKind::Universal));
                    break;
                }
            }
        }
        let Some((v, kind)) = pick else {
            return ThresholdResult::NotThreshold {
                remainder: (1..=n).filter(|&v| alive[v]).collect(),
            };
        };
        alive[v] = false;
        alive_count -= 1;
        for &u in graph.neighbors(v) {
            if alive[u] {
                degree[u] -= 1;
            }
        }
        peel.push((v, kind));
    }

    peel.reverse();
    let clique_order: Vec<Vertex> = peel
        .iter()
        .filter(|(_, k)| *k == CreationKind::Universal)
        .map(|(v, _)| *v)
        .collect();
    let independent: Vec<Vertex> = peel
        .iter()
        .filter(|(_, k)| *k == CreationKind::Isolated)
        .map(|(v, _)| *v)
        .collect();
    debug_assert!(clique_order_is_nested(graph, &clique_order));
    ThresholdResult::Threshold(ThresholdCert { creation: peel, clique_order, independent })
}

/// Checks `N[u_1] subseteq N[u_2] subseteq ...` over closed neighborhoods.
pub fn clique_order_is_nested(graph: &Graph, order: &[Vertex]) -> bool {
    order.windows(2).all(|pair| {
        let (small, big) = (pair[0], pair[1]);
        graph
            .neighbors(small)
            .iter()
            .chain(std::iter::once(&small))
            .all(|&x| x == big || x == small || graph.adjacent(x, big))
    })
}

// ---------------------------------------------------------------------------
// SAT -> threshold MHE
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexRole {
    /// Clique vertex standing for clause `i` (1-based).
    Clause(usize),
    /// Clique vertex: copy `t` of variable `j` (both 1-based).
    Var { var: usize, copy: usize },
    /// Precolored independent-set vertex.
    Indep,
}

/// The generated MHE instance plus the bookkeeping tests need to address
/// gadget parts by role instead of raw vertex id.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    /// Threshold-graph instance; its `target` is `k`.
    pub instance: Instance,
    pub k: u64,
    /// Role per vertex, index `1..=N` (index 0 unused).
    pub roles: Vec<VertexRole>,
    /// The clique vertices `u_1..u_{m + n m^2}` in nested order.
    pub clique_order: Vec<Vertex>,
    pub formula: CnfFormula,
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Required colors for clique vertex `u_i`: the literal colors of its
/// clause, or both literal colors of its variable.
fn required_colors(f: &CnfFormula, role: VertexRole) -> Vec<Color> {
    match role {
        VertexRole::Clause(i) => {
            let mut cols: Vec<Color> =
                f.clauses[i - 1].iter().map(|&lit| literal_color(lit)).collect();
            cols.sort_unstable();
            cols
        }
        VertexRole::Var { var, .. } => vec![2 * var - 1, 2 * var],
        VertexRole::Indep => unreachable!("independent vertices have no required colors"),
    }
}

/// Builds the threshold-graph MHE instance for a CNF formula: the formula
/// is satisfiable iff the instance admits a coloring with at least `k`
/// happy edges. Structural invariants are checked before returning.
pub fn reduce_sat_to_mhe(f: &CnfFormula) -> ReductionOutput {
    let n = f.num_vars;
    let m = f.num_clauses();
    let b = m + n * m * m; // clique size
    let ell = 2 * n;

    // clique vertices: clauses first, then variable copies variable-major
    let mut roles: Vec<VertexRole> = vec![VertexRole::Indep]; // index 0 placeholder
    for i in 1..=m {
        roles.push(VertexRole::Clause(i));
    }
    for j in 1..=n {
        for t in 1..=m * m {
            roles.push(VertexRole::Var { var: j, copy: t });
        }
    }
    let clique_order: Vec<Vertex> = (1..=b).collect();

    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    for u in 1..=b {
        for v in (u + 1)..=b {
            edges.push((u, v));
        }
    }

    // pad the independent set so each required color of u_i reaches exactly
    // i * b precolored neighbors in P_i
    let mut colors: Vec<(Vertex, Color)> = Vec::new();
    let mut count: Vec<u64> = vec![0; ell + 1]; // precolored members of P_{i-1} by color
    let mut next_vertex = b + 1;
    for i in 1..=b {
        for l in required_colors(f, roles[i]) {
            let want = (i as u64) * (b as u64);
            let missing = want - count[l];
            for _ in 0..missing {
                let v = next_vertex;
                next_vertex += 1;
                roles.push(VertexRole::Indep);
                colors.push((v, l));
                // a vertex of P_i is adjacent to u_i, u_{i+1}, ..., u_b
                for u in i..=b {
                    edges.push((u, v));
                }
            }
            count[l] = want;
        }
    }

    let total = next_vertex - 1;
    let graph = Graph::new(total, edges).expect("construction yields a simple graph");
    let precoloring = PartialColoring::new(ell, colors).expect("colors lie in 1..=2n");
    let k = (b as u64) * choose2(b as u64 + 1) + (n as u64) * choose2((m * m) as u64)
        + (m as u64).pow(3);
    let instance = Instance::new(graph, precoloring, Some(k)).expect("valid instance");
    let out = ReductionOutput { instance, k, roles, clique_order, formula: f.clone() };
    if let Err(msg) = verify_reduction(&out) {
        panic!("reduction invariant violated: {msg}");
    }
    out
}

/// Checks every structural invariant of a generated instance: the graph is
/// threshold, the per-prefix color counts match, `k` matches the closed
/// formula, the color space is `2n`, and exactly the clique is uncolored.
pub fn verify_reduction(out: &ReductionOutput) -> Result<(), String> {
    let f = &out.formula;
    let n = f.num_vars;
    let m = f.num_clauses();
    let b = m + n * m * m;
    let graph = &out.instance.graph;

    if out.instance.ell() != 2 * n {
        return Err(format!("ell is {}, want {}", out.instance.ell(), 2 * n));
    }
    if out.clique_order.len() != b {
        return Err(format!("clique has {} vertices, want {b}", out.clique_order.len()));
    }
    if !is_threshold(graph).is_threshold() {
        return Err("graph is not threshold".into());
    }
    for v in graph.vertices() {
        let in_clique = v <= b;
        let colored = out.instance.precoloring.get(v).is_some();
        if in_clique && colored {
            return Err(format!("clique vertex {v} is precolored"));
        }
        if !in_clique && !colored {
            return Err(format!("independent vertex {v} is uncolored"));
        }
    }
    // prefix counting constraint for every u_i and literal color
    let mut counts: Vec<u64> = vec![0; 2 * n + 1];
    for (pos, &u_i) in out.clique_order.iter().enumerate() {
        let i = pos + 1;
        for &v in graph.neighbors(u_i) {
            // members of P_i added at step i are exactly the independent
            // neighbors of u_i not adjacent to u_{i-1}
            if v > b && (i == 1 || !graph.adjacent(out.clique_order[pos - 1], v)) {
                let c = out.instance.precoloring.get(v).ok_or("uncolored independent vertex")?;
                counts[c] += 1;
            }
        }
        let required = required_colors(f, out.roles[u_i]);
        for l in 1..=2 * n {
            let want = (i as u64) * (b as u64);
            if required.contains(&l) {
                if counts[l] != want {
                    return Err(format!("P_{i} has {} vertices of color {l}, want {want}", counts[l]));
                }
            } else if counts[l] > want - (b as u64) {
                return Err(format!("P_{i} has {} vertices of color {l}, cap {}", counts[l], want - b as u64));
            }
        }
    }
    // closed form for k, cross-checked against the per-step sum
    let per_step: u64 = (1..=b as u64).map(|i| i * b as u64).sum();
    let want_k = per_step + (n as u64) * choose2((m * m) as u64) + (m as u64).pow(3);
    if out.k != want_k {
        return Err(format!("k is {}, want {want_k}", out.k));
    }
    if out.instance.target != Some(out.k) {
        return Err("instance target differs from k".into());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractOutcome {
    /// Satisfying assignment, indexed by variable minus one.
    Assignment(Vec<bool>),
    /// The coloring falls short of the target by this many happy edges.
    Deficit(u64),
}

/// Decodes a coloring of a reduction instance. If it reaches `k` happy
/// edges, reads the assignment off the first copy of each variable and
/// checks that it satisfies the formula.
pub fn extract_assignment(
    out: &ReductionOutput,
    coloring: &FullColoring,
) -> Result<ExtractOutcome, ReductionError> {
    for (v, c) in out.instance.precoloring.iter() {
        if coloring.color(v) != c {
            return Err(ReductionError::ColoringMismatch(v));
        }
    }
    let happy = happy_edges(&out.instance.graph, coloring).len() as u64;
    if happy < out.k {
        return Ok(ExtractOutcome::Deficit(out.k - happy));
    }
    let f = &out.formula;
    let m = f.num_clauses();
    let assignment: Vec<bool> = (1..=f.num_vars)
        .map(|j| {
            let first_copy = m + (j - 1) * m * m + 1;
            coloring.color(first_copy) == literal_color(j as i64)
        })
        .collect();
    if !f.satisfied_by(&assignment) {
        return Err(ReductionError::UnsoundAssignment);
    }
    Ok(ExtractOutcome::Assignment(assignment))
}

/// Machine-readable sidecar describing the gadget layout.
pub fn write_reduction_map(out: &ReductionOutput) -> String {
    let mut s = String::new();
    for j in 1..=out.formula.num_vars {
        let _ = writeln!(s, "literal {j} + {}", 2 * j - 1);
        let _ = writeln!(s, "literal {j} - {}", 2 * j);
    }
    for (v, role) in out.roles.iter().enumerate().skip(1) {
        match role {
            VertexRole::Clause(i) => {
                let _ = writeln!(s, "clausevertex {i} {v}");
            }
            VertexRole::Var { var, copy } => {
                let _ = writeln!(s, "varvertex {var} {copy} {v}");
            }
            VertexRole::Indep => {}
        }
    }
    let _ = writeln!(s, "kvalue {}", out.k);
    s
}

// ---------------------------------------------------------------------------
// Threshold graphs have clique-width two
// ---------------------------------------------------------------------------

/// Emits a nice 2-expression for a threshold graph from its creation
/// sequence: isolated vertices are unioned in with label 1; a universal
/// vertex enters with label 2, is wired to everything, and is relabeled.
pub fn threshold_to_expr(graph: &Graph) -> Result<CwExpression, ReductionError> {
    let cert = match is_threshold(graph) {
        ThresholdResult::Threshold(cert) => cert,
        ThresholdResult::NotThreshold { .. } => return Err(ReductionError::NotThreshold),
    };
    let mut builder = CwBuilder::new();
    let mut prev: Option<crate::cwexpr::NodeId> = None;
    for &(v, kind) in &cert.creation {
        prev = Some(match (kind, prev) {
            (_, None) => builder.introduce(v.to_string(), 1),
            (CreationKind::Isolated, Some(p)) => {
                let leaf = builder.introduce(v.to_string(), 1);
                builder.union(p, leaf)
            }
            (CreationKind::Universal, Some(p)) => {
                let leaf = builder.introduce(v.to_string(), 2);
                let joined = builder.union(p, leaf);
                let wired = builder.add_edges(1, 2, joined);
                builder.rename(2, 1, wired)
            }
        });
    }
    let expr = builder.finish(prev.expect("graphs have at least one vertex")).expect("valid");
    debug_assert!(check_nice(&expr).expect("evaluates").nice);
    let evaluated = evaluate(&expr).expect("evaluates").graph;
    assert_eq!(&evaluated, graph, "creation sequence must rebuild the graph");
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cwexpr::parse_expr;
    use crate::oracle::{brute_mhe, gen_graph, GenConfig, DEFAULT_BRUTE_BUDGET};

    fn formula(n: usize, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::new(n, clauses.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn threshold_recognition_examples() {
        let p3 = Graph::new(3, [(1, 2), (2, 3)]).unwrap();
        assert!(is_threshold(&p3).is_threshold());

        let c4 = Graph::new(4, [(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        match is_threshold(&c4) {
            ThresholdResult::NotThreshold { remainder } => assert_eq!(remainder, vec![1, 2, 3, 4]),
            other => panic!("C4 recognized as threshold: {other:?}"),
        }

        let k1 = Graph::new(1, []).unwrap();
        assert!(is_threshold(&k1).is_threshold());
    }

    /// Exhaustive check of the Lemma characterization: some split into a
    /// clique (with nested closed neighborhoods) and an independent set.
    fn threshold_by_ordering_search(g: &Graph) -> bool {
        let n = g.n();
        let verts: Vec<Vertex> = (1..=n).collect();
        for mask in 0..(1u32 << n) {
            let clique: Vec<Vertex> =
                verts.iter().copied().filter(|&v| mask & (1 << (v - 1)) != 0).collect();
            let indep: Vec<Vertex> =
                verts.iter().copied().filter(|&v| mask & (1 << (v - 1)) == 0).collect();
            let clique_ok =
                clique.iter().all(|&u| clique.iter().all(|&v| u == v || g.adjacent(u, v)));
            let indep_ok = indep.iter().all(|&u| indep.iter().all(|&v| u == v || !g.adjacent(u, v)));
            if !clique_ok || !indep_ok {
                continue;
            }
            let mut order = clique.clone();
            order.sort_unstable_by_key(|&v| g.degree(v));
            if clique_order_is_nested(g, &order) {
                return true;
            }
        }
        false
    }

    #[test]
    fn peeling_agrees_with_ordering_search() {
        for seed in 0..80 {
            let cfg = GenConfig {
                seed,
                n: 1 + (seed % 6) as usize,
                edge_density: 0.1 + 0.15 * (seed % 6) as f64,
                precolor_density: 0.0,
                ..GenConfig::default()
            };
            let g = gen_graph(&cfg).graph;
            assert_eq!(
                is_threshold(&g).is_threshold(),
                threshold_by_ordering_search(&g),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn reduce_single_positive_clause() {
        let f = formula(1, &[&[1]]);
        let out = reduce_sat_to_mhe(&f);
        assert_eq!(out.clique_order.len(), 2);
        assert_eq!(out.instance.graph.n(), 10); // |K| = 2, |I| = 8
        assert_eq!(out.k, 7);
        assert_eq!(out.instance.ell(), 2);
        assert!(verify_reduction(&out).is_ok());

        let brute = brute_mhe(&out.instance, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(brute.optimum, 7);
        match extract_assignment(&out, &brute.coloring).unwrap() {
            ExtractOutcome::Assignment(sigma) => {
                assert_eq!(sigma, vec![true]);
                assert!(f.satisfied_by(&sigma));
            }
            other => panic!("expected assignment, got {other:?}"),
        }
    }

    #[test]
    fn reduce_contradiction_has_deficit() {
        let f = formula(1, &[&[1], &[-1]]);
        let out = reduce_sat_to_mhe(&f);
        assert_eq!(out.clique_order.len(), 6);
        assert_eq!(out.k, 140);

        let brute = brute_mhe(&out.instance, DEFAULT_BRUTE_BUDGET).unwrap();
        assert!(brute.optimum < 140);
        match extract_assignment(&out, &brute.coloring).unwrap() {
            ExtractOutcome::Deficit(d) => assert_eq!(d, 140 - brute.optimum),
            other => panic!("expected deficit, got {other:?}"),
        }
    }

    #[test]
    fn reduce_two_variable_formula_values() {
        let f = formula(2, &[&[1, 2], &[-1]]);
        let out = reduce_sat_to_mhe(&f);
        assert_eq!(out.clique_order.len(), 10);
        assert_eq!(out.instance.ell(), 4);
        assert_eq!(out.k, 570);
        assert!(verify_reduction(&out).is_ok());
    }

    #[test]
    fn extract_rejects_precoloring_violations() {
        let f = formula(1, &[&[1]]);
        let out = reduce_sat_to_mhe(&f);
        let n = out.instance.graph.n();
        let wrong = FullColoring::from_vec(vec![1; n]);
        // some independent vertex is precolored with color 2
        assert!(matches!(
            extract_assignment(&out, &wrong),
            Err(ReductionError::ColoringMismatch(_))
        ));
    }

    #[test]
    fn expression_for_k2_matches_creation_recipe() {
        let k2 = Graph::new(2, [(1, 2)]).unwrap();
        let expr = threshold_to_expr(&k2).unwrap();
        let expected = parse_expr("(r 2 1 (e 1 2 (u (v 1 1) (v 2 2))))").unwrap();
        assert_eq!(expr, expected);
    }

    #[test]
    fn expression_for_edgeless_graph_is_union_chain() {
        let bare = Graph::new(3, []).unwrap();
        let expr = threshold_to_expr(&bare).unwrap();
        let expected = parse_expr("(u (u (v 1 1) (v 2 1)) (v 3 1))").unwrap();
        assert_eq!(expr, expected);
        assert_eq!(evaluate(&expr).unwrap().graph, bare);
    }

    #[test]
    fn expression_for_p3_follows_leaf_leaf_center() {
        let p3 = Graph::new(3, [(1, 2), (2, 3)]).unwrap();
        match is_threshold(&p3) {
            ThresholdResult::Threshold(cert) => {
                assert_eq!(
                    cert.creation,
                    vec![
                        (1, CreationKind::Isolated),
                        (3, CreationKind::Isolated),
                        (2, CreationKind::Universal)
                    ]
                );
            }
            _ => panic!("P3 is threshold"),
        }
        let expr = threshold_to_expr(&p3).unwrap();
        assert!(check_nice(&expr).unwrap().nice);
        assert_eq!(evaluate(&expr).unwrap().graph, p3);
    }

    #[test]
    fn expressions_rebuild_reduction_graphs() {
        let f = formula(1, &[&[1]]);
        let out = reduce_sat_to_mhe(&f);
        let expr = threshold_to_expr(&out.instance.graph).unwrap();
        assert!(check_nice(&expr).unwrap().nice);
        assert_eq!(evaluate(&expr).unwrap().graph, out.instance.graph);
    }

    #[test]
    fn threshold_to_expr_rejects_cycles() {
        let c4 = Graph::new(4, [(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        assert_eq!(threshold_to_expr(&c4).unwrap_err(), ReductionError::NotThreshold);
    }

    #[test]
    fn dimacs_round_trip_and_errors() {
        let f = parse_dimacs("c tiny\np cnf 2 2\n1 2 0\n-1 0\n").unwrap();
        assert_eq!(f, formula(2, &[&[1, 2], &[-1]]));

        assert!(parse_dimacs("p cnf 1 1\n1 1 0\n").unwrap_err().message.contains("duplicate literal"));
        assert!(parse_dimacs("p cnf 1 1\n0\n").unwrap_err().message.contains("empty clause"));
        assert!(parse_dimacs("p cnf 1 2\n1 0\n").unwrap_err().message.contains("declares 2 clauses"));
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").unwrap_err().message.contains("out of range"));
    }

    #[test]
    fn sidecar_contains_roles_and_k() {
        let f = formula(1, &[&[1]]);
        let out = reduce_sat_to_mhe(&f);
        let map = write_reduction_map(&out);
        assert!(map.contains("literal 1 + 1"));
        assert!(map.contains("literal 1 - 2"));
        assert!(map.contains("clausevertex 1 1"));
        assert!(map.contains("varvertex 1 1 2"));
        assert!(map.contains("kvalue 7"));
    }
}
