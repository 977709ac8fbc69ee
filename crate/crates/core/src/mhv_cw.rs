//! FPT dynamic program for MHV over a `w`-expression.
//!
//! The table at each expression node is keyed by a pair of label vectors:
//! `col[i]` is the common color of label class `i` (`0` when the class is
//! empty or multicolored) and `out[i]` is the promised color of the class's
//! outer neighborhood in the final graph (`0` when unpromised). A class's
//! vertices count toward the stored value only while their happiness is
//! decidable: either they have no outer neighbors left, or `out[i]`
//! promises what those neighbors will be colored. Promises are discharged
//! at the edge-introduction nodes, where the attached class's color is
//! checked against them.
//!
//! Only states passing the `good_triple` feasibility conditions are
//! materialized; absent keys mean "no coloring realizes this state".

use std::collections::BTreeMap;

use crate::cwexpr::{compute_meta, intersects_sorted, CwExpression, CwOp, NodeMeta};
use crate::graph::{happy_vertices, Color, FullColoring, Instance};
use crate::solve::{SolveError, SolveOptions};

/// A DP state: `col` and `out` vectors indexed by label minus one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MhvState {
    pub col: Vec<Color>,
    pub out: Vec<Color>,
}

#[derive(Debug, Clone)]
enum Back {
    Leaf { vertex: usize, color: Color },
    Union { left: MhvState, right: MhvState },
    Chain { child: MhvState },
}

struct Entry {
    value: i64,
    back: Back,
}

type Table = BTreeMap<MhvState, Entry>;

/// The four feasibility conditions a state must satisfy at a node to be
/// realizable by any coloring:
///
/// 1. an empty class has `col = 0`;
/// 2. a class with no outer neighbors has `out = 0`;
/// 3. if `out_i` is promised and class `j` lies inside `Out_i`, then
///    `col_j = out_i`;
/// 4. two promised classes whose outer neighborhoods intersect promise the
///    same color.
pub fn good_triple(meta: &NodeMeta, col: &[Color], out: &[Color]) -> bool {
    let w = meta.width();
    debug_assert_eq!(col.len(), w);
    debug_assert_eq!(out.len(), w);
    for i in 1..=w {
        if !meta.class_nonempty(i) && col[i - 1] != 0 {
            return false;
        }
        if !meta.out_nonempty(i) && out[i - 1] != 0 {
            return false;
        }
    }
    for i in 1..=w {
        if out[i - 1] == 0 {
            continue;
        }
        for j in 1..=w {
            if j != i && meta.class_in_out(i, j) && col[j - 1] != out[i - 1] {
                return false;
            }
            if out[j - 1] != 0 && meta.outs_overlap(i, j) && out[i - 1] != out[j - 1] {
                return false;
            }
        }
    }
    true
}

fn raise(table: &mut Table, state: MhvState, value: i64, back: Back) {
    match table.get_mut(&state) {
        Some(entry) if entry.value >= value => {}
        Some(entry) => {
            entry.value = value;
            entry.back = back;
        }
        None => {
            table.insert(state, Entry { value, back });
        }
    }
}

pub struct MhvCwRun {
    pub optimum: usize,
    pub coloring: FullColoring,
    /// Total DP states materialized over all nodes.
    pub states: usize,
}

/// Child `out` entry at an edge-introduction node for one of the two
/// touched labels. `col_other` is the (parent = child) color of the other
/// label's class, `has_new` whether the node attaches new neighbors to this
/// class, and `closes` whether the class has no outer neighbors afterwards.
fn eta_child_out(parent_out: Color, col_other: Color, has_new: bool, closes: bool) -> Color {
    if !has_new {
        parent_out
    } else if parent_out != 0 {
        // the promise survives only if the attached class matches it
        if col_other == parent_out {
            parent_out
        } else {
            0
        }
    } else if closes {
        // the class's last outer neighbors are exactly the attached class
        col_other
    } else {
        0
    }
}

/// Solves MHV given a `w`-expression of the instance graph. Returns the
/// maximum number of simultaneously happy vertices over extensions of the
/// precoloring, a verified certificate coloring, and state statistics.
pub fn solve_mhv_cw(
    inst: &Instance,
    expr: &CwExpression,
    opts: &SolveOptions,
) -> Result<MhvCwRun, SolveError> {
    let meta = compute_meta(expr, &inst.graph)?;
    let w = meta.width();
    let ell = inst.ell();

    // dense state space bound (l+1)^(2w) must fit the budget
    let mut bound: u128 = 1;
    for _ in 0..2 * w {
        bound = bound.saturating_mul((ell + 1) as u128);
        if bound > opts.state_budget as u128 {
            return Err(SolveError::StateBudgetExceeded {
                states: usize::MAX,
                budget: opts.state_budget,
            });
        }
    }

    let (numbers, _) = expr.vertex_numbers().expect("checked by compute_meta");
    let mut tables: Vec<Table> = Vec::with_capacity(expr.node_count());
    let mut total_states = 0usize;

    for id in expr.postorder() {
        let m = meta.node(id);
        let mut table = Table::new();
        match expr.op(id) {
            CwOp::Introduce { label, .. } => {
                let i = *label;
                let v = numbers[&id];
                let col_opts: Vec<Color> = match inst.precoloring.get(v) {
                    Some(c) => vec![c],
                    None => (1..=ell).collect(),
                };
                let out_opts: Vec<Color> =
                    if m.out_nonempty(i) { (0..=ell).collect() } else { vec![0] };
                let isolated = inst.graph.degree(v) == 0;
                for &c in &col_opts {
                    for &o in &out_opts {
                        let mut col = vec![0; w];
                        let mut out = vec![0; w];
                        col[i - 1] = c;
                        out[i - 1] = o;
                        let value = i64::from(isolated || c == o);
                        debug_assert!(good_triple(m, &col, &out));
                        raise(&mut table, MhvState { col, out }, value, Back::Leaf { vertex: v, color: c });
                    }
                }
            }
            CwOp::Union(l, r) => {
                let ml = meta.node(*l);
                let mr = meta.node(*r);
                // parent state uniquely determined by a compatible child pair
                let merge = |sl: &MhvState, sr: &MhvState| -> Option<MhvState> {
                    let mut col = vec![0; w];
                    let mut out = vec![0; w];
                    for i in 0..w {
                        let ln = ml.class_nonempty(i + 1);
                        let rn = mr.class_nonempty(i + 1);
                        col[i] = match (ln, rn) {
                            (false, false) => 0,
                            (true, false) => sl.col[i],
                            (false, true) => sr.col[i],
                            (true, true) => {
                                if sl.col[i] == sr.col[i] {
                                    sl.col[i]
                                } else {
                                    0
                                }
                            }
                        };
                        out[i] = match (ln, rn) {
                            (false, false) => 0,
                            (true, false) => sl.out[i],
                            (false, true) => sr.out[i],
                            (true, true) => {
                                // both halves see the same outer neighborhood
                                if sl.out[i] != sr.out[i] {
                                    return None;
                                }
                                sl.out[i]
                            }
                        };
                    }
                    Some(MhvState { col, out })
                };
                for (sl, el) in &tables[l.index()] {
                    for (sr, er) in &tables[r.index()] {
                        let Some(state) = merge(sl, sr) else { continue };
                        if !good_triple(m, &state.col, &state.out) {
                            continue;
                        }
                        raise(
                            &mut table,
                            state,
                            el.value + er.value,
                            Back::Union { left: sl.clone(), right: sr.clone() },
                        );
                    }
                }
            }
            CwOp::Rename { from, to, child } => {
                let (i, j) = (*from, *to);
                let mc = meta.node(*child);
                let in_ = mc.class_nonempty(i);
                let jn = mc.class_nonempty(j);
                for (sc, ec) in &tables[child.index()] {
                    let col_j = match (in_, jn) {
                        (false, false) => 0,
                        (true, false) => sc.col[i - 1],
                        (false, true) => sc.col[j - 1],
                        (true, true) => {
                            if sc.col[i - 1] == sc.col[j - 1] {
                                sc.col[i - 1]
                            } else {
                                0
                            }
                        }
                    };
                    let out_j = match (in_, jn) {
                        (false, false) => 0,
                        (true, false) => sc.out[i - 1],
                        (false, true) => sc.out[j - 1],
                        (true, true) => {
                            // the merged class has a single outer neighborhood,
                            // so differing promises cannot both describe it
                            if sc.out[i - 1] != sc.out[j - 1] {
                                continue;
                            }
                            sc.out[i - 1]
                        }
                    };
                    let mut col = sc.col.clone();
                    let mut out = sc.out.clone();
                    col[i - 1] = 0;
                    out[i - 1] = 0;
                    col[j - 1] = col_j;
                    out[j - 1] = out_j;
                    if !good_triple(m, &col, &out) {
                        continue;
                    }
                    raise(&mut table, MhvState { col, out }, ec.value, Back::Chain { child: sc.clone() });
                }
            }
            CwOp::AddEdges { a, b, child } => {
                let (i, j) = (*a, *b);
                let mc = meta.node(*child);
                let has_new_i = intersects_sorted(mc.out(i), mc.class(j));
                let has_new_j = intersects_sorted(mc.out(j), mc.class(i));
                let closes_i = !m.out_nonempty(i);
                let closes_j = !m.out_nonempty(j);
                let out_i_opts: Vec<Color> = if closes_i { vec![0] } else { (0..=ell).collect() };
                let out_j_opts: Vec<Color> = if closes_j { vec![0] } else { (0..=ell).collect() };
                for (sc, ec) in &tables[child.index()] {
                    let col_i = sc.col[i - 1];
                    let col_j = sc.col[j - 1];
                    for &oi in &out_i_opts {
                        if eta_child_out(oi, col_j, has_new_i, closes_i) != sc.out[i - 1] {
                            continue;
                        }
                        for &oj in &out_j_opts {
                            if eta_child_out(oj, col_i, has_new_j, closes_j) != sc.out[j - 1] {
                                continue;
                            }
                            let mut out = sc.out.clone();
                            out[i - 1] = oi;
                            out[j - 1] = oj;
                            let col = sc.col.clone();
                            if !good_triple(m, &col, &out) {
                                continue;
                            }
                            raise(&mut table, MhvState { col, out }, ec.value, Back::Chain { child: sc.clone() });
                        }
                    }
                }
            }
        }
        total_states += table.len();
        if total_states > opts.state_budget {
            return Err(SolveError::StateBudgetExceeded {
                states: total_states,
                budget: opts.state_budget,
            });
        }
        tables.push(table);
    }

    // At the root every outer neighborhood is empty, so stored states have
    // an all-zero out vector and their values count every happy vertex.
    let root = expr.root();
    let mut best: Option<(&MhvState, i64)> = None;
    for (state, entry) in &tables[root.index()] {
        if best.map_or(true, |(_, bv)| entry.value > bv) {
            best = Some((state, entry.value));
        }
    }
    let (best_state, best_value) =
        best.expect("at least one coloring exists, so the root table is nonempty");
    let optimum = best_value as usize;

    // replay the maximizing transitions down to the introduce leaves
    let mut colors = vec![0usize; inst.graph.n() + 1];
    let mut stack: Vec<(crate::cwexpr::NodeId, MhvState)> = vec![(root, best_state.clone())];
    while let Some((node, state)) = stack.pop() {
        let entry = &tables[node.index()][&state];
        match (&entry.back, expr.op(node)) {
            (Back::Leaf { vertex, color }, _) => colors[*vertex] = *color,
            (Back::Union { left, right }, CwOp::Union(l, r)) => {
                stack.push((*l, left.clone()));
                stack.push((*r, right.clone()));
            }
            (Back::Chain { child }, CwOp::Rename { child: c, .. })
            | (Back::Chain { child }, CwOp::AddEdges { child: c, .. }) => {
                stack.push((*c, child.clone()));
            }
            _ => unreachable!("backpointer shape matches the operator"),
        }
    }
    let coloring = FullColoring::from_vec(colors[1..].to_vec());
    assert!(coloring.extends(&inst.precoloring), "certificate must extend the precoloring");
    let happy = happy_vertices(&inst.graph, &coloring).len();
    assert_eq!(happy, optimum, "certificate must achieve the reported optimum");

    Ok(MhvCwRun { optimum, coloring, states: total_states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cwexpr::parse_expr;
    use crate::graph::parse_instance;
    use crate::oracle::{brute_mhv, gen_expression, GenConfig, DEFAULT_BRUTE_BUDGET};

    const P3_EXPR: &str = "(e 1 2 (u (u (v 1 1) (v 3 1)) (v 2 2)))";

    fn p3_instance() -> Instance {
        parse_instance("happy 3 2\nedge 1 2\nedge 2 3\ncolor 1 1\ncolor 3 2\n").unwrap()
    }

    #[test]
    fn solves_p3_fixture() {
        let inst = p3_instance();
        let expr = parse_expr(P3_EXPR).unwrap();
        let run = solve_mhv_cw(&inst, &expr, &SolveOptions::default()).unwrap();
        assert_eq!(run.optimum, 1);
    }

    #[test]
    fn solves_k1() {
        let inst = parse_instance("happy 1 1\n").unwrap();
        let expr = parse_expr("(v 1 1)").unwrap();
        let run = solve_mhv_cw(&inst, &expr, &SolveOptions::default()).unwrap();
        assert_eq!(run.optimum, 1);
    }

    #[test]
    fn handles_non_nice_expressions() {
        // evaluates to the star with center 1 and leaves 2, 3
        let expr = parse_expr("(e 1 2 (u (e 1 2 (u (v 1 1) (v 2 2))) (v 3 2)))").unwrap();
        let inst =
            parse_instance("happy 3 1\nedge 1 2\nedge 1 3\ncolor 1 1\ncolor 2 1\ncolor 3 1\n")
                .unwrap();
        let run = solve_mhv_cw(&inst, &expr, &SolveOptions::default()).unwrap();
        assert_eq!(run.optimum, 3);
    }

    #[test]
    fn good_triple_spec_cases() {
        let inst = p3_instance();
        let expr = parse_expr(P3_EXPR).unwrap();
        let meta = compute_meta(&expr, &inst.graph).unwrap();
        let intro2 = expr
            .postorder()
            .find(|&id| matches!(expr.op(id), CwOp::Introduce { id, .. } if id == "2"))
            .unwrap();
        let m = meta.node(intro2);
        assert!(good_triple(m, &[0, 2], &[0, 1]));
        assert!(!good_triple(m, &[1, 2], &[0, 0])); // V_1 empty but col_1 != 0
        let root = meta.node(expr.root());
        assert!(!good_triple(root, &[0, 2], &[1, 0])); // no outer neighborhoods at the root
        assert!(!good_triple(root, &[0, 2], &[0, 1]));
    }

    #[test]
    fn rejects_mismatched_graph() {
        let inst = parse_instance("happy 3 2\nedge 1 2\n").unwrap();
        let expr = parse_expr(P3_EXPR).unwrap();
        assert!(matches!(
            solve_mhv_cw(&inst, &expr, &SolveOptions::default()),
            Err(SolveError::Expr(_))
        ));
    }

    #[test]
    fn enforces_state_budget() {
        let inst = p3_instance();
        let expr = parse_expr(P3_EXPR).unwrap();
        let opts = SolveOptions { state_budget: 2 };
        assert!(matches!(
            solve_mhv_cw(&inst, &expr, &opts),
            Err(SolveError::StateBudgetExceeded { .. })
        ));
    }

    #[test]
    fn matches_brute_force_on_random_expressions() {
        for seed in 0..60 {
            let cfg = GenConfig {
                seed,
                n: 6,
                ell: 1 + (seed % 3) as usize,
                w: 1 + (seed % 3) as usize,
                node_budget: 20,
                precolor_density: [0.0, 0.3, 0.7, 1.0][(seed % 4) as usize],
                ..GenConfig::default()
            };
            let (expr, inst) = gen_expression(&cfg);
            let run = solve_mhv_cw(&inst, &expr, &SolveOptions::default()).unwrap();
            let brute = brute_mhv(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
            assert_eq!(run.optimum, brute.optimum, "seed {seed}");
        }
    }

    #[test]
    fn extra_precoloring_never_helps() {
        for seed in 0..20 {
            let cfg = GenConfig { seed, n: 5, ell: 2, w: 2, precolor_density: 0.3, ..GenConfig::default() };
            let (expr, inst) = gen_expression(&cfg);
            let base = solve_mhv_cw(&inst, &expr, &SolveOptions::default()).unwrap().optimum;
            if let Some(v) = inst.graph.vertices().find(|&v| inst.precoloring.get(v).is_none()) {
                let mut tightened = inst.clone();
                tightened.precoloring.assign(v, 1).unwrap();
                let opt = solve_mhv_cw(&tightened, &expr, &SolveOptions::default()).unwrap().optimum;
                assert!(opt <= base, "seed {seed}");
            }
        }
    }

    #[test]
    fn optimum_is_invariant_under_color_permutation() {
        for seed in 0..20 {
            let cfg = GenConfig { seed, n: 5, ell: 3, w: 2, precolor_density: 0.5, ..GenConfig::default() };
            let (expr, inst) = gen_expression(&cfg);
            let base = solve_mhv_cw(&inst, &expr, &SolveOptions::default()).unwrap().optimum;
            // apply the cyclic permutation 1 -> 2 -> 3 -> 1
            let permuted = crate::graph::PartialColoring::new(
                3,
                inst.precoloring.iter().map(|(v, c)| (v, c % 3 + 1)),
            )
            .unwrap();
            let inst2 = Instance::new(inst.graph.clone(), permuted, None).unwrap();
            let opt = solve_mhv_cw(&inst2, &expr, &SolveOptions::default()).unwrap().optimum;
            assert_eq!(opt, base, "seed {seed}");
        }
    }
}
