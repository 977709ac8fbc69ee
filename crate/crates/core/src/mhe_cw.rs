//! XP dynamic program for MHE over a nice `w`-expression.
//!
//! States are per-(label, color) vertex counts: `counts[i][a]` is the number
//! of label-`i` vertices colored `a` in the partial graph. Because the
//! expression is nice, an edge-introduction node over labels `i, j` adds
//! exactly `sum_a counts[i][a] * counts[j][a]` happy edges. Count matrices
//! are flattened label-major so keys compare bytewise.

use std::collections::BTreeMap;

use crate::cwexpr::{check_nice, evaluate, normalize_nice, CwExpression, CwOp};
use crate::graph::{happy_edges, Color, FullColoring, Instance};
use crate::solve::{SolveError, SolveOptions};

/// Flattened `w x ell` count matrix, label-major: entry `(i, a)` lives at
/// `(i - 1) * ell + (a - 1)`.
pub type MheState = Vec<u32>;

#[derive(Debug, Clone)]
enum Back {
    Leaf { vertex: usize, color: Color },
    Union { left: MheState, right: MheState },
    Chain { child: MheState },
}

struct Entry {
    value: u64,
    back: Back,
}

type Table = BTreeMap<MheState, Entry>;

fn raise(table: &mut Table, state: MheState, value: u64, back: Back) {
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

pub struct MheCwRun {
    pub optimum: u64,
    pub coloring: FullColoring,
    /// Total DP states materialized over all nodes.
    pub states: usize,
}

/// Solves MHE given a `w`-expression of the instance graph. The expression
/// is normalized first: fully redundant edge-introduction nodes are
/// dropped, and partial redundancy aborts with `NotNice`.
pub fn solve_mhe_cw(
    inst: &Instance,
    expr: &CwExpression,
    opts: &SolveOptions,
) -> Result<MheCwRun, SolveError> {
    let expr = normalize_nice(expr).map_err(|e| match e {
        crate::cwexpr::CwError::PartiallyRedundant { .. } => SolveError::NotNice(e.to_string()),
        other => SolveError::Expr(other),
    })?;
    debug_assert!(check_nice(&expr).expect("normalized expression evaluates").nice);

    let labeled = evaluate(&expr)?;
    if labeled.graph != inst.graph {
        return Err(SolveError::Expr(crate::cwexpr::CwError::GraphMismatch {
            detail: "expression does not describe the instance graph".into(),
        }));
    }

    let w = expr.width();
    let ell = inst.ell();
    let (numbers, _) = expr.vertex_numbers()?;
    let cell = |i: usize, a: usize| (i - 1) * ell + (a - 1);

    let mut tables: Vec<Table> = Vec::with_capacity(expr.node_count());
    let mut total_states = 0usize;

    for id in expr.postorder() {
        let mut table = Table::new();
        match expr.op(id) {
            CwOp::Introduce { label, .. } => {
                let v = numbers[&id];
                let colors: Vec<Color> = match inst.precoloring.get(v) {
                    Some(c) => vec![c],
                    None => (1..=ell).collect(),
                };
                for a in colors {
                    let mut state = vec![0u32; w * ell];
                    state[cell(*label, a)] = 1;
                    raise(&mut table, state, 0, Back::Leaf { vertex: v, color: a });
                }
            }
            CwOp::Union(l, r) => {
                for (sl, el) in &tables[l.index()] {
                    for (sr, er) in &tables[r.index()] {
                        let state: MheState =
                            sl.iter().zip(sr.iter()).map(|(&x, &y)| x + y).collect();
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
                for (sc, ec) in &tables[child.index()] {
                    let mut state = sc.clone();
                    for a in 1..=ell {
                        state[cell(*to, a)] += state[cell(*from, a)];
                        state[cell(*from, a)] = 0;
                    }
                    raise(&mut table, state, ec.value, Back::Chain { child: sc.clone() });
                }
            }
            CwOp::AddEdges { a: i, b: j, child } => {
                for (sc, ec) in &tables[child.index()] {
                    let new_happy: u64 = (1..=ell)
                        .map(|a| u64::from(sc[cell(*i, a)]) * u64::from(sc[cell(*j, a)]))
                        .sum();
                    raise(&mut table, sc.clone(), ec.value + new_happy, Back::Chain {
                        child: sc.clone(),
                    });
                }
            }
        }
        #[cfg(debug_assertions)]
        {
            let expected: u32 = subtree_vertices(&expr, id) as u32;
            for state in table.keys() {
                debug_assert_eq!(state.iter().sum::<u32>(), expected);
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

    let root = expr.root();
    let mut best: Option<(&MheState, u64)> = None;
    for (state, entry) in &tables[root.index()] {
        if best.map_or(true, |(_, bv)| entry.value > bv) {
            best = Some((state, entry.value));
        }
    }
    let (best_state, optimum) =
        best.expect("at least one coloring exists, so the root table is nonempty");

    let mut colors = vec![0usize; inst.graph.n() + 1];
    let mut stack: Vec<(crate::cwexpr::NodeId, MheState)> = vec![(root, best_state.clone())];
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
    let happy = happy_edges(&inst.graph, &coloring).len() as u64;
    assert_eq!(happy, optimum, "certificate must achieve the reported optimum");

    Ok(MheCwRun { optimum, coloring, states: total_states })
}

#[cfg(debug_assertions)]
fn subtree_vertices(expr: &CwExpression, node: crate::cwexpr::NodeId) -> usize {
    let mut count = 0;
    let mut stack = vec![node];
    while let Some(id) = stack.pop() {
        match expr.op(id) {
            CwOp::Introduce { .. } => count += 1,
            CwOp::Union(l, r) => {
                stack.push(*l);
                stack.push(*r);
            }
            CwOp::Rename { child, .. } | CwOp::AddEdges { child, .. } => stack.push(*child),
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cwexpr::parse_expr;
    use crate::graph::parse_instance;
    use crate::oracle::{brute_mhe, gen_expression, GenConfig, DEFAULT_BRUTE_BUDGET};

    const P3_EXPR: &str = "(e 1 2 (u (u (v 1 1) (v 3 1)) (v 2 2)))";

    #[test]
    fn solves_p3_fixture() {
        let inst = parse_instance("happy 3 2\nedge 1 2\nedge 2 3\ncolor 1 1\ncolor 3 2\n").unwrap();
        let expr = parse_expr(P3_EXPR).unwrap();
        let run = solve_mhe_cw(&inst, &expr, &SolveOptions::default()).unwrap();
        assert_eq!(run.optimum, 1);
    }

    #[test]
    fn solves_precolored_k2() {
        let inst = parse_instance("happy 2 1\nedge 1 2\ncolor 1 1\ncolor 2 1\n").unwrap();
        let expr = parse_expr("(e 1 2 (u (v 1 1) (v 2 2)))").unwrap();
        let run = solve_mhe_cw(&inst, &expr, &SolveOptions::default()).unwrap();
        assert_eq!(run.optimum, 1);
    }

    #[test]
    fn k1_has_three_zero_valued_root_states() {
        let inst = parse_instance("happy 1 3\n").unwrap();
        let expr = parse_expr("(v 1 1)").unwrap();
        let run = solve_mhe_cw(&inst, &expr, &SolveOptions::default()).unwrap();
        assert_eq!(run.optimum, 0);
        // the solve materializes exactly the three one-hot root states
        assert_eq!(run.states, 3);
    }

    #[test]
    fn normalizes_fully_redundant_eta_and_rejects_partial() {
        let doubled = parse_expr("(e 1 2 (e 1 2 (u (v 1 1) (v 2 2))))").unwrap();
        let inst = parse_instance("happy 2 1\nedge 1 2\ncolor 1 1\ncolor 2 1\n").unwrap();
        let run = solve_mhe_cw(&inst, &doubled, &SolveOptions::default()).unwrap();
        assert_eq!(run.optimum, 1);

        let partial = parse_expr("(e 1 2 (u (e 1 2 (u (v 1 1) (v 2 2))) (v 3 2)))").unwrap();
        let star = parse_instance("happy 3 1\nedge 1 2\nedge 1 3\n").unwrap();
        assert!(matches!(
            solve_mhe_cw(&star, &partial, &SolveOptions::default()),
            Err(SolveError::NotNice(_))
        ));
    }

    #[test]
    fn matches_brute_force_on_random_expressions() {
        for seed in 100..160 {
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
            let run = solve_mhe_cw(&inst, &expr, &SolveOptions::default()).unwrap();
            let brute = brute_mhe(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
            assert_eq!(run.optimum, brute.optimum, "seed {seed}");
        }
    }

    #[test]
    fn permuting_precolor_colors_preserves_the_optimum() {
        for seed in 0..20 {
            let cfg = GenConfig { seed, n: 5, ell: 3, w: 2, precolor_density: 0.6, ..GenConfig::default() };
            let (expr, inst) = gen_expression(&cfg);
            let base = solve_mhe_cw(&inst, &expr, &SolveOptions::default()).unwrap().optimum;
            let permuted = crate::graph::PartialColoring::new(
                3,
                inst.precoloring.iter().map(|(v, c)| (v, c % 3 + 1)),
            )
            .unwrap();
            let inst2 = Instance::new(inst.graph.clone(), permuted, None).unwrap();
            let opt = solve_mhe_cw(&inst2, &expr, &SolveOptions::default()).unwrap().optimum;
            assert_eq!(opt, base, "seed {seed}");
        }
    }
}
