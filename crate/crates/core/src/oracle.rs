//! Ground-truth brute-force solvers and reproducible random generators.
//!
//! The brute solvers enumerate every extension of the precoloring and are
//! deliberately independent of the dynamic programs they are used to check.
//! Randomness comes from a small, explicitly specified generator so other
//! implementations can reproduce the exact streams.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cwexpr::{CwBuilder, CwExpression, evaluate};
use crate::graph::{
    happy_vertices, Color, FullColoring, Graph, Instance, PartialColoring, Vertex,
};
use crate::interval::IntervalInstance;

/// Default cap on the number of colorings a brute-force sweep may enumerate.
pub const DEFAULT_BRUTE_BUDGET: u64 = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute force would enumerate {colorings} colorings, budget is {budget}")]
    BudgetExceeded { colorings: u128, budget: u64 },
}

// ---------------------------------------------------------------------------
// Deterministic pseudo-random generator
// ---------------------------------------------------------------------------

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then two xor-multiply mixing
/// rounds with constants `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`.
/// Any 64-bit seed is valid. `below` reduces by plain modulo so the stream
/// is trivial to reproduce in another language.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish value in `0..n` (plain modulo; `n > 0`).
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }

    /// Value in `0.0..1.0` from the top 53 bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Inclusive range draw.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        lo + self.below((hi - lo + 1) as u64) as i64
    }
}

// ---------------------------------------------------------------------------
// Generator configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    /// Upper bound on generated vertices.
    pub n: usize,
    pub ell: usize,
    /// Maximum label for generated expressions.
    pub w: usize,
    /// Approximate number of expression nodes.
    pub node_budget: usize,
    /// Probability that a vertex is precolored.
    pub precolor_density: f64,
    /// Probability of each potential edge in `gen_graph`.
    pub edge_density: f64,
    /// Inclusive coordinate range for interval endpoints.
    pub span_lo: i64,
    pub span_hi: i64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 1,
            n: 8,
            ell: 2,
            w: 2,
            node_budget: 24,
            precolor_density: 0.3,
            edge_density: 0.3,
            span_lo: 1,
            span_hi: 20,
        }
    }
}

impl GenConfig {
    fn check(&self) {
        assert!(self.n >= 1 && self.ell >= 1 && self.w >= 1 && self.node_budget >= 1);
        assert!((0.0..=1.0).contains(&self.precolor_density));
        assert!((0.0..=1.0).contains(&self.edge_density));
        assert!(self.span_lo <= self.span_hi);
    }
}

// ---------------------------------------------------------------------------
// Brute-force solvers
// ---------------------------------------------------------------------------

pub struct BruteMhvRun {
    pub optimum: usize,
    pub coloring: FullColoring,
}

pub struct BruteMheRun {
    pub optimum: u64,
    pub coloring: FullColoring,
}

fn uncolored_vertices(inst: &Instance) -> Vec<Vertex> {
    inst.graph.vertices().filter(|&v| inst.precoloring.get(v).is_none()).collect()
}

fn check_budget(ell: usize, free: usize, budget: u64) -> Result<(), OracleError> {
    let mut colorings: u128 = 1;
    for _ in 0..free {
        colorings = colorings.saturating_mul(ell as u128);
        if colorings > budget as u128 {
            return Err(OracleError::BudgetExceeded { colorings, budget });
        }
    }
    Ok(())
}

/// Exhaustive MHV maximum over all extensions of the precoloring, with the
/// lexicographically smallest maximizing coloring as certificate.
pub fn brute_mhv(inst: &Instance, budget: u64) -> Result<BruteMhvRun, OracleError> {
    let free = uncolored_vertices(inst);
    check_budget(inst.ell(), free.len(), budget)?;
    let n = inst.graph.n();
    let mut colors = vec![0usize; n + 1];
    for (v, c) in inst.precoloring.iter() {
        colors[v] = c;
    }
    let mut best_count: Option<usize> = None;
    let mut best: Vec<Color> = Vec::new();
    let ell = inst.ell();

    // depth-first over free vertices in ascending order, colors ascending,
    // so the first strict maximum is the lexicographically smallest one
    let mut stack_color = vec![1usize; free.len() + 1];
    let mut depth = 0usize;
    loop {
        if depth == free.len() {
            let c = FullColoring::from_vec(colors[1..].to_vec());
            let count = happy_vertices(&inst.graph, &c).len();
            if best_count.map_or(true, |b| count > b) {
                best_count = Some(count);
                best = colors[1..].to_vec();
            }
            if depth == 0 {
                break;
            }
            depth -= 1;
        } else if stack_color[depth] > ell {
            colors[free[depth]] = 0;
            stack_color[depth] = 1;
            if depth == 0 {
                break;
            }
            depth -= 1;
        } else {
            colors[free[depth]] = stack_color[depth];
            stack_color[depth] += 1;
            depth += 1;
            continue;
        }
        // backtracked: advance the color at the new depth next iteration
        if free.is_empty() {
            break;
        }
    }

    Ok(BruteMhvRun {
        optimum: best_count.expect("at least one coloring enumerated"),
        coloring: FullColoring::from_vec(best),
    })
}

/// Exhaustive MHE maximum. Happy edges are counted incrementally: each
/// assignment adds the edges toward already-colored neighbors, which keeps
/// the sweep usable at the reduction sizes the tests need.
pub fn brute_mhe(inst: &Instance, budget: u64) -> Result<BruteMheRun, OracleError> {
    let free = uncolored_vertices(inst);
    check_budget(inst.ell(), free.len(), budget)?;
    let n = inst.graph.n();
    let ell = inst.ell();
    let mut colors = vec![0usize; n + 1];
    for (v, c) in inst.precoloring.iter() {
        colors[v] = c;
    }

    // happy edges entirely between precolored vertices
    let mut base: u64 = 0;
    for (u, v) in inst.graph.edges() {
        if colors[u] != 0 && colors[u] == colors[v] {
            base += 1;
        }
    }
    // per free vertex: happy-edge gain toward precolored neighbors by color,
    // and the free neighbors that are assigned earlier in the sweep
    let order_of = {
        let mut m = vec![usize::MAX; n + 1];
        for (idx, &v) in free.iter().enumerate() {
            m[v] = idx;
        }
        m
    };
    let mut pre_gain = vec![vec![0u64; ell + 1]; free.len()];
    let mut earlier_nbrs: Vec<Vec<Vertex>> = vec![Vec::new(); free.len()];
    for (idx, &v) in free.iter().enumerate() {
        for &u in inst.graph.neighbors(v) {
            if colors[u] != 0 {
                pre_gain[idx][colors[u]] += 1;
            } else if order_of[u] < idx {
                earlier_nbrs[idx].push(u);
            }
        }
    }

    let mut best_count: Option<u64> = None;
    let mut best: Vec<Color> = Vec::new();
    let mut running: Vec<u64> = vec![base; free.len() + 1];
    let mut stack_color = vec![1usize; free.len() + 1];
    let mut depth = 0usize;
    loop {
        if depth == free.len() {
            let count = running[depth];
            if best_count.map_or(true, |b| count > b) {
                best_count = Some(count);
                best = colors[1..].to_vec();
            }
            if depth == 0 {
                break;
            }
            depth -= 1;
        } else if stack_color[depth] > ell {
            colors[free[depth]] = 0;
            stack_color[depth] = 1;
            if depth == 0 {
                break;
            }
            depth -= 1;
        } else {
            let a = stack_color[depth];
            colors[free[depth]] = a;
            stack_color[depth] += 1;
            let mut gain = pre_gain[depth][a];
            for &u in &earlier_nbrs[depth] {
                if colors[u] == a {
                    gain += 1;
                }
            }
            running[depth + 1] = running[depth] + gain;
            depth += 1;
            continue;
        }
        if free.is_empty() {
            break;
        }
    }

    Ok(BruteMheRun {
        optimum: best_count.expect("at least one coloring enumerated"),
        coloring: FullColoring::from_vec(best),
    })
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

fn random_precoloring(rng: &mut SplitMix64, n: usize, ell: usize, density: f64) -> PartialColoring {
    let mut p = PartialColoring::empty(ell).unwrap();
    for v in 1..=n {
        if rng.chance(density) {
            p.assign(v, 1 + rng.below(ell as u64) as usize).unwrap();
        }
    }
    p
}

/// Generates a random *nice* `w`-expression together with the instance it
/// evaluates to. Edge-introduction nodes are only placed over label pairs
/// with no existing cross edge, so the output always passes `check_nice`.
pub fn gen_expression(cfg: &GenConfig) -> (CwExpression, Instance) {
    cfg.check();
    let mut rng = SplitMix64::new(cfg.seed);
    let w = cfg.w;

    struct Frag {
        node: crate::cwexpr::NodeId,
        classes: Vec<BTreeSet<Vertex>>,
        edges: BTreeSet<(Vertex, Vertex)>,
    }

    let mut builder = CwBuilder::new();
    let mut frags: Vec<Frag> = Vec::new();
    let mut nodes_used = 0usize;
    let mut next_vertex: Vertex = 1;

    let introduce = |builder: &mut CwBuilder,
                         frags: &mut Vec<Frag>,
                         rng: &mut SplitMix64,
                         next_vertex: &mut Vertex| {
        let label = 1 + rng.below(w as u64) as usize;
        let node = builder.introduce(next_vertex.to_string(), label);
        let mut classes = vec![BTreeSet::new(); w + 1];
        classes[label].insert(*next_vertex);
        *next_vertex += 1;
        frags.push(Frag { node, classes, edges: BTreeSet::new() });
    };

    introduce(&mut builder, &mut frags, &mut rng, &mut next_vertex);
    nodes_used += 1;

    while nodes_used + frags.len() - 1 < cfg.node_budget {
        // weighted choice among currently applicable operations
        let mut options: Vec<(u8, u64)> = Vec::new();
        if next_vertex <= cfg.n {
            options.push((0, 4)); // introduce
        }
        if frags.len() >= 2 {
            options.push((1, 2)); // union
        }
        if w >= 2 {
            options.push((2, 2)); // rename
        }
        let eta_candidates: Vec<(usize, usize, usize)> = frags
            .iter()
            .enumerate()
            .flat_map(|(fi, f)| {
                let mut cands = Vec::new();
                for i in 1..=w {
                    for j in (i + 1)..=w {
                        if !f.classes[i].is_empty()
                            && !f.classes[j].is_empty()
                            && !f.classes[i].iter().any(|&u| {
                                f.classes[j]
                                    .iter()
                                    .any(|&v| f.edges.contains(&(u.min(v), u.max(v))))
                            })
                        {
                            cands.push((fi, i, j));
                        }
                    }
                }
                cands
            })
            .collect();
        if !eta_candidates.is_empty() {
            options.push((3, 4)); // add edges
        }
        if options.is_empty() {
            break;
        }
        let total: u64 = options.iter().map(|&(_, weight)| weight).sum();
        let mut pick = rng.below(total);
        let mut op = options[0].0;
        for &(o, weight) in &options {
            if pick < weight {
                op = o;
                break;
            }
            pick -= weight;
        }
        match op {
            0 => introduce(&mut builder, &mut frags, &mut rng, &mut next_vertex),
            1 => {
                let ai = rng.below(frags.len() as u64) as usize;
                let mut bi = rng.below((frags.len() - 1) as u64) as usize;
                if bi >= ai {
                    bi += 1;
                }
                let (ai, bi) = (ai.min(bi), ai.max(bi));
                let right = frags.remove(bi);
                let left = &mut frags[ai];
                left.node = builder.union(left.node, right.node);
                for (i, class) in right.classes.into_iter().enumerate() {
                    left.classes[i].extend(class);
                }
                left.edges.extend(right.edges);
            }
            2 => {
                let fi = rng.below(frags.len() as u64) as usize;
                let from = 1 + rng.below(w as u64) as usize;
                let mut to = 1 + rng.below((w - 1) as u64) as usize;
                if to >= from {
                    to += 1;
                }
                let f = &mut frags[fi];
                f.node = builder.rename(from, to, f.node);
                let moved = std::mem::take(&mut f.classes[from]);
                f.classes[to].extend(moved);
            }
            3 => {
                let (fi, i, j) = eta_candidates[rng.below(eta_candidates.len() as u64) as usize];
                let f = &mut frags[fi];
                f.node = builder.add_edges(i, j, f.node);
                let pairs: Vec<(Vertex, Vertex)> = f.classes[i]
                    .iter()
                    .flat_map(|&u| f.classes[j].iter().map(move |&v| (u.min(v), u.max(v))))
                    .collect();
                f.edges.extend(pairs);
            }
            _ => unreachable!(),
        }
        nodes_used += 1;
    }

    while frags.len() > 1 {
        let right = frags.remove(1);
        let left = &mut frags[0];
        left.node = builder.union(left.node, right.node);
        for (i, class) in right.classes.into_iter().enumerate() {
            left.classes[i].extend(class);
        }
        left.edges.extend(right.edges);
    }

    let expr = builder.finish(frags[0].node).expect("generated expression is valid");
    let labeled = evaluate(&expr).expect("generated expression evaluates");
    let n = labeled.graph.n();
    let precoloring = random_precoloring(&mut rng, n, cfg.ell, cfg.precolor_density);
    let instance = Instance::new(labeled.graph, precoloring, None).unwrap();
    (expr, instance)
}

/// Random interval instance: spans are sorted random endpoint pairs.
pub fn gen_interval(cfg: &GenConfig) -> IntervalInstance {
    cfg.check();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut spans = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let a = rng.range_i64(cfg.span_lo, cfg.span_hi);
        let b = rng.range_i64(cfg.span_lo, cfg.span_hi);
        spans.push((a.min(b), a.max(b)));
    }
    let precoloring = random_precoloring(&mut rng, cfg.n, cfg.ell, cfg.precolor_density);
    IntervalInstance::new(cfg.n, spans, precoloring, None).unwrap()
}

/// Random graph instance with independent edges.
pub fn gen_graph(cfg: &GenConfig) -> Instance {
    cfg.check();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut edges = Vec::new();
    for u in 1..=cfg.n {
        for v in (u + 1)..=cfg.n {
            if rng.chance(cfg.edge_density) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::new(cfg.n, edges).unwrap();
    let precoloring = random_precoloring(&mut rng, cfg.n, cfg.ell, cfg.precolor_density);
    Instance::new(graph, precoloring, None).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cwexpr::{check_nice, compute_meta, print_expr};
    use crate::graph::{happy_edges, parse_instance};

    fn p3_instance() -> Instance {
        parse_instance("happy 3 2\nedge 1 2\nedge 2 3\ncolor 1 1\ncolor 3 2\n").unwrap()
    }

    #[test]
    fn brute_on_p3_fixture() {
        let inst = p3_instance();
        let mhv = brute_mhv(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(mhv.optimum, 1);
        assert!(mhv.coloring.extends(&inst.precoloring));
        assert_eq!(happy_vertices(&inst.graph, &mhv.coloring).len(), 1);

        let mhe = brute_mhe(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(mhe.optimum, 1);
        assert_eq!(happy_edges(&inst.graph, &mhe.coloring).len(), 1);
    }

    #[test]
    fn brute_on_fully_precolored_instance() {
        let inst =
            parse_instance("happy 3 2\nedge 1 2\nedge 2 3\ncolor 1 1\ncolor 2 1\ncolor 3 2\n")
                .unwrap();
        let run = brute_mhv(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(run.optimum, 1); // vertex 1 alone
        let c = FullColoring::from_vec(vec![1, 1, 2]);
        assert_eq!(run.coloring, c);
    }

    #[test]
    fn brute_budget_is_enforced() {
        let mut cfg = GenConfig { n: 30, precolor_density: 0.0, ..GenConfig::default() };
        cfg.ell = 3;
        let inst = gen_graph(&cfg);
        assert!(matches!(
            brute_mhv(&inst, 1000),
            Err(OracleError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn brute_mhe_incremental_count_matches_direct_recount() {
        for seed in 0..20 {
            let cfg = GenConfig { seed, n: 5, ell: 2, precolor_density: 0.4, ..GenConfig::default() };
            let inst = gen_graph(&cfg);
            let run = brute_mhe(&inst, DEFAULT_BRUTE_BUDGET).unwrap();
            assert_eq!(run.optimum as usize, happy_edges(&inst.graph, &run.coloring).len());
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let cfg = GenConfig { seed: 7, ..GenConfig::default() };
        let (e1, i1) = gen_expression(&cfg);
        let (e2, i2) = gen_expression(&cfg);
        assert_eq!(print_expr(&e1), print_expr(&e2));
        assert_eq!(i1, i2);
        assert_eq!(gen_interval(&cfg), gen_interval(&cfg));
        assert_eq!(gen_graph(&cfg), gen_graph(&cfg));
    }

    #[test]
    fn node_budget_one_yields_single_introduce() {
        let cfg = GenConfig { node_budget: 1, ..GenConfig::default() };
        let (e, inst) = gen_expression(&cfg);
        assert_eq!(e.node_count(), 1);
        assert_eq!(inst.graph.n(), 1);
    }

    #[test]
    fn generated_expressions_are_nice_and_meta_computable() {
        for seed in 0..40 {
            let cfg = GenConfig { seed, n: 8, w: 3, ell: 3, node_budget: 30, ..GenConfig::default() };
            let (e, inst) = gen_expression(&cfg);
            assert!(check_nice(&e).unwrap().nice, "seed {seed}");
            compute_meta(&e, &inst.graph).unwrap();
        }
    }

    #[test]
    fn density_extremes() {
        let empty = GenConfig { precolor_density: 0.0, ..GenConfig::default() };
        assert!(gen_graph(&empty).precoloring.is_empty());
        let full = GenConfig { precolor_density: 1.0, ..GenConfig::default() };
        let inst = gen_graph(&full);
        assert_eq!(inst.precoloring.len(), inst.graph.n());
        // a fully precolored instance admits exactly one extension
        let run = brute_mhv(&inst, 1).unwrap();
        assert!(run.coloring.extends(&inst.precoloring));
    }
}
