//! MHV on interval graphs in `O(ell * n^2)`: sweep-sequence construction,
//! nested-neighborhood ordering, and a dynamic program over the sweep with
//! a prefix/suffix-maxima optimization for the color transitions.
//!
//! Input is an explicit interval representation (a closed integer span per
//! vertex); adjacency is derived from span intersection. Recognition of
//! interval graphs is out of scope.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{
    expect_fields, happy_vertices, strip_comment, Color, FullColoring, Graph, ParseError,
    PartialColoring, Vertex,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntervalError {
    #[error("vertex count must be at least 1")]
    Empty,
    #[error("number of colors must be at least 1")]
    NoColors,
    #[error("span of vertex {0} has lo {1} > hi {2}")]
    SpanOrder(Vertex, i64, i64),
    #[error("wrong number of spans: got {0}, need one per vertex ({1})")]
    SpanCount(usize, usize),
    #[error("precolored vertex {0} out of range 1..={1}")]
    VertexOutOfRange(Vertex, usize),
}

/// An MHV instance over an interval representation: vertex `v` occupies the
/// closed integer span `[lo_v, hi_v]`, and `u ~ v` iff the spans intersect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalInstance {
    n: usize,
    pub precoloring: PartialColoring,
    spans: Vec<(i64, i64)>, // index 0 unused
    pub target: Option<u64>,
}

impl IntervalInstance {
    pub fn new(
        n: usize,
        spans: Vec<(i64, i64)>,
        precoloring: PartialColoring,
        target: Option<u64>,
    ) -> Result<Self, IntervalError> {
        if n == 0 {
            return Err(IntervalError::Empty);
        }
        if precoloring.ell() == 0 {
            return Err(IntervalError::NoColors);
        }
        if spans.len() != n {
            return Err(IntervalError::SpanCount(spans.len(), n));
        }
        for (idx, &(lo, hi)) in spans.iter().enumerate() {
            if lo > hi {
                return Err(IntervalError::SpanOrder(idx + 1, lo, hi));
            }
        }
        for (v, _) in precoloring.iter() {
            if v == 0 || v > n {
                return Err(IntervalError::VertexOutOfRange(v, n));
            }
        }
        let mut padded = Vec::with_capacity(n + 1);
        padded.push((0, 0));
        padded.extend(spans);
        Ok(IntervalInstance { n, precoloring, spans: padded, target })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.precoloring.ell()
    }

    pub fn span(&self, v: Vertex) -> (i64, i64) {
        self.spans[v]
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        if u == v {
            return false;
        }
        let (alo, ahi) = self.spans[u];
        let (blo, bhi) = self.spans[v];
        alo.max(blo) <= ahi.min(bhi)
    }

    /// The derived intersection graph.
    pub fn to_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for u in 1..=self.n {
            for v in (u + 1)..=self.n {
                if self.adjacent(u, v) {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(self.n, edges).expect("derived adjacency is simple")
    }
}

/// Parses the interval instance format:
///
/// ```text
/// intervals <n> <ell>
/// span <v> <lo> <hi>     # exactly one per vertex
/// color <v> <a>
/// target <k>             # optional
/// ```
pub fn parse_interval_instance(text: &str) -> Result<IntervalInstance, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut spans: Vec<Option<(i64, i64)>> = Vec::new();
    let mut colors: Vec<(Vertex, Color)> = Vec::new();
    let mut seen_colors = BTreeSet::new();
    let mut target: Option<u64> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        let mut parts = line.split_whitespace();
        let Some(keyword) = parts.next() else { continue };
        let rest: Vec<&str> = parts.collect();
        match keyword {
            "intervals" => {
                if header.is_some() {
                    return Err(ParseError::new(lineno, "duplicate header line"));
                }
                let [n, ell] = expect_fields(lineno, "intervals <n> <ell>", &rest)?;
                if n == 0 {
                    return Err(ParseError::new(lineno, "vertex count must be at least 1"));
                }
                if ell == 0 {
                    return Err(ParseError::new(lineno, "number of colors must be at least 1"));
                }
                header = Some((n, ell));
                spans = vec![None; n + 1];
            }
            "span" => {
                let (n, _) = header
                    .ok_or_else(|| ParseError::new(lineno, "directive before `intervals` header"))?;
                if rest.len() != 3 {
                    return Err(ParseError::new(lineno, "malformed line, expected `span <v> <lo> <hi>`"));
                }
                let v: usize = rest[0]
                    .parse()
                    .map_err(|_| ParseError::new(lineno, format!("malformed number `{}`", rest[0])))?;
                if v == 0 || v > n {
                    return Err(ParseError::new(lineno, format!("vertex out of range: {v} not in 1..={n}")));
                }
                let lo: i64 = rest[1]
                    .parse()
                    .map_err(|_| ParseError::new(lineno, format!("malformed number `{}`", rest[1])))?;
                let hi: i64 = rest[2]
                    .parse()
                    .map_err(|_| ParseError::new(lineno, format!("malformed number `{}`", rest[2])))?;
                if lo > hi {
                    return Err(ParseError::new(lineno, format!("span of vertex {v} has lo {lo} > hi {hi}")));
                }
                if spans[v].replace((lo, hi)).is_some() {
                    return Err(ParseError::new(lineno, format!("duplicate span for vertex {v}")));
                }
            }
            "color" => {
                let (n, ell) = header
                    .ok_or_else(|| ParseError::new(lineno, "directive before `intervals` header"))?;
                let [v, c] = expect_fields(lineno, "color <v> <a>", &rest)?;
                if v == 0 || v > n {
                    return Err(ParseError::new(lineno, format!("vertex out of range: {v} not in 1..={n}")));
                }
                if c == 0 || c > ell {
                    return Err(ParseError::new(lineno, format!("color out of range: {c} not in 1..={ell}")));
                }
                if !seen_colors.insert(v) {
                    return Err(ParseError::new(lineno, format!("duplicate color directive for vertex {v}")));
                }
                colors.push((v, c));
            }
            "target" => {
                header.ok_or_else(|| ParseError::new(lineno, "directive before `intervals` header"))?;
                let [k] = expect_fields::<1>(lineno, "target <k>", &rest)?;
                if target.is_some() {
                    return Err(ParseError::new(lineno, "duplicate target line"));
                }
                target = Some(k as u64);
            }
            other => return Err(ParseError::new(lineno, format!("unknown directive `{other}`"))),
        }
    }

    let Some((n, ell)) = header else {
        return Err(ParseError::new(1, "missing `intervals <n> <ell>` header"));
    };
    let mut flat = Vec::with_capacity(n);
    for v in 1..=n {
        match spans[v] {
            Some(s) => flat.push(s),
            None => return Err(ParseError::new(1, format!("missing span for vertex {v}"))),
        }
    }
    let precoloring =
        PartialColoring::new(ell, colors).map_err(|e| ParseError::new(1, e.to_string()))?;
    IntervalInstance::new(n, flat, precoloring, target).map_err(|e| ParseError::new(1, e.to_string()))
}

pub fn write_interval_instance(inst: &IntervalInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "intervals {} {}", inst.n(), inst.ell());
    for v in 1..=inst.n() {
        let (lo, hi) = inst.span(v);
        let _ = writeln!(out, "span {v} {lo} {hi}");
    }
    for (v, c) in inst.precoloring.iter() {
        let _ = writeln!(out, "color {v} {c}");
    }
    if let Some(k) = inst.target {
        let _ = writeln!(out, "target {k}");
    }
    out
}

// ---------------------------------------------------------------------------
// Sweep sequence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepEvent {
    Add(Vertex),
    Remove(Vertex),
}

/// The sequence `S_0..S_2n` of single-vertex add/remove snapshots whose
/// co-membership equals span-intersection adjacency. Vertex `v` belongs to
/// `S_i` exactly for `first_idx(v) <= i <= last_idx(v) - 1`.
#[derive(Debug, Clone)]
pub struct SweepSequence {
    events: Vec<SweepEvent>,
    first_idx: Vec<usize>, // index 0 unused
    last_idx: Vec<usize>,
}

impl SweepSequence {
    /// Number of snapshots minus one, i.e. `2n`.
    pub fn steps(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[SweepEvent] {
        &self.events
    }

    pub fn first_idx(&self, v: Vertex) -> usize {
        self.first_idx[v]
    }

    pub fn last_idx(&self, v: Vertex) -> usize {
        self.last_idx[v]
    }

    pub fn contains(&self, v: Vertex, i: usize) -> bool {
        self.first_idx[v] <= i && i + 1 <= self.last_idx[v]
    }

    /// Members of `S_i`, ascending by vertex id.
    pub fn set_at(&self, i: usize) -> Vec<Vertex> {
        (1..self.first_idx.len()).filter(|&v| self.contains(v, i)).collect()
    }
}

/// Builds the sweep sequence: events sorted by coordinate, additions before
/// removals at equal coordinates (touching closed spans must co-occur),
/// ties within a kind broken by vertex id.
pub fn build_sequence(inst: &IntervalInstance) -> SweepSequence {
    let n = inst.n();
    // (coordinate, kind, vertex) with add = 0 < remove = 1
    let mut raw: Vec<(i64, u8, Vertex)> = Vec::with_capacity(2 * n);
    for v in 1..=n {
        let (lo, hi) = inst.span(v);
        raw.push((lo, 0, v));
        raw.push((hi, 1, v));
    }
    raw.sort_unstable();
    let mut events = Vec::with_capacity(2 * n);
    let mut first_idx = vec![0; n + 1];
    let mut last_idx = vec![0; n + 1];
    for (step, &(_, kind, v)) in raw.iter().enumerate() {
        if kind == 0 {
            events.push(SweepEvent::Add(v));
            first_idx[v] = step + 1;
        } else {
            events.push(SweepEvent::Remove(v));
            last_idx[v] = step + 1;
        }
    }
    let seq = SweepSequence { events, first_idx, last_idx };
    debug_assert!(sequence_is_sound(inst, &seq));
    seq
}

/// Checks the defining properties of the sweep sequence against the span
/// representation. Quadratic; used in debug assertions and tests.
pub fn sequence_is_sound(inst: &IntervalInstance, seq: &SweepSequence) -> bool {
    let n = inst.n();
    if seq.steps() != 2 * n || !seq.set_at(0).is_empty() || !seq.set_at(2 * n).is_empty() {
        return false;
    }
    for v in 1..=n {
        if !(0 < seq.first_idx(v) && seq.first_idx(v) < seq.last_idx(v) && seq.last_idx(v) <= 2 * n)
        {
            return false;
        }
    }
    // co-membership in some S_i is equivalent to span intersection
    for u in 1..=n {
        for v in (u + 1)..=n {
            let co_member = seq.first_idx(u).max(seq.first_idx(v))
                < seq.last_idx(u).min(seq.last_idx(v));
            if co_member != inst.adjacent(u, v) {
                return false;
            }
        }
    }
    true
}

/// Vertices of `S_i` ordered so closed neighborhoods in `G_i` are nested,
/// largest first: ascending by `first_idx`.
pub fn nested_order(seq: &SweepSequence, i: usize) -> Vec<Vertex> {
    let mut members = seq.set_at(i);
    members.sort_unstable_by_key(|&v| seq.first_idx(v));
    members
}

// ---------------------------------------------------------------------------
// Dynamic program
// ---------------------------------------------------------------------------

const NEG: i64 = i64::MIN / 4;

/// DP state at a sweep index: `h` happy vertices inside the current clique,
/// `a` the color of its longest-living member, `u` the longest-living member
/// colored differently (if any). `h > 0` forces `u = None`, which is what
/// keeps the table at `O(ell * n)` entries per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    /// `S_i` empty: `(0, -1, -1)`.
    Empty,
    /// `S_i` monochromatic as far as tracked: `(h, a, -1)`.
    Mono { h: usize, a: Color },
    /// Two colors present, no happy vertices: `(0, a, u)`.
    Multi { a: Color, u: Vertex },
}

/// Per-step value table: a dense `(h, a)` block for `u = -1` states and a
/// dense `(a, u)` block for the two-colored states.
#[derive(Clone)]
struct StepTable {
    members: Vec<Vertex>, // sorted by id
    ell: usize,
    empty_val: i64,
    mono: Vec<i64>,  // (|S|+1) * ell, index h * ell + (a-1)
    multi: Vec<i64>, // ell * |S|, index (a-1) * |S| + pos(u)
}

impl StepTable {
    fn new(members: Vec<Vertex>, ell: usize) -> Self {
        let m = members.len();
        StepTable {
            members,
            ell,
            empty_val: NEG,
            mono: vec![NEG; (m + 1) * ell],
            multi: vec![NEG; ell * m],
        }
    }

    fn pos_of(&self, v: Vertex) -> usize {
        self.members.binary_search(&v).expect("vertex in members")
    }

    fn get(&self, s: State) -> i64 {
        match s {
            State::Empty => self.empty_val,
            State::Mono { h, a } => self.mono[h * self.ell + (a - 1)],
            State::Multi { a, u } => self.multi[(a - 1) * self.members.len() + self.pos_of(u)],
        }
    }

    fn raise(&mut self, s: State, val: i64) {
        let slot = match s {
            State::Empty => &mut self.empty_val,
            State::Mono { h, a } => &mut self.mono[h * self.ell + (a - 1)],
            State::Multi { a, u } => {
                let pos = self.members.binary_search(&u).expect("vertex in members");
                &mut self.multi[(a - 1) * self.members.len() + pos]
            }
        };
        if val > *slot {
            *slot = val;
        }
    }

    fn finite_count(&self) -> usize {
        let base = usize::from(self.empty_val > NEG);
        base + self.mono.iter().filter(|&&v| v > NEG).count()
            + self.multi.iter().filter(|&&v| v > NEG).count()
    }

    /// Visits finite states in canonical order: empty, then `(h, a)`
    /// ascending, then `(a, u)` ascending by color and member position.
    fn for_each(&self, mut f: impl FnMut(State, i64)) {
        if self.empty_val > NEG {
            f(State::Empty, self.empty_val);
        }
        for h in 0..=self.members.len() {
            for a in 1..=self.ell {
                let val = self.mono[h * self.ell + (a - 1)];
                if val > NEG {
                    f(State::Mono { h, a }, val);
                }
            }
        }
        for a in 1..=self.ell {
            for (pos, &u) in self.members.iter().enumerate() {
                let val = self.multi[(a - 1) * self.members.len() + pos];
                if val > NEG {
                    f(State::Multi { a, u }, val);
                }
            }
        }
    }
}

pub struct IntervalRun {
    pub optimum: usize,
    pub coloring: FullColoring,
    /// Total finite DP entries materialized across all sweep steps.
    pub states: usize,
}

struct Dp<'a> {
    inst: &'a IntervalInstance,
    seq: &'a SweepSequence,
    ell: usize,
}

/// One admissible successor of a state under the step's event.
struct Succ {
    state: State,
    delta: i64,
    /// Color given to the added vertex, if the event is an addition.
    color: Option<Color>,
}

impl<'a> Dp<'a> {
    fn admissible_colors(&self, v: Vertex) -> Vec<Color> {
        match self.inst.precoloring.get(v) {
            Some(c) => vec![c],
            None => (1..=self.ell).collect(),
        }
    }

    /// Successors of state `s` for the transition `S_i -> S_{i+1}`, in a
    /// fixed deterministic order. For additions with `last_idx(v)` largest,
    /// the `b != a` family is not enumerated here (the forward pass folds it
    /// with prefix/suffix maxima); `collapsed_targets` handles it.
    fn successors(&self, i: usize, table: &StepTable, s: State) -> Vec<Succ> {
        let mut out = Vec::new();
        match self.seq.events()[i] {
            SweepEvent::Remove(v) => {
                let order = nested_order(self.seq, i);
                let pos_v = order.iter().position(|&x| x == v).expect("removed vertex in S_i");
                match s {
                    State::Empty => unreachable!("removal from empty set"),
                    State::Mono { h, a } => {
                        // happy members are exactly the last h in nested order
                        let h2 = if pos_v >= order.len() - h { h - 1 } else { h };
                        let state = if order.len() == 1 {
                            State::Empty
                        } else {
                            State::Mono { h: h2, a }
                        };
                        out.push(Succ { state, delta: 0, color: None });
                    }
                    State::Multi { a, u } => {
                        let state = if u == v { State::Mono { h: 0, a } } else { State::Multi { a, u } };
                        out.push(Succ { state, delta: 0, color: None });
                    }
                }
            }
            SweepEvent::Add(v) => {
                if table.members.is_empty() {
                    debug_assert_eq!(s, State::Empty);
                    for b in self.admissible_colors(v) {
                        out.push(Succ { state: State::Mono { h: 1, a: b }, delta: 1, color: Some(b) });
                    }
                    return out;
                }
                let w = *table
                    .members
                    .iter()
                    .max_by_key(|&&x| self.seq.last_idx(x))
                    .expect("nonempty");
                let r_v = self.seq.last_idx(v);
                let r_w = self.seq.last_idx(w);
                let pre = self.inst.precoloring.get(v);
                match s {
                    State::Empty => unreachable!("empty state with nonempty members"),
                    State::Mono { h, a } => {
                        if pre.is_none() || pre == Some(a) {
                            // b = a: v joins the monochromatic clique
                            out.push(Succ {
                                state: State::Mono { h: h + 1, a },
                                delta: 1,
                                color: Some(a),
                            });
                        }
                        if r_v < r_w {
                            if let Some(b) = self.other_color(pre, a) {
                                // b != a: all h happy members break
                                out.push(Succ {
                                    state: State::Multi { a, u: v },
                                    delta: -(h as i64),
                                    color: Some(b),
                                });
                            }
                        }
                    }
                    State::Multi { a, u } => {
                        if pre.is_none() || pre == Some(a) {
                            out.push(Succ { state: State::Multi { a, u }, delta: 0, color: Some(a) });
                        }
                        if r_v < r_w {
                            if let Some(b) = self.other_color(pre, a) {
                                let u2 = if self.seq.last_idx(u) > r_v { u } else { v };
                                out.push(Succ { state: State::Multi { a, u: u2 }, delta: 0, color: Some(b) });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Smallest concrete color different from `a` compatible with the
    /// precoloring, if the `b != a` group is admissible at all.
    fn other_color(&self, pre: Option<Color>, a: Color) -> Option<Color> {
        match pre {
            Some(c) => (c != a).then_some(c),
            None => {
                if self.ell >= 2 {
                    Some(if a == 1 { 2 } else { 1 })
                } else {
                    None
                }
            }
        }
    }

    /// Forward step `S_i -> S_{i+1}`.
    fn advance(&self, i: usize, table: &StepTable) -> StepTable {
        let mut members = table.members.clone();
        let added = match self.seq.events()[i] {
            SweepEvent::Add(v) => {
                let pos = members.binary_search(&v).unwrap_err();
                members.insert(pos, v);
                Some(v)
            }
            SweepEvent::Remove(v) => {
                let pos = members.binary_search(&v).unwrap();
                members.remove(pos);
                None
            }
        };
        let mut next = StepTable::new(members, self.ell);

        table.for_each(|s, val| {
            for succ in self.successors(i, table, s) {
                next.raise(succ.state, val + succ.delta);
            }
        });

        // The b != a family when the added vertex outlives everything: all
        // sources with a != b collapse into (0, b, w); fold the max over
        // source colors with prefix/suffix maxima.
        if let Some(v) = added {
            if !table.members.is_empty() {
                let w = *table.members.iter().max_by_key(|&&x| self.seq.last_idx(x)).unwrap();
                if self.seq.last_idx(v) > self.seq.last_idx(w) {
                    // best[a] = max over sources with that a of (value - h)
                    let mut best = vec![NEG; self.ell + 1];
                    table.for_each(|s, val| match s {
                        State::Mono { h, a } => best[a] = best[a].max(val - h as i64),
                        State::Multi { a, .. } => best[a] = best[a].max(val),
                        State::Empty => {}
                    });
                    let mut prefix = vec![NEG; self.ell + 2];
                    let mut suffix = vec![NEG; self.ell + 2];
                    for a in 1..=self.ell {
                        prefix[a] = prefix[a - 1].max(best[a]);
                    }
                    for a in (1..=self.ell).rev() {
                        suffix[a] = suffix[a + 1].max(best[a]);
                    }
                    let targets: Vec<Color> = match self.inst.precoloring.get(v) {
                        Some(c) => vec![c],
                        None => (1..=self.ell).collect(),
                    };
                    for b in targets {
                        let cand = prefix[b - 1].max(suffix[b + 1]);
                        if cand > NEG {
                            next.raise(State::Multi { a: b, u: w }, cand);
                        }
                    }
                }
            }
        }
        next
    }

    /// Finds the canonical predecessor of `target` (valued `target_val`)
    /// under the transition out of step `i`.
    fn predecessor(
        &self,
        i: usize,
        table: &StepTable,
        target: State,
        target_val: i64,
    ) -> (State, Option<Color>) {
        let mut found: Option<(State, Option<Color>)> = None;
        table.for_each(|s, val| {
            if found.is_some() {
                return;
            }
            for succ in self.successors(i, table, s) {
                if succ.state == target && val + succ.delta == target_val {
                    found = Some((s, succ.color));
                    return;
                }
            }
            // collapsed b != a family
            if let SweepEvent::Add(v) = self.seq.events()[i] {
                if !table.members.is_empty() {
                    let w = *table.members.iter().max_by_key(|&&x| self.seq.last_idx(x)).unwrap();
                    if self.seq.last_idx(v) > self.seq.last_idx(w) {
                        if let State::Multi { a: b, u } = target {
                            if u == w {
                                let (sa, delta) = match s {
                                    State::Mono { h, a } => (a, -(h as i64)),
                                    State::Multi { a, .. } => (a, 0),
                                    State::Empty => return,
                                };
                                let pre_ok = match self.inst.precoloring.get(v) {
                                    Some(c) => c == b,
                                    None => true,
                                };
                                if sa != b && pre_ok && val + delta == target_val {
                                    found = Some((s, Some(b)));
                                }
                            }
                        }
                    }
                }
            }
        });
        found.expect("every table state on the optimal path has a predecessor")
    }
}

/// Solves MHV on an interval instance. The optimum is the value at the
/// final empty snapshot; the certificate is replayed from sqrt-spaced
/// checkpoints and re-verified before returning.
pub fn solve_mhv_interval(inst: &IntervalInstance) -> IntervalRun {
    let seq = build_sequence(inst);
    let dp = Dp { inst, seq: &seq, ell: inst.ell() };
    let steps = seq.steps();
    let block = ((steps as f64).sqrt().ceil() as usize).max(1);

    let mut cur = StepTable::new(Vec::new(), inst.ell());
    cur.empty_val = 0;
    let mut states = cur.finite_count();
    let mut checkpoints: Vec<StepTable> = vec![cur.clone()];
    for i in 0..steps {
        cur = dp.advance(i, &cur);
        states += cur.finite_count();
        if (i + 1) % block == 0 && i + 1 < steps {
            checkpoints.push(cur.clone());
        }
    }
    let opt_val = cur.get(State::Empty);
    debug_assert!(opt_val >= 0);
    let optimum = opt_val as usize;

    // Backward replay, one sqrt-sized segment of step tables at a time.
    let mut colors = vec![0; inst.n() + 1];
    let mut target = State::Empty;
    let mut target_val = opt_val;
    let mut segment: Vec<StepTable> = Vec::new();
    let mut segment_start = usize::MAX;
    for i in (0..steps).rev() {
        let seg = i / block;
        if segment_start != seg * block {
            segment_start = seg * block;
            let upper = (segment_start + block - 1).min(steps - 1);
            segment.clear();
            segment.push(checkpoints[seg].clone());
            for j in segment_start..upper {
                let next = dp.advance(j, &segment[j - segment_start]);
                segment.push(next);
            }
        }
        let table = &segment[i - segment_start];
        let (state, color) = dp.predecessor(i, table, target, target_val);
        if let SweepEvent::Add(v) = seq.events()[i] {
            colors[v] = color.expect("addition records a color");
        }
        target_val = table.get(state);
        target = state;
    }
    debug_assert_eq!(target, State::Empty);
    debug_assert_eq!(target_val, 0);

    let coloring = FullColoring::from_vec(colors[1..].to_vec());
    assert!(coloring.extends(&inst.precoloring), "certificate must extend the precoloring");
    let graph = inst.to_graph();
    let happy = happy_vertices(&graph, &coloring).len();
    assert_eq!(happy, optimum, "certificate must achieve the reported optimum");
    IntervalRun { optimum, coloring, states }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PartialColoring;

    fn inst(n: usize, ell: usize, spans: &[(i64, i64)], colors: &[(usize, usize)]) -> IntervalInstance {
        let p = PartialColoring::new(ell, colors.iter().copied()).unwrap();
        IntervalInstance::new(n, spans.to_vec(), p, None).unwrap()
    }

    fn p3_spans() -> IntervalInstance {
        inst(3, 2, &[(1, 3), (2, 5), (4, 6)], &[(1, 1), (3, 2)])
    }

    #[test]
    fn sequence_on_p3_spans() {
        let seq = build_sequence(&p3_spans());
        let sets: Vec<Vec<usize>> = (0..=6).map(|i| seq.set_at(i)).collect();
        assert_eq!(
            sets,
            vec![vec![], vec![1], vec![1, 2], vec![2], vec![2, 3], vec![3], vec![]]
        );
        assert!(sequence_is_sound(&p3_spans(), &seq));
    }

    #[test]
    fn sequence_on_singleton() {
        let one = inst(1, 1, &[(5, 5)], &[]);
        let seq = build_sequence(&one);
        assert_eq!(seq.set_at(0), Vec::<usize>::new());
        assert_eq!(seq.set_at(1), vec![1]);
        assert_eq!(seq.set_at(2), Vec::<usize>::new());
    }

    #[test]
    fn disjoint_spans_never_cooccur() {
        let two = inst(2, 2, &[(1, 1), (3, 3)], &[]);
        let seq = build_sequence(&two);
        assert!((0..=4).all(|i| seq.set_at(i).len() <= 1));
        assert_eq!(two.to_graph().edge_count(), 0);
    }

    #[test]
    fn touching_spans_are_adjacent() {
        let touching = inst(2, 1, &[(1, 3), (3, 5)], &[]);
        let seq = build_sequence(&touching);
        assert!(sequence_is_sound(&touching, &seq));
        assert!(touching.adjacent(1, 2));
        assert!((0..=4).any(|i| seq.set_at(i) == vec![1, 2]));
    }

    #[test]
    fn nested_order_examples() {
        let seq = build_sequence(&p3_spans());
        assert_eq!(nested_order(&seq, 2), vec![1, 2]);
        assert_eq!(nested_order(&seq, 3), vec![2]);

        let k3 = inst(3, 1, &[(1, 4), (2, 5), (3, 6)], &[]);
        let seq = build_sequence(&k3);
        assert_eq!(nested_order(&seq, 3), vec![1, 2, 3]);
    }

    #[test]
    fn nested_order_has_nested_closed_neighborhoods() {
        let cases = [
            inst(3, 2, &[(1, 3), (2, 5), (4, 6)], &[]),
            inst(4, 2, &[(1, 10), (2, 4), (3, 8), (5, 9)], &[]),
            inst(5, 2, &[(1, 2), (2, 6), (3, 4), (5, 8), (6, 9)], &[]),
        ];
        for inst in &cases {
            let seq = build_sequence(inst);
            let g = inst.to_graph();
            for i in 0..=seq.steps() {
                let order = nested_order(&seq, i);
                // G_i is induced by every vertex already introduced
                let present: Vec<usize> =
                    (1..=inst.n()).filter(|&v| seq.first_idx(v) <= i).collect();
                let closed = |v: usize| -> Vec<usize> {
                    let mut nb: Vec<usize> = present
                        .iter()
                        .copied()
                        .filter(|&u| u == v || g.adjacent(u, v))
                        .collect();
                    nb.sort_unstable();
                    nb
                };
                for pair in order.windows(2) {
                    let (big, small) = (closed(pair[0]), closed(pair[1]));
                    assert!(small.iter().all(|x| big.contains(x)));
                }
            }
        }
    }

    #[test]
    fn solve_p3_fixture() {
        let run = solve_mhv_interval(&p3_spans());
        assert_eq!(run.optimum, 1);
    }

    #[test]
    fn solve_monochromatic_triangle() {
        let k3 = inst(3, 1, &[(1, 4), (2, 5), (3, 6)], &[(1, 1), (2, 1), (3, 1)]);
        assert_eq!(solve_mhv_interval(&k3).optimum, 3);
    }

    #[test]
    fn solve_two_isolated_vertices() {
        let two = inst(2, 2, &[(1, 1), (3, 3)], &[]);
        assert_eq!(solve_mhv_interval(&two).optimum, 2);
    }

    #[test]
    fn round_trip_interval_format() {
        let text = "intervals 3 2\nspan 1 1 3\nspan 2 2 5\nspan 3 4 6\ncolor 1 1\ncolor 3 2\n";
        let parsed = parse_interval_instance(text).unwrap();
        assert_eq!(parsed, p3_spans());
        let again = parse_interval_instance(&write_interval_instance(&parsed)).unwrap();
        assert_eq!(parsed, again);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_interval_instance("intervals 2 2\nspan 1 5 3\nspan 2 1 2\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("lo 5 > hi 3"));

        let err = parse_interval_instance("intervals 2 2\nspan 1 1 2\n").unwrap_err();
        assert!(err.message.contains("missing span for vertex 2"));
    }
}
