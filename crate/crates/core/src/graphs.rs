//! Finite labeled graphs and Stallings-style folding.
//!
//! Vertices are abstract ids; edges carry a generator label and are stored in
//! positive orientation only (an edge traversed against its arrow reads as
//! the inverse letter). A graph is *well-labeled* when no vertex has two
//! outgoing or two incoming edges with the same label — precisely the
//! condition that lets it embed into a partial injection of ℤ.
//!
//! The gadgets built here are the raw material of the whole construction:
//! cycles spelling the base word `c` (their embedded images become certified
//! fixed points of `c(alpha, beta)`), paths spelling a witness word, and the
//! fused fixed-point gadget — cycle, path, cycle sharing anchor vertices —
//! whose folded form realizes `c x = x`, `c (w x) = w x` at two distinct
//! points, which is what makes `w` visibly lie outside the centralizer of `c`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::perm::{Point, PermError, Space};
use crate::words::{Gen, Letter, Sign, Word};

pub type VertexId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("gadget words must be nonempty")]
    EmptyWord,
    #[error("word must be freely reduced")]
    NotReduced,
    #[error("word must be weakly cyclically reduced")]
    NotWeaklyCyclicallyReduced,
    #[error("base cycle would use only b-edges")]
    BetaOnlyBase,
    #[error("witness word is the base word to the power {0}")]
    PowerOfBase(i64),
    #[error("anchors collapsed together during folding")]
    AnchorCollision,
    #[error("a base cycle lost vertices during folding")]
    CycleCollapse,
    #[error("graph contains a closed all-b cycle, which no shift of ℤ realizes")]
    AllBetaCycle,
    #[error("graph is not well-labeled")]
    NotWellLabeled,
    #[error(transparent)]
    Conflict(#[from] PermError),
}

/// A finite graph with `a`/`b`-labeled edges and up to two marked anchor
/// vertices (`base`, and `end` for path-like gadgets).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<(VertexId, VertexId, Gen)>,
    pub base: Option<VertexId>,
    pub end: Option<VertexId>,
}

impl LabeledGraph {
    pub fn new() -> LabeledGraph {
        LabeledGraph::default()
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.vertices.insert(v);
    }

    /// Adds an edge spelling `letter` from `src` to `tgt`; a negative letter
    /// is stored as its positive reversal.
    pub fn add_edge(&mut self, src: VertexId, tgt: VertexId, letter: Letter) {
        self.vertices.insert(src);
        self.vertices.insert(tgt);
        match letter.sign {
            Sign::Pos => self.edges.insert((src, tgt, letter.gen)),
            Sign::Neg => self.edges.insert((tgt, src, letter.gen)),
        };
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Gen)> + '_ {
        self.edges.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Follows one letter from `v`, if the matching edge exists. Unique on
    /// well-labeled graphs.
    pub fn step(&self, v: VertexId, letter: Letter) -> Option<VertexId> {
        self.edges.iter().find_map(|&(s, t, g)| {
            if g != letter.gen {
                return None;
            }
            match letter.sign {
                Sign::Pos if s == v => Some(t),
                Sign::Neg if t == v => Some(s),
                _ => None,
            }
        })
    }

    /// Follows a whole word (letters in application order).
    pub fn walk(&self, start: VertexId, w: &Word) -> Option<VertexId> {
        w.letters()
            .iter()
            .try_fold(start, |v, &l| self.step(v, l))
    }

    /// Every vertex pair currently forced together by the folding rule: two
    /// same-label edges out of (or into) one vertex with different far ends.
    fn violations(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = BTreeSet::new();
        let mut by_src: BTreeMap<(VertexId, Gen), VertexId> = BTreeMap::new();
        let mut by_tgt: BTreeMap<(VertexId, Gen), VertexId> = BTreeMap::new();
        for &(s, t, g) in &self.edges {
            if let Some(&other) = by_src.get(&(s, g)) {
                if other != t {
                    out.insert((other.min(t), other.max(t)));
                }
            } else {
                by_src.insert((s, g), t);
            }
            if let Some(&other) = by_tgt.get(&(t, g)) {
                if other != s {
                    out.insert((other.min(s), other.max(s)));
                }
            } else {
                by_tgt.insert((t, g), s);
            }
        }
        out.into_iter().collect()
    }

    pub fn is_well_labeled(&self) -> bool {
        self.violations().is_empty()
    }

    fn merge(&mut self, keep: VertexId, gone: VertexId) {
        self.vertices.remove(&gone);
        let rename = |v: VertexId| if v == gone { keep } else { v };
        self.edges = self
            .edges
            .iter()
            .map(|&(s, t, g)| (rename(s), rename(t), g))
            .collect();
        self.base = self.base.map(rename);
        self.end = self.end.map(rename);
    }

    /// Folds to a well-labeled quotient, merging the first violating pair
    /// (in sorted order) until none remain. Returns the quotient graph and
    /// the map from original vertices to their images.
    pub fn fold(&self) -> (LabeledGraph, BTreeMap<VertexId, VertexId>) {
        self.fold_with(|_| 0)
    }

    /// Folding with a caller-chosen order of merges; the quotient is the same
    /// graph up to vertex naming whatever the choices (folding is confluent),
    /// which the tests pin down via [`LabeledGraph::canonical_form`].
    pub fn fold_with(
        &self,
        mut picker: impl FnMut(&[(VertexId, VertexId)]) -> usize,
    ) -> (LabeledGraph, BTreeMap<VertexId, VertexId>) {
        let mut g = self.clone();
        let mut quotient: BTreeMap<VertexId, VertexId> =
            self.vertices.iter().map(|&v| (v, v)).collect();
        loop {
            let violations = g.violations();
            if violations.is_empty() {
                return (g, quotient);
            }
            let (keep, gone) = violations[picker(&violations).min(violations.len() - 1)];
            g.merge(keep, gone);
            for image in quotient.values_mut() {
                if *image == gone {
                    *image = keep;
                }
            }
        }
    }

    /// A name-independent fingerprint of a folded graph: relabel vertices by
    /// BFS discovery order (from the base anchor when present, following
    /// letters in the fixed order `a, A, b, B`) and return the sorted edge
    /// list plus anchor images. Two quotients of the same graph compare equal
    /// exactly when they differ only by vertex names.
    pub fn canonical_form(
        &self,
    ) -> (Vec<(usize, usize, Gen)>, Option<usize>, Option<usize>) {
        let mut names: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut queue: Vec<VertexId> = Vec::new();
        let enqueue = |v: VertexId, names: &mut BTreeMap<VertexId, usize>, queue: &mut Vec<VertexId>| {
            if !names.contains_key(&v) {
                names.insert(v, names.len());
                queue.push(v);
            }
        };
        if let Some(base) = self.base {
            enqueue(base, &mut names, &mut queue);
        }
        loop {
            let mut head = 0;
            while head < queue.len() {
                let v = queue[head];
                head += 1;
                for l in crate::words::ALPHABET {
                    if let Some(t) = self.step(v, l) {
                        enqueue(t, &mut names, &mut queue);
                    }
                }
            }
            match self.vertices.iter().find(|v| !names.contains_key(v)) {
                Some(&v) => enqueue(v, &mut names, &mut queue),
                None => break,
            }
        }
        let mut edges: Vec<(usize, usize, Gen)> = self
            .edges
            .iter()
            .map(|&(s, t, g)| (names[&s], names[&t], g))
            .collect();
        edges.sort();
        (edges, self.base.map(|v| names[&v]), self.end.map(|v| names[&v]))
    }
}

/// The path gadget spelling `w`: vertices `0..=len`, base at 0, end at `len`,
/// with the `j`-th edge spelling the `j`-th applied letter.
pub fn path_graph(w: &Word) -> Result<LabeledGraph, GraphError> {
    if w.is_empty() {
        return Err(GraphError::EmptyWord);
    }
    if !w.is_reduced() {
        return Err(GraphError::NotReduced);
    }
    let mut g = LabeledGraph::new();
    for (j, &l) in w.letters().iter().enumerate() {
        g.add_edge(j, j + 1, l);
    }
    g.base = Some(0);
    g.end = Some(w.len());
    Ok(g)
}

/// The cycle gadget spelling `w` around and back to its base vertex 0.
/// Weak cyclic reducedness is exactly what keeps it well-labeled.
pub fn cycle_graph(w: &Word) -> Result<LabeledGraph, GraphError> {
    if w.is_empty() {
        return Err(GraphError::EmptyWord);
    }
    if !w.is_weakly_cyclically_reduced() {
        return Err(GraphError::NotWeaklyCyclicallyReduced);
    }
    let n = w.len();
    let mut g = LabeledGraph::new();
    for (j, &l) in w.letters().iter().enumerate() {
        g.add_edge(j, (j + 1) % n, l);
    }
    g.base = Some(0);
    Ok(g)
}

/// A fused and folded fixed-point gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfGadget {
    /// Folded, well-labeled; `base` and `end` are the images of the two
    /// cycle anchors (`x` and `w x` once embedded).
    pub graph: LabeledGraph,
    /// Diagnostic classification of how the two `c`-cycles ended up sharing
    /// structure: 1 disjoint, 4 identical, 3 both anchors on both cycles,
    /// 2 any other overlap. Nothing downstream depends on it.
    pub shape: u8,
}

/// Builds the gadget for base word `c` and witness `w`: a `c`-cycle at the
/// base, a `w`-path, and a `c`-cycle at the path's end, fused at the anchors
/// and folded. `c` must be weakly cyclically reduced with at least one
/// `a`-letter; `w` must be reduced and not a literal power of `c`.
pub fn build_ff_graph(c: &Word, w: &Word) -> Result<FfGadget, GraphError> {
    if c.is_empty() {
        return Err(GraphError::EmptyWord);
    }
    if !c.is_weakly_cyclically_reduced() {
        return Err(GraphError::NotWeaklyCyclicallyReduced);
    }
    if c.letters().iter().all(|l| l.gen == Gen::B) {
        return Err(GraphError::BetaOnlyBase);
    }
    if !w.is_reduced() {
        return Err(GraphError::NotReduced);
    }
    if let Some(k) = w.power_of(c).expect("base checked nonempty") {
        return Err(GraphError::PowerOfBase(k));
    }
    let n = c.len();
    let m = w.len();
    let mut g = LabeledGraph::new();
    // First c-cycle on 0..n, path from 0 reusing fresh ids, second c-cycle
    // rooted at the path's end.
    let cycle1: Vec<VertexId> = (0..n).collect();
    for (j, &l) in c.letters().iter().enumerate() {
        g.add_edge(cycle1[j], cycle1[(j + 1) % n], l);
    }
    let path_vertex = |j: usize| if j == 0 { 0 } else { n - 1 + j };
    for (j, &l) in w.letters().iter().enumerate() {
        g.add_edge(path_vertex(j), path_vertex(j + 1), l);
    }
    let end_id = n - 1 + m;
    let cycle2: Vec<VertexId> = (0..n)
        .map(|j| if j == 0 { end_id } else { n + m - 1 + j })
        .collect();
    for (j, &l) in c.letters().iter().enumerate() {
        g.add_edge(cycle2[j], cycle2[(j + 1) % n], l);
    }
    g.base = Some(0);
    g.end = Some(end_id);

    let (folded, map) = g.fold();
    let base = map[&0];
    let end = map[&end_id];
    if base == end {
        return Err(GraphError::AnchorCollision);
    }
    let c1_verts: BTreeSet<VertexId> = cycle1.iter().map(|v| map[v]).collect();
    let c2_verts: BTreeSet<VertexId> = cycle2.iter().map(|v| map[v]).collect();
    if c1_verts.len() != n || c2_verts.len() != n {
        return Err(GraphError::CycleCollapse);
    }
    let cycle_edges = |verts: &[VertexId]| -> BTreeSet<(VertexId, VertexId, Gen)> {
        c.letters()
            .iter()
            .enumerate()
            .map(|(j, &l)| {
                let (s, t) = (map[&verts[j]], map[&verts[(j + 1) % n]]);
                match l.sign {
                    Sign::Pos => (s, t, l.gen),
                    Sign::Neg => (t, s, l.gen),
                }
            })
            .collect()
    };
    let e1 = cycle_edges(&cycle1);
    let e2 = cycle_edges(&cycle2);
    let shape = if c1_verts.is_disjoint(&c2_verts) {
        1
    } else if e1 == e2 {
        4
    } else if c2_verts.contains(&base) && c1_verts.contains(&end) {
        3
    } else {
        2
    };
    Ok(FfGadget { graph: folded, shape })
}

/// Places a well-labeled graph into fresh territory of the integer line:
/// each maximal `b`-chain becomes a run of consecutive points (so `b`-edges
/// are realized by the successor map for free), separated by enough untouched
/// margin that no `b`-walk as long as any chain can jump between runs; then
/// every `a`-edge becomes a stored assignment. Returns where each vertex
/// landed. Fails on a closed all-`b` cycle, which no shift can realize.
pub fn embed(
    space: &mut Space,
    g: &LabeledGraph,
) -> Result<BTreeMap<VertexId, Point>, GraphError> {
    if !g.is_well_labeled() {
        return Err(GraphError::NotWellLabeled);
    }
    let mut b_next: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut b_prev: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (s, t, gen) in g.edges() {
        if gen == Gen::B {
            b_next.insert(s, t);
            b_prev.insert(t, s);
        }
    }
    let mut chains: Vec<Vec<VertexId>> = Vec::new();
    let mut covered = 0_usize;
    for v in g.vertices() {
        if b_prev.contains_key(&v) {
            continue;
        }
        let mut chain = vec![v];
        let mut cur = v;
        while let Some(&next) = b_next.get(&cur) {
            chain.push(next);
            cur = next;
        }
        covered += chain.len();
        chains.push(chain);
    }
    if covered != g.vertex_count() {
        // Some vertex is reachable from no chain start: it sits on a b-cycle.
        return Err(GraphError::AllBetaCycle);
    }
    let margin = chains.iter().map(|ch| ch.len() as i64 - 1).max().unwrap_or(0);
    let mut placement: BTreeMap<VertexId, Point> = BTreeMap::new();
    for chain in &chains {
        let (lo, _) = space.allocate(chain.len() as i64, margin);
        for (i, &v) in chain.iter().enumerate() {
            placement.insert(v, lo + i as i64);
        }
    }
    for (s, t, gen) in g.edges() {
        if gen == Gen::A {
            space.assign(placement[&s], placement[&t])?;
        }
    }
    Ok(placement)
}

/// Renders vertices and labeled edges in DOT syntax, byte-deterministic:
/// `a`-edges solid, `b`-edges dashed, vertices sorted numerically. The same
/// writer serves abstract gadgets and balls of the built action.
pub fn render_dot(vertices: &[i64], edges: &[(i64, i64, Gen)]) -> String {
    let mut vs = vertices.to_vec();
    vs.sort_unstable();
    vs.dedup();
    let mut es = edges.to_vec();
    es.sort_unstable();
    es.dedup();
    let mut out = String::from("digraph {\n  rankdir=LR;\n  node [shape=circle];\n");
    for v in vs {
        out.push_str(&format!("  \"{v}\";\n"));
    }
    for (s, t, g) in es {
        match g {
            Gen::A => out.push_str(&format!("  \"{s}\" -> \"{t}\" [label=\"a\"];\n")),
            Gen::B => out.push_str(&format!(
                "  \"{s}\" -> \"{t}\" [label=\"b\", style=dashed];\n"
            )),
        }
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of an abstract graph (vertex ids as names).
pub fn dot(g: &LabeledGraph) -> String {
    let vertices: Vec<i64> = g.vertices().map(|v| v as i64).collect();
    let edges: Vec<(i64, i64, Gen)> = g
        .edges()
        .map(|(s, t, gen)| (s as i64, t as i64, gen))
        .collect();
    render_dot(&vertices, &edges)
}
