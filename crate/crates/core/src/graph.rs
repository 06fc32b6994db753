//! Undirected graphs over the variable index set, separation, and the
//! diagram-level tests for Markov random fields and Markov chains.
//!
//! The bridge to diagrams is: a family of variables is a Markov random
//! field with respect to a graph exactly when every *disconnected* atom of
//! its diagram vanishes, where the atom `p_W` counts as disconnected when
//! the subgraph induced on `W` is disconnected. Markov chains are the
//! special case of a path graph, where the connected atoms are exactly the
//! intervals.

use crate::backend::Backend;
use crate::diagram::Evaluator;
use crate::error::Error;
use crate::subset::{enumerate_atoms, Atom, VarSubset, MAX_VARS};

/// Cap on exhaustive global-separation enumeration (`4^n` triples).
pub const MAX_GLOBAL_ENUM: usize = 8;

/// A simple undirected graph on vertices `{0, .., n-1}`.
///
/// Edges are stored normalized (`i < j`, deduplicated); self-loops are
/// rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<VarSubset>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, Error> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::Graph(format!(
                "vertex count must be between 1 and {MAX_VARS}"
            )));
        }
        let mut norm: Vec<(usize, usize)> = Vec::new();
        let mut adjacency = vec![VarSubset::empty(n); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Graph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop on vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !norm.contains(&e) {
                norm.push(e);
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
        norm.sort();
        Ok(Graph { n, edges: norm, adjacency })
    }

    /// The path `0 - 1 - .. - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges).expect("path graph is always valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Normalized edge list, ascending.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    pub fn neighbors(&self, v: usize) -> VarSubset {
        self.adjacency[v]
    }

    /// Connected components of the subgraph induced on `within`, ordered by
    /// their smallest vertex.
    pub fn components(&self, within: VarSubset) -> Vec<VarSubset> {
        let mut remaining = within;
        let mut out = Vec::new();
        while !remaining.is_empty() {
            let start = remaining.iter().next().unwrap();
            let mut comp = VarSubset::singleton(self.n, start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VarSubset::empty(self.n);
                for v in frontier.iter() {
                    next = next.union(self.adjacency[v].intersection(within));
                }
                frontier = next.difference(comp);
                comp = comp.union(next);
            }
            out.push(comp);
            remaining = remaining.difference(comp);
        }
        out
    }

    /// True when the subgraph induced on `within` is connected (a single
    /// vertex or the empty set counts as connected).
    pub fn is_connected_within(&self, within: VarSubset) -> bool {
        self.components(within).len() <= 1
    }

    /// True when removing `u` splits the remaining vertices into two or
    /// more components.
    pub fn is_cutset(&self, u: VarSubset) -> bool {
        self.components(VarSubset::full(self.n).difference(u)).len() >= 2
    }

    /// True when every path from `a` to `b` passes through `c`. The three
    /// sets must be pairwise disjoint; an empty side separates vacuously.
    pub fn separates(&self, a: VarSubset, b: VarSubset, c: VarSubset) -> Result<bool, Error> {
        if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
            return Err(Error::NotDisjoint {
                context: format!("separation arguments {a}, {b}, {c}"),
            });
        }
        if a.is_empty() || b.is_empty() {
            return Ok(true);
        }
        let within = VarSubset::full(self.n).difference(c);
        Ok(self
            .components(within)
            .iter()
            .all(|comp| comp.is_disjoint(a) || comp.is_disjoint(b)))
    }

    /// Atoms `p_W` whose induced subgraph on `W` is disconnected, ascending.
    pub fn disconnected_atoms(&self) -> Vec<Atom> {
        enumerate_atoms(self.n)
            .into_iter()
            .filter(|a| !self.is_connected_within(a.set()))
            .collect()
    }

    /// The graph induced on `keep` by walks: vertices of `keep` are joined
    /// when some walk connects them using only intermediate vertices outside
    /// `keep`. This is the graph a Markov random field marginalizes to.
    pub fn marginalize(&self, keep: VarSubset) -> Result<Graph, Error> {
        if keep.is_empty() {
            return Err(Error::Graph("cannot marginalize onto the empty set".into()));
        }
        let hidden = VarSubset::full(self.n).difference(keep);
        let hidden_comps = self.components(hidden);
        let mut edges = Vec::new();
        let kept: Vec<usize> = keep.iter().collect();
        for (ai, &a) in kept.iter().enumerate() {
            for &b in &kept[ai + 1..] {
                let direct = self.has_edge(a, b);
                let via_hidden = hidden_comps.iter().any(|comp| {
                    !self.adjacency[a].is_disjoint(*comp) && !self.adjacency[b].is_disjoint(*comp)
                });
                if direct || via_hidden {
                    edges.push((a, b));
                }
            }
        }
        Graph::new(self.n, &edges)
    }

    /// For a connected atom `p_I` with at least two vertices, the boundary
    /// `B = { i in I : p_(I minus i) is still connected }`. The atom's value
    /// in a Markov random field is determined by the interaction term of the
    /// boundary vertices alone, conditioned on everything outside `I`.
    pub fn connected_atom_boundary(&self, atom: Atom) -> Result<VarSubset, Error> {
        let set = atom.set();
        if set.len() < 2 {
            return Err(Error::Precondition(format!(
                "boundary needs an atom on two or more vertices, got {atom}"
            )));
        }
        if !self.is_connected_within(set) {
            return Err(Error::Precondition(format!("atom {atom} is disconnected")));
        }
        let mut b = VarSubset::empty(self.n);
        for i in set.iter() {
            if self.is_connected_within(set.difference(VarSubset::singleton(self.n, i))) {
                b.insert(i);
            }
        }
        Ok(b)
    }

    /// DOT rendering of the graph with 1-based vertex names.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.n {
            out.push_str(&format!("  v{};\n", v + 1));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  v{} -- v{};\n", a + 1, b + 1));
        }
        out.push_str("}\n");
        out
    }
}

/// Outcome of a diagram-level Markov test.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovReport {
    pub holds: bool,
    /// Disconnected atoms whose value failed the zero test, ascending.
    pub violations: Vec<Atom>,
}

/// Diagram-level Markov random field test: the family is an MRF with
/// respect to `graph` exactly when all disconnected atoms vanish.
pub fn test_mrf_diagram<B: Backend>(
    evaluator: &Evaluator<B>,
    graph: &Graph,
) -> Result<MarkovReport, Error> {
    if graph.num_vertices() != evaluator.num_vars() {
        return Err(Error::Graph(format!(
            "graph has {} vertices but the family has {} variables",
            graph.num_vertices(),
            evaluator.num_vars()
        )));
    }
    let diagram = evaluator.diagram()?;
    let scale = evaluator.scale()?;
    let violations: Vec<Atom> = graph
        .disconnected_atoms()
        .into_iter()
        .filter(|a| !evaluator.backend().is_zero(diagram.value(*a), scale))
        .collect();
    Ok(MarkovReport { holds: violations.is_empty(), violations })
}

/// Diagram-level Markov chain test in variable-index order: the path-graph
/// Markov test, i.e. every non-interval atom must vanish.
pub fn test_markov_chain<B: Backend>(evaluator: &Evaluator<B>) -> Result<MarkovReport, Error> {
    test_mrf_diagram(evaluator, &Graph::path(evaluator.num_vars()))
}

/// How [`test_mrf_oracle`] quantifies over the graph.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum MrfMode {
    /// Every separation `(A, B, C)` must yield conditional independence.
    /// Exhaustive over vertex triples, capped at [`MAX_GLOBAL_ENUM`].
    Global,
    /// Every cutset must render its components mutually independent.
    Cutset,
}

/// Markov random field test against an arbitrary conditional-independence
/// oracle `(a, b, c) -> a independent of b given c`. The two modes are
/// equivalent characterizations and must agree on any oracle that actually
/// is a conditional independence relation.
pub fn test_mrf_oracle<O>(graph: &Graph, mode: MrfMode, mut oracle: O) -> Result<bool, Error>
where
    O: FnMut(VarSubset, VarSubset, VarSubset) -> Result<bool, Error>,
{
    let n = graph.num_vertices();
    match mode {
        MrfMode::Global => {
            if n > MAX_GLOBAL_ENUM {
                return Err(Error::Precondition(format!(
                    "global separation enumeration is capped at {MAX_GLOBAL_ENUM} vertices"
                )));
            }
            // Assign each vertex to one of A / B / C / unused.
            let mut assign = vec![0u8; n];
            loop {
                let mut sets = [VarSubset::empty(n); 3];
                for (v, &s) in assign.iter().enumerate() {
                    if s > 0 {
                        sets[(s - 1) as usize].insert(v);
                    }
                }
                let (a, b, c) = (sets[0], sets[1], sets[2]);
                if !a.is_empty() && !b.is_empty() && graph.separates(a, b, c)? {
                    if !oracle(a, b, c)? {
                        return Ok(false);
                    }
                }
                let mut k = n;
                loop {
                    if k == 0 {
                        return Ok(true);
                    }
                    k -= 1;
                    assign[k] += 1;
                    if assign[k] < 4 {
                        break;
                    }
                    assign[k] = 0;
                }
            }
        }
        MrfMode::Cutset => {
            let full = VarSubset::full(n);
            for u in full.subsets() {
                let comps = graph.components(full.difference(u));
                if comps.len() < 2 {
                    continue;
                }
                let rest_union = comps
                    .iter()
                    .fold(VarSubset::empty(n), |acc, c| acc.union(*c));
                for comp in &comps {
                    if !oracle(*comp, rest_union.difference(*comp), u)? {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// For a family whose diagram passes the Markov chain test, a high-degree
/// interaction term of singletons collapses onto its extremes:
/// `F(X_i1; ..; X_iq | J) = F(X_i1; X_iq | J)` for `i1 < .. < iq`.
///
/// Returns the collapsed value. Fails when the family is not a chain; in
/// verification mode the full-degree term is also computed and compared
/// against the collapsed one.
pub fn interval_collapse<B: Backend>(
    evaluator: &Evaluator<B>,
    cond: VarSubset,
    indices: &[usize],
) -> Result<B::Value, Error> {
    let n = evaluator.num_vars();
    if indices.len() < 2 || indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "interval collapse needs two or more strictly increasing indices".into(),
        ));
    }
    let chain = test_markov_chain(evaluator)?;
    if !chain.holds {
        return Err(Error::Precondition(format!(
            "family is not a Markov chain; nonzero non-interval atoms: {:?}",
            chain.violations
        )));
    }
    let first = VarSubset::singleton(n, indices[0]);
    let last = VarSubset::singleton(n, *indices.last().unwrap());
    let collapsed = evaluator.interaction(cond, &[first, last])?;
    if evaluator.verify_enabled() {
        let parts: Vec<VarSubset> = indices
            .iter()
            .map(|&i| VarSubset::singleton(n, i))
            .collect();
        let full = evaluator.interaction(cond, &parts)?;
        let diff = evaluator
            .backend()
            .add(&collapsed, &evaluator.backend().neg(&full));
        if !evaluator.is_zero(&diff)? {
            return Err(Error::Verification(format!(
                "interval collapse mismatch: collapsed {collapsed:?} vs full {full:?}"
            )));
        }
    }
    Ok(collapsed)
}

/// A candidate minimal graph inferred from a diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct InferredGraph {
    pub graph: Graph,
    /// Whether the family actually satisfies the Markov test against the
    /// candidate. When false, no conclusion about minimality can be drawn.
    pub is_mrf: bool,
    /// True when every atom of the diagram is zero; the inference is then
    /// vacuous (any graph fits) and the edgeless result deserves a warning.
    pub trivial_diagram: bool,
}

/// Infers the candidate smallest graph: vertices `i`, `j` are joined exactly
/// when the pair atom `p_{i,j}` is nonzero. If the family is an MRF with
/// respect to the result, it is an MRF with respect to no smaller graph.
pub fn candidate_smallest_graph<B: Backend>(
    evaluator: &Evaluator<B>,
) -> Result<InferredGraph, Error> {
    let n = evaluator.num_vars();
    let diagram = evaluator.diagram()?;
    let scale = evaluator.scale()?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let pair = VarSubset::from_indices(n, &[i, j]).unwrap();
            let atom = Atom::new(pair).unwrap();
            if !evaluator.backend().is_zero(diagram.value(atom), scale) {
                edges.push((i, j));
            }
        }
    }
    let graph = Graph::new(n, &edges)?;
    let is_mrf = test_mrf_diagram(evaluator, &graph)?.holds;
    let trivial_diagram = diagram
        .entries()
        .all(|(_, v)| evaluator.backend().is_zero(v, scale));
    Ok(InferredGraph { graph, is_mrf, trivial_diagram })
}
