//! State-space analysis: reachability and coverability graphs, place bounds,
//! linear marking invariants, deadlock detection and exploration of the
//! guarded-event system.
//!
//! Graphs are deterministic: BFS with a FIFO frontier, transitions expanded
//! in declaration order, nodes numbered in discovery order. Truncation at
//! the node limit is reported through `complete = false`, never as an error;
//! queries that need the full graph refuse to answer on a truncated one.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::net::{Marking, PetriNet, PlaceId, TransitionId};
use crate::semantics::{enabled_set, fire, Embedding, EmbeddedState, Event};

/// Token count extended with omega, the absorbing "unbounded" value.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtTokens {
    Finite(u64),
    Omega,
}

impl ExtTokens {
    pub fn is_omega(self) -> bool {
        matches!(self, ExtTokens::Omega)
    }
}

impl fmt::Display for ExtTokens {
    fmt_ext_tokens!();
}

macro_rules! fmt_ext_tokens {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match self {
                ExtTokens::Finite(v) => write!(f, "{v}"),
                ExtTokens::Omega => write!(f, "omega"),
            }
        }
    };
}
use fmt_ext_tokens;

/// A marking over `N ∪ {omega}`: the node payload of coverability graphs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtMarking(Vec<ExtTokens>);

impl ExtMarking {
    pub fn from_marking(m: &Marking) -> Self {
        ExtMarking(m.tokens().iter().map(|&v| ExtTokens::Finite(v)).collect())
    }

    pub fn get(&self, p: PlaceId) -> ExtTokens {
        self.0[p.index()]
    }

    pub fn tokens(&self) -> &[ExtTokens] {
        &self.0
    }

    pub fn has_omega(&self) -> bool {
        self.0.iter().any(|t| t.is_omega())
    }

    /// Coordinatewise `self >= other`.
    pub fn dominates(&self, other: &ExtMarking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

/// One labelled edge of a state graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge<L> {
    pub source: usize,
    pub label: L,
    pub target: usize,
}

/// Reachability, coverability or embedded-event graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateGraph<N, L> {
    pub nodes: Vec<N>,
    pub edges: Vec<GraphEdge<L>>,
    pub root: usize,
    /// False when construction stopped at a limit before exhausting the
    /// frontier.
    pub complete: bool,
}

pub type ReachabilityGraph = StateGraph<Marking, TransitionId>;
pub type CoverabilityGraph = StateGraph<ExtMarking, TransitionId>;
pub type EmbeddedGraph = StateGraph<EmbeddedState, Event>;

impl<N, L> StateGraph<N, L> {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// DOT text with caller-supplied labels; nodes in index order, edges in
    /// construction order.
    pub fn to_dot(
        &self,
        node_label: impl Fn(usize, &N) -> String,
        edge_label: impl Fn(&L) -> String,
    ) -> String {
        let mut out = String::from("digraph statespace {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = if i == self.root {
                " shape=box"
            } else {
                ""
            };
            out.push_str(&format!(
                "  n{i} [label=\"{}\"{shape}];\n",
                node_label(i, n)
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{}\"];\n",
                e.source,
                e.target,
                edge_label(&e.label)
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Stable line-oriented listing used by golden tests.
    pub fn to_listing(
        &self,
        node_label: impl Fn(usize, &N) -> String,
        edge_label: impl Fn(&L) -> String,
    ) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            out.push_str(&format!("node {i}: {}\n", node_label(i, n)));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} -> {} [{}]\n",
                e.source,
                e.target,
                edge_label(&e.label)
            ));
        }
        out.push_str(&format!("root {}\n", self.root));
        out.push_str(&format!("complete {}\n", self.complete));
        out
    }
}

/// Read access to token counts, shared by every node payload.
pub trait NodeMarking {
    fn token_at(&self, p: PlaceId) -> ExtTokens;
}

impl NodeMarking for Marking {
    fn token_at(&self, p: PlaceId) -> ExtTokens {
        ExtTokens::Finite(self.get(p))
    }
}

impl NodeMarking for ExtMarking {
    fn token_at(&self, p: PlaceId) -> ExtTokens {
        self.get(p)
    }
}

impl NodeMarking for EmbeddedState {
    fn token_at(&self, p: PlaceId) -> ExtTokens {
        ExtTokens::Finite(self.marking.get(p))
    }
}

/// Comparison in a linear marking constraint.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// `sum(coefficient * tokens) relation bound`, checked on every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearInvariant {
    coefficients: Vec<(PlaceId, i64)>,
    pub relation: Relation,
    pub bound: i64,
}

impl LinearInvariant {
    /// Rejects all-zero coefficient lists.
    pub fn new(
        coefficients: Vec<(PlaceId, i64)>,
        relation: Relation,
        bound: i64,
    ) -> Result<Self, AnalysisError> {
        if coefficients.iter().all(|&(_, c)| c == 0) {
            return Err(AnalysisError::InvalidInvariant);
        }
        Ok(LinearInvariant {
            coefficients,
            relation,
            bound,
        })
    }

    pub fn coefficients(&self) -> &[(PlaceId, i64)] {
        &self.coefficients
    }

    pub fn render(&self, net: &PetriNet) -> String {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .map(|&(p, c)| {
                if c == 1 {
                    net.place_name(p).to_string()
                } else {
                    format!("{c}*{}", net.place_name(p))
                }
            })
            .collect();
        format!("{} {} {}", terms.join(" + "), self.relation, self.bound)
    }

    /// Evaluates the constraint at one node. Omega under a nonzero
    /// coefficient has no defined sum.
    pub fn holds_at<N: NodeMarking>(&self, node: &N) -> Result<bool, AnalysisError> {
        let mut sum: i128 = 0;
        for &(p, c) in &self.coefficients {
            if c == 0 {
                continue;
            }
            match node.token_at(p) {
                ExtTokens::Finite(v) => sum += c as i128 * v as i128,
                ExtTokens::Omega => {
                    return Err(AnalysisError::OmegaUnsupported { place: p.index() })
                }
            }
        }
        let bound = self.bound as i128;
        Ok(match self.relation {
            Relation::Le => sum <= bound,
            Relation::Eq => sum == bound,
            Relation::Ge => sum >= bound,
        })
    }
}

/// Result of checking one property against a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisVerdict<L> {
    pub holds: bool,
    /// Shortest edge path from the root to a violating node, when one
    /// exists in the explored part.
    pub counterexample: Option<Vec<GraphEdge<L>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("graph is incomplete: construction stopped at the node limit")]
    IncompleteGraph,
    #[error("place index {place} carries omega; the linear sum is undefined")]
    OmegaUnsupported { place: usize },
    #[error("invariant needs at least one nonzero coefficient")]
    InvalidInvariant,
}

/// Largest token count a place reaches across a graph.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PlaceBound {
    Bounded(u64),
    Unbounded,
}

impl fmt::Display for PlaceBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceBound::Bounded(v) => write!(f, "{v}"),
            PlaceBound::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// BFS over the plain firing rule with marking deduplication.
pub fn reachability_graph(net: &PetriNet, m0: &Marking, node_limit: usize) -> ReachabilityGraph {
    reachability_graph_threaded(net, m0, node_limit, 1)
}

/// Same graph, optionally expanding each BFS layer on a thread pool. The
/// result is identical to the sequential construction.
pub fn reachability_graph_threaded(
    net: &PetriNet,
    m0: &Marking,
    node_limit: usize,
    threads: usize,
) -> ReachabilityGraph {
    assert!(node_limit >= 1, "node_limit must be at least 1");
    let mut nodes = vec![m0.clone()];
    let mut index: HashMap<Marking, usize> = HashMap::new();
    index.insert(m0.clone(), 0);
    let mut edges = Vec::new();
    let mut complete = true;
    let mut layer: Vec<usize> = vec![0];

    let pool = (threads > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    });

    'outer: while !layer.is_empty() {
        // Successor lists per layer node, in node order. The merge below is
        // sequential, so the numbering matches the single-threaded BFS.
        let expansions: Vec<Vec<(TransitionId, Marking)>> = match &pool {
            Some(pool) => pool.install(|| {
                use rayon::prelude::*;
                layer
                    .par_iter()
                    .map(|&i| expand_marking(net, &nodes[i]))
                    .collect()
            }),
            None => layer.iter().map(|&i| expand_marking(net, &nodes[i])).collect(),
        };

        let mut next_layer = Vec::new();
        for (&source, succs) in layer.iter().zip(&expansions) {
            for (t, succ) in succs {
                if let Some(&target) = index.get(succ) {
                    edges.push(GraphEdge {
                        source,
                        label: *t,
                        target,
                    });
                } else {
                    if nodes.len() >= node_limit {
                        complete = false;
                        break 'outer;
                    }
                    let target = nodes.len();
                    nodes.push(succ.clone());
                    index.insert(succ.clone(), target);
                    edges.push(GraphEdge {
                        source,
                        label: *t,
                        target,
                    });
                    next_layer.push(target);
                }
            }
        }
        layer = next_layer;
    }

    StateGraph {
        nodes,
        edges,
        root: 0,
        complete,
    }
}

fn expand_marking(net: &PetriNet, m: &Marking) -> Vec<(TransitionId, Marking)> {
    enabled_set(net, m)
        .into_iter()
        .map(|t| (t, fire(net, m, t).expect("enabled")))
        .collect()
}

fn ext_enabled(net: &PetriNet, m: &ExtMarking, t: TransitionId) -> bool {
    net.input_places(t).unwrap().into_iter().all(|p| match m.get(p) {
        ExtTokens::Omega => true,
        ExtTokens::Finite(v) => v >= net.weight_in(p, t),
    })
}

fn ext_fire(net: &PetriNet, m: &ExtMarking, t: TransitionId) -> ExtMarking {
    ExtMarking(
        net.place_ids()
            .map(|p| match m.get(p) {
                ExtTokens::Omega => ExtTokens::Omega,
                ExtTokens::Finite(v) => {
                    ExtTokens::Finite(v - net.weight_in(p, t) + net.weight_out(p, t))
                }
            })
            .collect(),
    )
}

/// Karp-Miller coverability graph.
///
/// Successors are accelerated against the chain of creation ancestors: any
/// strictly dominated ancestor pushes the strictly-greater coordinates to
/// omega, repeated to a fixpoint. Nodes with identical extended markings are
/// merged globally, which keeps the graph small and always terminates.
pub fn coverability_graph(net: &PetriNet, m0: &Marking) -> CoverabilityGraph {
    let root = ExtMarking::from_marking(m0);
    let mut nodes = vec![root.clone()];
    let mut parent: Vec<usize> = vec![usize::MAX];
    let mut index: HashMap<ExtMarking, usize> = HashMap::new();
    index.insert(root, 0);
    let mut edges = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::from([0]);

    while let Some(i) = queue.pop_front() {
        for t in net.transition_ids() {
            if !ext_enabled(net, &nodes[i], t) {
                continue;
            }
            let mut succ = ext_fire(net, &nodes[i], t);
            accelerate(&mut succ, i, &nodes, &parent);
            if let Some(&target) = index.get(&succ) {
                edges.push(GraphEdge {
                    source: i,
                    label: t,
                    target,
                });
            } else {
                let target = nodes.len();
                nodes.push(succ.clone());
                parent.push(i);
                index.insert(succ, target);
                edges.push(GraphEdge {
                    source: i,
                    label: t,
                    target,
                });
                queue.push_back(target);
            }
        }
    }

    StateGraph {
        nodes,
        edges,
        root: 0,
        complete: true,
    }
}

/// Omega-acceleration of `succ` against the creation ancestors of `from`
/// (inclusive), iterated until no ancestor is strictly dominated anymore.
fn accelerate(succ: &mut ExtMarking, from: usize, nodes: &[ExtMarking], parent: &[usize]) {
    loop {
        let mut changed = false;
        let mut a = from;
        loop {
            let ancestor = &nodes[a];
            if succ.dominates(ancestor) && succ != ancestor {
                for k in 0..succ.0.len() {
                    if ancestor.0[k] < succ.0[k] && !succ.0[k].is_omega() {
                        succ.0[k] = ExtTokens::Omega;
                        changed = true;
                    }
                }
            }
            if parent[a] == usize::MAX {
                break;
            }
            a = parent[a];
        }
        if !changed {
            return;
        }
    }
}

/// BFS over the guarded-event system. Node identity ignores the action log
/// and the overwrite counter; stored nodes are canonicalized accordingly.
/// Nodes at `depth_limit` are kept but not expanded.
pub fn explore_embedded(
    embedding: &Embedding<'_>,
    depth_limit: usize,
    node_limit: usize,
) -> EmbeddedGraph {
    assert!(node_limit >= 1, "node_limit must be at least 1");
    let canonical = |mut s: EmbeddedState| {
        s.action_log.clear();
        s.guard_overwrites = 0;
        s
    };

    let root = canonical(embedding.init_state());
    let mut nodes = vec![root.clone()];
    let mut depth = vec![0usize];
    let mut index: HashMap<EmbeddedState, usize> = HashMap::new();
    index.insert(root, 0);
    let mut edges = Vec::new();
    let mut complete = true;
    let mut queue: VecDeque<usize> = VecDeque::from([0]);

    'outer: while let Some(i) = queue.pop_front() {
        let events = embedding.enabled_events(&nodes[i]);
        if depth[i] >= depth_limit {
            if !events.is_empty() {
                complete = false;
            }
            continue;
        }
        for event in events {
            let succ = canonical(embedding.apply_unchecked(&nodes[i], &event));
            if let Some(&target) = index.get(&succ) {
                edges.push(GraphEdge {
                    source: i,
                    label: event,
                    target,
                });
            } else {
                if nodes.len() >= node_limit {
                    complete = false;
                    break 'outer;
                }
                let target = nodes.len();
                nodes.push(succ.clone());
                depth.push(depth[i] + 1);
                index.insert(succ, target);
                edges.push(GraphEdge {
                    source: i,
                    label: event,
                    target,
                });
                queue.push_back(target);
            }
        }
    }

    StateGraph {
        nodes,
        edges,
        root: 0,
        complete,
    }
}

/// Maximum token count of `p` over all nodes; `Unbounded` when any node
/// carries omega there. Needs a complete graph.
pub fn place_bound<N: NodeMarking, L>(
    g: &StateGraph<N, L>,
    p: PlaceId,
) -> Result<PlaceBound, AnalysisError> {
    if !g.complete {
        return Err(AnalysisError::IncompleteGraph);
    }
    let mut max = 0u64;
    for node in &g.nodes {
        match node.token_at(p) {
            ExtTokens::Omega => return Ok(PlaceBound::Unbounded),
            ExtTokens::Finite(v) => max = max.max(v),
        }
    }
    Ok(PlaceBound::Bounded(max))
}

/// Evaluates `inv` on every explored node. A violation is reported with the
/// shortest path from the root even on a truncated graph; `holds = true` is
/// only conclusive when the graph is complete.
pub fn check_invariant<N: NodeMarking, L: Clone>(
    g: &StateGraph<N, L>,
    inv: &LinearInvariant,
) -> Result<AnalysisVerdict<L>, AnalysisError> {
    let mut violating = vec![false; g.nodes.len()];
    let mut any = false;
    for (i, node) in g.nodes.iter().enumerate() {
        if !inv.holds_at(node)? {
            violating[i] = true;
            any = true;
        }
    }
    if !any {
        return Ok(AnalysisVerdict {
            holds: true,
            counterexample: None,
        });
    }
    Ok(AnalysisVerdict {
        holds: false,
        counterexample: shortest_path_to(g, &violating),
    })
}

/// Nodes with no outgoing edge. Needs a complete graph.
pub fn deadlock_states<N, L>(g: &StateGraph<N, L>) -> Result<Vec<usize>, AnalysisError> {
    if !g.complete {
        return Err(AnalysisError::IncompleteGraph);
    }
    let mut has_out = vec![false; g.nodes.len()];
    for e in &g.edges {
        has_out[e.source] = true;
    }
    Ok((0..g.nodes.len()).filter(|&i| !has_out[i]).collect())
}

/// BFS shortest edge path from the root to any flagged node. Empty path for
/// a flagged root.
fn shortest_path_to<N, L: Clone>(
    g: &StateGraph<N, L>,
    flagged: &[bool],
) -> Option<Vec<GraphEdge<L>>> {
    if flagged[g.root] {
        return Some(Vec::new());
    }
    let mut adjacency: Vec<Vec<&GraphEdge<L>>> = vec![Vec::new(); g.nodes.len()];
    for e in &g.edges {
        adjacency[e.source].push(e);
    }
    let mut back: Vec<Option<&GraphEdge<L>>> = vec![None; g.nodes.len()];
    let mut seen = vec![false; g.nodes.len()];
    seen[g.root] = true;
    let mut queue = VecDeque::from([g.root]);
    while let Some(i) = queue.pop_front() {
        for e in &adjacency[i] {
            if !seen[e.target] {
                seen[e.target] = true;
                back[e.target] = Some(e);
                if flagged[e.target] {
                    let mut path = Vec::new();
                    let mut cur = e.target;
                    while let Some(edge) = back[cur] {
                        path.push(edge.clone());
                        cur = edge.source;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(e.target);
            }
        }
    }
    None
}

/// The literal weight-ignoring liveness test: true iff some transition has
/// at least one marked input place. Weaker than real enabledness (a marked
/// input below the arc weight still counts) and blind to source transitions.
pub fn paper_liveness_predicate(net: &PetriNet, m: &Marking) -> bool {
    net.pre_arcs().any(|(p, _, _)| m.get(p) > 0)
}

/// `name=count` pairs in declaration order; the common node label.
pub fn marking_label(net: &PetriNet, m: &Marking) -> String {
    net.place_ids()
        .map(|p| format!("{}={}", net.place_name(p), m.get(p)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Like [`marking_label`] with omega rendered as `omega`.
pub fn ext_marking_label(net: &PetriNet, m: &ExtMarking) -> String {
    net.place_ids()
        .map(|p| format!("{}={}", net.place_name(p), m.get(p)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Marking plus any staged bookkeeping, for embedded-graph exports.
pub fn embedded_label(net: &PetriNet, s: &EmbeddedState) -> String {
    let mut out = marking_label(net, &s.marking);
    if !s.trans_places.is_empty() {
        let pairs: Vec<String> = s
            .trans_places
            .iter()
            .map(|&(t, p)| format!("({},{})", net.transition_name(t), net.place_name(p)))
            .collect();
        out.push_str(&format!(" pending[{}]", pairs.join(" ")));
    }
    let mut flags = Vec::new();
    for (a, &v) in &s.enabled_p_actions {
        if v {
            flags.push(format!("enP:{a}"));
        }
    }
    for (t, &v) in &s.enabled_t_actions {
        if v {
            flags.push(format!("enT:{}", net.transition_name(*t)));
        }
    }
    for (a, &v) in &s.guard_t_actions {
        if v {
            flags.push(format!("gT:{a}"));
        }
    }
    for (a, &v) in &s.guard_p_actions {
        if v && a != crate::net::NULLACTION {
            flags.push(format!("gP:{a}"));
        }
    }
    if !flags.is_empty() {
        out.push_str(&format!(" {{{}}}", flags.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetAnnotations;
    use crate::samples;
    use crate::semantics::Policy;

    #[test]
    fn b2_reachability_is_two_nodes_one_edge() {
        let net = samples::b2();
        let g = reachability_graph(&net, net.initial_marking(), 100);
        assert!(g.complete);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.nodes[0].tokens(), &[2, 0]);
        assert_eq!(g.nodes[1].tokens(), &[0, 3]);
    }

    #[test]
    fn source_net_truncates_at_limit() {
        let net = samples::source();
        let g = reachability_graph(&net, net.initial_marking(), 100);
        assert!(!g.complete);
        assert_eq!(g.nodes.len(), 100);
    }

    #[test]
    fn threaded_construction_matches_sequential() {
        let (net, _) = samples::producer_consumer();
        let seq = reachability_graph(&net, net.initial_marking(), 10_000);
        let par = reachability_graph_threaded(&net, net.initial_marking(), 10_000, 4);
        assert_eq!(seq, par);
    }

    #[test]
    fn coverability_of_source_net_reaches_omega() {
        let net = samples::source();
        let g = coverability_graph(&net, net.initial_marking());
        assert!(g.complete);
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.nodes[0].tokens(), &[ExtTokens::Finite(0)]);
        assert_eq!(g.nodes[1].tokens(), &[ExtTokens::Omega]);
        // The omega node loops on itself.
        assert!(g
            .edges
            .iter()
            .any(|e| e.source == 1 && e.target == 1));
    }

    #[test]
    fn coverability_of_bounded_net_matches_reachability() {
        let net = samples::b2();
        let reach = reachability_graph(&net, net.initial_marking(), 100);
        let cover = coverability_graph(&net, net.initial_marking());
        let reach_set: Vec<ExtMarking> =
            reach.nodes.iter().map(ExtMarking::from_marking).collect();
        assert_eq!(reach_set, cover.nodes);
    }

    #[test]
    fn unsemaphored_producer_loop_is_unbounded_on_the_buffer() {
        // Producer repeatedly puts without consuming: D_in_buf grows without
        // bound once the cycle closes, so acceleration must hit omega there.
        let mut b = crate::net::NetBuilder::new();
        let idle = b.place("idle", 1);
        let busy = b.place("busy", 0);
        let buf = b.place("buf", 0);
        let produce = b.transition("produce");
        let put = b.transition("put");
        b.pre(idle, produce, 1).post(busy, produce, 1);
        b.pre(busy, put, 1).post(idle, put, 1).post(buf, put, 1);
        let net = b.build();
        let g = coverability_graph(&net, net.initial_marking());
        assert!(g.nodes.iter().any(|n| n.get(buf).is_omega()));
        assert!(g.nodes.iter().all(|n| !n.get(idle).is_omega()));
    }

    #[test]
    fn place_bounds_on_graphs() {
        let net = samples::b2();
        let g = reachability_graph(&net, net.initial_marking(), 100);
        assert_eq!(
            place_bound(&g, net.place_by_name("p2").unwrap()).unwrap(),
            PlaceBound::Bounded(3)
        );

        let src = samples::source();
        let cover = coverability_graph(&src, src.initial_marking());
        assert_eq!(
            place_bound(&cover, PlaceId(0)).unwrap(),
            PlaceBound::Unbounded
        );
    }

    #[test]
    fn place_bound_refuses_truncated_graphs() {
        let net = samples::source();
        let g = reachability_graph(&net, net.initial_marking(), 10);
        assert_eq!(
            place_bound(&g, PlaceId(0)),
            Err(AnalysisError::IncompleteGraph)
        );
    }

    #[test]
    fn invariant_violation_has_shortest_path() {
        let net = samples::b2();
        let g = reachability_graph(&net, net.initial_marking(), 100);
        let inv = LinearInvariant::new(
            vec![(PlaceId(0), 1), (PlaceId(1), 1)],
            Relation::Le,
            2,
        )
        .unwrap();
        let verdict = check_invariant(&g, &inv).unwrap();
        assert!(!verdict.holds);
        let path = verdict.counterexample.unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path[0].target, 1);
        // Replay: firing along the path reproduces the violating marking.
        let mut m = net.initial_marking().clone();
        for e in &path {
            m = fire(&net, &m, e.label).unwrap();
        }
        assert_eq!(m, g.nodes[1]);
    }

    #[test]
    fn all_zero_invariant_is_rejected_at_construction() {
        assert_eq!(
            LinearInvariant::new(vec![(PlaceId(0), 0)], Relation::Le, 0),
            Err(AnalysisError::InvalidInvariant)
        );
    }

    #[test]
    fn omega_under_nonzero_coefficient_is_an_error() {
        let net = samples::source();
        let g = coverability_graph(&net, net.initial_marking());
        let inv = LinearInvariant::new(vec![(PlaceId(0), 1)], Relation::Le, 5).unwrap();
        assert!(matches!(
            check_invariant(&g, &inv),
            Err(AnalysisError::OmegaUnsupported { place: 0 })
        ));
    }

    #[test]
    fn deadlocks_found_and_absent() {
        let net = samples::b2();
        let g = reachability_graph(&net, net.initial_marking(), 100);
        assert_eq!(deadlock_states(&g).unwrap(), vec![1]);

        let loop_net = samples::self_loop();
        let g2 = reachability_graph(&loop_net, loop_net.initial_marking(), 100);
        assert!(deadlock_states(&g2).unwrap().is_empty());
    }

    #[test]
    fn liveness_predicate_is_weaker_than_enabledness() {
        let net = samples::b2();
        // One token on p1: t1 needs two, yet the predicate holds.
        let m = Marking::new(vec![1, 0]);
        assert!(paper_liveness_predicate(&net, &m));
        assert!(enabled_set(&net, &m).is_empty());
        // All-zero marking, no source transitions: predicate fails.
        assert!(!paper_liveness_predicate(&net, &Marking::new(vec![0, 0])));
    }

    #[test]
    fn embedded_basic_graph_matches_reachability() {
        let (net, _) = samples::producer_consumer();
        let ann = NetAnnotations::default();
        let emb = Embedding::new(&net, &ann, Policy::Basic).unwrap();
        let eg = explore_embedded(&emb, usize::MAX, 10_000);
        let rg = reachability_graph(&net, net.initial_marking(), 10_000);
        assert!(eg.complete);
        assert_eq!(eg.nodes.len(), rg.nodes.len());
        assert_eq!(eg.edges.len(), rg.edges.len());
        for (en, rn) in eg.nodes.iter().zip(&rg.nodes) {
            assert_eq!(&en.marking, rn);
        }
        for (ee, re) in eg.edges.iter().zip(&rg.edges) {
            assert_eq!(ee.source, re.source);
            assert_eq!(ee.target, re.target);
            assert_eq!(ee.label, Event::EventTr(re.label));
        }
    }

    #[test]
    fn embedded_depth_zero_is_root_only() {
        let net = samples::b2();
        let ann = NetAnnotations::default();
        let emb = Embedding::new(&net, &ann, Policy::Basic).unwrap();
        let g = explore_embedded(&emb, 0, 100);
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
        assert!(!g.complete); // the root had an enabled event left unexplored
    }

    #[test]
    fn combined_priority_holds_on_every_explored_state() {
        let (net, ann) = samples::writer();
        let emb = Embedding::new(&net, &ann, Policy::PlaceAndTransitionActions).unwrap();
        let g = explore_embedded(&emb, usize::MAX, 10_000);
        assert!(g.complete);
        for node in &g.nodes {
            let offers_fire = emb
                .enabled_events(node)
                .iter()
                .any(|e| matches!(e, Event::FireTransition(_)));
            if offers_fire {
                assert!(node.quiescent(), "firing offered in a non-quiescent state");
            }
        }
    }

    #[test]
    fn dot_and_listing_are_stable() {
        let net = samples::b2();
        let g = reachability_graph(&net, net.initial_marking(), 100);
        let node = |_, m: &Marking| marking_label(&net, m);
        let edge = |t: &TransitionId| net.transition_name(*t).to_string();
        let dot = g.to_dot(node, edge);
        assert!(dot.contains("n0 -> n1 [label=\"t1\"];"));
        let listing = g.to_listing(node, edge);
        let expect = "node 0: p1=2 p2=0\nnode 1: p1=0 p2=3\nedge 0 -> 1 [t1]\nroot 0\ncomplete true\n";
        assert_eq!(listing, expect);
    }
}
