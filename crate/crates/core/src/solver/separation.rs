//! Lazy separation of subtour and cutset constraints at integral candidates.

use std::collections::{BTreeSet, VecDeque};

use crate::ilp::{AffineConstraint, BinaryVar, Incidence, Separator};
use crate::model::{GcsGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubtourPolicy {
    /// One cut for a smallest proper component containing a cycle.
    Tour,
    /// One cut for a smallest component containing a cycle.
    Tree,
    /// Cutsets `Σ_{δin(U)} y_e ≥ 1` for every minimum-length cycle, rooted at
    /// the given vertex.
    Arborescence(VertexId),
}

/// Connected components of the selected edges, over selected vertices and
/// edge endpoints, each sorted; the list is sorted as well.
fn components(graph: &GcsGraph, candidate: &Incidence) -> Vec<Vec<VertexId>> {
    let n = graph.num_vertices();
    let mut active: BTreeSet<VertexId> = candidate.selected_vertices().collect();
    let mut adj = vec![Vec::new(); n];
    for e in candidate.selected_edges() {
        let edge = graph.edge(e);
        adj[edge.tail.0].push(edge.head);
        adj[edge.head.0].push(edge.tail);
        active.insert(edge.tail);
        active.insert(edge.head);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for &s in &active {
        if seen[s.0] {
            continue;
        }
        seen[s.0] = true;
        let mut comp = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u.0] {
                if !seen[w.0] {
                    seen[w.0] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out.sort();
    out
}

/// `Σ_{e ⊆ U} y_e ≤ |U| − 1`.
pub fn subtour_cut(graph: &GcsGraph, set: &[VertexId]) -> Option<AffineConstraint> {
    let inside: BTreeSet<VertexId> = set.iter().copied().collect();
    let terms: Vec<(BinaryVar, f64)> = graph
        .edges()
        .filter(|(_, e)| inside.contains(&e.tail) && inside.contains(&e.head))
        .map(|(id, _)| (BinaryVar::Edge(id), 1.0))
        .collect();
    AffineConstraint::leq(terms, -(set.len() as f64 - 1.0))
        .ok()
        .map(|c| c.with_family("subtour"))
}

/// `Σ_{e ∈ δin(U)} y_e ≥ 1`.
pub fn cutset_cut(graph: &GcsGraph, set: &[VertexId]) -> Option<AffineConstraint> {
    let inside: BTreeSet<VertexId> = set.iter().copied().collect();
    let terms: Vec<(BinaryVar, f64)> = graph
        .edges()
        .filter(|(_, e)| !inside.contains(&e.tail) && inside.contains(&e.head))
        .map(|(id, _)| (BinaryVar::Edge(id), 1.0))
        .collect();
    match AffineConstraint::geq(terms, -1.0) {
        Ok(c) => Some(c.with_family("cutset")),
        Err(_) => None,
    }
}

/// Vertex sets of all minimum-length directed cycles among selected edges.
fn minimum_cycles(graph: &GcsGraph, candidate: &Incidence) -> Vec<Vec<VertexId>> {
    let n = graph.num_vertices();
    let mut succ = vec![Vec::new(); n];
    for e in candidate.selected_edges() {
        let edge = graph.edge(e);
        succ[edge.tail.0].push(edge.head);
    }
    let mut best = usize::MAX;
    let mut found: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    for s in 0..n {
        // BFS from s back to s
        let mut parent = vec![usize::MAX; n];
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        dist[s] = 0;
        queue.push_back(s);
        let mut closing = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for w in &succ[u] {
                if w.0 == s {
                    closing = Some((u, dist[u] + 1));
                    break 'bfs;
                }
                if dist[w.0] == usize::MAX {
                    dist[w.0] = dist[u] + 1;
                    parent[w.0] = u;
                    queue.push_back(w.0);
                }
            }
        }
        if let Some((last, len)) = closing {
            if len > best {
                continue;
            }
            if len < best {
                best = len;
                found.clear();
            }
            let mut cycle = vec![VertexId(s)];
            let mut u = last;
            while u != s {
                cycle.push(VertexId(u));
                u = parent[u];
            }
            cycle.sort();
            found.insert(cycle);
        }
    }
    found.into_iter().collect()
}

pub fn separate_subtours(
    graph: &GcsGraph,
    candidate: &Incidence,
    policy: SubtourPolicy,
) -> Vec<AffineConstraint> {
    match policy {
        SubtourPolicy::Tour | SubtourPolicy::Tree => {
            let n = graph.num_vertices();
            let mut violated: Vec<Vec<VertexId>> = components(graph, candidate)
                .into_iter()
                .filter(|comp| policy == SubtourPolicy::Tree || comp.len() < n)
                .filter(|comp| {
                    let inside: BTreeSet<VertexId> = comp.iter().copied().collect();
                    let edges = candidate
                        .selected_edges()
                        .filter(|&e| inside.contains(&graph.edge(e).tail))
                        .count();
                    edges + 1 > comp.len()
                })
                .collect();
            violated.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            violated
                .first()
                .and_then(|comp| subtour_cut(graph, comp))
                .into_iter()
                .collect()
        }
        SubtourPolicy::Arborescence(root) => {
            let cycles = minimum_cycles(graph, candidate);
            if !cycles.is_empty() {
                return cycles.iter().filter_map(|c| cutset_cut(graph, c)).collect();
            }
            let n = graph.num_vertices();
            let mut reached = vec![false; n];
            reached[root.0] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &e in graph.outgoing(u) {
                    let w = graph.edge(e).head;
                    if candidate.edges[e.0] && !reached[w.0] {
                        reached[w.0] = true;
                        queue.push_back(w);
                    }
                }
            }
            let unreached: Vec<VertexId> = (0..n).filter(|&i| !reached[i]).map(VertexId).collect();
            if unreached.is_empty() {
                Vec::new()
            } else {
                cutset_cut(graph, &unreached).into_iter().collect()
            }
        }
    }
}

/// Built-in separator wrapping [`separate_subtours`].
#[derive(Debug, Clone)]
pub struct SubtourSeparator {
    name: String,
    policy: SubtourPolicy,
}

impl SubtourSeparator {
    pub fn tsp() -> Self {
        Self {
            name: "tsp_subtour".into(),
            policy: SubtourPolicy::Tour,
        }
    }

    pub fn mstp() -> Self {
        Self {
            name: "mstp_subtour".into(),
            policy: SubtourPolicy::Tree,
        }
    }

    pub fn msap(root: VertexId) -> Self {
        Self {
            name: "msap_cutset".into(),
            policy: SubtourPolicy::Arborescence(root),
        }
    }

    pub fn policy(&self) -> SubtourPolicy {
        self.policy
    }
}

impl Separator for SubtourSeparator {
    fn name(&self) -> &str {
        &self.name
    }

    fn separate(&self, graph: &GcsGraph, candidate: &Incidence) -> Vec<AffineConstraint> {
        separate_subtours(graph, candidate, self.policy)
    }

    fn builtin(&self) -> Option<SubtourPolicy> {
        Some(self.policy)
    }
}
