use std::collections::BTreeMap;
use std::ops::Range;

use super::{ProblemKind, ProblemSpec};
use crate::error::{GcsError, Result};
use crate::expr::{set_membership, LinExpr};
use crate::ilp::Incidence;
use crate::model::{EdgeId, GcsGraph, VertexId, VertexPoints};
use crate::solver::{solve_conic, ConicProgram, ConicStatus};

/// Largest number of candidate subgraphs the oracle will enumerate.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// Variable blocks of a fixed-subgraph program.
#[derive(Debug, Clone, Default)]
pub struct FixedLayout {
    pub x: BTreeMap<VertexId, Range<usize>>,
    pub edge_aux: BTreeMap<EdgeId, Range<usize>>,
}

/// Best subgraph found by exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// `+∞` when no candidate is feasible.
    pub value: f64,
    pub subgraph: Option<Incidence>,
    pub x: BTreeMap<VertexId, Vec<f64>>,
    pub candidates: usize,
    pub infeasible: usize,
}

/// The convex program `min Σ f_v(x_v) + Σ f_e(x_e)` over a fixed subgraph.
pub fn fixed_subgraph_program(
    graph: &GcsGraph,
    sub: &Incidence,
) -> Result<(ConicProgram, FixedLayout)> {
    let mut next = 0usize;
    let mut take = |len: usize| {
        let r = next..next + len;
        next += len;
        r
    };
    let mut layout = FixedLayout::default();
    let mut vertex_blocks = Vec::new();
    for v in sub.selected_vertices() {
        let epi = graph.vertex_epigraph(v)?;
        let x = take(epi.dim);
        let t = take(epi.num_slacks);
        layout.x.insert(v, x.clone());
        vertex_blocks.push((x, t, epi));
    }
    let mut edge_blocks = Vec::new();
    for e in sub.selected_edges() {
        let edge = graph.edge(e);
        let (Some(xt), Some(xh)) = (
            layout.x.get(&edge.tail).cloned(),
            layout.x.get(&edge.head).cloned(),
        ) else {
            return Err(GcsError::InvalidProblem(format!(
                "edge `{}` is selected without both endpoints",
                graph.edge_key(e)
            )));
        };
        let epi = graph.edge_epigraph(e)?;
        let aux = take(edge.aux_dim);
        let t = take(epi.num_slacks);
        layout.edge_aux.insert(e, aux.clone());
        edge_blocks.push(([xt, xh, aux], t, epi));
    }
    let mut p = ConicProgram::new(next);
    let one = LinExpr::constant(1.0);
    for (x, t, epi) in vertex_blocks {
        let args: Vec<LinExpr> = x.chain(t.clone()).map(LinExpr::var).collect();
        for c in set_membership(&epi.set, &args, &one) {
            p.add_constraint(c);
        }
        for i in t {
            p.objective[i] = 1.0;
        }
        p.objective_constant += epi.constant;
    }
    for (blocks, t, epi) in edge_blocks {
        let args: Vec<LinExpr> = blocks
            .into_iter()
            .flatten()
            .chain(t.clone())
            .map(LinExpr::var)
            .collect();
        for c in set_membership(&epi.set, &args, &one) {
            p.add_constraint(c);
        }
        for i in t {
            p.objective[i] = 1.0;
        }
        p.objective_constant += epi.constant;
    }
    Ok((p, layout))
}

/// Optimal value and vertex points of a fixed subgraph, `None` if infeasible.
pub fn solve_fixed_subgraph(
    graph: &GcsGraph,
    sub: &Incidence,
) -> Result<Option<(f64, VertexPoints)>> {
    let (p, layout) = fixed_subgraph_program(graph, sub)?;
    let sol = solve_conic(&p);
    match sol.status {
        ConicStatus::Optimal => {
            let x = layout
                .x
                .iter()
                .map(|(&v, r)| (v, sol.x[r.clone()].to_vec()))
                .collect();
            Ok(Some((sol.value, x)))
        }
        ConicStatus::Infeasible => Ok(None),
        status => Err(GcsError::Solver(format!(
            "fixed-subgraph program ended with {status:?} (residual {:.1e}, gap {:.1e})",
            sol.primal_residual, sol.gap
        ))),
    }
}

struct Collector<'a> {
    graph: &'a GcsGraph,
    out: Vec<Incidence>,
}

impl<'a> Collector<'a> {
    fn new(graph: &'a GcsGraph) -> Self {
        Self {
            graph,
            out: Vec::new(),
        }
    }

    fn push_edges(&mut self, edges: &[EdgeId], extra: &[VertexId]) -> Result<()> {
        if self.out.len() >= ENUMERATION_CAP {
            return Err(GcsError::EnumerationCap(ENUMERATION_CAP));
        }
        let mut inc = Incidence::empty(self.graph);
        for &e in edges {
            let edge = self.graph.edge(e);
            inc.edges[e.0] = true;
            inc.vertices[edge.tail.0] = true;
            inc.vertices[edge.head.0] = true;
        }
        for &v in extra {
            inc.vertices[v.0] = true;
        }
        self.out.push(inc);
        Ok(())
    }
}

fn simple_paths(c: &mut Collector, source: VertexId, target: VertexId) -> Result<()> {
    fn rec(
        c: &mut Collector,
        u: VertexId,
        target: VertexId,
        visited: &mut Vec<bool>,
        path: &mut Vec<EdgeId>,
    ) -> Result<()> {
        if u == target {
            return c.push_edges(path, &[]);
        }
        for &e in c.graph.outgoing(u) {
            let w = c.graph.edge(e).head;
            if !visited[w.0] {
                visited[w.0] = true;
                path.push(e);
                rec(c, w, target, visited, path)?;
                path.pop();
                visited[w.0] = false;
            }
        }
        Ok(())
    }
    let mut visited = vec![false; c.graph.num_vertices()];
    visited[source.0] = true;
    rec(c, source, target, &mut visited, &mut Vec::new())
}

fn hamiltonian_cycles(c: &mut Collector) -> Result<()> {
    fn rec(c: &mut Collector, order: &mut Vec<VertexId>, used: &mut Vec<bool>) -> Result<()> {
        let n = c.graph.num_vertices();
        if order.len() == n {
            // each cycle once: second vertex below the last
            if order[1] > order[n - 1] {
                return Ok(());
            }
            let mut edges = Vec::with_capacity(n);
            for i in 0..n {
                match c.graph.find_edge(order[i], order[(i + 1) % n]) {
                    Some(e) => edges.push(e),
                    None => return Ok(()),
                }
            }
            return c.push_edges(&edges, &[]);
        }
        let last = *order.last().unwrap();
        for w in 0..n {
            if !used[w] && c.graph.find_edge(last, VertexId(w)).is_some() {
                used[w] = true;
                order.push(VertexId(w));
                rec(c, order, used)?;
                order.pop();
                used[w] = false;
            }
        }
        Ok(())
    }
    let n = c.graph.num_vertices();
    let mut used = vec![false; n];
    used[0] = true;
    rec(c, &mut vec![VertexId(0)], &mut used)
}

fn spanning_trees(c: &mut Collector) -> Result<()> {
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    fn rec(c: &mut Collector, start: usize, chosen: &mut Vec<EdgeId>) -> Result<()> {
        let n = c.graph.num_vertices();
        let m = c.graph.num_edges();
        if chosen.len() == n - 1 {
            let mut parent: Vec<usize> = (0..n).collect();
            for &e in chosen.iter() {
                let edge = c.graph.edge(e);
                let (a, b) = (
                    find(&mut parent, edge.tail.0),
                    find(&mut parent, edge.head.0),
                );
                if a == b {
                    return Ok(());
                }
                parent[a] = b;
            }
            let all: Vec<VertexId> = c.graph.vertex_ids().collect();
            return c.push_edges(chosen, &all);
        }
        for e in start..m {
            if m - e < n - 1 - chosen.len() {
                break;
            }
            chosen.push(EdgeId(e));
            rec(c, e + 1, chosen)?;
            chosen.pop();
        }
        Ok(())
    }
    rec(c, 0, &mut Vec::new())
}

fn arborescences(c: &mut Collector, root: VertexId) -> Result<()> {
    fn rec(
        c: &mut Collector,
        root: VertexId,
        v: usize,
        parent_edge: &mut Vec<Option<EdgeId>>,
    ) -> Result<()> {
        let n = c.graph.num_vertices();
        if v == n {
            // every vertex must reach the root through parent links
            for s in 0..n {
                let mut u = VertexId(s);
                let mut steps = 0;
                while u != root {
                    u = c.graph.edge(parent_edge[u.0].unwrap()).tail;
                    steps += 1;
                    if steps > n {
                        return Ok(());
                    }
                }
            }
            let edges: Vec<EdgeId> = parent_edge.iter().flatten().copied().collect();
            let all: Vec<VertexId> = c.graph.vertex_ids().collect();
            return c.push_edges(&edges, &all);
        }
        if VertexId(v) == root {
            return rec(c, root, v + 1, parent_edge);
        }
        for &e in c.graph.incoming(VertexId(v)) {
            parent_edge[v] = Some(e);
            rec(c, root, v + 1, parent_edge)?;
        }
        parent_edge[v] = None;
        Ok(())
    }
    let mut parent_edge = vec![None; c.graph.num_vertices()];
    rec(c, root, 0, &mut parent_edge)
}

fn assignments(c: &mut Collector, facilities: &[VertexId], clients: &[VertexId]) -> Result<()> {
    fn rec(
        c: &mut Collector,
        open: &[VertexId],
        clients: &[VertexId],
        i: usize,
        chosen: &mut Vec<EdgeId>,
    ) -> Result<()> {
        if i == clients.len() {
            return c.push_edges(chosen, open);
        }
        for e in c.graph.incident(clients[i]) {
            if open.contains(&c.graph.edge(e).other(clients[i])) {
                chosen.push(e);
                rec(c, open, clients, i + 1, chosen)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    let f = facilities.len();
    if f >= usize::BITS as usize - 1 {
        return Err(GcsError::InvalidProblem(
            "too many facilities to enumerate".into(),
        ));
    }
    for mask in 1..(1usize << f) {
        let open: Vec<VertexId> = (0..f)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| facilities[i])
            .collect();
        rec(c, &open, clients, 0, &mut Vec::new())?;
    }
    Ok(())
}

fn matchings(c: &mut Collector, facilities: &[VertexId], clients: &[VertexId]) -> Result<()> {
    fn rec(
        c: &mut Collector,
        facilities: &[VertexId],
        clients: &[VertexId],
        used: &mut Vec<bool>,
        chosen: &mut Vec<EdgeId>,
    ) -> Result<()> {
        let i = chosen.len();
        if i == facilities.len() {
            return c.push_edges(chosen, &[]);
        }
        for (j, &w) in clients.iter().enumerate() {
            if used[j] {
                continue;
            }
            if let Some(e) = c.graph.find_edge(facilities[i], w) {
                used[j] = true;
                chosen.push(e);
                rec(c, facilities, clients, used, chosen)?;
                chosen.pop();
                used[j] = false;
            }
        }
        Ok(())
    }
    rec(
        c,
        facilities,
        clients,
        &mut vec![false; clients.len()],
        &mut Vec::new(),
    )
}

fn all_binary_vectors(c: &mut Collector, spec: &crate::ilp::IlpDescription) -> Result<()> {
    let (n, m) = (c.graph.num_vertices(), c.graph.num_edges());
    let bits = n + m;
    if bits >= 40 || (1usize << bits) > ENUMERATION_CAP {
        return Err(GcsError::EnumerationCap(ENUMERATION_CAP));
    }
    for mask in 0..(1usize << bits) {
        let mut inc = Incidence::empty(c.graph);
        for i in 0..n {
            inc.vertices[i] = mask >> i & 1 == 1;
        }
        for j in 0..m {
            inc.edges[j] = mask >> (n + j) & 1 == 1;
        }
        let endpoints_ok = inc.selected_edges().all(|e| {
            let edge = c.graph.edge(e);
            inc.vertices[edge.tail.0] && inc.vertices[edge.head.0]
        });
        if endpoints_ok && spec.admits(c.graph, &inc, 1e-9) {
            c.out.push(inc);
        }
    }
    Ok(())
}

/// Candidate subgraphs of a problem, in a deterministic order.
pub fn enumerate_candidates(graph: &GcsGraph, spec: &ProblemSpec) -> Result<Vec<Incidence>> {
    spec.build_ilp(graph)?;
    let mut c = Collector::new(graph);
    match &spec.kind {
        ProblemKind::Spp { source, target } => simple_paths(&mut c, *source, *target)?,
        ProblemKind::Tsp => hamiltonian_cycles(&mut c)?,
        ProblemKind::Mstp => spanning_trees(&mut c)?,
        ProblemKind::Msap { root } => arborescences(&mut c, *root)?,
        ProblemKind::Flp {
            facilities,
            clients,
        } => assignments(&mut c, facilities, clients)?,
        ProblemKind::Bmp {
            facilities,
            clients,
        } => matchings(&mut c, facilities, clients)?,
        ProblemKind::Custom(ilp) => all_binary_vectors(&mut c, ilp)?,
    }
    Ok(c.out)
}

/// Solves every candidate subgraph and keeps the cheapest. Ties go to the
/// earliest candidate.
pub fn oracle_enumerate(
    graph: &GcsGraph,
    spec: &ProblemSpec,
    workers: usize,
) -> Result<OracleResult> {
    let candidates = enumerate_candidates(graph, spec)?;
    let workers = workers.max(1).min(candidates.len().max(1));
    let chunk = candidates.len().div_ceil(workers).max(1);
    #[allow(clippy::type_complexity)]
    let solved: Vec<Result<Vec<Option<(f64, VertexPoints)>>>> = std::thread::scope(|s| {
        let handles: Vec<_> = candidates
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|sub| solve_fixed_subgraph(graph, sub))
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("oracle worker panicked"))
            .collect()
    });
    let mut best: Option<(f64, usize, BTreeMap<VertexId, Vec<f64>>)> = None;
    let mut infeasible = 0;
    let mut index = 0;
    for part in solved {
        for r in part? {
            match r {
                None => infeasible += 1,
                Some((value, x)) => {
                    if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                        best = Some((value, index, x));
                    }
                }
            }
            index += 1;
        }
    }
    Ok(match best {
        Some((value, i, x)) => OracleResult {
            value,
            subgraph: Some(candidates[i].clone()),
            x,
            candidates: candidates.len(),
            infeasible,
        },
        None => OracleResult {
            value: f64::INFINITY,
            subgraph: None,
            x: BTreeMap::new(),
            candidates: candidates.len(),
            infeasible,
        },
    })
}
