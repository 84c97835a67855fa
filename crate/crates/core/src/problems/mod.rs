//! Canned ILP descriptions of classic graph problems, enumeration oracles and
//! seeded instance generators.

pub mod generate;
mod oracle;

pub use oracle::{
    enumerate_candidates, fixed_subgraph_program, oracle_enumerate, solve_fixed_subgraph,
    FixedLayout, OracleResult, ENUMERATION_CAP,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::conic::AtomKind;
use crate::error::{GcsError, Result};
use crate::ilp::{AffineConstraint, BinaryVar, IlpDescription};
use crate::micp::{assemble, assemble_mccormick, Formulation, MixedIntegerConicProgram};
use crate::model::{EdgeId, GcsGraph, VertexId};
use crate::solver::{solve_conic, ConicStatus, SubtourSeparator};
use crate::tailor::tailor;

#[derive(Debug, Clone)]
pub enum ProblemKind {
    Spp {
        source: VertexId,
        target: VertexId,
    },
    Tsp,
    Mstp,
    Msap {
        root: VertexId,
    },
    Flp {
        facilities: Vec<VertexId>,
        clients: Vec<VertexId>,
    },
    Bmp {
        facilities: Vec<VertexId>,
        clients: Vec<VertexId>,
    },
    Custom(IlpDescription),
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Spp { .. } => "spp",
            ProblemKind::Tsp => "tsp",
            ProblemKind::Mstp => "mstp",
            ProblemKind::Msap { .. } => "msap",
            ProblemKind::Flp { .. } => "flp",
            ProblemKind::Bmp { .. } => "bmp",
            ProblemKind::Custom(_) => "custom",
        }
    }
}

/// A problem kind with its role vertices.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind) -> Self {
        Self { kind }
    }

    pub fn build_ilp(&self, graph: &GcsGraph) -> Result<IlpDescription> {
        match &self.kind {
            ProblemKind::Spp { source, target } => build_spp(graph, *source, *target),
            ProblemKind::Tsp => build_tsp(graph),
            ProblemKind::Mstp => build_mstp(graph),
            ProblemKind::Msap { root } => build_msap(graph, *root),
            ProblemKind::Flp {
                facilities,
                clients,
            } => build_flp(graph, facilities, clients),
            ProblemKind::Bmp {
                facilities,
                clients,
            } => build_bmp(graph, facilities, clients),
            ProblemKind::Custom(ilp) => {
                ilp.validate(graph)?;
                Ok(ilp.clone())
            }
        }
    }
}

/// Builds the ILP of a problem and assembles the requested formulation.
pub fn formulate(
    graph: &GcsGraph,
    spec: &ProblemSpec,
    formulation: Formulation,
) -> Result<MixedIntegerConicProgram> {
    let ilp = spec.build_ilp(graph)?;
    match formulation {
        Formulation::Tailored => assemble(graph, &tailor(graph, &ilp)?),
        Formulation::McCormick => assemble_mccormick(graph, &ilp),
    }
}

fn y_v(v: VertexId) -> BinaryVar {
    BinaryVar::Vertex(v)
}

fn y_e(e: EdgeId) -> BinaryVar {
    BinaryVar::Edge(e)
}

fn require_directed(graph: &GcsGraph, directed: bool, what: &str) -> Result<()> {
    if graph.is_directed() != directed {
        let need = if directed {
            "a directed"
        } else {
            "an undirected"
        };
        return Err(GcsError::InvalidProblem(format!(
            "{what} needs {need} graph"
        )));
    }
    Ok(())
}

fn check_vertex(graph: &GcsGraph, v: VertexId) -> Result<()> {
    if v.0 >= graph.num_vertices() {
        return Err(GcsError::UnknownVertex(format!("#{}", v.0)));
    }
    Ok(())
}

fn push(ilp: &mut IlpDescription, c: Result<AffineConstraint>, family: &str) -> Result<()> {
    ilp.push(c?.with_family(family));
    Ok(())
}

/// `y_v = Σ edges`, written `y_v − Σ y_e = 0`.
fn vertex_equals_sum(v: VertexId, edges: &[EdgeId]) -> Result<AffineConstraint> {
    AffineConstraint::eq(
        std::iter::once((y_v(v), 1.0)).chain(edges.iter().map(|&e| (y_e(e), -1.0))),
        0.0,
    )
}

fn no_edges(graph: &GcsGraph, v: VertexId, what: &str) -> GcsError {
    GcsError::InvalidProblem(format!(
        "vertex `{}` has no {what} edges, so the problem is infeasible",
        graph.vertex(v).name
    ))
}

fn fix_vertex(v: VertexId) -> Result<AffineConstraint> {
    AffineConstraint::eq([(y_v(v), 1.0)], -1.0)
}

fn warn_signed_atoms(graph: &GcsGraph, what: &str) {
    let signed = graph
        .vertices()
        .flat_map(|(_, v)| v.costs.iter())
        .chain(graph.edges().flat_map(|(_, e)| e.costs.iter()));
    let count = signed
        .filter(|a| {
            matches!(a.kind(), AtomKind::Linear | AtomKind::Constant) && !a.is_nonnegative()
        })
        .count();
    if count > 0 {
        log::warn!("{what}: {count} linear or constant cost atoms may be negative; the formulation assumes nonnegative costs");
    }
}

/// Paths from `source` to `target` in a directed graph. Edges entering the
/// source or leaving the target are forced to zero.
pub fn build_spp(graph: &GcsGraph, source: VertexId, target: VertexId) -> Result<IlpDescription> {
    require_directed(graph, true, "shortest path")?;
    check_vertex(graph, source)?;
    check_vertex(graph, target)?;
    if source == target {
        return Err(GcsError::InvalidProblem(
            "source and target coincide".into(),
        ));
    }
    let mut ilp = IlpDescription::default();
    let mut pruned: Vec<EdgeId> = graph
        .incoming(source)
        .iter()
        .chain(graph.outgoing(target))
        .copied()
        .collect();
    pruned.sort();
    pruned.dedup();
    for e in graph.edge_ids() {
        if pruned.binary_search(&e).is_ok() {
            push(
                &mut ilp,
                AffineConstraint::eq([(y_e(e), 1.0)], 0.0),
                "pruned",
            )?;
        } else {
            push(
                &mut ilp,
                AffineConstraint::geq([(y_e(e), 1.0)], 0.0),
                "edge_nonneg",
            )?;
        }
    }
    for v in graph.vertex_ids() {
        if v != source && v != target {
            push(
                &mut ilp,
                AffineConstraint::leq([(y_v(v), 1.0)], -1.0),
                "vertex_upper",
            )?;
        }
    }
    push(&mut ilp, fix_vertex(source), "terminal")?;
    push(&mut ilp, fix_vertex(target), "terminal")?;
    for v in graph.vertex_ids() {
        if v != source {
            push(&mut ilp, vertex_equals_sum(v, graph.incoming(v)), "inflow")?;
        }
    }
    for v in graph.vertex_ids() {
        if v != target {
            push(&mut ilp, vertex_equals_sum(v, graph.outgoing(v)), "outflow")?;
        }
    }
    ilp.requires_nonnegative_costs = true;
    warn_signed_atoms(graph, "shortest path");
    Ok(ilp)
}

fn edge_bounds(ilp: &mut IlpDescription, graph: &GcsGraph) -> Result<()> {
    for e in graph.edge_ids() {
        push(
            ilp,
            AffineConstraint::geq([(y_e(e), 1.0)], 0.0),
            "edge_nonneg",
        )?;
        push(
            ilp,
            AffineConstraint::leq([(y_e(e), 1.0)], -1.0),
            "edge_upper",
        )?;
    }
    Ok(())
}

/// Tours visiting every vertex, with lazy subtour elimination.
pub fn build_tsp(graph: &GcsGraph) -> Result<IlpDescription> {
    require_directed(graph, false, "traveling salesman")?;
    if graph.num_vertices() < 3 {
        return Err(GcsError::InvalidProblem(
            "a tour needs at least three vertices".into(),
        ));
    }
    let mut ilp = IlpDescription::default();
    edge_bounds(&mut ilp, graph)?;
    for v in graph.vertex_ids() {
        push(&mut ilp, fix_vertex(v), "vertex")?;
    }
    for v in graph.vertex_ids() {
        let terms: Vec<(BinaryVar, f64)> = graph
            .incident(v)
            .into_iter()
            .map(|e| (y_e(e), 1.0))
            .collect();
        if terms.is_empty() {
            return Err(no_edges(graph, v, "incident"));
        }
        push(&mut ilp, AffineConstraint::eq(terms, -2.0), "degree")?;
    }
    ilp.separators.push(Arc::new(SubtourSeparator::tsp()));
    Ok(ilp)
}

/// Spanning trees: every vertex selected, `|V| − 1` edges and lazy subtour
/// elimination.
pub fn build_mstp(graph: &GcsGraph) -> Result<IlpDescription> {
    require_directed(graph, false, "spanning tree")?;
    if graph.num_vertices() < 2 {
        return Err(GcsError::InvalidProblem(
            "a spanning tree needs at least two vertices".into(),
        ));
    }
    let mut ilp = IlpDescription::default();
    edge_bounds(&mut ilp, graph)?;
    for v in graph.vertex_ids() {
        push(&mut ilp, fix_vertex(v), "vertex")?;
    }
    let terms: Vec<(BinaryVar, f64)> = graph.edge_ids().map(|e| (y_e(e), 1.0)).collect();
    if terms.is_empty() {
        return Err(no_edges(graph, VertexId(0), "incident"));
    }
    push(
        &mut ilp,
        AffineConstraint::eq(terms, -(graph.num_vertices() as f64 - 1.0)),
        "edge_count",
    )?;
    ilp.separators.push(Arc::new(SubtourSeparator::mstp()));
    Ok(ilp)
}

/// Spanning arborescences rooted at `root`, with lazy cutset constraints.
/// Edges entering the root are forced to zero.
pub fn build_msap(graph: &GcsGraph, root: VertexId) -> Result<IlpDescription> {
    require_directed(graph, true, "spanning arborescence")?;
    check_vertex(graph, root)?;
    let mut ilp = IlpDescription::default();
    for e in graph.edge_ids() {
        if graph.edge(e).head == root {
            push(
                &mut ilp,
                AffineConstraint::eq([(y_e(e), 1.0)], 0.0),
                "pruned",
            )?;
        } else {
            push(
                &mut ilp,
                AffineConstraint::geq([(y_e(e), 1.0)], 0.0),
                "edge_nonneg",
            )?;
        }
    }
    for v in graph.vertex_ids() {
        push(&mut ilp, fix_vertex(v), "vertex")?;
    }
    for v in graph.vertex_ids() {
        if v != root {
            let terms: Vec<(BinaryVar, f64)> =
                graph.incoming(v).iter().map(|&e| (y_e(e), 1.0)).collect();
            if terms.is_empty() {
                return Err(no_edges(graph, v, "incoming"));
            }
            push(&mut ilp, AffineConstraint::eq(terms, -1.0), "indegree")?;
        }
    }
    ilp.separators.push(Arc::new(SubtourSeparator::msap(root)));
    Ok(ilp)
}

fn check_partition(
    graph: &GcsGraph,
    facilities: &[VertexId],
    clients: &[VertexId],
) -> Result<Vec<bool>> {
    require_directed(graph, false, "facility location")?;
    let mut is_facility = vec![None; graph.num_vertices()];
    for (&v, side) in facilities
        .iter()
        .map(|v| (v, true))
        .chain(clients.iter().map(|v| (v, false)))
    {
        check_vertex(graph, v)?;
        if is_facility[v.0].replace(side).is_some() {
            return Err(GcsError::InvalidProblem(format!(
                "vertex `{}` appears twice in the partition",
                graph.vertex(v).name
            )));
        }
    }
    let sides: Vec<bool> = is_facility
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| {
                GcsError::InvalidProblem(format!(
                    "vertex `{}` is not in the partition",
                    graph.vertex(VertexId(i)).name
                ))
            })
        })
        .collect::<Result<_>>()?;
    for (e, edge) in graph.edges() {
        if sides[edge.tail.0] == sides[edge.head.0] {
            return Err(GcsError::InvalidProblem(format!(
                "edge `{}` does not join a facility and a client",
                graph.edge_key(e)
            )));
        }
    }
    Ok(sides)
}

/// Each client assigned to exactly one facility; facilities may serve any
/// number of clients.
pub fn build_flp(
    graph: &GcsGraph,
    facilities: &[VertexId],
    clients: &[VertexId],
) -> Result<IlpDescription> {
    check_partition(graph, facilities, clients)?;
    let mut ilp = IlpDescription::default();
    for &v in facilities {
        push(
            &mut ilp,
            AffineConstraint::leq([(y_v(v), 1.0)], -1.0),
            "flp_ve",
        )?;
        for e in graph.incident(v) {
            push(
                &mut ilp,
                AffineConstraint::geq([(y_v(v), 1.0), (y_e(e), -1.0)], 0.0),
                "flp_ve",
            )?;
            push(
                &mut ilp,
                AffineConstraint::geq([(y_e(e), 1.0)], 0.0),
                "flp_ve",
            )?;
        }
    }
    for &v in clients {
        push(&mut ilp, fix_vertex(v), "flp_v")?;
        push(&mut ilp, vertex_equals_sum(v, &graph.incident(v)), "flp_v")?;
    }
    Ok(ilp)
}

/// Perfect matchings between equally many facilities and clients.
pub fn build_bmp(
    graph: &GcsGraph,
    facilities: &[VertexId],
    clients: &[VertexId],
) -> Result<IlpDescription> {
    if facilities.len() != clients.len() {
        return Err(GcsError::InvalidProblem(format!(
            "matching needs equal sides, got {} and {}",
            facilities.len(),
            clients.len()
        )));
    }
    check_partition(graph, facilities, clients)?;
    let mut ilp = IlpDescription::default();
    for e in graph.edge_ids() {
        push(&mut ilp, AffineConstraint::geq([(y_e(e), 1.0)], 0.0), "bmp")?;
    }
    for v in graph.vertex_ids() {
        push(&mut ilp, fix_vertex(v), "bmp")?;
        push(&mut ilp, vertex_equals_sum(v, &graph.incident(v)), "bmp")?;
    }
    Ok(ilp)
}

/// Optimal cost of each edge taken in isolation: minimize the endpoint and
/// edge costs subject to the endpoint and edge sets.
pub fn bmp_edge_weights(graph: &GcsGraph) -> Result<BTreeMap<EdgeId, f64>> {
    let mut out = BTreeMap::new();
    for (e, edge) in graph.edges() {
        let mut sub = crate::ilp::Incidence::empty(graph);
        sub.vertices[edge.tail.0] = true;
        sub.vertices[edge.head.0] = true;
        sub.edges[e.0] = true;
        let (p, _) = fixed_subgraph_program(graph, &sub)?;
        let sol = solve_conic(&p);
        let w = match sol.status {
            ConicStatus::Optimal => sol.value,
            ConicStatus::Infeasible => f64::INFINITY,
            status => {
                return Err(GcsError::Solver(format!(
                    "edge `{}` weight program ended with {status:?}",
                    graph.edge_key(e)
                )))
            }
        };
        out.insert(e, w);
    }
    Ok(out)
}
