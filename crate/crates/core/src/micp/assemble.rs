use std::collections::BTreeMap;

use super::{ConstraintRole, Formulation, MicpLayout, MixedIntegerConicProgram};
use crate::conic::{ConicSet, HomogenizedSet};
use crate::error::Result;
use crate::expr::{homogenized_membership, set_membership, LinExpr};
use crate::ilp::IlpDescription;
use crate::model::{Epigraph, GcsGraph, VertexId};
use crate::tailor::{LocalConstraint, TailoredPlan};

/// Outward inflation of McCormick bounding boxes.
pub const BOX_INFLATION: f64 = 1e-7;

struct Allocator(usize);

impl Allocator {
    fn take(&mut self, len: usize) -> std::ops::Range<usize> {
        let r = self.0..self.0 + len;
        self.0 += len;
        r
    }
}

fn vars(r: &std::ops::Range<usize>) -> Vec<LinExpr> {
    r.clone().map(LinExpr::var).collect()
}

/// `Σ coef · block` for blocks of equal length.
fn combine(parts: &[(f64, std::ops::Range<usize>)], len: usize) -> Vec<LinExpr> {
    (0..len)
        .map(|i| {
            let mut e = LinExpr::zero();
            for (coef, r) in parts {
                e.add_term(r.start + i, *coef);
            }
            e.compact()
        })
        .collect()
}

fn combine_scalar(parts: &[(f64, usize)]) -> LinExpr {
    let mut e = LinExpr::zero();
    for &(c, i) in parts {
        e.add_term(i, c);
    }
    e.compact()
}

struct Epigraphs {
    vertex: Vec<Epigraph>,
    vertex_h: Vec<HomogenizedSet>,
    edge: Vec<Epigraph>,
    edge_h: Vec<HomogenizedSet>,
}

impl Epigraphs {
    fn build(graph: &GcsGraph) -> Result<Self> {
        let vertex: Vec<Epigraph> = graph
            .vertex_ids()
            .map(|v| graph.vertex_epigraph(v))
            .collect::<Result<_>>()?;
        let edge: Vec<Epigraph> = graph
            .edge_ids()
            .map(|e| graph.edge_epigraph(e))
            .collect::<Result<_>>()?;
        Ok(Self {
            vertex_h: vertex.iter().map(|e| e.set.homogenize()).collect(),
            edge_h: edge.iter().map(|e| e.set.homogenize()).collect(),
            vertex,
            edge,
        })
    }
}

fn layout(graph: &GcsGraph, epi: &Epigraphs, formulation: Formulation) -> MicpLayout {
    let mut alloc = Allocator(0);
    let mut vertex_x = Vec::new();
    if formulation == Formulation::McCormick {
        for (_, vertex) in graph.vertices() {
            vertex_x.push(alloc.take(vertex.dim));
        }
    }
    let mut vertex_z = Vec::new();
    let mut vertex_t = Vec::new();
    let mut incidence = BTreeMap::new();
    for (v, vertex) in graph.vertices() {
        vertex_z.push(alloc.take(vertex.dim));
        vertex_t.push(alloc.take(epi.vertex[v.0].num_slacks));
        for e in graph.incident(v) {
            let z = alloc.take(vertex.dim);
            let t = match formulation {
                Formulation::Tailored => alloc.take(epi.vertex[v.0].num_slacks),
                Formulation::McCormick => alloc.take(0),
            };
            incidence.insert((v, e), (z, t));
        }
    }
    let mut edge_z = Vec::new();
    let mut edge_t = Vec::new();
    for (e, edge) in graph.edges() {
        edge_t.push(alloc.take(epi.edge[e.0].num_slacks));
        edge_z.push(alloc.take(edge.aux_dim));
    }
    MicpLayout {
        vertex_z,
        vertex_t,
        vertex_x,
        incidence,
        edge_z,
        edge_t,
        num_continuous: alloc.0,
        num_vertices: graph.num_vertices(),
        num_edges: graph.num_edges(),
    }
}

fn base_program(
    graph: &GcsGraph,
    epi: &Epigraphs,
    formulation: Formulation,
) -> MixedIntegerConicProgram {
    let layout = layout(graph, epi, formulation);
    let mut objective = vec![0.0; layout.total()];
    for v in graph.vertex_ids() {
        for i in layout.vertex_t[v.0].clone() {
            objective[i] = 1.0;
        }
        objective[layout.y_vertex(v)] += epi.vertex[v.0].constant;
    }
    for e in graph.edge_ids() {
        for i in layout.edge_t[e.0].clone() {
            objective[i] = 1.0;
        }
        objective[layout.y_edge(e)] += epi.edge[e.0].constant;
    }
    MixedIntegerConicProgram {
        formulation,
        layout,
        objective,
        constraints: Vec::new(),
        fixes: BTreeMap::new(),
        conflicts: Default::default(),
        binary_constraints: Vec::new(),
        separators: Vec::new(),
        requires_nonnegative_costs: false,
    }
}

fn push_membership(
    p: &mut MixedIntegerConicProgram,
    set: &HomogenizedSet,
    args: &[LinExpr],
    y: &LinExpr,
    role: ConstraintRole,
) {
    for c in homogenized_membership(set, args, y) {
        p.constraints.push((c, role.clone()));
    }
}

fn push_edge_sets(p: &mut MixedIntegerConicProgram, graph: &GcsGraph, epi: &Epigraphs) {
    for (e, edge) in graph.edges() {
        let l = &p.layout;
        let mut args = vars(&l.incidence_z(edge.tail, e));
        args.extend(vars(&l.incidence_z(edge.head, e)));
        args.extend(vars(&l.edge_z[e.0]));
        args.extend(vars(&l.edge_t[e.0]));
        let y = LinExpr::var(l.y_edge(e));
        push_membership(
            p,
            &epi.edge_h[e.0],
            &args,
            &y,
            ConstraintRole::EdgeSet { edge: e },
        );
    }
}

fn push_vertex_set(p: &mut MixedIntegerConicProgram, v: VertexId, epi: &Epigraphs) {
    let l = &p.layout;
    let mut args = vars(&l.vertex_z[v.0]);
    args.extend(vars(&l.vertex_t[v.0]));
    let y = LinExpr::var(l.y_vertex(v));
    push_membership(
        p,
        &epi.vertex_h[v.0],
        &args,
        &y,
        ConstraintRole::VertexSet { vertex: v },
    );
}

fn push_binary_side(
    p: &mut MixedIntegerConicProgram,
    plan_constraints: &[crate::ilp::AffineConstraint],
) {
    for (i, c) in plan_constraints.iter().enumerate() {
        let row = p.binary_row(c);
        p.constraints.push((row, ConstraintRole::Ilp(i)));
    }
    p.binary_constraints = plan_constraints.to_vec();
}

/// The `(z, t)` arguments and binary expression of a local combination
/// `a·(z_v, t_v, y_v) + Σ b_e·(z_v^e, t_v^e, y_e)`.
fn local_combination(
    layout: &MicpLayout,
    lc: &LocalConstraint,
    n: usize,
    k: usize,
) -> (Vec<LinExpr>, LinExpr) {
    let v = lc.anchor;
    let mut zs = vec![(lc.a, layout.vertex_z[v.0].clone())];
    let mut ts = vec![(lc.a, layout.vertex_t[v.0].clone())];
    let mut ys = vec![(lc.a, layout.y_vertex(v))];
    for (&e, &b) in &lc.b {
        zs.push((b, layout.incidence_z(v, e)));
        ts.push((b, layout.incidence_t(v, e)));
        ys.push((b, layout.y_edge(e)));
    }
    let mut args = combine(&zs, n);
    args.extend(combine(&ts, k));
    (args, combine_scalar(&ys))
}

/// Tailored epigraph-form program from a plan.
pub fn assemble(graph: &GcsGraph, plan: &TailoredPlan) -> Result<MixedIntegerConicProgram> {
    plan.check_graph(graph)?;
    let epi = Epigraphs::build(graph)?;
    let mut p = base_program(graph, &epi, Formulation::Tailored);
    for (v, vertex) in graph.vertices() {
        let vp = &plan.vertices[v.0];
        let (n, k) = (vertex.dim, epi.vertex[v.0].num_slacks);
        for &e in &vp.incidence_rows {
            let lc = LocalConstraint::edge_nonnegative(v, e);
            let (args, y) = local_combination(&p.layout, &lc, n, k);
            push_membership(
                &mut p,
                &epi.vertex_h[v.0],
                &args,
                &y,
                ConstraintRole::IncidenceOn { vertex: v, edge: e },
            );
        }
        for &e in &vp.complement_rows {
            let lc = LocalConstraint::edge_below_vertex(v, e);
            let (args, y) = local_combination(&p.layout, &lc, n, k);
            push_membership(
                &mut p,
                &epi.vertex_h[v.0],
                &args,
                &y,
                ConstraintRole::IncidenceComplement { vertex: v, edge: e },
            );
        }
        for lc in &vp.lifted_inequalities {
            let (args, y) = local_combination(&p.layout, lc, n, k);
            let role = ConstraintRole::LiftedInequality {
                vertex: v,
                family: lc.family.clone(),
            };
            push_membership(&mut p, &epi.vertex_h[v.0], &args, &y, role);
        }
        for lc in &vp.lifted_equalities {
            let (args, _) = local_combination(&p.layout, lc, n, k);
            let rows: Vec<LinExpr> = args.into_iter().filter(|r| !r.terms.is_empty()).collect();
            if rows.is_empty() {
                continue;
            }
            let dim = rows.len();
            let role = ConstraintRole::LiftedEquality {
                vertex: v,
                family: lc.family.clone(),
            };
            p.constraints.push((
                crate::expr::ConeConstraint::new(rows, crate::conic::Cone::zero(dim)),
                role,
            ));
        }
        if graph.incident(v).is_empty() {
            push_vertex_set(&mut p, v, &epi);
        }
    }
    push_edge_sets(&mut p, graph, &epi);
    push_binary_side(&mut p, &plan.binary_constraints);
    p.fixes = plan.fixes.clone();
    p.conflicts = plan.conflicts.clone();
    p.separators = plan.separators.clone();
    p.requires_nonnegative_costs = plan.requires_nonnegative_costs;
    Ok(p)
}

/// Baseline formulation with explicit `x_v` and bounding-box envelopes on the
/// products `z_v = y_v x_v` and `z_v^e = y_e x_v`.
pub fn assemble_mccormick(
    graph: &GcsGraph,
    ilp: &IlpDescription,
) -> Result<MixedIntegerConicProgram> {
    ilp.validate(graph)?;
    let epi = Epigraphs::build(graph)?;
    let mut p = base_program(graph, &epi, Formulation::McCormick);
    for (v, vertex) in graph.vertices() {
        let n = vertex.dim;
        let (lo, hi) = graph.vertex_bounding_box(v)?;
        let lo: Vec<f64> = lo.iter().map(|l| l - BOX_INFLATION).collect();
        let hi: Vec<f64> = hi.iter().map(|h| h + BOX_INFLATION).collect();
        let bx = ConicSet::axis_box(&lo, &hi)?.homogenize();
        let x = p.layout.vertex_x[v.0].clone();
        let role = ConstraintRole::Envelope { vertex: v };
        let set = graph.vertex_set(v)?;
        for c in set_membership(&set, &vars(&x), &LinExpr::constant(1.0)) {
            p.constraints.push((c, role.clone()));
        }
        let mut products = vec![(p.layout.vertex_z[v.0].clone(), p.layout.y_vertex(v))];
        for e in graph.incident(v) {
            products.push((p.layout.incidence_z(v, e), p.layout.y_edge(e)));
        }
        for (z, y) in products {
            push_membership(&mut p, &bx, &vars(&z), &LinExpr::var(y), role.clone());
            let diff = combine(&[(1.0, x.clone()), (-1.0, z)], n);
            let mut rest = LinExpr::constant(1.0);
            rest.add_term(y, -1.0);
            push_membership(&mut p, &bx, &diff, &rest, role.clone());
        }
        push_vertex_set(&mut p, v, &epi);
    }
    push_edge_sets(&mut p, graph, &epi);
    push_binary_side(&mut p, &ilp.constraints);
    let plan = crate::tailor::tailor(graph, ilp)?;
    p.fixes = plan.fixes;
    p.conflicts = plan.conflicts;
    p.separators = ilp.separators.clone();
    p.requires_nonnegative_costs = ilp.requires_nonnegative_costs;
    Ok(p)
}
