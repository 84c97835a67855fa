//! Mixed-integer conic programs over the incidence binaries and the product
//! variables of a graph of convex sets.

mod assemble;
mod extract;

pub use assemble::{assemble, assemble_mccormick, BOX_INFLATION};
pub use extract::{extract_solution, product_residual, Extracted, RECONCILE_TOL};

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::expr::{ConeConstraint, LinExpr};
use crate::ilp::{AffineConstraint, BinaryVar, Separator};
use crate::model::{EdgeId, GcsGraph, VertexId};
use crate::solver::ConicProgram;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    Tailored,
    McCormick,
}

/// Index ranges of every continuous block followed by the binaries
/// `(y_v for all v, y_e for all e)`.
#[derive(Debug, Clone)]
pub struct MicpLayout {
    pub vertex_z: Vec<Range<usize>>,
    pub vertex_t: Vec<Range<usize>>,
    /// Explicit `x_v` (McCormick only).
    pub vertex_x: Vec<Range<usize>>,
    /// `(z_v^e, t_v^e)` per incidence; `t_v^e` is empty for McCormick.
    pub incidence: BTreeMap<(VertexId, EdgeId), (Range<usize>, Range<usize>)>,
    pub edge_z: Vec<Range<usize>>,
    pub edge_t: Vec<Range<usize>>,
    pub num_continuous: usize,
    pub num_vertices: usize,
    pub num_edges: usize,
}

impl MicpLayout {
    pub fn binary(&self, var: BinaryVar) -> usize {
        self.num_continuous + var.flat_index(self.num_vertices)
    }

    pub fn y_vertex(&self, v: VertexId) -> usize {
        self.binary(BinaryVar::Vertex(v))
    }

    pub fn y_edge(&self, e: EdgeId) -> usize {
        self.binary(BinaryVar::Edge(e))
    }

    pub fn num_binaries(&self) -> usize {
        self.num_vertices + self.num_edges
    }

    pub fn total(&self) -> usize {
        self.num_continuous + self.num_binaries()
    }

    pub fn binaries(&self) -> Range<usize> {
        self.num_continuous..self.total()
    }

    pub fn incidence_z(&self, v: VertexId, e: EdgeId) -> Range<usize> {
        self.incidence[&(v, e)].0.clone()
    }

    pub fn incidence_t(&self, v: VertexId, e: EdgeId) -> Range<usize> {
        self.incidence[&(v, e)].1.clone()
    }
}

/// What a constraint of the program encodes.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintRole {
    /// `(z_v^e, t_v^e, y_e) ∈ X̃′_v`
    IncidenceOn {
        vertex: VertexId,
        edge: EdgeId,
    },
    /// `(z_v − z_v^e, t_v − t_v^e, y_v − y_e) ∈ X̃′_v`
    IncidenceComplement {
        vertex: VertexId,
        edge: EdgeId,
    },
    LiftedInequality {
        vertex: VertexId,
        family: Option<String>,
    },
    LiftedEquality {
        vertex: VertexId,
        family: Option<String>,
    },
    /// `(z_v^e, z_w^e, z_e, t_e, y_e) ∈ X̃′_e`
    EdgeSet {
        edge: EdgeId,
    },
    /// `(z_v, t_v, y_v) ∈ X̃′_v`
    VertexSet {
        vertex: VertexId,
    },
    /// Box envelopes and `x_v ∈ X_v` in the McCormick formulation.
    Envelope {
        vertex: VertexId,
    },
    /// Explicit ILP constraint by index.
    Ilp(usize),
    Cut,
}

impl ConstraintRole {
    pub fn tag(&self) -> &'static str {
        match self {
            ConstraintRole::IncidenceOn { .. } => "incidence_on",
            ConstraintRole::IncidenceComplement { .. } => "incidence_complement",
            ConstraintRole::LiftedInequality { .. } => "lifted_inequality",
            ConstraintRole::LiftedEquality { .. } => "lifted_equality",
            ConstraintRole::EdgeSet { .. } => "edge_set",
            ConstraintRole::VertexSet { .. } => "vertex_set",
            ConstraintRole::Envelope { .. } => "envelope",
            ConstraintRole::Ilp(_) => "ilp",
            ConstraintRole::Cut => "cut",
        }
    }
}

#[derive(Clone)]
pub struct MixedIntegerConicProgram {
    pub formulation: Formulation,
    pub layout: MicpLayout,
    pub objective: Vec<f64>,
    pub constraints: Vec<(ConeConstraint, ConstraintRole)>,
    pub fixes: BTreeMap<BinaryVar, bool>,
    pub conflicts: BTreeSet<BinaryVar>,
    pub binary_constraints: Vec<AffineConstraint>,
    pub separators: Vec<Arc<dyn Separator>>,
    pub requires_nonnegative_costs: bool,
}

impl std::fmt::Debug for MixedIntegerConicProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MixedIntegerConicProgram")
            .field("formulation", &self.formulation)
            .field("continuous", &self.layout.num_continuous)
            .field("binaries", &self.layout.num_binaries())
            .field("constraints", &self.constraints.len())
            .finish()
    }
}

impl MixedIntegerConicProgram {
    pub fn count_role(&self, pred: impl Fn(&ConstraintRole) -> bool) -> usize {
        self.constraints.iter().filter(|(_, r)| pred(r)).count()
    }

    /// The affine constraint over binaries as a conic row.
    pub fn binary_row(&self, c: &AffineConstraint) -> ConeConstraint {
        let mut row = LinExpr::constant(c.constant);
        for (&var, &coef) in &c.terms {
            row.add_term(self.layout.binary(var), coef);
        }
        let cone = match c.sense {
            crate::ilp::Sense::Geq => crate::conic::Cone::nonnegative(1),
            crate::ilp::Sense::Eq => crate::conic::Cone::zero(1),
        };
        ConeConstraint::new(vec![row], cone)
    }

    /// Continuous relaxation with binaries in `[0, 1]` and fixes applied as bounds.
    pub fn relaxation(&self) -> ConicProgram {
        let mut p = ConicProgram::new(self.layout.total());
        p.objective = self.objective.clone();
        p.constraints = self.constraints.iter().map(|(c, _)| c.clone()).collect();
        for i in self.layout.binaries() {
            p.set_bounds(i, 0.0, 1.0);
        }
        for (&var, &value) in &self.fixes {
            let i = self.layout.binary(var);
            if self.conflicts.contains(&var) {
                p.set_bounds(i, 1.0, 0.0);
            } else {
                let v = if value { 1.0 } else { 0.0 };
                p.set_bounds(i, v, v);
            }
        }
        p
    }

    pub fn objective_value(&self, point: &[f64]) -> f64 {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// JSON description of the program with a stable field order.
    pub fn dump(&self, graph: &GcsGraph) -> Value {
        let range = |r: &Range<usize>| json!([r.start, r.end]);
        let vertices: Vec<Value> = graph
            .vertex_ids()
            .map(|v| {
                json!({
                    "name": graph.vertex(v).name,
                    "z": range(&self.layout.vertex_z[v.0]),
                    "t": range(&self.layout.vertex_t[v.0]),
                    "x": self.layout.vertex_x.get(v.0).map(range),
                    "y": self.layout.y_vertex(v),
                })
            })
            .collect();
        let incidences: Vec<Value> = self
            .layout
            .incidence
            .iter()
            .map(|((v, e), (z, t))| {
                json!({
                    "vertex": graph.vertex(*v).name,
                    "edge": graph.edge_key(*e),
                    "z": range(z),
                    "t": range(t),
                })
            })
            .collect();
        let edges: Vec<Value> = graph
            .edge_ids()
            .map(|e| {
                json!({
                    "key": graph.edge_key(e),
                    "z": range(&self.layout.edge_z[e.0]),
                    "t": range(&self.layout.edge_t[e.0]),
                    "y": self.layout.y_edge(e),
                })
            })
            .collect();
        let constraints: Vec<Value> = self
            .constraints
            .iter()
            .map(|(c, role)| {
                let triplets: Vec<Value> = c
                    .rows
                    .iter()
                    .enumerate()
                    .flat_map(|(i, row)| row.terms.iter().map(move |&(j, v)| json!([i, j, v])))
                    .collect();
                let offsets: Vec<f64> = c.rows.iter().map(|r| r.constant).collect();
                json!({
                    "role": role.tag(),
                    "cone": c.cone.kind,
                    "dim": c.cone.dim,
                    "triplets": triplets,
                    "offset": offsets,
                })
            })
            .collect();
        let objective: Vec<Value> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| json!([i, c]))
            .collect();
        let fixes: Vec<Value> = self
            .fixes
            .iter()
            .map(|(var, value)| json!([var.label(graph), *value as u8]))
            .collect();
        json!({
            "formulation": match self.formulation {
                Formulation::Tailored => "tailored",
                Formulation::McCormick => "mccormick",
            },
            "layout": {
                "continuous": self.layout.num_continuous,
                "binaries": self.layout.num_binaries(),
                "vertices": vertices,
                "incidences": incidences,
                "edges": edges,
            },
            "objective": objective,
            "constraints": constraints,
            "fixes": fixes,
        })
    }
}
