//! Local lifting of ILP constraints into conic constraints on the product
//! variables, and selection of the base incidence rows that remain necessary.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::conic::Cone;
use crate::error::{GcsError, Result};
use crate::expr::{ConeConstraint, LinExpr};
use crate::ilp::{AffineConstraint, BinaryVar, IlpDescription, Sense, Separator};
use crate::model::{EdgeId, GcsGraph, VertexId};
use crate::solver::{solve_conic, ConicProgram, ConicStatus};

/// Tolerance on the multiplier residual when deciding redundancy.
pub const REDUNDANCY_TOL: f64 = 1e-9;

/// `a y_v + Σ b_e y_e (≥ | =) 0` with every `e` incident to the anchor `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalConstraint {
    pub anchor: VertexId,
    pub a: f64,
    pub b: BTreeMap<EdgeId, f64>,
    pub sense: Sense,
    pub family: Option<String>,
}

impl LocalConstraint {
    pub fn new(
        anchor: VertexId,
        a: f64,
        b: impl IntoIterator<Item = (EdgeId, f64)>,
        sense: Sense,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (e, c) in b {
            *map.entry(e).or_insert(0.0) += c;
        }
        map.retain(|_, c: &mut f64| *c != 0.0);
        Self {
            anchor,
            a,
            b: map,
            sense,
            family: None,
        }
    }

    /// `y_e ≥ 0` at `v`.
    pub fn edge_nonnegative(anchor: VertexId, e: EdgeId) -> Self {
        Self::new(anchor, 0.0, [(e, 1.0)], Sense::Geq)
    }

    /// `y_v − y_e ≥ 0` at `v`.
    pub fn edge_below_vertex(anchor: VertexId, e: EdgeId) -> Self {
        Self::new(anchor, 1.0, [(e, -1.0)], Sense::Geq)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b.is_empty()
    }

    /// The edge `e` when this is a positive multiple of `y_e ≥ 0`.
    pub fn as_edge_nonnegative(&self) -> Option<EdgeId> {
        match (self.sense, self.a, self.b.len()) {
            (Sense::Geq, 0.0, 1) => {
                let (&e, &c) = self.b.iter().next()?;
                (c > 0.0).then_some(e)
            }
            _ => None,
        }
    }

    /// The edge `e` when this is a positive multiple of `y_v − y_e ≥ 0`.
    pub fn as_edge_below_vertex(&self) -> Option<EdgeId> {
        match (self.sense, self.b.len()) {
            (Sense::Geq, 1) if self.a > 0.0 => {
                let (&e, &c) = self.b.iter().next()?;
                (c == -self.a).then_some(e)
            }
            _ => None,
        }
    }
}

/// Every vertex `v` such that the constraint only involves `y_v` and edges
/// incident to `v`. Empty when the constraint is global.
pub fn localize(constraint: &AffineConstraint, graph: &GcsGraph) -> Vec<VertexId> {
    let mut vertex: Option<VertexId> = None;
    let mut edges = Vec::new();
    for var in constraint.support() {
        match var {
            BinaryVar::Vertex(v) => {
                if vertex.is_some_and(|u| u != v) {
                    return Vec::new();
                }
                vertex = Some(v);
            }
            BinaryVar::Edge(e) => edges.push(e),
        }
    }
    let candidates: Vec<VertexId> = match (vertex, edges.first()) {
        (Some(v), _) => vec![v],
        (None, Some(&e)) => {
            let edge = graph.edge(e);
            vec![edge.tail.min(edge.head), edge.tail.max(edge.head)]
        }
        (None, None) => Vec::new(),
    };
    candidates
        .into_iter()
        .filter(|&v| edges.iter().all(|&e| graph.edge(e).contains(v)))
        .collect()
}

/// Turns an affine constraint anchored at `v` into a linear one, returning
/// whether `y_v = 1` must be fixed for the linear form to be equivalent.
/// Degenerate (all-zero) linear forms are returned as `None`.
pub fn linearize_affine(
    constraint: &AffineConstraint,
    anchor: VertexId,
) -> (Option<LocalConstraint>, bool) {
    let mut a = 0.0;
    let mut b = Vec::new();
    for (&var, &coef) in &constraint.terms {
        match var {
            BinaryVar::Vertex(v) => {
                debug_assert_eq!(v, anchor);
                a += coef;
            }
            BinaryVar::Edge(e) => b.push((e, coef)),
        }
    }
    let c = constraint.constant;
    let fix = match constraint.sense {
        Sense::Geq => c < 0.0,
        Sense::Eq => c != 0.0,
    };
    let mut local = LocalConstraint::new(anchor, a + c, b, constraint.sense);
    local.family = constraint.family.clone();
    ((!local.is_zero()).then_some(local), fix)
}

/// Whether `target` is a combination of `local` with nonnegative multipliers
/// on inequalities and free multipliers on equalities.
pub fn check_redundancy(local: &[LocalConstraint], target: &LocalConstraint) -> bool {
    if local.is_empty() {
        return false;
    }
    let mut edges: BTreeSet<EdgeId> = target.b.keys().copied().collect();
    for l in local {
        edges.extend(l.b.keys().copied());
    }
    let coords: Vec<Option<EdgeId>> = std::iter::once(None)
        .chain(edges.into_iter().map(Some))
        .collect();
    let coef = |l: &LocalConstraint, coord: Option<EdgeId>| match coord {
        None => l.a,
        Some(e) => l.b.get(&e).copied().unwrap_or(0.0),
    };
    let m = local.len();
    let mut p = ConicProgram::new(m);
    for (i, l) in local.iter().enumerate() {
        if l.sense == Sense::Geq {
            p.set_bounds(i, 0.0, f64::INFINITY);
        }
    }
    let rows: Vec<LinExpr> = coords
        .iter()
        .map(|&coord| {
            let mut row = LinExpr::constant(-coef(target, coord));
            for (i, l) in local.iter().enumerate() {
                row.add_term(i, coef(l, coord));
            }
            row
        })
        .collect();
    let dim = rows.len();
    p.add_constraint(ConeConstraint::new(rows.clone(), Cone::zero(dim)));
    let sol = solve_conic(&p);
    if !matches!(sol.status, ConicStatus::Optimal | ConicStatus::Inaccurate) {
        return false;
    }
    let scale = sol.x.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    let sign_ok = local
        .iter()
        .zip(&sol.x)
        .all(|(l, &m)| l.sense == Sense::Eq || m >= -REDUNDANCY_TOL * scale);
    sign_ok
        && rows
            .iter()
            .all(|r| r.evaluate(&sol.x).abs() <= REDUNDANCY_TOL * scale)
}

/// The lifted constraints for one vertex.
#[derive(Debug, Clone, Default)]
pub struct VertexPlan {
    /// All linearized local constraints anchored at the vertex.
    pub local: Vec<LocalConstraint>,
    /// Lifted as conic memberships (other than the base rows).
    pub lifted_inequalities: Vec<LocalConstraint>,
    /// Lifted as linear equalities on the product blocks.
    pub lifted_equalities: Vec<LocalConstraint>,
    /// Incidences `e` that keep `(z_v^e, t_v^e, y_e) ∈ X̃′_v`.
    pub incidence_rows: Vec<EdgeId>,
    /// Incidences `e` that keep `(z_v − z_v^e, t_v − t_v^e, y_v − y_e) ∈ X̃′_v`.
    pub complement_rows: Vec<EdgeId>,
}

#[derive(Clone)]
pub struct TailoredPlan {
    pub num_vertices: usize,
    pub num_edges: usize,
    pub vertices: Vec<VertexPlan>,
    /// Fixed binaries; a variable present in `conflicts` has contradictory fixes.
    pub fixes: BTreeMap<BinaryVar, bool>,
    pub conflicts: BTreeSet<BinaryVar>,
    /// Audit trail of fixing decisions.
    pub fix_notes: Vec<String>,
    /// Every explicit ILP constraint; all of them act on the binary side.
    pub binary_constraints: Vec<AffineConstraint>,
    /// Indices into `binary_constraints` with no anchor.
    pub global: Vec<usize>,
    pub separators: Vec<Arc<dyn Separator>>,
    pub requires_nonnegative_costs: bool,
}

impl std::fmt::Debug for TailoredPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TailoredPlan")
            .field("vertices", &self.vertices)
            .field("fixes", &self.fixes)
            .field("conflicts", &self.conflicts)
            .field("global", &self.global)
            .finish()
    }
}

impl TailoredPlan {
    pub fn check_graph(&self, graph: &GcsGraph) -> Result<()> {
        if self.num_vertices != graph.num_vertices() || self.num_edges != graph.num_edges() {
            return Err(GcsError::PlanMismatch(format!(
                "plan built for {} vertices and {} edges, graph has {} and {}",
                self.num_vertices,
                self.num_edges,
                graph.num_vertices(),
                graph.num_edges()
            )));
        }
        Ok(())
    }

    pub fn num_complement_rows(&self) -> usize {
        self.vertices.iter().map(|p| p.complement_rows.len()).sum()
    }
}

fn record_fix(
    fixes: &mut BTreeMap<BinaryVar, bool>,
    conflicts: &mut BTreeSet<BinaryVar>,
    notes: &mut Vec<String>,
    var: BinaryVar,
    value: bool,
    label: String,
    reason: &str,
) {
    match fixes.get(&var) {
        Some(&old) if old == value => {
            notes.push(format!("{label}={} already fixed ({reason})", value as u8))
        }
        Some(_) => {
            conflicts.insert(var);
            notes.push(format!("{label} has conflicting fixes ({reason})"));
        }
        None => {
            fixes.insert(var, value);
            notes.push(format!("{label}={} fixed ({reason})", value as u8));
        }
    }
}

pub fn tailor(graph: &GcsGraph, ilp: &IlpDescription) -> Result<TailoredPlan> {
    ilp.validate(graph)?;
    let mut fixes = BTreeMap::new();
    let mut conflicts = BTreeSet::new();
    let mut notes = Vec::new();
    for (&var, &value) in &ilp.fixed {
        record_fix(
            &mut fixes,
            &mut conflicts,
            &mut notes,
            var,
            value,
            var.label(graph),
            "declared",
        );
    }

    let mut local: Vec<Vec<LocalConstraint>> = vec![Vec::new(); graph.num_vertices()];
    let mut global = Vec::new();
    for (idx, c) in ilp.constraints.iter().enumerate() {
        let anchors = localize(c, graph);
        if anchors.is_empty() {
            global.push(idx);
        }
        for v in anchors {
            let (lc, fix) = linearize_affine(c, v);
            if fix {
                let reason = match &c.family {
                    Some(f) => format!("constant term of `{f}` constraint"),
                    None => "constant term of a local constraint".into(),
                };
                let var = BinaryVar::Vertex(v);
                record_fix(
                    &mut fixes,
                    &mut conflicts,
                    &mut notes,
                    var,
                    true,
                    var.label(graph),
                    &reason,
                );
            }
            if let Some(lc) = lc {
                local[v.0].push(lc);
            }
        }
    }

    let mut vertices = Vec::with_capacity(graph.num_vertices());
    for v in graph.vertex_ids() {
        let lv = std::mem::take(&mut local[v.0]);
        let mut plan = VertexPlan::default();
        let mut inc = BTreeSet::new();
        let mut comp = BTreeSet::new();
        for lc in &lv {
            if lc.sense == Sense::Eq {
                plan.lifted_equalities.push(lc.clone());
            } else if let Some(e) = lc.as_edge_nonnegative() {
                inc.insert(e);
            } else if let Some(e) = lc.as_edge_below_vertex() {
                comp.insert(e);
            } else {
                plan.lifted_inequalities.push(lc.clone());
            }
        }
        // With `y_e = 0` the lifted equalities force `z_v^e = 0`, so the
        // complement row is the vertex row again.
        let zeroed: BTreeSet<EdgeId> = lv
            .iter()
            .filter(|lc| lc.sense == Sense::Eq && lc.a == 0.0 && lc.b.len() == 1)
            .filter_map(|lc| lc.b.keys().next().copied())
            .collect();
        for e in graph.incident(v) {
            if !inc.contains(&e) && !check_redundancy(&lv, &LocalConstraint::edge_nonnegative(v, e))
            {
                inc.insert(e);
            }
            if zeroed.contains(&e) {
                comp.remove(&e);
                continue;
            }
            if !comp.contains(&e)
                && !check_redundancy(&lv, &LocalConstraint::edge_below_vertex(v, e))
            {
                comp.insert(e);
            }
        }
        plan.incidence_rows = inc.into_iter().collect();
        plan.complement_rows = comp.into_iter().collect();
        plan.local = lv;
        vertices.push(plan);
    }

    Ok(TailoredPlan {
        num_vertices: graph.num_vertices(),
        num_edges: graph.num_edges(),
        vertices,
        fixes,
        conflicts,
        fix_notes: notes,
        binary_constraints: ilp.constraints.clone(),
        global,
        separators: ilp.separators.clone(),
        requires_nonnegative_costs: ilp.requires_nonnegative_costs,
    })
}
