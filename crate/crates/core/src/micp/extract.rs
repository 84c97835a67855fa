use std::collections::BTreeMap;

use super::MixedIntegerConicProgram;
use crate::ilp::Incidence;
use crate::model::{EdgeId, GcsGraph, VertexId};

/// Relative tolerance between the program objective and the recomputed cost.
pub const RECONCILE_TOL: f64 = 1e-6;

/// A subgraph with its continuous values recovered from a binary program point.
#[derive(Debug, Clone)]
pub struct Extracted {
    pub subgraph: Incidence,
    /// `x_v` for selected vertices only.
    pub x: BTreeMap<VertexId, Vec<f64>>,
    /// Auxiliary edge variables for selected edges with `aux_dim > 0`.
    pub edge_aux: BTreeMap<EdgeId, Vec<f64>>,
    /// Cost of `(H, x)` evaluated from the original atoms.
    pub value: f64,
    pub program_value: f64,
    pub flagged: bool,
}

/// Recovers `(H, x)` from a program point whose binaries are integral.
pub fn extract_solution(
    graph: &GcsGraph,
    program: &MixedIntegerConicProgram,
    point: &[f64],
) -> Extracted {
    let l = &program.layout;
    let subgraph = Incidence::from_flat(&point[l.binaries()], l.num_vertices);
    let mut x = BTreeMap::new();
    for v in subgraph.selected_vertices() {
        let block = if l.vertex_x.is_empty() {
            &l.vertex_z[v.0]
        } else {
            &l.vertex_x[v.0]
        };
        x.insert(v, point[block.clone()].to_vec());
    }
    let mut edge_aux = BTreeMap::new();
    for e in subgraph.selected_edges() {
        if !l.edge_z[e.0].is_empty() {
            edge_aux.insert(e, point[l.edge_z[e.0].clone()].to_vec());
        }
    }
    let mut value = 0.0;
    let mut consistent = true;
    for (v, xv) in &x {
        for atom in &graph.vertex(*v).costs {
            value += atom.evaluate(xv).unwrap_or(f64::NAN);
        }
    }
    for e in subgraph.selected_edges() {
        let edge = graph.edge(e);
        let (Some(xt), Some(xh)) = (x.get(&edge.tail), x.get(&edge.head)) else {
            consistent = false;
            continue;
        };
        let mut arg = xt.clone();
        arg.extend(xh);
        arg.extend(edge_aux.get(&e).cloned().unwrap_or_default());
        for atom in &edge.costs {
            value += atom.evaluate(&arg).unwrap_or(f64::NAN);
        }
    }
    let program_value = program.objective_value(point);
    let agree = (value - program_value).abs() <= RECONCILE_TOL * value.abs().max(1.0);
    Extracted {
        subgraph,
        x,
        edge_aux,
        value,
        program_value,
        flagged: !(agree && consistent && value.is_finite()),
    }
}

/// Largest `|z_v^e − y_e z_v|` over all incidences of a tailored program.
pub fn product_residual(program: &MixedIntegerConicProgram, point: &[f64]) -> f64 {
    let l = &program.layout;
    let mut worst = 0.0_f64;
    for (&(v, e), (z, _)) in &l.incidence {
        let ye = point[l.y_edge(e)];
        let zv = &l.vertex_z[v.0];
        for i in 0..z.len() {
            worst = worst.max((point[z.start + i] - ye * point[zv.start + i]).abs());
        }
    }
    worst
}
