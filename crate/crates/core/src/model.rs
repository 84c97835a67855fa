//! Graphs whose vertices carry convex programs and whose edges couple them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conic::{lower_atom, Cone, ConicSet, CostAtom};
use crate::error::{dim_check, GcsError, Result};
use crate::expr::{set_membership, LinExpr};
use crate::solver::{solve_conic, ConicProgram, ConicStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

/// A point per vertex.
pub type VertexPoints = BTreeMap<VertexId, Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone)]
pub struct Vertex {
    pub name: String,
    pub dim: usize,
    pub constraints: Vec<ConicSet>,
    pub costs: Vec<CostAtom>,
}

/// Edge variables are ordered `(x_tail, x_head, x_aux)`.
#[derive(Debug, Clone)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub aux_dim: usize,
    pub constraints: Vec<ConicSet>,
    pub costs: Vec<CostAtom>,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.tail == v || self.head == v
    }
}

/// Epigraph `{(x, s) : x ∈ X, s_i ≥ f_i(x)}` of a convex program whose cost is
/// a sum of atoms. Constant atoms are collected in `constant` instead of
/// receiving a slack. At least one slack is always present; with no
/// non-constant atom it is constrained by `s ≥ 0`.
#[derive(Debug, Clone)]
pub struct Epigraph {
    pub set: ConicSet,
    pub dim: usize,
    pub num_slacks: usize,
    pub constant: f64,
}

impl Epigraph {
    pub fn build(dim: usize, constraints: &[ConicSet], costs: &[CostAtom]) -> Result<Self> {
        let atoms: Vec<&CostAtom> = costs.iter().filter(|a| !a.is_constant()).collect();
        let k = atoms.len().max(1);
        let total = dim + k;
        let mut set = ConicSet::whole_space(total);
        for c in constraints {
            set = set.intersect(&c.embed(total, 0)?)?;
        }
        if atoms.is_empty() {
            let mut row = vec![0.0; total];
            row[dim] = 1.0;
            set = set.intersect(&ConicSet::from_rows(
                total,
                &[row],
                &[0.0],
                vec![Cone::nonnegative(1)],
            )?)?;
        }
        for (i, atom) in atoms.iter().enumerate() {
            let (epi, _) = lower_atom(atom, dim)?;
            let mut cols: Vec<usize> = (0..dim).collect();
            cols.push(dim + i);
            set = set.intersect(&epi.remap(total, &cols)?)?;
        }
        let constant = costs.iter().filter_map(|a| a.constant_value()).sum();
        Ok(Self {
            set,
            dim,
            num_slacks: k,
            constant,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecessionStatus {
    Satisfied,
    Violated,
    Indeterminate(String),
}

#[derive(Debug, Clone)]
pub struct GcsGraph {
    directed: bool,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
    incoming: Vec<Vec<EdgeId>>,
    outgoing: Vec<Vec<EdgeId>>,
}

impl GcsGraph {
    pub fn new(directed: bool) -> Self {
        Self {
            directed,
            vertices: Vec::new(),
            edges: Vec::new(),
            vertex_index: HashMap::new(),
            edge_index: HashMap::new(),
            incoming: Vec::new(),
            outgoing: Vec::new(),
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn add_vertex(&mut self, name: impl Into<String>, dim: usize) -> Result<VertexId> {
        let name = name.into();
        if self.vertex_index.contains_key(&name) {
            return Err(GcsError::DuplicateVertex(name));
        }
        if dim == 0 {
            return Err(GcsError::InvalidProblem(format!(
                "vertex `{name}` needs a positive dimension"
            )));
        }
        let id = VertexId(self.vertices.len());
        self.vertex_index.insert(name.clone(), id);
        self.vertices.push(Vertex {
            name,
            dim,
            constraints: Vec::new(),
            costs: Vec::new(),
        });
        self.incoming.push(Vec::new());
        self.outgoing.push(Vec::new());
        Ok(id)
    }

    /// Adds the edge `(tail, head)`. In an undirected graph the insertion
    /// order is the canonical endpoint order and `(head, tail)` is the same key.
    pub fn add_edge(&mut self, tail: VertexId, head: VertexId, aux_dim: usize) -> Result<EdgeId> {
        for v in [tail, head] {
            if v.0 >= self.vertices.len() {
                return Err(GcsError::UnknownVertex(format!("#{}", v.0)));
            }
        }
        if tail == head {
            return Err(GcsError::SelfLoop(self.vertices[tail.0].name.clone()));
        }
        if self.find_edge(tail, head).is_some() {
            return Err(GcsError::DuplicateEdge(format!(
                "{}|{}",
                self.vertices[tail.0].name, self.vertices[head.0].name
            )));
        }
        let id = EdgeId(self.edges.len());
        self.edge_index.insert((tail, head), id);
        self.edges.push(Edge {
            tail,
            head,
            aux_dim,
            constraints: Vec::new(),
            costs: Vec::new(),
        });
        self.outgoing[tail.0].push(id);
        self.incoming[head.0].push(id);
        Ok(id)
    }

    pub fn add_edge_by_name(&mut self, tail: &str, head: &str, aux_dim: usize) -> Result<EdgeId> {
        let (t, h) = (self.vertex_id(tail)?, self.vertex_id(head)?);
        self.add_edge(t, h, aux_dim)
    }

    pub fn add_vertex_constraint(&mut self, v: VertexId, set: ConicSet) -> Result<()> {
        let vertex = self.vertex_mut(v)?;
        dim_check(
            format!("constraint on vertex `{}`", vertex.name),
            vertex.dim,
            set.dim(),
        )?;
        vertex.constraints.push(set);
        Ok(())
    }

    pub fn add_vertex_cost(&mut self, v: VertexId, atom: CostAtom) -> Result<()> {
        let vertex = self.vertex_mut(v)?;
        dim_check(
            format!("cost on vertex `{}`", vertex.name),
            vertex.dim,
            atom.input_dim(),
        )?;
        vertex.costs.push(atom);
        Ok(())
    }

    pub fn add_edge_constraint(&mut self, e: EdgeId, set: ConicSet) -> Result<()> {
        let dim = self.edge_dim(e)?;
        let key = self.edge_key(e);
        dim_check(format!("constraint on edge `{key}`"), dim, set.dim())?;
        self.edges[e.0].constraints.push(set);
        Ok(())
    }

    pub fn add_edge_cost(&mut self, e: EdgeId, atom: CostAtom) -> Result<()> {
        let dim = self.edge_dim(e)?;
        let key = self.edge_key(e);
        dim_check(format!("cost on edge `{key}`"), dim, atom.input_dim())?;
        self.edges[e.0].costs.push(atom);
        Ok(())
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    fn vertex_mut(&mut self, v: VertexId) -> Result<&mut Vertex> {
        self.vertices
            .get_mut(v.0)
            .ok_or_else(|| GcsError::UnknownVertex(format!("#{}", v.0)))
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex)> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (VertexId(i), v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().enumerate().map(|(i, e)| (EdgeId(i), e))
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| GcsError::UnknownVertex(name.to_string()))
    }

    /// Looks up an edge; undirected graphs accept either endpoint order.
    pub fn find_edge(&self, tail: VertexId, head: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&(tail, head)).copied().or_else(|| {
            if self.directed {
                None
            } else {
                self.edge_index.get(&(head, tail)).copied()
            }
        })
    }

    pub fn edge_id(&self, tail: &str, head: &str) -> Result<EdgeId> {
        let (t, h) = (self.vertex_id(tail)?, self.vertex_id(head)?);
        self.find_edge(t, h)
            .ok_or_else(|| GcsError::UnknownEdge(format!("{tail}|{head}")))
    }

    /// `"tail|head"` in canonical order.
    pub fn edge_key(&self, e: EdgeId) -> String {
        let edge = &self.edges[e.0];
        format!(
            "{}|{}",
            self.vertices[edge.tail.0].name, self.vertices[edge.head.0].name
        )
    }

    pub fn edge_dim(&self, e: EdgeId) -> Result<usize> {
        let edge = self
            .edges
            .get(e.0)
            .ok_or_else(|| GcsError::UnknownEdge(format!("#{}", e.0)))?;
        Ok(self.vertices[edge.tail.0].dim + self.vertices[edge.head.0].dim + edge.aux_dim)
    }

    /// Edges whose head is `v`. For undirected graphs these are the edges
    /// where `v` is the second endpoint in canonical order.
    pub fn incoming(&self, v: VertexId) -> &[EdgeId] {
        &self.incoming[v.0]
    }

    pub fn outgoing(&self, v: VertexId) -> &[EdgeId] {
        &self.outgoing[v.0]
    }

    /// All edges containing `v`, in ascending id order.
    pub fn incident(&self, v: VertexId) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.incoming[v.0]
            .iter()
            .chain(&self.outgoing[v.0])
            .copied()
            .collect();
        out.sort();
        out
    }

    pub fn vertex_epigraph(&self, v: VertexId) -> Result<Epigraph> {
        let vertex = self.vertex(v);
        Epigraph::build(vertex.dim, &vertex.constraints, &vertex.costs)
    }

    pub fn edge_epigraph(&self, e: EdgeId) -> Result<Epigraph> {
        let edge = self.edge(e);
        Epigraph::build(self.edge_dim(e)?, &edge.constraints, &edge.costs)
    }

    /// The intersection of the vertex constraint sets.
    pub fn vertex_set(&self, v: VertexId) -> Result<ConicSet> {
        let vertex = self.vertex(v);
        let mut set = ConicSet::whole_space(vertex.dim);
        for c in &vertex.constraints {
            set = set.intersect(c)?;
        }
        Ok(set)
    }

    /// Checks that every recession direction `(x, s)` of the vertex epigraph
    /// has `x = 0` and `s ≥ 0`, by optimizing each coordinate over the
    /// recession cone intersected with the unit box.
    pub fn validate_recession(&self, v: VertexId, tol: f64) -> Result<RecessionStatus> {
        let epi = self.vertex_epigraph(v)?;
        let cone = epi.set.recession_cone();
        let total = epi.set.dim();
        let args: Vec<LinExpr> = (0..total).map(LinExpr::var).collect();
        let mut base = ConicProgram::new(total);
        for c in set_membership(&cone, &args, &LinExpr::constant(1.0)) {
            base.add_constraint(c);
        }
        for i in 0..total {
            base.set_bounds(i, -1.0, 1.0);
        }
        let mut probes: Vec<(usize, f64)> = Vec::new();
        for i in 0..epi.dim {
            probes.push((i, -1.0));
            probes.push((i, 1.0));
        }
        for j in 0..epi.num_slacks {
            probes.push((epi.dim + j, 1.0));
        }
        for (i, sign) in probes {
            let mut p = base.clone();
            p.objective[i] = sign;
            let sol = solve_conic(&p);
            match sol.status {
                ConicStatus::Optimal | ConicStatus::Inaccurate if sol.primal_residual <= 1e-6 => {
                    if sign * sol.x[i] < -tol {
                        return Ok(RecessionStatus::Violated);
                    }
                }
                status => {
                    return Ok(RecessionStatus::Indeterminate(format!(
                        "probe on coordinate {i} ended with {status:?}"
                    )))
                }
            }
        }
        Ok(RecessionStatus::Satisfied)
    }

    /// Support values `(min, max)` of each coordinate over the vertex set.
    pub fn vertex_bounding_box(&self, v: VertexId) -> Result<(Vec<f64>, Vec<f64>)> {
        let set = self.vertex_set(v)?;
        let n = set.dim();
        let args: Vec<LinExpr> = (0..n).map(LinExpr::var).collect();
        let mut base = ConicProgram::new(n);
        for c in set_membership(&set, &args, &LinExpr::constant(1.0)) {
            base.add_constraint(c);
        }
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut p = base.clone();
                p.objective[i] = sign;
                let sol = solve_conic(&p);
                match sol.status {
                    ConicStatus::Optimal | ConicStatus::Inaccurate
                        if sol.primal_residual <= 1e-6 =>
                    {
                        if sign > 0.0 {
                            lower[i] = sol.x[i];
                        } else {
                            upper[i] = sol.x[i];
                        }
                    }
                    ConicStatus::Unbounded => {
                        return Err(GcsError::UnboundedSet(self.vertex(v).name.clone()))
                    }
                    status => {
                        return Err(GcsError::Solver(format!(
                            "support of vertex `{}` coordinate {i}: {status:?}",
                            self.vertex(v).name
                        )))
                    }
                }
            }
        }
        Ok((lower, upper))
    }
}

impl fmt::Display for GcsGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} graph with {} vertices and {} edges",
            if self.directed {
                "directed"
            } else {
                "undirected"
            },
            self.vertices.len(),
            self.edges.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::AtomKind;

    fn grid() -> GcsGraph {
        let mut g = GcsGraph::new(true);
        for i in 0..3 {
            for j in 0..3 {
                let v = g.add_vertex(format!("({i}, {j})"), 2).unwrap();
                g.add_vertex_constraint(v, ConicSet::ball(&[i as f64, j as f64], 0.3).unwrap())
                    .unwrap();
            }
        }
        for i in 0..3usize {
            for j in 0..3usize {
                let v = VertexId(3 * i + j);
                if i + 1 < 3 {
                    g.add_edge(v, VertexId(3 * (i + 1) + j), 0).unwrap();
                }
                if j + 1 < 3 {
                    g.add_edge(v, VertexId(3 * i + j + 1), 0).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn grid_counts() {
        let g = grid();
        assert_eq!(g.num_vertices(), 9);
        assert_eq!(g.num_edges(), 12);
    }

    #[test]
    fn incidence_partition() {
        let g = grid();
        for v in g.vertex_ids() {
            let inc = g.incident(v);
            assert_eq!(inc.len(), g.incoming(v).len() + g.outgoing(v).len());
            assert!(g.incoming(v).iter().all(|e| !g.outgoing(v).contains(e)));
        }
    }

    #[test]
    fn construction_errors() {
        let mut g = GcsGraph::new(false);
        let a = g.add_vertex("a", 1).unwrap();
        let b = g.add_vertex("b", 2).unwrap();
        assert!(matches!(
            g.add_vertex("a", 1),
            Err(GcsError::DuplicateVertex(_))
        ));
        assert!(g.add_edge_by_name("a", "zz", 0).is_err());
        assert!(matches!(g.add_edge(a, a, 0), Err(GcsError::SelfLoop(_))));
        g.add_edge(a, b, 0).unwrap();
        assert!(matches!(
            g.add_edge(b, a, 0),
            Err(GcsError::DuplicateEdge(_))
        ));
        assert_eq!(g.edge_id("b", "a").unwrap(), EdgeId(0));
        assert!(g
            .add_vertex_constraint(a, ConicSet::ball(&[0.0, 0.0], 1.0).unwrap())
            .is_err());
        assert!(g
            .add_edge_cost(EdgeId(0), CostAtom::of_identity(AtomKind::L2, 2).unwrap())
            .is_err());
        assert!(g
            .add_edge_cost(EdgeId(0), CostAtom::of_identity(AtomKind::L2, 3).unwrap())
            .is_ok());
    }

    #[test]
    fn recession_bounded_circle() {
        let mut g = GcsGraph::new(true);
        let v = g.add_vertex("v", 2).unwrap();
        g.add_vertex_constraint(v, ConicSet::ball(&[0.0, 0.0], 1.0).unwrap())
            .unwrap();
        g.add_vertex_cost(v, CostAtom::linear(&[1.0, -2.0]).unwrap())
            .unwrap();
        assert_eq!(
            g.validate_recession(v, 1e-6).unwrap(),
            RecessionStatus::Satisfied
        );
    }

    #[test]
    fn recession_unbounded_radius_with_area_cost() {
        // x = (center_x, center_y, r) with r ≥ 0.5 unbounded above, cost π r²
        let mut g = GcsGraph::new(true);
        let v = g.add_vertex("v", 3).unwrap();
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, -1.0],
        ];
        g.add_vertex_constraint(
            v,
            ConicSet::halfspaces(&rows, &[1.0, 1.0, 1.0, 1.0, -0.5]).unwrap(),
        )
        .unwrap();
        let mut a = nalgebra::DMatrix::zeros(1, 3);
        a[(0, 2)] = 1.0;
        let area = CostAtom::new(
            AtomKind::SquaredL2,
            a,
            nalgebra::DVector::zeros(1),
            std::f64::consts::PI,
        )
        .unwrap();
        g.add_vertex_cost(v, area).unwrap();
        assert_eq!(
            g.validate_recession(v, 1e-6).unwrap(),
            RecessionStatus::Satisfied
        );
    }

    #[test]
    fn recession_ray_with_linear_cost() {
        let mut g = GcsGraph::new(true);
        let v = g.add_vertex("v", 1).unwrap();
        g.add_vertex_constraint(v, ConicSet::halfspaces(&[vec![-1.0]], &[0.0]).unwrap())
            .unwrap();
        g.add_vertex_cost(v, CostAtom::linear(&[1.0]).unwrap())
            .unwrap();
        assert_eq!(
            g.validate_recession(v, 1e-6).unwrap(),
            RecessionStatus::Violated
        );
    }

    #[test]
    fn epigraph_multi_atom() {
        let mut g = GcsGraph::new(true);
        let v = g.add_vertex("v", 2).unwrap();
        g.add_vertex_cost(v, CostAtom::of_identity(AtomKind::L2, 2).unwrap())
            .unwrap();
        g.add_vertex_cost(v, CostAtom::of_identity(AtomKind::L1, 2).unwrap())
            .unwrap();
        g.add_vertex_cost(v, CostAtom::constant(2, 3.0).unwrap())
            .unwrap();
        let epi = g.vertex_epigraph(v).unwrap();
        assert_eq!(epi.num_slacks, 2);
        assert_eq!(epi.constant, 3.0);
        assert!(epi.set.contains(&[3.0, 4.0, 5.0, 7.0], 1e-12).unwrap());
        assert!(!epi.set.contains(&[3.0, 4.0, 5.0, 6.9], 1e-12).unwrap());
    }

    #[test]
    fn bounding_box_of_ball() {
        let g = grid();
        let (lo, hi) = g.vertex_bounding_box(VertexId(4)).unwrap();
        for i in 0..2 {
            assert!((lo[i] - 0.7).abs() < 1e-7);
            assert!((hi[i] - 1.3).abs() < 1e-7);
        }
    }
}
