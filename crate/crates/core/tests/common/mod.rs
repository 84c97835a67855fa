#![allow(dead_code)]

use gcs_core::conic::{AtomKind, Cone, ConicSet, CostAtom};
use gcs_core::expr::{set_membership, ConeConstraint, LinExpr};
use gcs_core::problems::{ProblemKind, ProblemSpec};
use gcs_core::solver::{ConicProgram, ConicStatus};
use gcs_core::{GcsGraph, VertexId};

pub enum Expect {
    Value(f64),
    Status(ConicStatus),
}

pub struct Case {
    pub name: &'static str,
    pub program: ConicProgram,
    pub expect: Expect,
}

fn lin(terms: &[(usize, f64)], constant: f64) -> LinExpr {
    let mut e = LinExpr::constant(constant);
    for &(i, c) in terms {
        e.add_term(i, c);
    }
    e
}

struct Builder(ConicProgram);

impl Builder {
    fn new(n: usize) -> Self {
        Builder(ConicProgram::new(n))
    }

    fn min(mut self, c: &[(usize, f64)]) -> Self {
        for &(i, v) in c {
            self.0.objective[i] = v;
        }
        self
    }

    fn constant(mut self, c: f64) -> Self {
        self.0.objective_constant = c;
        self
    }

    /// `Σ terms ≥ rhs`
    fn ge(mut self, terms: &[(usize, f64)], rhs: f64) -> Self {
        self.0.add_constraint(ConeConstraint::new(
            vec![lin(terms, -rhs)],
            Cone::nonnegative(1),
        ));
        self
    }

    fn le(self, terms: &[(usize, f64)], rhs: f64) -> Self {
        let neg: Vec<(usize, f64)> = terms.iter().map(|&(i, c)| (i, -c)).collect();
        self.ge(&neg, -rhs)
    }

    fn eq(mut self, terms: &[(usize, f64)], rhs: f64) -> Self {
        self.0
            .add_constraint(ConeConstraint::new(vec![lin(terms, -rhs)], Cone::zero(1)));
        self
    }

    fn bounds(mut self, i: usize, lo: f64, hi: f64) -> Self {
        self.0.set_bounds(i, lo, hi);
        self
    }

    /// `rows[0] ≥ ‖rows[1..]‖`
    fn soc(mut self, rows: Vec<LinExpr>) -> Self {
        let d = rows.len();
        self.0
            .add_constraint(ConeConstraint::new(rows, Cone::second_order(d)));
        self
    }

    /// `t ≥ ‖x − y‖` for equally long index lists.
    fn dist(self, t: usize, x: &[usize], y: &[usize]) -> Self {
        let mut rows = vec![LinExpr::var(t)];
        rows.extend(
            x.iter()
                .zip(y)
                .map(|(&a, &b)| lin(&[(a, 1.0), (b, -1.0)], 0.0)),
        );
        self.soc(rows)
    }

    /// `t ≥ ‖x − c‖`
    fn dist_to(self, t: usize, x: &[usize], c: &[f64]) -> Self {
        let mut rows = vec![LinExpr::var(t)];
        rows.extend(x.iter().zip(c).map(|(&a, &v)| lin(&[(a, 1.0)], -v)));
        self.soc(rows)
    }

    fn member(mut self, set: &ConicSet, x: &[usize]) -> Self {
        let args: Vec<LinExpr> = x.iter().map(|&i| LinExpr::var(i)).collect();
        for c in set_membership(set, &args, &LinExpr::constant(1.0)) {
            self.0.add_constraint(c);
        }
        self
    }

    fn ball(self, x: &[usize], center: &[f64], r: f64) -> Self {
        let set = ConicSet::ball(center, r).unwrap();
        self.member(&set, x)
    }

    fn boxed(self, x: &[usize], lo: &[f64], hi: &[f64]) -> Self {
        let set = ConicSet::axis_box(lo, hi).unwrap();
        self.member(&set, x)
    }

    /// `t ≥ ‖x − c‖²` through `t + 1 ≥ ‖(2(x − c), t − 1)‖`.
    fn sq_dist_to(self, t: usize, x: &[usize], c: &[f64]) -> Self {
        let mut rows = vec![lin(&[(t, 1.0)], 1.0)];
        rows.extend(x.iter().zip(c).map(|(&a, &v)| lin(&[(a, 2.0)], -2.0 * v)));
        rows.push(lin(&[(t, 1.0)], -1.0));
        self.soc(rows)
    }

    fn value(self, name: &'static str, v: f64) -> Case {
        Case {
            name,
            program: self.0,
            expect: Expect::Value(v),
        }
    }

    fn status(self, name: &'static str, s: ConicStatus) -> Case {
        Case {
            name,
            program: self.0,
            expect: Expect::Status(s),
        }
    }
}

/// LP and SOCP instances whose optimum is known in closed form.
pub fn conic_cases() -> Vec<Case> {
    use ConicStatus::{Infeasible, Unbounded};
    let s2 = 2f64.sqrt();
    vec![
        Builder::new(1)
            .min(&[(0, 1.0)])
            .boxed(&[0], &[1.0], &[2.0])
            .value("interval_min", 1.0),
        Builder::new(1)
            .min(&[(0, -1.0)])
            .boxed(&[0], &[1.0], &[2.0])
            .value("interval_max", -2.0),
        Builder::new(1)
            .min(&[(0, 1.0)])
            .boxed(&[0], &[1.0], &[2.0])
            .le(&[(0, 1.0)], 0.0)
            .status("interval_empty", Infeasible),
        Builder::new(5)
            .min(&[(4, 1.0)])
            .ball(&[0, 1], &[0.0, 0.0], 0.3)
            .ball(&[2, 3], &[1.0, 1.0], 0.3)
            .dist(4, &[0, 1], &[2, 3])
            .value("circle_distance", s2 - 0.6),
        Builder::new(2)
            .min(&[(0, 1.0), (1, 1.0)])
            .ge(&[(0, 1.0), (1, 2.0)], 4.0)
            .ge(&[(0, 3.0), (1, 1.0)], 6.0)
            .ge(&[(0, 1.0)], 0.0)
            .ge(&[(1, 1.0)], 0.0)
            .value("lp_two_cuts", 2.8),
        Builder::new(3)
            .min(&[(2, 1.0)])
            .eq(&[(0, 3.0), (1, 4.0)], 1.0)
            .dist_to(2, &[0, 1], &[0.0, 0.0])
            .value("min_norm_on_line", 0.2),
        Builder::new(3)
            .min(&[(2, 1.0)])
            .boxed(&[0, 1], &[0.0, 0.0], &[1.0, 1.0])
            .dist_to(2, &[0, 1], &[2.0, 3.0])
            .value("box_to_point", 5f64.sqrt()),
        Builder::new(3)
            .min(&[(0, 1.0), (1, 2.0), (2, 2.0)])
            .ball(&[0, 1, 2], &[0.0, 0.0, 0.0], 2.0)
            .value("linear_over_ball", -6.0),
        Builder::new(3)
            .min(&[(0, 1.0), (1, 1.0), (2, 1.0)])
            .boxed(&[0, 1, 2], &[-1.0; 3], &[2.0; 3])
            .value("cube_corner", -3.0),
        Builder::new(2)
            .min(&[(0, 2.0), (1, 3.0)])
            .eq(&[(0, 1.0), (1, 1.0)], 1.0)
            .ge(&[(0, 1.0)], 0.0)
            .ge(&[(1, 1.0)], 0.0)
            .value("simplex_vertex", 2.0),
        Builder::new(1)
            .min(&[(0, 1.0)])
            .status("free_ray", Unbounded),
        Builder::new(2)
            .min(&[(1, 1.0)])
            .dist_to(1, &[0], &[3.0])
            .le(&[(0, 1.0)], 1.0)
            .value("abs_value", 2.0),
        Builder::new(7)
            .min(&[(6, 1.0)])
            .ball(&[0, 1, 2], &[0.0, 0.0, 0.0], 1.0)
            .ball(&[3, 4, 5], &[3.0, 4.0, 0.0], 2.0)
            .dist(6, &[0, 1, 2], &[3, 4, 5])
            .value("sphere_distance", 2.0),
        Builder::new(3)
            .min(&[(2, 1.0)])
            .le(&[(0, 1.0), (1, 1.0)], 0.0)
            .dist_to(2, &[0, 1], &[1.0, 1.0])
            .value("point_to_halfplane", s2),
        Builder::new(2)
            .min(&[(1, 1.0), (0, -2.0)])
            .sq_dist_to(1, &[0], &[0.0])
            .value("parabola", -1.0),
        Builder::new(4)
            .min(&[(2, 1.0), (3, 1.0)])
            .dist_to(2, &[0, 1], &[0.0, 0.0])
            .dist_to(3, &[0, 1], &[4.0, 0.0])
            .value("sum_of_norms", 4.0),
        Builder::new(4)
            .min(&[(2, 1.0), (3, 1.0)])
            .boxed(&[0, 1], &[0.0, 0.0], &[0.5, 0.5])
            .ge(&[(2, 1.0), (0, 1.0)], 1.0)
            .ge(&[(2, 1.0), (0, -1.0)], -1.0)
            .ge(&[(3, 1.0), (1, 1.0)], -2.0)
            .ge(&[(3, 1.0), (1, -1.0)], 2.0)
            .value("l1_distance", 2.5),
        Builder::new(3)
            .min(&[(2, 1.0)])
            .boxed(&[0, 1], &[0.0, 0.0], &[1.0, 1.0])
            .ge(&[(2, 1.0), (0, 1.0)], 3.0)
            .ge(&[(2, 1.0), (0, -1.0)], -3.0)
            .ge(&[(2, 1.0), (1, 1.0)], 1.0)
            .ge(&[(2, 1.0), (1, -1.0)], -1.0)
            .value("linf_distance", 2.0),
        Builder::new(2)
            .min(&[(0, 1.0)])
            .ball(&[0, 1], &[0.0, 0.0], 1.0)
            .ge(&[(0, 1.0)], 2.0)
            .status("disk_and_halfplane_apart", Infeasible),
        Builder::new(2)
            .min(&[(1, 1.0)])
            .ball(&[0, 1], &[0.0, 0.0], 1.0)
            .ge(&[(0, 1.0)], 0.5)
            .value("disk_cap", -0.75f64.sqrt()),
        Builder::new(2)
            .min(&[(0, 1.0)])
            .eq(&[(0, 1.0), (1, 1.0)], 3.0)
            .eq(&[(0, 1.0), (1, -1.0)], 1.0)
            .value("linear_system", 2.0),
        Builder::new(2)
            .min(&[(0, -1.0), (1, -1.0)])
            .bounds(0, 0.0, 1.0)
            .bounds(1, 0.0, 1.0)
            .value("variable_bounds", -2.0),
        Builder::new(1)
            .min(&[(0, 1.0)])
            .constant(10.0)
            .ge(&[(0, 1.0)], 0.0)
            .value("objective_constant", 10.0),
        Builder::new(2)
            .min(&[(0, -1.0), (1, -3.0)])
            .member(
                &ConicSet::polygon(&[[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap(),
                &[0, 1],
            )
            .value("triangle", -3.0),
        Builder::new(3)
            .min(&[(2, 1.0)])
            .boxed(&[0], &[0.0], &[1.0])
            .boxed(&[1], &[3.0], &[5.0])
            .dist(2, &[0], &[1])
            .value("interval_gap", 2.0),
        Builder::new(3)
            .min(&[(2, 1.0)])
            .le(&[(0, 1.0), (1, 1.0)], 0.0)
            .sq_dist_to(2, &[0, 1], &[1.0, 2.0])
            .value("squared_to_halfplane", 4.5),
        Builder::new(2)
            .min(&[(0, 1.0)])
            .ge(&[(0, 1.0), (1, -1.0)], 0.0)
            .ge(&[(1, 1.0)], -1.0)
            .ge(&[(0, 1.0)], -5.0)
            .value("chained_bounds", -1.0),
        Builder::new(10)
            .min(&(0..10).map(|i| (i, 1.0)).collect::<Vec<_>>())
            .ball(&(0..10).collect::<Vec<_>>(), &[0.0; 10], 1.0)
            .value("ten_dim_ball", -(10f64.sqrt())),
        Builder::new(2)
            .min(&[(0, 1.0)])
            .le(&[(0, 1.0), (1, 1.0)], 1.0)
            .ge(&[(0, 1.0)], 1.0)
            .ge(&[(1, 1.0)], 1.0)
            .status("empty_polytope", Infeasible),
        Builder::new(3)
            .min(&[(2, 1.0)])
            .ball(&[0, 1], &[0.0, 0.0], 1.0)
            .dist_to(2, &[0, 1], &[3.0, 4.0])
            .value("point_to_disk", 4.0),
    ]
}

/// Graph whose vertices are single points, with L2 edge costs.
pub fn point_graph(points: &[[f64; 2]], directed: bool) -> GcsGraph {
    let mut g = GcsGraph::new(directed);
    let vs: Vec<VertexId> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let v = g.add_vertex(format!("p{i}"), 2).unwrap();
            g.add_vertex_constraint(v, ConicSet::point(p).unwrap())
                .unwrap();
            v
        })
        .collect();
    for &a in &vs {
        for &b in &vs {
            if a != b && (directed || a < b) {
                let e = g.add_edge(a, b, 0).unwrap();
                g.add_edge_cost(e, CostAtom::of_difference(AtomKind::L2, 2, 0).unwrap())
                    .unwrap();
            }
        }
    }
    g
}

pub fn tsp_spec() -> ProblemSpec {
    ProblemSpec::new(ProblemKind::Tsp)
}
