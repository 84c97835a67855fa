//! Continuous conic programs over zero, nonnegative and second-order cones,
//! solved with the Clarabel interior-point method.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::conic::ConeKind;
use crate::expr::{ConeConstraint, LinExpr};

/// Relative gap, and primal residual relative to `max(1, ‖x‖∞)`, accepted
/// for an `Optimal` status.
pub const OPTIMALITY_TOL: f64 = 1e-7;

/// `minimize cᵀx + c₀` subject to cone constraints and variable bounds.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub constraints: Vec<ConeConstraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConicProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            objective_constant: 0.0,
            constraints: Vec::new(),
            lower: vec![f64::NEG_INFINITY; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn add_constraint(&mut self, constraint: ConeConstraint) {
        self.constraints.push(constraint);
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum::<f64>()
            + self.objective_constant
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let cones = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let bounds = (0..self.num_vars)
            .map(|i| (self.lower[i] - x[i]).max(x[i] - self.upper[i]).max(0.0))
            .fold(0.0, f64::max);
        cones.max(bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Inaccurate,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: ConicStatus,
    pub x: Vec<f64>,
    pub value: f64,
    pub primal_residual: f64,
    pub gap: f64,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == ConicStatus::Optimal
    }
}

pub fn solve_conic(p: &ConicProgram) -> ConicSolution {
    let n = p.num_vars;
    let mut ri: Vec<usize> = Vec::new();
    let mut ci: Vec<usize> = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

    // s = row(x) + constant  ⇔  −row(x) + s = constant
    let mut push_row = |row: &LinExpr, b: &mut Vec<f64>| {
        let r = b.len();
        for &(j, v) in &row.terms {
            ri.push(r);
            ci.push(j);
            vals.push(-v);
        }
        b.push(row.constant);
    };

    for con in &p.constraints {
        for row in &con.rows {
            push_row(row, &mut b);
        }
        cones.push(match con.cone.kind {
            ConeKind::Zero => SupportedConeT::ZeroConeT(con.cone.dim),
            ConeKind::Nonnegative => SupportedConeT::NonnegativeConeT(con.cone.dim),
            ConeKind::SecondOrder => SupportedConeT::SecondOrderConeT(con.cone.dim),
        });
    }

    let mut fixed = Vec::new();
    let mut bounded = Vec::new();
    for i in 0..n {
        let (lo, hi) = (p.lower[i], p.upper[i]);
        if lo.is_finite() && hi.is_finite() && lo == hi {
            fixed.push((i, lo));
        } else {
            if lo.is_finite() {
                bounded.push((i, 1.0, -lo));
            }
            if hi.is_finite() {
                bounded.push((i, -1.0, hi));
            }
        }
    }
    if !fixed.is_empty() {
        for &(i, v) in &fixed {
            let mut row = LinExpr::var(i);
            row.constant = -v;
            push_row(&row, &mut b);
        }
        cones.push(SupportedConeT::ZeroConeT(fixed.len()));
    }
    if !bounded.is_empty() {
        for &(i, s, c) in &bounded {
            let mut row = LinExpr::zero();
            row.add_term(i, s);
            row.constant = c;
            push_row(&row, &mut b);
        }
        cones.push(SupportedConeT::NonnegativeConeT(bounded.len()));
    }

    let m = b.len();
    let a = CscMatrix::new_from_triplets(m, n, ri, ci, vals);
    let mut fallback: Option<ConicSolution> = None;
    for attempt in 0..ATTEMPTS {
        let sol = run(p, &a, &b, &cones, attempt);
        if sol.status != ConicStatus::Inaccurate {
            return sol;
        }
        if attempt + 1 < ATTEMPTS {
            log::debug!(
                "conic solve attempt {attempt} inaccurate (residual {:e}), retrying",
                sol.primal_residual
            );
        }
        if fallback
            .as_ref()
            .is_none_or(|f| sol.primal_residual < f.primal_residual)
        {
            fallback = Some(sol);
        }
    }
    fallback.expect("at least one attempt")
}

const ATTEMPTS: usize = 3;

fn settings(attempt: usize) -> DefaultSettings<f64> {
    let mut b = DefaultSettingsBuilder::default();
    b.verbose(false);
    match attempt {
        0 => b
            .max_iter(400)
            .tol_gap_abs(1e-10)
            .tol_gap_rel(1e-10)
            .tol_feas(1e-10),
        1 => b
            .max_iter(800)
            .tol_gap_abs(1e-9)
            .tol_gap_rel(1e-9)
            .tol_feas(1e-9)
            .static_regularization_constant(1e-10)
            .iterative_refinement_reltol(1e-14)
            .iterative_refinement_abstol(1e-14)
            .iterative_refinement_max_iter(50),
        _ => b
            .max_iter(1000)
            .tol_gap_abs(1e-8)
            .tol_gap_rel(1e-8)
            .tol_feas(1e-8)
            .equilibrate_enable(false)
            .presolve_enable(false),
    };
    b.build().expect("static solver settings are valid")
}

fn run(
    p: &ConicProgram,
    a: &CscMatrix<f64>,
    b: &[f64],
    cones: &[SupportedConeT<f64>],
    attempt: usize,
) -> ConicSolution {
    let n = p.num_vars;
    let pmat = CscMatrix::zeros((n, n));
    let mut solver = match DefaultSolver::new(&pmat, &p.objective, a, b, cones, settings(attempt)) {
        Ok(s) => s,
        Err(err) => {
            log::warn!("conic solver rejected problem data: {err}");
            return ConicSolution {
                status: ConicStatus::Inaccurate,
                x: vec![0.0; n],
                value: f64::NAN,
                primal_residual: f64::INFINITY,
                gap: f64::INFINITY,
            };
        }
    };
    solver.solve();
    let sol = &solver.solution;
    let x = sol.x.clone();
    let value = p.objective_value(&x);
    let primal_residual = p.primal_residual(&x);
    let gap = (sol.obj_val - sol.obj_val_dual).abs() / sol.obj_val.abs().max(1.0);
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            if primal_residual <= OPTIMALITY_TOL * scale && gap <= OPTIMALITY_TOL {
                ConicStatus::Optimal
            } else {
                ConicStatus::Inaccurate
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            ConicStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => ConicStatus::Unbounded,
        _ => ConicStatus::Inaccurate,
    };
    ConicSolution {
        status,
        x,
        value,
        primal_residual,
        gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{Cone, ConicSet};
    use crate::expr::set_membership;

    fn vars(range: std::ops::Range<usize>) -> Vec<LinExpr> {
        range.map(LinExpr::var).collect()
    }

    #[test]
    fn minimize_over_interval() {
        let mut p = ConicProgram::new(1);
        p.objective[0] = 1.0;
        p.set_bounds(0, 1.0, 2.0);
        let s = solve_conic(&p);
        assert!(s.is_optimal());
        assert!((s.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn circle_distance() {
        // variables p (0..2), q (2..4), s (4)
        let mut p = ConicProgram::new(5);
        p.objective[4] = 1.0;
        let one = LinExpr::constant(1.0);
        for (set, start) in [
            (ConicSet::ball(&[0.0, 0.0], 0.3).unwrap(), 0),
            (ConicSet::ball(&[1.0, 1.0], 0.3).unwrap(), 2),
        ] {
            for c in set_membership(&set, &vars(start..start + 2), &one) {
                p.add_constraint(c);
            }
        }
        let mut diff = Vec::new();
        diff.push(LinExpr::var(4));
        for i in 0..2 {
            let mut e = LinExpr::var(2 + i);
            e.add_term(i, -1.0);
            diff.push(e);
        }
        p.add_constraint(ConeConstraint::new(diff, Cone::second_order(3)));
        let s = solve_conic(&p);
        assert!(s.is_optimal());
        assert!((s.value - (2f64.sqrt() - 0.6)).abs() < 1e-7, "{}", s.value);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = ConicProgram::new(1);
        p.objective[0] = 1.0;
        p.set_bounds(0, 1.0, 2.0);
        p.add_constraint(ConeConstraint::new(
            vec![LinExpr::var(0).scaled(-1.0)],
            Cone::nonnegative(1),
        ));
        assert_eq!(solve_conic(&p).status, ConicStatus::Infeasible);

        let mut q = ConicProgram::new(1);
        q.objective[0] = 1.0;
        q.upper[0] = 0.0;
        assert_eq!(solve_conic(&q).status, ConicStatus::Unbounded);
    }

    #[test]
    fn deterministic() {
        let mut p = ConicProgram::new(2);
        p.objective = vec![1.0, 2.0];
        let set = ConicSet::ball(&[0.5, -0.5], 1.0).unwrap();
        for c in set_membership(&set, &vars(0..2), &LinExpr::constant(1.0)) {
            p.add_constraint(c);
        }
        let a = solve_conic(&p);
        let b = solve_conic(&p);
        assert_eq!(a.x, b.x);
    }
}
