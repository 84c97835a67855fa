//! Branch-and-bound over the incidence binaries with lazy separation.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::conic::{solve_conic, ConicProgram, ConicSolution, ConicStatus};
use crate::error::{GcsError, Result};
use crate::ilp::{AffineConstraint, Incidence};
use crate::micp::{extract_solution, MixedIntegerConicProgram};
use crate::model::{EdgeId, GcsGraph, VertexId};

/// Primal residual up to which an inaccurate node solution is still used.
const USABLE_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSelection {
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone)]
pub struct BnbConfig {
    pub node_selection: NodeSelection,
    pub integrality_tol: f64,
    pub relative_gap: f64,
    pub time_limit: Option<Duration>,
    pub workers: usize,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self {
            node_selection: NodeSelection::BestBound,
            integrality_tol: 1e-6,
            relative_gap: 1e-6,
            time_limit: None,
            workers: 1,
        }
    }
}

impl BnbConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.integrality_tol > 0.0 && self.relative_gap > 0.0) || self.workers == 0 {
            return Err(GcsError::InvalidProblem(
                "tolerances and worker count must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    UnboundedRelaxation,
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub elapsed_seconds: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub value: f64,
    pub subgraph: Option<Incidence>,
    /// Values of selected vertices only.
    pub x: BTreeMap<VertexId, Vec<f64>>,
    pub edge_aux: BTreeMap<EdgeId, Vec<f64>>,
    pub bound_trace: Vec<TracePoint>,
    /// Root relaxation value before any lazy cut.
    pub relaxation_value: f64,
    /// Program point of the incumbent.
    pub point: Option<Vec<f64>>,
    pub nodes: usize,
    pub cuts: Vec<AffineConstraint>,
    /// The recovered cost disagrees with the program objective.
    pub flagged: bool,
    pub elapsed_seconds: f64,
    pub diagnostic: Option<String>,
}

impl SolveResult {
    pub fn lower_bound(&self) -> f64 {
        self.bound_trace
            .last()
            .map_or(f64::NEG_INFINITY, |t| t.lower_bound)
    }

    pub fn gap(&self) -> f64 {
        relative_gap(self.lower_bound(), self.value)
    }

    pub fn write_trace_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["elapsed_seconds", "lower_bound", "upper_bound"])?;
        for t in &self.bound_trace {
            w.write_record([
                t.elapsed_seconds.to_string(),
                t.lower_bound.to_string(),
                t.upper_bound.to_string(),
            ])?;
        }
        w.flush()
    }
}

pub fn relative_gap(lower: f64, upper: f64) -> f64 {
    if upper == f64::INFINITY || lower == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    (upper - lower).max(0.0) / upper.abs().max(1.0)
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
}

struct Search<'a> {
    graph: &'a GcsGraph,
    program: &'a MixedIntegerConicProgram,
    cfg: &'a BnbConfig,
    base: ConicProgram,
    cuts: Vec<AffineConstraint>,
    open: Vec<Node>,
    next_id: usize,
    incumbent: Option<(f64, Vec<f64>)>,
    trace: Vec<TracePoint>,
    start: Instant,
    nodes: usize,
}

impl<'a> Search<'a> {
    fn upper(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v)
    }

    fn prune_threshold(&self) -> f64 {
        let u = self.upper();
        u - self.cfg.relative_gap * u.abs().max(1.0)
    }

    fn node_program(&self, fixings: &[(usize, f64)]) -> ConicProgram {
        let mut p = self.base.clone();
        for c in &self.cuts {
            p.add_constraint(self.program.binary_row(c));
        }
        for &(i, v) in fixings {
            p.set_bounds(i, v, v);
        }
        p
    }

    fn record(&mut self, lower: f64) {
        let upper = self.upper();
        let (lo, up) = match self.trace.last() {
            Some(t) => (
                t.lower_bound.max(lower.min(upper)),
                t.upper_bound.min(upper),
            ),
            None => (lower.min(upper), upper),
        };
        if self
            .trace
            .last()
            .is_some_and(|t| t.lower_bound == lo && t.upper_bound == up)
        {
            return;
        }
        self.trace.push(TracePoint {
            elapsed_seconds: self.start.elapsed().as_secs_f64(),
            lower_bound: lo,
            upper_bound: up,
        });
    }

    fn global_lower(&self, extra: &[f64]) -> f64 {
        self.open
            .iter()
            .map(|n| n.bound)
            .chain(extra.iter().copied())
            .fold(self.upper(), f64::min)
    }

    fn timed_out(&self) -> bool {
        self.cfg
            .time_limit
            .is_some_and(|t| self.start.elapsed() >= t)
    }

    fn select(&mut self) -> Option<Node> {
        if self.open.is_empty() {
            return None;
        }
        let plunge =
            self.incumbent.is_none() || self.cfg.node_selection == NodeSelection::DepthFirst;
        let idx = if plunge {
            self.open.len() - 1
        } else {
            let mut best = 0;
            for (i, n) in self.open.iter().enumerate() {
                let b = &self.open[best];
                if n.bound < b.bound || (n.bound == b.bound && n.id < b.id) {
                    best = i;
                }
            }
            best
        };
        Some(self.open.remove(idx))
    }

    fn usable(sol: &ConicSolution) -> bool {
        match sol.status {
            ConicStatus::Optimal => true,
            ConicStatus::Inaccurate => {
                sol.primal_residual <= USABLE_RESIDUAL && sol.value.is_finite()
            }
            _ => false,
        }
    }

    /// Most fractional binary; ties within tolerance go to the lowest index.
    fn branching_variable(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in self.program.layout.binaries() {
            let frac = (x[i] - x[i].round()).abs();
            if frac <= self.cfg.integrality_tol {
                continue;
            }
            match best {
                Some((_, f)) if frac <= f + 1e-6 => {}
                _ => best = Some((i, frac)),
            }
        }
        best.map(|(i, _)| i)
    }

    fn branch(&mut self, node: &Node, var: usize, bound: f64) {
        for value in [0.0, 1.0] {
            let mut fixings = node.fixings.clone();
            fixings.push((var, value));
            self.open.push(Node {
                id: self.next_id,
                depth: node.depth + 1,
                bound,
                fixings,
            });
            self.next_id += 1;
        }
    }

    /// Processes one solved node; returns false when the search must stop.
    fn process(&mut self, node: Node, mut sol: ConicSolution) {
        loop {
            if !Self::usable(&sol) {
                if sol.status == ConicStatus::Inaccurate {
                    self.split_unresolved(&node, &sol);
                }
                return;
            }
            if sol.value >= self.prune_threshold() {
                return;
            }
            if let Some(var) = self.branching_variable(&sol.x) {
                let bound = sol.value.max(node.bound);
                self.branch(&node, var, bound);
                return;
            }
            let l = &self.program.layout;
            let candidate = Incidence::from_flat(&sol.x[l.binaries()], l.num_vertices);
            let mut new_cuts = Vec::new();
            for s in &self.program.separators {
                new_cuts.extend(s.separate(self.graph, &candidate));
            }
            if new_cuts.is_empty() {
                self.polish(&candidate, sol);
                return;
            }
            log::debug!("node {}: {} lazy cuts", node.id, new_cuts.len());
            self.cuts.extend(new_cuts);
            sol = solve_conic(&self.node_program(&node.fixings));
        }
    }

    /// A node whose relaxation could not be solved reliably keeps its parent
    /// bound and is split on a fractional or otherwise the first free binary.
    fn split_unresolved(&mut self, node: &Node, sol: &ConicSolution) {
        log::warn!(
            "node {} solved inaccurately (residual {:e}); branching without a bound",
            node.id,
            sol.primal_residual
        );
        let fixed: Vec<usize> = node.fixings.iter().map(|&(i, _)| i).collect();
        let fractional = self
            .branching_variable(&sol.x)
            .filter(|i| !fixed.contains(i) && sol.x.iter().all(|v| v.is_finite()));
        match fractional.or_else(|| self.program.layout.binaries().find(|i| !fixed.contains(i))) {
            Some(var) => self.branch(node, var, node.bound),
            None => log::warn!(
                "node {} dropped: all binaries fixed and the solve stays inaccurate",
                node.id
            ),
        }
    }

    fn polish(&mut self, candidate: &Incidence, sol: ConicSolution) {
        let l = &self.program.layout;
        let fixings: Vec<(usize, f64)> = l.binaries().zip(candidate.to_flat()).collect();
        let polished = solve_conic(&self.node_program(&fixings));
        let (value, x) = if Self::usable(&polished) {
            (polished.value, polished.x)
        } else if Self::usable(&sol) {
            (sol.value, sol.x)
        } else {
            return;
        };
        if value < self.upper() {
            self.incumbent = Some((value, x));
        }
    }
}

pub fn solve_relaxation(program: &MixedIntegerConicProgram) -> ConicSolution {
    solve_conic(&program.relaxation())
}

pub fn solve_micp(
    graph: &GcsGraph,
    program: &MixedIntegerConicProgram,
    cfg: &BnbConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let mut search = Search {
        graph,
        program,
        cfg,
        base: program.relaxation(),
        cuts: Vec::new(),
        open: Vec::new(),
        next_id: 1,
        incumbent: None,
        trace: Vec::new(),
        start: Instant::now(),
        nodes: 0,
    };

    let root_node = Node {
        id: 0,
        depth: 0,
        bound: f64::NEG_INFINITY,
        fixings: Vec::new(),
    };
    let root = solve_conic(&search.base);
    search.nodes = 1;
    let relaxation_value = root.value;
    let mut diagnostic = None;
    let mut status = None;
    match root.status {
        ConicStatus::Unbounded => {
            diagnostic = Some(
                "root relaxation is unbounded; some vertex cost does not grow superlinearly along a \
                 recession direction of its set"
                    .to_string(),
            );
            status = Some(SolveStatus::UnboundedRelaxation);
        }
        ConicStatus::Infeasible => status = Some(SolveStatus::Infeasible),
        _ if !Search::usable(&root) => {
            return Err(GcsError::Solver(format!(
                "root relaxation failed with residual {:e}",
                root.primal_residual
            )))
        }
        _ => {
            search.record(root.value);
            search.process(root_node, root);
        }
    }

    let workers = cfg.workers.max(1);
    while status.is_none() {
        let lower = search.global_lower(&[]);
        search.record(lower);
        if search.open.is_empty() {
            break;
        }
        if relative_gap(lower, search.upper()) <= cfg.relative_gap {
            break;
        }
        if search.timed_out() {
            status = Some(SolveStatus::Limit);
            break;
        }
        let mut batch = Vec::new();
        while batch.len() < workers {
            match search.select() {
                Some(n) => batch.push(n),
                None => break,
            }
        }
        let programs: Vec<ConicProgram> = batch
            .iter()
            .map(|n| search.node_program(&n.fixings))
            .collect();
        let solutions: Vec<ConicSolution> = if programs.len() == 1 {
            vec![solve_conic(&programs[0])]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = programs
                    .iter()
                    .map(|p| s.spawn(move || solve_conic(p)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("node worker panicked"))
                    .collect()
            })
        };
        search.nodes += batch.len();
        for (node, sol) in batch.into_iter().zip(solutions) {
            search.process(node, sol);
        }
    }

    let elapsed = search.start.elapsed().as_secs_f64();
    let status = status.unwrap_or(if search.incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    });
    if status == SolveStatus::Optimal {
        search.record(search.upper());
    }
    let mut result = SolveResult {
        status,
        value: match status {
            SolveStatus::UnboundedRelaxation => f64::NEG_INFINITY,
            _ => search.upper(),
        },
        subgraph: None,
        x: BTreeMap::new(),
        edge_aux: BTreeMap::new(),
        bound_trace: search.trace,
        relaxation_value,
        point: None,
        nodes: search.nodes,
        cuts: search.cuts,
        flagged: false,
        elapsed_seconds: elapsed,
        diagnostic,
    };
    if let Some((_, point)) = search.incumbent {
        let ex = extract_solution(graph, program, &point);
        if ex.flagged {
            log::warn!(
                "recovered cost {} disagrees with program objective {}",
                ex.value,
                ex.program_value
            );
        }
        result.flagged = ex.flagged;
        result.subgraph = Some(ex.subgraph);
        result.x = ex.x;
        result.edge_aux = ex.edge_aux;
        result.point = Some(point);
    }
    Ok(result)
}
