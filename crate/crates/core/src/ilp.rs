//! Affine constraints over the binary incidence variables and lazy separators.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{GcsError, Result};
use crate::model::{EdgeId, GcsGraph, VertexId};

/// A binary variable `y_v` or `y_e`. Vertices order before edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryVar {
    Vertex(VertexId),
    Edge(EdgeId),
}

impl BinaryVar {
    /// Position in the flat vector `(y_v for all v, y_e for all e)`.
    pub fn flat_index(self, num_vertices: usize) -> usize {
        match self {
            BinaryVar::Vertex(v) => v.0,
            BinaryVar::Edge(e) => num_vertices + e.0,
        }
    }

    pub fn label(self, graph: &GcsGraph) -> String {
        match self {
            BinaryVar::Vertex(v) => format!("v:{}", graph.vertex(v).name),
            BinaryVar::Edge(e) => format!("e:{}", graph.edge_key(e)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `Σ terms + constant ≥ 0`
    Geq,
    /// `Σ terms + constant = 0`
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineConstraint {
    pub terms: BTreeMap<BinaryVar, f64>,
    pub constant: f64,
    pub sense: Sense,
    pub family: Option<String>,
}

impl AffineConstraint {
    pub fn new(
        terms: impl IntoIterator<Item = (BinaryVar, f64)>,
        constant: f64,
        sense: Sense,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (var, coef) in terms {
            *map.entry(var).or_insert(0.0) += coef;
        }
        map.retain(|_, c| *c != 0.0);
        if map.is_empty() {
            return Err(GcsError::InvalidProblem(
                "affine constraint without terms".into(),
            ));
        }
        if !constant.is_finite() || map.values().any(|c| !c.is_finite()) {
            return Err(GcsError::InvalidProblem(
                "non-finite affine coefficient".into(),
            ));
        }
        Ok(Self {
            terms: map,
            constant,
            sense,
            family: None,
        })
    }

    pub fn geq(terms: impl IntoIterator<Item = (BinaryVar, f64)>, constant: f64) -> Result<Self> {
        Self::new(terms, constant, Sense::Geq)
    }

    /// `Σ terms + constant ≤ 0`, stored as its negation.
    pub fn leq(terms: impl IntoIterator<Item = (BinaryVar, f64)>, constant: f64) -> Result<Self> {
        Self::new(
            terms.into_iter().map(|(v, c)| (v, -c)),
            -constant,
            Sense::Geq,
        )
    }

    pub fn eq(terms: impl IntoIterator<Item = (BinaryVar, f64)>, constant: f64) -> Result<Self> {
        Self::new(terms, constant, Sense::Eq)
    }

    pub fn with_family(mut self, family: impl Into<String>) -> Self {
        self.family = Some(family.into());
        self
    }

    pub fn support(&self) -> impl Iterator<Item = BinaryVar> + '_ {
        self.terms.keys().copied()
    }

    /// Value of the affine expression on a flat binary vector.
    pub fn evaluate(&self, y: &[f64], num_vertices: usize) -> f64 {
        self.terms
            .iter()
            .map(|(v, c)| c * y[v.flat_index(num_vertices)])
            .sum::<f64>()
            + self.constant
    }

    pub fn violation(&self, y: &[f64], num_vertices: usize) -> f64 {
        let value = self.evaluate(y, num_vertices);
        match self.sense {
            Sense::Geq => (-value).max(0.0),
            Sense::Eq => value.abs(),
        }
    }

    pub fn references_valid(&self, graph: &GcsGraph) -> bool {
        self.support().all(|v| match v {
            BinaryVar::Vertex(v) => v.0 < graph.num_vertices(),
            BinaryVar::Edge(e) => e.0 < graph.num_edges(),
        })
    }
}

/// A binary point in incidence form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incidence {
    pub vertices: Vec<bool>,
    pub edges: Vec<bool>,
}

impl Incidence {
    pub fn empty(graph: &GcsGraph) -> Self {
        Self {
            vertices: vec![false; graph.num_vertices()],
            edges: vec![false; graph.num_edges()],
        }
    }

    /// Rounds a flat vector `(y_v, y_e)` at one half.
    pub fn from_flat(y: &[f64], num_vertices: usize) -> Self {
        Self {
            vertices: y[..num_vertices].iter().map(|v| *v > 0.5).collect(),
            edges: y[num_vertices..].iter().map(|v| *v > 0.5).collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.vertices
            .iter()
            .chain(&self.edges)
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn selected_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| VertexId(i))
    }

    pub fn selected_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| EdgeId(i))
    }
}

/// Lazy separation oracle, called on integral candidates only.
pub trait Separator: Send + Sync {
    fn name(&self) -> &str;

    /// Violated constraints for the candidate; empty iff it is admissible
    /// with respect to this family.
    fn separate(&self, graph: &GcsGraph, candidate: &Incidence) -> Vec<AffineConstraint>;

    /// The built-in policy this separator runs, if any.
    fn builtin(&self) -> Option<crate::solver::SubtourPolicy> {
        None
    }
}

#[derive(Clone, Default)]
pub struct IlpDescription {
    pub constraints: Vec<AffineConstraint>,
    pub separators: Vec<Arc<dyn Separator>>,
    pub fixed: BTreeMap<BinaryVar, bool>,
    /// The description only meets the relaxed incidence condition, which
    /// is exact under nonnegative costs.
    pub requires_nonnegative_costs: bool,
}

impl fmt::Debug for IlpDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IlpDescription")
            .field("constraints", &self.constraints.len())
            .field(
                "separators",
                &self
                    .separators
                    .iter()
                    .map(|s| s.name().to_string())
                    .collect::<Vec<_>>(),
            )
            .field("fixed", &self.fixed)
            .field(
                "requires_nonnegative_costs",
                &self.requires_nonnegative_costs,
            )
            .finish()
    }
}

impl IlpDescription {
    pub fn push(&mut self, constraint: AffineConstraint) {
        self.constraints.push(constraint);
    }

    pub fn validate(&self, graph: &GcsGraph) -> Result<()> {
        for c in &self.constraints {
            if !c.references_valid(graph) {
                return Err(GcsError::InvalidProblem(
                    "constraint references an unknown element".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of constraints carrying each family label.
    pub fn family_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in &self.constraints {
            *out.entry(c.family.clone().unwrap_or_default()).or_insert(0) += 1;
        }
        out
    }

    /// Whether an incidence vector satisfies every explicit constraint, every
    /// fix and every separator.
    pub fn admits(&self, graph: &GcsGraph, candidate: &Incidence, tol: f64) -> bool {
        let y = candidate.to_flat();
        let n = graph.num_vertices();
        if self.constraints.iter().any(|c| c.violation(&y, n) > tol) {
            return false;
        }
        if self
            .fixed
            .iter()
            .any(|(var, &value)| (y[var.flat_index(n)] > 0.5) != value)
        {
            return false;
        }
        self.separators
            .iter()
            .all(|s| s.separate(graph, candidate).is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_merge_and_zero_terms_reject() {
        let v = BinaryVar::Vertex(VertexId(0));
        let e = BinaryVar::Edge(EdgeId(0));
        let c = AffineConstraint::geq([(v, 1.0), (e, -1.0), (e, 0.5)], 0.0).unwrap();
        assert_eq!(c.terms[&e], -0.5);
        assert!(AffineConstraint::eq([(v, 1.0), (v, -1.0)], 1.0).is_err());
    }

    #[test]
    fn leq_negates() {
        let v = BinaryVar::Vertex(VertexId(0));
        let c = AffineConstraint::leq([(v, 1.0)], -1.0).unwrap();
        assert_eq!(c.violation(&[1.0], 1), 0.0);
        assert_eq!(c.violation(&[2.0], 1), 1.0);
    }

    #[test]
    fn vertices_order_before_edges() {
        assert!(BinaryVar::Vertex(VertexId(9)) < BinaryVar::Edge(EdgeId(0)));
        assert_eq!(BinaryVar::Edge(EdgeId(2)).flat_index(5), 7);
    }
}
