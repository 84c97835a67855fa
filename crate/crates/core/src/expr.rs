//! Sparse affine expressions and cone constraints over a flat variable vector.

use crate::conic::{Cone, ConicSet, HomogenizedSet};

/// `Σ coef · x[index] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(index: usize) -> Self {
        Self {
            terms: vec![(index, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn add_term(&mut self, index: usize, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((index, coef));
        }
        self
    }

    pub fn add_scaled(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        if scale != 0.0 {
            for &(i, c) in &other.terms {
                self.terms.push((i, scale * c));
            }
            self.constant += scale * other.constant;
        }
        self
    }

    pub fn scaled(&self, scale: f64) -> LinExpr {
        let mut out = LinExpr::zero();
        out.add_scaled(self, scale);
        out
    }

    /// Merges repeated indices and drops zero coefficients.
    pub fn compact(mut self) -> Self {
        self.terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (i, c) in self.terms {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        self.terms = merged;
        self
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>() + self.constant
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

/// `(rows[0](x), …, rows[d-1](x)) ∈ cone`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeConstraint {
    pub rows: Vec<LinExpr>,
    pub cone: Cone,
}

impl ConeConstraint {
    pub fn new(rows: Vec<LinExpr>, cone: Cone) -> Self {
        debug_assert_eq!(rows.len(), cone.dim);
        Self { rows, cone }
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let u: Vec<f64> = self.rows.iter().map(|r| r.evaluate(x)).collect();
        self.cone.violation(&u)
    }
}

/// `C · args + d · scale ∈ K`, one constraint per cone block of `set`.
pub fn set_membership(set: &ConicSet, args: &[LinExpr], scale: &LinExpr) -> Vec<ConeConstraint> {
    assert_eq!(
        args.len(),
        set.dim(),
        "argument count must match set dimension"
    );
    set.blocks()
        .map(|(start, cone)| {
            let rows = (start..start + cone.dim)
                .map(|i| {
                    let mut row = LinExpr::zero();
                    for (j, arg) in args.iter().enumerate() {
                        row.add_scaled(arg, set.c()[(i, j)]);
                    }
                    row.add_scaled(scale, set.d()[i]);
                    row.compact()
                })
                .collect();
            ConeConstraint::new(rows, cone)
        })
        .collect()
}

/// `(args, y) ∈ homogenization`, i.e. `C · args + d · y ∈ K` and `y ≥ 0`.
pub fn homogenized_membership(
    set: &HomogenizedSet,
    args: &[LinExpr],
    y: &LinExpr,
) -> Vec<ConeConstraint> {
    let mut out = set_membership(set.base(), args, y);
    out.push(ConeConstraint::new(
        vec![y.clone().compact()],
        Cone::nonnegative(1),
    ));
    out
}
