use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Cone, ConicSet};
use crate::error::{dim_check, GcsError, Result};

/// Largest row count accepted for an l1 atom; its epigraph uses one row per
/// sign pattern.
pub const MAX_L1_ROWS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    Linear,
    L1,
    L2,
    Linf,
    SquaredL2,
    Constant,
}

/// A convex cost term `weight · g(A x + b)` with `g` chosen by `kind`.
///
/// `Linear` uses the single row of `A x + b` directly. `Constant` ignores
/// `x` and evaluates to `weight · b₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostAtom {
    kind: AtomKind,
    a: DMatrix<f64>,
    b: DVector<f64>,
    weight: f64,
}

impl CostAtom {
    pub fn new(kind: AtomKind, a: DMatrix<f64>, b: DVector<f64>, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(GcsError::InvalidAtom(format!(
                "weight {weight} must be finite and nonnegative"
            )));
        }
        if a.ncols() == 0 {
            return Err(GcsError::InvalidAtom(
                "input dimension must be positive".into(),
            ));
        }
        if a.nrows() == 0 {
            return Err(GcsError::InvalidAtom(
                "affine map needs at least one row".into(),
            ));
        }
        dim_check("atom affine offset", a.nrows(), b.len())?;
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(GcsError::InvalidAtom("non-finite coefficient".into()));
        }
        match kind {
            AtomKind::Linear | AtomKind::Constant if a.nrows() != 1 => {
                return Err(GcsError::InvalidAtom(format!(
                    "{kind:?} atom needs a single row"
                )));
            }
            AtomKind::Constant if a.iter().any(|v| *v != 0.0) => {
                return Err(GcsError::InvalidAtom(
                    "constant atom cannot depend on x".into(),
                ));
            }
            AtomKind::L1 if a.nrows() > MAX_L1_ROWS => {
                return Err(GcsError::InvalidAtom(format!(
                    "l1 atom with {} rows exceeds the supported {MAX_L1_ROWS}",
                    a.nrows()
                )));
            }
            _ => {}
        }
        Ok(Self { kind, a, b, weight })
    }

    /// `cᵀx`.
    pub fn linear(c: &[f64]) -> Result<Self> {
        Self::new(
            AtomKind::Linear,
            DMatrix::from_row_slice(1, c.len(), c),
            DVector::zeros(1),
            1.0,
        )
    }

    pub fn constant(input_dim: usize, value: f64) -> Result<Self> {
        Self::new(
            AtomKind::Constant,
            DMatrix::zeros(1, input_dim),
            DVector::from_element(1, value),
            1.0,
        )
    }

    /// `g(x)` for the identity map on `Rⁿ`.
    pub fn of_identity(kind: AtomKind, dim: usize) -> Result<Self> {
        Self::new(kind, DMatrix::identity(dim, dim), DVector::zeros(dim), 1.0)
    }

    /// `g(x_head − x_tail)` for an edge whose variable is `(x_tail, x_head, x_aux)`
    /// with `x_tail, x_head ∈ R^dim`.
    pub fn of_difference(kind: AtomKind, dim: usize, aux_dim: usize) -> Result<Self> {
        let mut a = DMatrix::zeros(dim, 2 * dim + aux_dim);
        for i in 0..dim {
            a[(i, i)] = -1.0;
            a[(i, dim + i)] = 1.0;
        }
        Self::new(kind, a, DVector::zeros(dim), 1.0)
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(GcsError::InvalidAtom(format!(
                "weight {weight} must be finite and nonnegative"
            )));
        }
        self.weight = weight;
        Ok(self)
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn input_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn is_constant(&self) -> bool {
        self.kind == AtomKind::Constant
    }

    /// Value of a constant atom.
    pub fn constant_value(&self) -> Option<f64> {
        self.is_constant().then(|| self.weight * self.b[0])
    }

    /// Whether the atom is nonnegative everywhere.
    pub fn is_nonnegative(&self) -> bool {
        match self.kind {
            AtomKind::Linear => self.weight == 0.0,
            AtomKind::Constant => self.weight * self.b[0] >= 0.0,
            _ => true,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        dim_check("atom input", self.input_dim(), x.len())?;
        let u = &self.a * DVector::from_column_slice(x) + &self.b;
        let g = match self.kind {
            AtomKind::Linear | AtomKind::Constant => u[0],
            AtomKind::L1 => u.iter().map(|v| v.abs()).sum(),
            AtomKind::L2 => u.norm(),
            AtomKind::Linf => u.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            AtomKind::SquaredL2 => u.norm_squared(),
        };
        Ok(self.weight * g)
    }
}

/// Lowers an atom over `Rⁿ` to its epigraph `{(x, s) : s ≥ f(x)}` in conic
/// form over `R^{n+1}`. The slack is the last coordinate; its index is
/// returned alongside the set.
pub fn lower_atom(atom: &CostAtom, n: usize) -> Result<(ConicSet, usize)> {
    dim_check("atom input", n, atom.input_dim())?;
    let w = atom.weight;
    let k = atom.a.nrows();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut d: Vec<f64> = Vec::new();
    // row helper: coefficients on x, coefficient on s, constant
    let mut push = |x_coef: Vec<f64>, s_coef: f64, c: f64| {
        let mut r = x_coef;
        r.push(s_coef);
        rows.push(r);
        d.push(c);
    };
    let a_row =
        |i: usize, scale: f64| -> Vec<f64> { atom.a.row(i).iter().map(|v| scale * v).collect() };
    let cones = match atom.kind {
        AtomKind::Linear | AtomKind::Constant => {
            push(a_row(0, -w), 1.0, -w * atom.b[0]);
            vec![Cone::nonnegative(1)]
        }
        AtomKind::L2 => {
            push(vec![0.0; n], 1.0, 0.0);
            for i in 0..k {
                push(a_row(i, w), 0.0, w * atom.b[i]);
            }
            vec![Cone::second_order(k + 1)]
        }
        AtomKind::Linf => {
            for i in 0..k {
                for sign in [1.0, -1.0] {
                    push(a_row(i, -w * sign), 1.0, -w * sign * atom.b[i]);
                }
            }
            vec![Cone::nonnegative(2 * k)]
        }
        AtomKind::L1 => {
            for pattern in 0..(1usize << k) {
                let mut coef = vec![0.0; n];
                let mut c = 0.0;
                for i in 0..k {
                    let sign = if pattern >> i & 1 == 1 { -1.0 } else { 1.0 };
                    for (j, v) in atom.a.row(i).iter().enumerate() {
                        coef[j] -= w * sign * v;
                    }
                    c -= w * sign * atom.b[i];
                }
                push(coef, 1.0, c);
            }
            vec![Cone::nonnegative(1 << k)]
        }
        AtomKind::SquaredL2 => {
            // s ≥ w‖u‖²  ⇔  (s + w, 2w u, s − w) ∈ SOC
            push(vec![0.0; n], 1.0, w);
            for i in 0..k {
                push(a_row(i, 2.0 * w), 0.0, 2.0 * w * atom.b[i]);
            }
            push(vec![0.0; n], 1.0, -w);
            vec![Cone::second_order(k + 2)]
        }
    };
    Ok((ConicSet::from_rows(n + 1, &rows, &d, cones)?, n))
}
