//! Cones, convex sets in conic form, and their homogenizations.
//!
//! A set is stored as `{x : C x + d ∈ K}` where `K` is a product of zero,
//! nonnegative-orthant and second-order cones. The rows of `(C, d)` are
//! partitioned into consecutive blocks, one per cone.
//!
//! Homogenization uses the conic formula `{(x, y) : y ≥ 0, C x + d y ∈ K}`
//! and the recession cone is `{x : C x ∈ K}`. Both assume the representation
//! is well posed, meaning `{x : C x ∈ K}` is exactly the recession cone of
//! the set; no closure is computed.

mod atoms;

pub use atoms::{lower_atom, AtomKind, CostAtom};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{dim_check, GcsError, Result};

/// Default absolute tolerance for membership tests.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Zero,
    Nonnegative,
    SecondOrder,
}

/// A single cone of the product `K`. For second-order cones the first
/// coordinate is the radius: `u₁ ≥ ‖(u₂, …, u_d)‖₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cone {
    pub kind: ConeKind,
    pub dim: usize,
}

impl Cone {
    pub fn new(kind: ConeKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GcsError::InvalidSet(
                "cone dimension must be positive".into(),
            ));
        }
        Ok(Self { kind, dim })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(ConeKind::Zero, dim).expect("positive cone dimension")
    }

    pub fn nonnegative(dim: usize) -> Self {
        Self::new(ConeKind::Nonnegative, dim).expect("positive cone dimension")
    }

    pub fn second_order(dim: usize) -> Self {
        Self::new(ConeKind::SecondOrder, dim).expect("positive cone dimension")
    }

    /// Amount by which `u` fails to lie in the cone (zero when inside).
    pub fn violation(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        match self.kind {
            ConeKind::Zero => u.iter().fold(0.0, |m, v| m.max(v.abs())),
            ConeKind::Nonnegative => u.iter().fold(0.0, |m, v| m.max(-v)),
            ConeKind::SecondOrder => {
                let tail = u[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                (tail - u[0]).max(0.0)
            }
        }
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> Result<bool> {
        dim_check("cone membership", self.dim, u.len())?;
        Ok(self.violation(u) <= tol)
    }
}

/// A closed convex set `{x ∈ Rⁿ : C x + d ∈ K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicSet {
    c: DMatrix<f64>,
    d: DVector<f64>,
    cones: Vec<Cone>,
}

impl ConicSet {
    pub fn new(c: DMatrix<f64>, d: DVector<f64>, cones: Vec<Cone>) -> Result<Self> {
        if c.ncols() == 0 {
            return Err(GcsError::InvalidSet(
                "ambient dimension must be positive".into(),
            ));
        }
        dim_check("conic set offset", c.nrows(), d.len())?;
        let total: usize = cones.iter().map(|k| k.dim).sum();
        dim_check("conic set cone partition", c.nrows(), total)?;
        if c.iter().chain(d.iter()).any(|v| !v.is_finite()) {
            return Err(GcsError::InvalidSet("non-finite coefficient".into()));
        }
        Ok(Self { c, d, cones })
    }

    /// Builds a set from dense rows, `rows[i] · x + d[i]`.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>], d: &[f64], cones: Vec<Cone>) -> Result<Self> {
        let mut c = DMatrix::zeros(rows.len(), dim);
        for (i, row) in rows.iter().enumerate() {
            dim_check("conic set row", dim, row.len())?;
            for (j, v) in row.iter().enumerate() {
                c[(i, j)] = *v;
            }
        }
        Self::new(c, DVector::from_column_slice(d), cones)
    }

    /// The whole space `Rⁿ` (no rows).
    pub fn whole_space(dim: usize) -> Self {
        Self {
            c: DMatrix::zeros(0, dim),
            d: DVector::zeros(0),
            cones: Vec::new(),
        }
    }

    /// Euclidean ball `‖x − center‖₂ ≤ radius`.
    pub fn ball(center: &[f64], radius: f64) -> Result<Self> {
        if radius.is_nan() || radius < 0.0 {
            return Err(GcsError::InvalidSet(format!(
                "ball radius {radius} is negative"
            )));
        }
        let n = center.len();
        let mut c = DMatrix::zeros(n + 1, n);
        let mut d = DVector::zeros(n + 1);
        d[0] = radius;
        for i in 0..n {
            c[(i + 1, i)] = 1.0;
            d[i + 1] = -center[i];
        }
        Self::new(c, d, vec![Cone::second_order(n + 1)])
    }

    /// Axis-aligned box `lower ≤ x ≤ upper`.
    pub fn axis_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        dim_check("box bounds", lower.len(), upper.len())?;
        let n = lower.len();
        if lower.iter().zip(upper).any(|(l, u)| l > u) {
            return Err(GcsError::InvalidSet(
                "box lower bound exceeds upper bound".into(),
            ));
        }
        let mut c = DMatrix::zeros(2 * n, n);
        let mut d = DVector::zeros(2 * n);
        for i in 0..n {
            c[(2 * i, i)] = 1.0;
            d[2 * i] = -lower[i];
            c[(2 * i + 1, i)] = -1.0;
            d[2 * i + 1] = upper[i];
        }
        Self::new(c, d, vec![Cone::nonnegative(2 * n)])
    }

    /// The singleton `{p}`.
    pub fn point(p: &[f64]) -> Result<Self> {
        let n = p.len();
        let c = DMatrix::identity(n, n);
        let d = DVector::from_iterator(n, p.iter().map(|v| -v));
        Self::new(c, d, vec![Cone::zero(n)])
    }

    /// Polyhedron `A x ≤ b`, one row of `a` per halfspace.
    pub fn halfspaces(a: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        dim_check("halfspace offsets", a.len(), b.len())?;
        let n = a.first().map(Vec::len).ok_or_else(|| {
            GcsError::InvalidSet("halfspace description needs at least one row".into())
        })?;
        let neg: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        Self::from_rows(n, &neg, b, vec![Cone::nonnegative(a.len())])
    }

    /// Convex polygon in the plane from its vertices listed in boundary order
    /// (either orientation).
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(GcsError::InvalidSet(
                "polygon needs at least three vertices".into(),
            ));
        }
        let k = vertices.len();
        let area2: f64 = (0..k)
            .map(|i| {
                let (p, q) = (vertices[i], vertices[(i + 1) % k]);
                p[0] * q[1] - q[0] * p[1]
            })
            .sum();
        if area2.abs() < 1e-14 {
            return Err(GcsError::InvalidSet("degenerate polygon".into()));
        }
        let sign = area2.signum();
        let mut a = Vec::with_capacity(k);
        let mut b = Vec::with_capacity(k);
        for i in 0..k {
            let (p, q) = (vertices[i], vertices[(i + 1) % k]);
            // outward normal of edge p→q for counter-clockwise order
            let normal = [sign * (q[1] - p[1]), -sign * (q[0] - p[0])];
            b.push(normal[0] * p[0] + normal[1] * p[1]);
            a.push(normal.to_vec());
        }
        let set = Self::halfspaces(&a, &b)?;
        for v in vertices {
            if !set.contains(v, 1e-9)? {
                return Err(GcsError::InvalidSet("polygon is not convex".into()));
            }
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.c.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.c.nrows()
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    /// Iterates over `(first_row, cone)` for each block of rows.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, Cone)> + '_ {
        self.cones.iter().scan(0usize, |start, cone| {
            let s = *start;
            *start += cone.dim;
            Some((s, *cone))
        })
    }

    pub fn is_whole_space(&self) -> bool {
        self.cones.is_empty()
    }

    /// Intersection with another set over the same space.
    pub fn intersect(&self, other: &ConicSet) -> Result<ConicSet> {
        dim_check("set intersection", self.dim(), other.dim())?;
        let n = self.dim();
        let m = self.num_rows() + other.num_rows();
        let mut c = DMatrix::zeros(m, n);
        c.rows_mut(0, self.num_rows()).copy_from(&self.c);
        c.rows_mut(self.num_rows(), other.num_rows())
            .copy_from(&other.c);
        let mut d = DVector::zeros(m);
        d.rows_mut(0, self.num_rows()).copy_from(&self.d);
        d.rows_mut(self.num_rows(), other.num_rows())
            .copy_from(&other.d);
        let mut cones = self.cones.clone();
        cones.extend_from_slice(&other.cones);
        ConicSet::new(c, d, cones)
    }

    /// Lifts the set into `R^total`, acting on coordinates `offset..offset+dim`.
    pub fn embed(&self, total: usize, offset: usize) -> Result<ConicSet> {
        if offset + self.dim() > total {
            return Err(GcsError::DimensionMismatch {
                context: "set embedding".into(),
                expected: total,
                found: offset + self.dim(),
            });
        }
        let mut c = DMatrix::zeros(self.num_rows(), total);
        c.columns_mut(offset, self.dim()).copy_from(&self.c);
        Ok(ConicSet {
            c,
            d: self.d.clone(),
            cones: self.cones.clone(),
        })
    }

    /// Lifts the set into `R^total`, sending coordinate `j` to `cols[j]`.
    pub fn remap(&self, total: usize, cols: &[usize]) -> Result<ConicSet> {
        dim_check("set column map", self.dim(), cols.len())?;
        if let Some(&bad) = cols.iter().find(|&&j| j >= total) {
            return Err(GcsError::DimensionMismatch {
                context: "set column map".into(),
                expected: total,
                found: bad + 1,
            });
        }
        let mut c = DMatrix::zeros(self.num_rows(), total);
        for (j, &col) in cols.iter().enumerate() {
            for i in 0..self.num_rows() {
                c[(i, col)] += self.c[(i, j)];
            }
        }
        Ok(ConicSet {
            c,
            d: self.d.clone(),
            cones: self.cones.clone(),
        })
    }

    /// Largest cone violation of `C x + d` over all blocks.
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        dim_check("point dimension", self.dim(), x.len())?;
        let u = &self.c * DVector::from_column_slice(x) + &self.d;
        Ok(self
            .blocks()
            .map(|(start, cone)| cone.violation(&u.as_slice()[start..start + cone.dim]))
            .fold(0.0, f64::max))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.violation(x)? <= tol)
    }

    pub fn homogenize(&self) -> HomogenizedSet {
        homogenize(self)
    }

    pub fn recession_cone(&self) -> ConicSet {
        recession_cone(self)
    }

    /// Recognizes the ball shorthand: a single second-order block of the form
    /// `(r, α(x − center))`. Returns `(center, radius)`.
    pub fn as_ball(&self) -> Option<(Vec<f64>, f64)> {
        let n = self.dim();
        if self.cones.len() != 1
            || self.cones[0].kind != ConeKind::SecondOrder
            || self.num_rows() != n + 1
        {
            return None;
        }
        if self.c.row(0).iter().any(|v| *v != 0.0) {
            return None;
        }
        let alpha = self.c[(1, 0)];
        if alpha <= 0.0 {
            return None;
        }
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { alpha } else { 0.0 };
                if self.c[(i + 1, j)] != expect {
                    return None;
                }
            }
        }
        let center = (0..n).map(|i| -self.d[i + 1] / alpha).collect();
        Some((center, self.d[0] / alpha))
    }

    /// Recognizes an axis-aligned box: only nonnegative rows, each with a
    /// single nonzero coefficient. Returns `(lower, upper)` when both bounds
    /// exist for every coordinate.
    pub fn as_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.cones.is_empty() || self.cones.iter().any(|k| k.kind != ConeKind::Nonnegative) {
            return None;
        }
        let n = self.dim();
        let mut lower = vec![f64::NEG_INFINITY; n];
        let mut upper = vec![f64::INFINITY; n];
        for i in 0..self.num_rows() {
            let nz: Vec<usize> = (0..n).filter(|&j| self.c[(i, j)] != 0.0).collect();
            if nz.len() != 1 {
                return None;
            }
            let j = nz[0];
            let a = self.c[(i, j)];
            let bound = -self.d[i] / a;
            if a > 0.0 {
                lower[j] = lower[j].max(bound);
            } else {
                upper[j] = upper[j].min(bound);
            }
        }
        if lower.iter().chain(&upper).all(|v| v.is_finite()) {
            Some((lower, upper))
        } else {
            None
        }
    }
}

/// Homogenization `{(x, y) : y ≥ 0, C x + d y ∈ K}` of a conic set.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogenizedSet {
    base: ConicSet,
}

impl HomogenizedSet {
    pub fn base(&self) -> &ConicSet {
        &self.base
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn violation(&self, point: &[f64]) -> Result<f64> {
        dim_check("homogenized point dimension", self.dim(), point.len())?;
        let n = self.base.dim();
        let (x, y) = (&point[..n], point[n]);
        let u = self.base.c() * DVector::from_column_slice(x) + self.base.d() * y;
        let cone_violation = self
            .base
            .blocks()
            .map(|(start, cone)| cone.violation(&u.as_slice()[start..start + cone.dim]))
            .fold(0.0, f64::max);
        Ok(cone_violation.max(-y))
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> Result<bool> {
        Ok(self.violation(point)? <= tol)
    }

    /// The same cone written as a plain conic set over `R^{n+1}`.
    pub fn to_conic_set(&self) -> ConicSet {
        let n = self.base.dim();
        let m = self.base.num_rows();
        let mut c = DMatrix::zeros(m + 1, n + 1);
        c.view_mut((0, 0), (m, n)).copy_from(self.base.c());
        c.view_mut((0, n), (m, 1)).copy_from(self.base.d());
        c[(m, n)] = 1.0;
        let mut cones = self.base.cones.clone();
        cones.push(Cone::nonnegative(1));
        ConicSet::new(c, DVector::zeros(m + 1), cones).expect("homogenization preserves partition")
    }
}

pub fn homogenize(set: &ConicSet) -> HomogenizedSet {
    HomogenizedSet { base: set.clone() }
}

pub fn recession_cone(set: &ConicSet) -> ConicSet {
    ConicSet {
        c: set.c.clone(),
        d: DVector::zeros(set.num_rows()),
        cones: set.cones.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(lo: f64, hi: f64) -> ConicSet {
        ConicSet::from_rows(
            1,
            &[vec![1.0], vec![-1.0]],
            &[-lo, hi],
            vec![Cone::nonnegative(2)],
        )
        .unwrap()
    }

    fn ray(lo: f64) -> ConicSet {
        ConicSet::from_rows(1, &[vec![1.0]], &[-lo], vec![Cone::nonnegative(1)]).unwrap()
    }

    #[test]
    fn cone_membership() {
        let soc = Cone::second_order(3);
        assert!(soc.contains(&[5.0, 3.0, 4.0], 1e-12).unwrap());
        assert!(!soc.contains(&[4.9, 3.0, 4.0], 1e-12).unwrap());
        assert!(Cone::zero(2).contains(&[1e-10, -1e-10], 1e-9).unwrap());
        assert!(!Cone::nonnegative(2).contains(&[1.0, -1e-3], 1e-9).unwrap());
        assert!(soc.contains(&[1.0, 1.0], 1e-9).is_err());
    }

    #[test]
    fn homogenized_interval() {
        let h = homogenize(&interval(1.0, 2.0));
        // y ≤ x ≤ 2y
        assert!(h.contains(&[1.5, 1.0], 1e-9).unwrap());
        assert!(h.contains(&[0.0, 0.0], 1e-9).unwrap());
        assert!(h.contains(&[3.0, 2.0], 1e-9).unwrap());
        assert!(!h.contains(&[2.5, 1.0], 1e-9).unwrap());
        assert!(!h.contains(&[1.0, 0.0], 1e-9).unwrap());
        assert!(!h.contains(&[-1.0, -1.0], 1e-9).unwrap());
    }

    #[test]
    fn homogenized_ray_contains_recession_direction() {
        let h = homogenize(&ray(1.0));
        assert!(h.contains(&[3.0, 0.0], 1e-9).unwrap());
        assert!(h.contains(&[2.0, 2.0], 1e-9).unwrap());
        assert!(!h.contains(&[0.5, 1.0], 1e-9).unwrap());
    }

    #[test]
    fn homogenized_whole_space_is_upper_halfspace() {
        let h = homogenize(&ConicSet::whole_space(2));
        assert!(h.contains(&[-4.0, 7.0, 0.0], 1e-12).unwrap());
        assert!(!h.contains(&[0.0, 0.0, -1.0], 1e-12).unwrap());
    }

    #[test]
    fn recession_cones() {
        let bounded = recession_cone(&interval(1.0, 2.0));
        assert!(bounded.contains(&[0.0], 1e-12).unwrap());
        assert!(!bounded.contains(&[1e-3], 1e-9).unwrap());
        let r = recession_cone(&ray(1.0));
        assert!(r.contains(&[5.0], 1e-12).unwrap());
        assert!(!r.contains(&[-5.0], 1e-12).unwrap());
        let half = ConicSet::halfspaces(&[vec![1.0, 2.0]], &[3.0]).unwrap();
        let rh = recession_cone(&half);
        assert!(rh.contains(&[-2.0, 1.0], 1e-12).unwrap());
        assert!(rh.contains(&[-1.0, -1.0], 1e-12).unwrap());
        assert!(!rh.contains(&[1.0, 0.0], 1e-12).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let h = homogenize(&interval(1.0, 2.0));
        assert!(h.contains(&[1.0], 1e-9).is_err());
        assert!(interval(1.0, 2.0).contains(&[1.0, 2.0], 1e-9).is_err());
    }

    #[test]
    fn shape_round_trips() {
        let b = ConicSet::ball(&[1.0, -2.0], 0.3).unwrap();
        let (c, r) = b.as_ball().unwrap();
        assert_eq!(c, vec![1.0, -2.0]);
        assert_eq!(r, 0.3);
        let bx = ConicSet::axis_box(&[0.0, 1.0], &[2.0, 3.0]).unwrap();
        assert_eq!(bx.as_box().unwrap(), (vec![0.0, 1.0], vec![2.0, 3.0]));
        assert!(b.as_box().is_none());
        assert!(bx.as_ball().is_none());
    }

    #[test]
    fn polygon_either_orientation() {
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mut rev = square;
        rev.reverse();
        for p in [
            ConicSet::polygon(&square).unwrap(),
            ConicSet::polygon(&rev).unwrap(),
        ] {
            assert!(p.contains(&[0.5, 0.5], 1e-12).unwrap());
            assert!(!p.contains(&[1.5, 0.5], 1e-12).unwrap());
        }
        let bowtie = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(ConicSet::polygon(&bowtie).is_err());
    }

    #[test]
    fn intersection_and_embedding() {
        let a = ConicSet::axis_box(&[0.0], &[2.0]).unwrap();
        let b = ConicSet::axis_box(&[1.0], &[3.0]).unwrap();
        let ab = a.intersect(&b).unwrap();
        assert!(ab.contains(&[1.5], 1e-12).unwrap());
        assert!(!ab.contains(&[0.5], 1e-12).unwrap());
        let lifted = ab.embed(3, 1).unwrap();
        assert!(lifted.contains(&[100.0, 1.5, -7.0], 1e-12).unwrap());
        assert!(!lifted.contains(&[0.0, 2.5, 0.0], 1e-12).unwrap());
    }

    #[test]
    fn homogenized_as_conic_set_matches() {
        let h = homogenize(&ConicSet::ball(&[1.0, 1.0], 0.5).unwrap());
        let flat = h.to_conic_set();
        for p in [
            [1.2, 1.0, 1.0],
            [0.0, 0.0, 0.0],
            [2.0, 2.0, 2.0],
            [0.4, 1.0, 1.0],
            [0.0, 0.0, -0.1],
        ] {
            assert_eq!(
                h.contains(&p, 1e-9).unwrap(),
                flat.contains(&p, 1e-9).unwrap()
            );
        }
    }
}
