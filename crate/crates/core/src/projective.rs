//! Projective-space arithmetic for `GL(d, R)`.
//!
//! Points of `P(V)` and `P(V*)` are stored as unit vectors whose first
//! nonzero coordinate is positive. With unit representatives the cocycles
//! reduce to `sigma(g, x) = log |g v|` (primal) and
//! `sigma*(g, y) = log |g^{-T} phi|` (dual), and the bracket to
//! `delta(x, y) = -log |<phi, v>|`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

/// Pairings below this magnitude are treated as exactly orthogonal.
pub const PAIRING_UNDERFLOW: f64 = 1e-300;

/// Condition number (infinity norm) above which inversion is refused.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Primal,
    Dual,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    // scaled to survive extreme entries
    let m = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * a.iter().map(|x| (x / m).powi(2)).sum::<f64>().sqrt()
}

/// Normalizes in place; returns `log` of the norm before normalization.
pub(crate) fn normalize_in_place(v: &mut [f64]) -> f64 {
    let n = norm(v);
    for x in v.iter_mut() {
        *x /= n;
    }
    n.ln()
}

fn canonical(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let n = norm(&v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidPoint);
    }
    let first = v.iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
    let s = if first < 0.0 { -1.0 / n } else { 1.0 / n };
    for x in v.iter_mut() {
        *x *= s;
    }
    Ok(v)
}

macro_rules! point_type {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            /// Unit-norm, sign-canonical representative of the line through `v`.
            pub fn new(v: Vec<f64>) -> Result<Self> {
                canonical(v).map(Self)
            }

            pub fn from_slice(v: &[f64]) -> Result<Self> {
                Self::new(v.to_vec())
            }

            /// The `i`-th coordinate direction in dimension `d`.
            pub fn basis(d: usize, i: usize) -> Self {
                let mut v = vec![0.0; d];
                v[i] = 1.0;
                Self(v)
            }

            /// `(1, ..., 1) / sqrt(d)`.
            pub fn diagonal(d: usize) -> Self {
                Self(vec![1.0 / (d as f64).sqrt(); d])
            }

            pub fn coords(&self) -> &[f64] {
                &self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            #[allow(dead_code)]
            pub(crate) fn from_unit(v: Vec<f64>) -> Self {
                Self(v)
            }

            pub(crate) fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{:?}", stringify!($name), self.0)
            }
        }
    };
}

point_type!(ProjPoint, "A point `Rv` of the projective space `P(V)`.");
point_type!(DualProjPoint, "A point `R phi` of the dual projective space `P(V*)`.");

pub fn normalize_point(v: &[f64]) -> Result<ProjPoint> {
    ProjPoint::from_slice(v)
}

struct Inner {
    dim: usize,
    mat: Vec<f64>,
    inv: Vec<f64>,
    singular: OnceLock<Vec<f64>>,
}

/// An element of `GL(d, R)` with its inverse cached (row-major storage).
#[derive(Clone)]
pub struct GroupElement(Arc<Inner>);

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupElement")
            .field("dim", &self.0.dim)
            .field("mat", &self.0.mat)
            .finish()
    }
}

fn inf_norm(d: usize, m: &[f64]) -> f64 {
    (0..d)
        .map(|i| m[i * d..(i + 1) * d].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl GroupElement {
    /// Builds an element from a row-major matrix, inverting it by LU with
    /// partial pivoting.
    pub fn new(dim: usize, mat: Vec<f64>) -> Result<Self> {
        if mat.len() != dim * dim || dim == 0 {
            return Err(Error::DimensionError {
                expected: dim * dim,
                got: mat.len(),
            });
        }
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular);
        }
        let m = nalgebra::DMatrix::from_row_slice(dim, dim, &mat);
        let inv = m.lu().try_inverse().ok_or(Error::Singular)?;
        let inv: Vec<f64> = inv.transpose().as_slice().to_vec();
        if inv.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular);
        }
        let cond = inf_norm(dim, &mat) * inf_norm(dim, &inv);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::IllConditioned(cond));
        }
        Ok(Self::from_parts(dim, mat, inv))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        Self::new(d, rows.concat())
    }

    /// Trusted constructor for elements whose inverse is known in closed form.
    pub(crate) fn from_parts(dim: usize, mat: Vec<f64>, inv: Vec<f64>) -> Self {
        GroupElement(Arc::new(Inner {
            dim,
            mat,
            inv,
            singular: OnceLock::new(),
        }))
    }

    pub fn identity(d: usize) -> Self {
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        Self::from_parts(d, m.clone(), m)
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        let d = entries.len();
        let mut m = vec![0.0; d * d];
        for (i, e) in entries.iter().enumerate() {
            m[i * d + i] = *e;
        }
        Self::new(d, m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn mat(&self) -> &[f64] {
        &self.0.mat
    }

    pub fn inv(&self) -> &[f64] {
        &self.0.inv
    }

    pub fn inverse(&self) -> Self {
        Self::from_parts(self.0.dim, self.0.inv.clone(), self.0.mat.clone())
    }

    /// `c * g` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::from_parts(
            self.0.dim,
            self.0.mat.iter().map(|x| x * c).collect(),
            self.0.inv.iter().map(|x| x / c).collect(),
        )
    }

    /// The product `self * other`.
    pub fn compose(&self, other: &GroupElement) -> Self {
        let d = self.0.dim;
        Self::from_parts(
            d,
            matmul(d, &self.0.mat, &other.0.mat),
            matmul(d, &other.0.inv, &self.0.inv),
        )
    }

    /// Singular values in decreasing order (computed once).
    pub fn singular_values(&self) -> &[f64] {
        self.0.singular.get_or_init(|| {
            let d = self.0.dim;
            let m = nalgebra::DMatrix::from_row_slice(d, d, &self.0.mat);
            let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        })
    }

    /// `log |g|` and `log |g^{-1}|` for the operator norm.
    pub fn log_norms(&self) -> (f64, f64) {
        let s = self.singular_values();
        (s[0].ln(), -s[s.len() - 1].ln())
    }

    /// `out = g v`.
    pub(crate) fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let d = self.0.dim;
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.0.mat[i * d..(i + 1) * d], v);
        }
    }

    /// `out = g^T v`.
    pub(crate) fn apply_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        let d = self.0.dim;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, vi) in v.iter().enumerate() {
            let row = &self.0.mat[i * d..(i + 1) * d];
            for (o, r) in out.iter_mut().zip(row) {
                *o += r * vi;
            }
        }
    }

    /// `out = g^{-T} v`, the matrix of the dual action.
    pub(crate) fn apply_dual_into(&self, v: &[f64], out: &mut [f64]) {
        let d = self.0.dim;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, vi) in v.iter().enumerate() {
            let row = &self.0.inv[i * d..(i + 1) * d];
            for (o, r) in out.iter_mut().zip(row) {
                *o += r * vi;
            }
        }
    }

    /// Moves the unit vector `u` to `g u / |g u|` and returns `log |g u|`.
    pub(crate) fn step_primal(&self, u: &mut [f64], scratch: &mut [f64]) -> f64 {
        self.apply_into(u, scratch);
        let l = normalize_in_place(scratch);
        u.copy_from_slice(scratch);
        l
    }

    /// Dual action of `g^{-1}` (matrix `g^T`) on `u`; returns `sigma*(g^{-1}, .)`.
    pub(crate) fn step_dual_inverse(&self, u: &mut [f64], scratch: &mut [f64]) -> f64 {
        self.apply_transpose_into(u, scratch);
        let l = normalize_in_place(scratch);
        u.copy_from_slice(scratch);
        l
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.0.dim {
            Err(Error::DimensionError {
                expected: self.0.dim,
                got: d,
            })
        } else {
            Ok(())
        }
    }

    pub fn act(&self, x: &ProjPoint) -> Result<ProjPoint> {
        self.check(x.dim())?;
        let mut out = vec![0.0; x.dim()];
        self.apply_into(x.coords(), &mut out);
        ProjPoint::new(out)
    }

    pub fn act_dual(&self, y: &DualProjPoint) -> Result<DualProjPoint> {
        self.check(y.dim())?;
        let mut out = vec![0.0; y.dim()];
        self.apply_dual_into(y.coords(), &mut out);
        DualProjPoint::new(out)
    }

    /// `sigma(g, x) = log |g v|` for the unit representative `v`.
    pub fn cocycle(&self, x: &ProjPoint) -> Result<f64> {
        self.check(x.dim())?;
        let mut out = vec![0.0; x.dim()];
        self.apply_into(x.coords(), &mut out);
        Ok(norm(&out).ln())
    }

    /// `sigma*(g, y) = log |g^{-T} phi|` for the unit representative `phi`.
    pub fn dual_cocycle(&self, y: &DualProjPoint) -> Result<f64> {
        self.check(y.dim())?;
        let mut out = vec![0.0; y.dim()];
        self.apply_dual_into(y.coords(), &mut out);
        Ok(norm(&out).ln())
    }
}

pub fn matmul(d: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                c[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    c
}

/// Point of either projective space, for APIs that take a side argument.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyPoint {
    Primal(ProjPoint),
    Dual(DualProjPoint),
}

impl AnyPoint {
    pub fn side(&self) -> Side {
        match self {
            AnyPoint::Primal(_) => Side::Primal,
            AnyPoint::Dual(_) => Side::Dual,
        }
    }
}

pub fn act(g: &GroupElement, p: &AnyPoint) -> Result<AnyPoint> {
    Ok(match p {
        AnyPoint::Primal(x) => AnyPoint::Primal(g.act(x)?),
        AnyPoint::Dual(y) => AnyPoint::Dual(g.act_dual(y)?),
    })
}

pub fn cocycle(g: &GroupElement, p: &AnyPoint) -> Result<f64> {
    match p {
        AnyPoint::Primal(x) => g.cocycle(x),
        AnyPoint::Dual(y) => g.dual_cocycle(y),
    }
}

pub(crate) fn delta_raw(v: &[f64], phi: &[f64]) -> f64 {
    let p = dot(v, phi).abs();
    if p < PAIRING_UNDERFLOW {
        f64::INFINITY
    } else {
        (-p.ln()).max(0.0)
    }
}

/// `delta(x, y) = -log |<phi, v>|`; `+inf` on orthogonal pairs.
pub fn delta(x: &ProjPoint, y: &DualProjPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionError {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(delta_raw(x.coords(), y.coords()))
}

/// The sin-distance `sqrt(1 - <v, v'>^2)`.
pub fn sin_distance(x: &ProjPoint, xp: &ProjPoint) -> Result<f64> {
    if x.dim() != xp.dim() {
        return Err(Error::DimensionError {
            expected: x.dim(),
            got: xp.dim(),
        });
    }
    Ok(sin_distance_raw(x.coords(), xp.coords()))
}

pub(crate) fn sin_distance_raw(a: &[f64], b: &[f64]) -> f64 {
    // |a ^ b|^2 = sum_{i<j} (a_i b_j - a_j b_i)^2, accurate near zero
    let d = a.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            let w = a[i] * b[j] - a[j] * b[i];
            s += w * w;
        }
    }
    s.sqrt().min(1.0)
}

/// `[sigma(g,x) - delta(gx,y)] - [sigma*(g^{-1},y) - delta(x,g^{-1}y)]`,
/// which vanishes identically.
pub fn cohomology_residual(g: &GroupElement, x: &ProjPoint, y: &DualProjPoint) -> Result<f64> {
    let gx = g.act(x)?;
    let ginv = g.inverse();
    let ginv_y = ginv.act_dual(y)?;
    let d1 = delta(&gx, y)?;
    let d2 = delta(x, &ginv_y)?;
    if !d1.is_finite() || !d2.is_finite() {
        return Err(Error::InfiniteDelta("cohomology residual".into()));
    }
    let lhs = g.cocycle(x)? - d1;
    let rhs = ginv.dual_cocycle(y)? - d2;
    Ok(lhs - rhs)
}
