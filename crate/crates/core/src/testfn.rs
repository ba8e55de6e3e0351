//! Test functions `h(x, t) = sum_j w_j phi_j(x) psi_j(t)` with Lipschitz
//! `phi` on `P(V)` and compactly supported piecewise-linear `psi`, so that
//! every `t`-integral an estimator needs is available in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projective::normalize_in_place;
use crate::stats::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phi {
    Constant {
        value: f64,
    },
    /// `v_i^2`.
    CoordinateSquared {
        index: usize,
    },
    /// `|<a, v>|` for a unit vector `a`.
    Projection {
        direction: Vec<f64>,
    },
}

impl Phi {
    pub fn constant(value: f64) -> Self {
        Phi::Constant { value }
    }

    pub fn projection(direction: &[f64]) -> Result<Self> {
        let mut a = direction.to_vec();
        if !normalize_in_place(&mut a).is_finite() {
            return Err(Error::InvalidPoint);
        }
        Ok(Phi::Projection { direction: a })
    }

    /// Evaluates at a unit representative.
    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            Phi::Constant { value } => *value,
            Phi::CoordinateSquared { index } => v[*index] * v[*index],
            Phi::Projection { direction } => direction.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs(),
        }
    }

    /// Lipschitz constant for the sin-distance.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Phi::Constant { .. } => 0.0,
            Phi::CoordinateSquared { .. } => 2.0,
            Phi::Projection { .. } => 2f64.sqrt(),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Phi::Constant { value } => value.abs(),
            _ => 1.0,
        }
    }

    fn validate(&self, dim: Option<usize>) -> Result<()> {
        match (self, dim) {
            (Phi::CoordinateSquared { index }, Some(d)) if *index >= d => Err(Error::DimensionError {
                expected: d,
                got: *index + 1,
            }),
            (Phi::Projection { direction }, Some(d)) if direction.len() != d => Err(Error::DimensionError {
                expected: d,
                got: direction.len(),
            }),
            (Phi::Projection { direction }, _) => {
                let n: f64 = direction.iter().map(|a| a * a).sum::<f64>().sqrt();
                if (n - 1.0).abs() > 1e-9 {
                    Err(Error::InvalidArgument(
                        "projection direction must be a unit vector".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Continuous piecewise-linear function through `knots`, zero outside
/// `[knots[0].0, knots[last].0]`. The end values must be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseLinear {
    type Error = Error;

    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        PiecewiseLinear::new(knots)
    }
}

impl From<PiecewiseLinear> for Vec<(f64, f64)> {
    fn from(p: PiecewiseLinear) -> Self {
        p.knots
    }
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument("psi needs at least two knots".into()));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidArgument(
                "psi breakpoints must be strictly increasing".into(),
            ));
        }
        if knots.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument("psi knots must be finite".into()));
        }
        if knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 0.0 {
            return Err(Error::InvalidArgument(
                "psi must vanish at both ends of its support".into(),
            ));
        }
        Ok(Self { knots })
    }

    /// Triangle of height 1 on `[a, b]` peaking at `peak`.
    pub fn hat(a: f64, peak: f64, b: f64) -> Self {
        Self::new(vec![(a, 0.0), (peak, 1.0), (b, 0.0)]).expect("a < peak < b")
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (a, b) = self.support();
        if !(u > a && u < b) {
            return 0.0;
        }
        let i = self.knots.partition_point(|k| k.0 <= u);
        let (x0, y0) = self.knots[i - 1];
        let (x1, y1) = self.knots[i];
        y0 + (y1 - y0) * (u - x0) / (x1 - x0)
    }

    pub fn is_non_negative(&self) -> bool {
        self.knots.iter().all(|k| k.1 >= 0.0)
    }

    /// `psi(. - t)`.
    pub fn shifted(&self, t: f64) -> Self {
        Self {
            knots: self.knots.iter().map(|(x, y)| (x + t, *y)).collect(),
        }
    }

    pub fn integral(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .collect::<CompensatedSum>()
            .value()
    }

    /// `int_lo^inf (u + a) psi(u) du`, exactly.
    pub fn tail_integral(&self, lo: f64, a: f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for w in self.knots.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x1 <= lo {
                continue;
            }
            let slope = (y1 - y0) / (x1 - x0);
            let p = x0.max(lo);
            let yp = if p > x0 { y0 + slope * (p - x0) } else { y0 };
            let len = x1 - p;
            // local coordinate s = u - p on [0, len]
            let c = p + a;
            acc.add(c * yp * len);
            acc.add((c * slope + yp) * len * len / 2.0);
            acc.add(slope * len * len * len / 3.0);
        }
        acc.value()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(default = "one")]
    pub weight: f64,
    pub phi: Phi,
    pub psi: PiecewiseLinear,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub terms: Vec<Term>,
}

impl TestFunction {
    pub fn product(phi: Phi, psi: PiecewiseLinear) -> Self {
        Self {
            terms: vec![Term { weight: 1.0, phi, psi }],
        }
    }

    /// `1 (x) psi`.
    pub fn of_t(psi: PiecewiseLinear) -> Self {
        Self::product(Phi::constant(1.0), psi)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidArgument("test function has no terms".into()));
        }
        self.terms.iter().try_for_each(|t| t.phi.validate(Some(dim)))
    }

    pub fn plus(mut self, other: &TestFunction, weight: f64) -> Self {
        self.terms.extend(other.terms.iter().map(|t| Term {
            weight: t.weight * weight,
            ..t.clone()
        }));
        self
    }

    pub fn eval(&self, v: &[f64], t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.weight * term.phi.eval(v) * term.psi.eval(t))
            .sum()
    }

    /// `int_c^inf (t + a) h(v, t + s) dt`.
    pub fn path_integral(&self, v: &[f64], c: f64, s: f64, a: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let p = term.phi.eval(v);
                if p == 0.0 {
                    0.0
                } else {
                    term.weight * p * term.psi.tail_integral(c + s, a - s)
                }
            })
            .sum()
    }

    /// `h(., . - t)`.
    pub fn shifted(&self, t: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|term| Term {
                    psi: term.psi.shifted(t),
                    ..term.clone()
                })
                .collect(),
        }
    }

    pub fn is_non_negative(&self) -> bool {
        self.terms.iter().all(|t| {
            t.weight >= 0.0 && t.psi.is_non_negative() && !matches!(t.phi, Phi::Constant { value } if value < 0.0)
        })
    }

    /// Largest absolute `t` in any support, used to bound integration ranges.
    pub fn t_support(&self) -> (f64, f64) {
        self.terms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                let (a, b) = t.psi.support();
                (lo.min(a), hi.max(b))
            })
    }
}
