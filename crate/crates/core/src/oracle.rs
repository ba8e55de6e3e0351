//! Exhaustive enumeration over finitely supported ensembles. Every value is
//! an exact weighted sum over all words of the relevant length, evaluated
//! with the checked group API and compensated summation; `t`-integrals are
//! integrated piecewise in closed form.

use rand::SeedableRng;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::exec::{map_items, Rng};
use crate::framework::{ActedSpace, ChainState, Perturbation, StartLaw, Twist};
use crate::projective::{delta, DualProjPoint, GroupElement, ProjPoint};
use crate::stats::CompensatedSum;
use crate::testfn::{PiecewiseLinear, TestFunction};

/// Largest number of words the oracle will enumerate.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// One word of the forward walk from `x` with its exact probability.
#[derive(Debug, Clone)]
pub struct PathAtom {
    pub letters: Vec<usize>,
    pub probability: f64,
    /// `S_1, ..., S_n`.
    pub partial_sums: Vec<f64>,
    /// `min_{1<=k<=n} S_k`.
    pub running_min: f64,
    pub terminal_point: ProjPoint,
}

impl PathAtom {
    pub fn s_n(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }

    /// `min_{1<=k<n} S_k`, `+inf` for one step.
    pub fn min_before_last(&self) -> f64 {
        let n = self.partial_sums.len();
        self.partial_sums[..n.saturating_sub(1)]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn discrete(ens: &Ensemble) -> Result<(&[GroupElement], Vec<f64>)> {
    ens.atoms().ok_or(Error::NotDiscrete)
}

fn guard(k: usize, len: usize) -> Result<()> {
    let mut total: u128 = 1;
    for _ in 0..len {
        total = total.saturating_mul(k as u128);
        if total > ENUMERATION_GUARD {
            return Err(Error::TooLarge(total));
        }
    }
    Ok(())
}

/// Calls `visit(word, probability)` for every word of length `len` whose
/// first letter is `first`, in lexicographic order.
fn for_each_word_from(weights: &[f64], len: usize, first: usize, mut visit: impl FnMut(&[usize], f64)) {
    let k = weights.len();
    let mut word = vec![0usize; len];
    word[0] = first;
    loop {
        let p: f64 = word.iter().map(|&i| weights[i]).product();
        visit(&word, p);
        // odometer on positions 1..len
        let mut pos = len;
        loop {
            if pos <= 1 {
                return;
            }
            pos -= 1;
            word[pos] += 1;
            if word[pos] < k {
                break;
            }
            word[pos] = 0;
        }
    }
}

/// Exact `sum_w p(w) value(w)` over words of length `len`, blocked by the
/// first letter and reduced in block order.
fn sum_over_words<F>(weights: &[f64], len: usize, value: F) -> Result<f64>
where
    F: Fn(&[usize]) -> Result<f64> + Sync + Send,
{
    guard(weights.len(), len)?;
    if len == 0 {
        return value(&[]);
    }
    let blocks: Vec<usize> = (0..weights.len()).collect();
    let parts = map_items(&blocks, |&first| -> Result<CompensatedSum> {
        let mut acc = CompensatedSum::default();
        let mut err = None;
        for_each_word_from(weights, len, first, |w, p| {
            if err.is_some() || p == 0.0 {
                return;
            }
            match value(w) {
                Ok(v) => acc.add(p * v),
                Err(e) => err = Some(e),
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(acc),
        }
    });
    let mut total = CompensatedSum::default();
    for part in parts {
        total.add(part?.value());
    }
    Ok(total.value())
}

fn forward_atom(atoms: &[GroupElement], weights: &[f64], x: &ProjPoint, word: &[usize]) -> Result<PathAtom> {
    let mut point = x.clone();
    let mut s = 0.0;
    let mut sums = Vec::with_capacity(word.len());
    for &i in word {
        s += atoms[i].cocycle(&point)?;
        point = atoms[i].act(&point)?;
        sums.push(s);
    }
    Ok(PathAtom {
        letters: word.to_vec(),
        probability: word.iter().map(|&i| weights[i]).product(),
        running_min: sums.iter().copied().fold(f64::INFINITY, f64::min),
        partial_sums: sums,
        terminal_point: point,
    })
}

/// All `k^n` forward paths from `x`.
pub fn enumerate_paths(ens: &Ensemble, x: &ProjPoint, n: usize) -> Result<Vec<PathAtom>> {
    let (atoms, weights) = discrete(ens)?;
    guard(atoms.len(), n)?;
    if x.dim() != ens.dim() {
        return Err(Error::DimensionError {
            expected: ens.dim(),
            got: x.dim(),
        });
    }
    if n == 0 {
        return Ok(vec![PathAtom {
            letters: vec![],
            probability: 1.0,
            partial_sums: vec![],
            running_min: f64::INFINITY,
            terminal_point: x.clone(),
        }]);
    }
    let blocks: Vec<usize> = (0..atoms.len()).collect();
    let parts = map_items(&blocks, |&first| -> Result<Vec<PathAtom>> {
        let mut out = Vec::new();
        let mut err = None;
        for_each_word_from(&weights, n, first, |w, _| {
            if err.is_none() {
                match forward_atom(atoms, &weights, x, w) {
                    Ok(a) => out.push(a),
                    Err(e) => err = Some(e),
                }
            }
        });
        err.map_or(Ok(out), Err)
    });
    let mut all = Vec::with_capacity(atoms.len().pow(n as u32));
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// `int_lo^inf (u + b) psi(u) du`, integrating each linear piece of `psi`
/// exactly.
pub fn moment_tail(psi: &PiecewiseLinear, lo: f64, b: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for w in psi.knots().windows(2) {
        let (u0, v0) = w[0];
        let (u1, v1) = w[1];
        let a = u0.max(lo);
        if a >= u1 {
            continue;
        }
        let slope = (v1 - v0) / (u1 - u0);
        // psi(u) = v0 + slope (u - u0); integrand (u + b)(c0 + slope u)
        let c0 = v0 - slope * u0;
        let anti = |u: f64| slope * u * u * u / 3.0 + (c0 + b * slope) * u * u / 2.0 + b * c0 * u;
        acc.add(anti(u1));
        acc.add(-anti(a));
    }
    acc.value()
}

/// `int_c^inf (t + a) h(v, t + s) dt` for a sum of products.
fn h_integral(h: &TestFunction, v: &[f64], c: f64, s: f64, a: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for term in &h.terms {
        let phi = term.phi.eval(v);
        if phi != 0.0 {
            acc.add(term.weight * phi * moment_tail(&term.psi, c + s, a - s));
        }
    }
    acc.value()
}

/// `V_n(x, t) = E((t + S_n); min_{k<=n} S_k >= -t)`.
pub fn exact_v(ens: &Ensemble, x: &ProjPoint, t: f64, n: usize) -> Result<f64> {
    let (atoms, weights) = discrete(ens)?;
    sum_over_words(&weights, n, |w| {
        let a = forward_atom(atoms, &weights, x, w)?;
        Ok(if t + a.running_min >= 0.0 { t + a.s_n() } else { 0.0 })
    })
}

/// `rho_{n,x}(h) = E int_c^inf t h(X_n, t + S_n) dt`, `c = max(0, -min_{k<n} S_k)`.
pub fn exact_rho_action(ens: &Ensemble, x: &ProjPoint, n: usize, h: &TestFunction) -> Result<f64> {
    h.validate(ens.dim())?;
    let (atoms, weights) = discrete(ens)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    sum_over_words(&weights, n, |w| {
        let a = forward_atom(atoms, &weights, x, w)?;
        let c = (-a.min_before_last()).max(0.0);
        Ok(h_integral(h, a.terminal_point.coords(), c, a.s_n(), 0.0))
    })
}

/// `rho_{n,x}` applied to `h` pushed one step: for every `n`-path, the
/// average over the next letter of `int_c^inf t h(g X_n, t + S_n + sigma(g, X_n)) dt`
/// with the cut `c = max(0, -min_{k<=n} S_k)`. Equals `rho_{n+1,x}(h)`.
pub fn exact_rho_of_rh(ens: &Ensemble, x: &ProjPoint, n: usize, h: &TestFunction) -> Result<f64> {
    h.validate(ens.dim())?;
    let (atoms, weights) = discrete(ens)?;
    guard(atoms.len(), n + 1)?;
    sum_over_words(&weights, n, |w| {
        let a = forward_atom(atoms, &weights, x, w)?;
        let c = (-a.running_min).max(0.0);
        let mut acc = CompensatedSum::default();
        for (g, &p) in atoms.iter().zip(weights.iter()) {
            let inc = g.cocycle(&a.terminal_point)?;
            let next = g.act(&a.terminal_point)?;
            acc.add(p * h_integral(h, next.coords(), c, a.s_n() + inc, 0.0));
        }
        Ok(acc.value())
    })
}

/// Reversed walk values `S~_1..S~_n` and terminal point `g_1 ... g_n x` of
/// the word `g_1..g_n`, from the definition with brackets.
fn reversed_values(letters: &[&GroupElement], x: &ProjPoint, y: &DualProjPoint) -> Result<(Vec<f64>, ProjPoint)> {
    let n = letters.len();
    // z_k = g_{k+1} ... g_n x
    let mut z = vec![x.clone(); n + 1];
    for k in (0..n).rev() {
        z[k] = letters[k].act(&z[k + 1])?;
    }
    let bracket = |x: &ProjPoint, y: &DualProjPoint| -> Result<f64> {
        let v = delta(x, y)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InfiniteDelta(String::new()))
        }
    };
    let d0 = bracket(&z[0], y)?;
    let mut yk = y.clone();
    let mut s = 0.0;
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        let ginv = letters[k - 1].inverse();
        s -= ginv.dual_cocycle(&yk)?;
        yk = ginv.act_dual(&yk)?;
        values.push(s + bracket(&z[k], &yk)? - d0);
    }
    Ok((values, z[0].clone()))
}

/// Both sides of the reversal identity for a fixed covector `y`:
/// `lhs = rho_{n,x}(h)` and
/// `rhs = E int_T^inf (t + S~_n) h(g_1 ... g_n x, t) dt`, `T = max_k (-S~_k)`.
pub fn exact_duality_sides(
    ens: &Ensemble,
    x: &ProjPoint,
    y: &DualProjPoint,
    n: usize,
    h: &TestFunction,
) -> Result<(f64, f64)> {
    let lhs = exact_rho_action(ens, x, n, h)?;
    let (atoms, weights) = discrete(ens)?;
    let rhs = sum_over_words(&weights, n, |w| {
        let letters: Vec<&GroupElement> = w.iter().map(|&i| &atoms[i]).collect();
        let (values, terminal) = reversed_values(&letters, x, y).map_err(|e| match e {
            Error::InfiniteDelta(_) => Error::InfiniteDelta(format!("word {w:?}")),
            e => e,
        })?;
        let thr = values.iter().map(|v| -v).fold(f64::NEG_INFINITY, f64::max);
        Ok(h_integral(h, terminal.coords(), thr, 0.0, values[n - 1]))
    })?;
    Ok((lhs, rhs))
}

fn start_len<P>(start: &StartLaw<P>) -> usize {
    match start {
        StartLaw::Fixed(_) => 0,
        StartLaw::Stationary { depth } => (*depth).max(1),
    }
}

fn start_point<S: ActedSpace>(space: &S, start: &StartLaw<S::Point>, letters: &[GroupElement]) -> S::Point {
    match start {
        StartLaw::Fixed(p) => p.clone(),
        StartLaw::Stationary { .. } => space.start_from_letters(letters),
    }
}

/// A generator for perturbations that take one; exact evaluation requires
/// that they never use it.
fn unused_rng() -> Rng {
    Rng::seed_from_u64(0)
}

/// `U_n^{f,theta}(t)`, enumerating the start word (for a stationary start)
/// together with every letter `f` and `theta` read.
#[allow(clippy::too_many_arguments)]
pub fn exact_u<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    theta: &dyn Twist,
    start: &StartLaw<S::Point>,
    t: f64,
    n: usize,
) -> Result<f64> {
    exact_killed(space, ens, f, theta, start, t, n, 0, true)
}

/// `E(t + S_{n+p}; tau^f > n)`.
pub fn exact_i1<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    start: &StartLaw<S::Point>,
    t: f64,
    n: usize,
    p: usize,
) -> Result<f64> {
    exact_killed(space, ens, f, &crate::framework::UnitTwist, start, t, n, p, false)
}

#[allow(clippy::too_many_arguments)]
fn exact_killed<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    f: &dyn Perturbation<S::Point>,
    theta: &dyn Twist,
    start: &StartLaw<S::Point>,
    t: f64,
    n: usize,
    extra: usize,
    perturbed_value: bool,
) -> Result<f64> {
    let (atoms, weights) = discrete(ens)?;
    let m = start_len(start);
    let mut need = (n + extra).max(theta.lookahead());
    for k in 0..=n {
        need = need.max(k + f.lookahead(k));
    }
    let d = ens.dim();
    sum_over_words(&weights, m + need, |w| {
        let word: Vec<GroupElement> = w.iter().map(|&i| atoms[i].clone()).collect();
        let x = start_point(space, start, &word[..m]);
        let letters = &word[m..];
        let mut rng = unused_rng();
        let mut scratch = vec![0.0; d];
        let mut p = x;
        let mut s = vec![0.0];
        let mut points = vec![p.clone()];
        for (k, g) in letters[..n + extra].iter().enumerate() {
            let inc = space.step(g, &mut p, &mut scratch);
            s.push(s[k] + inc);
            points.push(p.clone());
        }
        let fv: Vec<f64> = (0..=n)
            .map(|k| f.eval(k, &letters[k..], &points[k], &mut rng))
            .collect();
        let f0 = fv[0];
        if fv.iter().any(|v| !v.is_finite()) {
            return Err(Error::InfinitePerturbation);
        }
        let alive = (1..=n).all(|k| t + s[k] + fv[k] - f0 >= 0.0);
        if !alive {
            return Ok(0.0);
        }
        Ok(if perturbed_value {
            (t + s[n] + fv[n] - f0) * theta.eval(letters, &mut rng)
        } else {
            t + s[n + extra]
        })
    })
}

/// `W_n(a, t)` for the letter window chain started at `initial`.
pub fn exact_w_chain<S: ActedSpace>(
    space: &S,
    ens: &Ensemble,
    initial: &ChainState<S::Point>,
    f: &dyn Perturbation<S::Point>,
    t: f64,
    n: usize,
) -> Result<f64> {
    let (atoms, weights) = discrete(ens)?;
    let p = initial.p();
    let d = ens.dim();
    let q = initial.counter;
    if (q..=q + n).any(|k| f.lookahead(k) > p) {
        return Err(Error::InvalidArgument(
            "perturbation reads beyond the chain window".into(),
        ));
    }
    sum_over_words(&weights, n + p, |w| {
        // the full letter sequence g_0, ..., g_{n+2p}
        let mut seq: Vec<GroupElement> = initial.letters.clone();
        seq.extend(w.iter().map(|&i| atoms[i].clone()));
        let mut rng = unused_rng();
        let mut scratch = vec![0.0; d];
        let mut x = initial.point.clone();
        let f0 = f.eval(q, &seq[1..=p], &x, &mut rng);
        let mut s = 0.0;
        let mut alive = true;
        for i in 1..=n + p {
            s += space.step(&seq[i], &mut x, &mut scratch);
            if i <= n && alive {
                let fi = f.eval(q + i, &seq[i + 1..=i + p], &x, &mut rng);
                alive = t + s + fi - f0 >= 0.0;
            }
        }
        Ok(if alive { t + s } else { 0.0 })
    })
}
