//! Closed-form predictions for the two-block planted partition model:
//! adjacency eigenvalues, branching growth of neighborhoods, expected
//! reference-to-group distances, the detectability threshold, and the
//! asymptotic cost penalty for misplacing a node.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spectral constants of the planted partition model with mean intra-degree
/// `a` and inter-degree `b` at size `n`.
///
/// `lambda1 = (a+b)/2` and `lambda2 = (a-b)/2` are the two eigenvalues of
/// the expected adjacency kernel. Distances from a reference node
/// concentrate near `d`, split by `delta`: roughly `d - delta` to its own
/// group and `d + delta` to the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralQuantities<T> {
    pub lambda1: T,
    pub lambda2: T,
    /// `ln lambda2 / ln lambda1`; above 1/2 exactly when detection is
    /// possible.
    pub alpha: T,
    pub beta: T,
    pub c: T,
    /// Common leading distance `ln(n (lambda1-1)/lambda1) / ln lambda1`.
    pub d: T,
    /// Half-gap `c * n^(alpha-1)`.
    pub delta: T,
}

fn eigenvalues<T: Real>(a: T, b: T) -> (T, T) {
    let two = T::from_f64_lit(2.0);
    ((a + b) / two, (a - b) / two)
}

/// Evaluates every spectral quantity at (a, b, n).
///
/// Requires `a > b > 0` and `lambda2 > 1`: at or below `lambda2 = 1` the
/// closed form for `c` is singular and the asymptotics do not apply.
pub fn spectral_quantities<T: Real>(a: T, b: T, n: u64) -> Result<SpectralQuantities<T>> {
    if !(a > b && b > T::zero()) {
        return Err(Error::Domain(
            "spectral_quantities",
            format!("need a > b > 0, got a = {a}, b = {b}"),
        ));
    }
    if n < 2 {
        return Err(Error::Domain("spectral_quantities", format!("need n >= 2, got {n}")));
    }
    let (lambda1, lambda2) = eigenvalues(a, b);
    if !(lambda2 > T::one()) {
        return Err(Error::Domain(
            "spectral_quantities",
            format!("lambda2 = (a-b)/2 = {lambda2} must exceed 1"),
        ));
    }
    let ln1 = lambda1.ln();
    let alpha = lambda2.ln() / ln1;
    let beta = ((lambda1 - T::one()) / lambda1).ln() / ln1;
    let c = lambda2 / (lambda2 - T::one()) * lambda2.powf(beta) / ln1;
    let nf = T::from_count(n);
    let d = (nf * (lambda1 - T::one()) / lambda1).ln() / ln1;
    let delta = c * nf.powf(alpha - T::one());
    Ok(SpectralQuantities { lambda1, lambda2, alpha, beta, c, d, delta })
}

/// True when (a, b) lies strictly above the detectability threshold
/// `(a-b)^2 > 2(a+b)`.
pub fn above_ks_threshold<T: Real>(a: T, b: T) -> bool {
    let diff = a - b;
    diff * diff > T::from_f64_lit(2.0) * (a + b)
}

/// Expected counts of same-type and other-type nodes at hop `t` from a
/// node, under the two-type branching approximation:
/// `((l1^t + l2^t)/2, (l1^t - l2^t)/2)`.
pub fn neighborhood_growth<T: Real>(a: T, b: T, t: u32) -> (T, T) {
    let (l1, l2) = eigenvalues(a, b);
    let (p1, p2) = (l1.powi(t as i32), l2.powi(t as i32));
    let two = T::from_f64_lit(2.0);
    ((p1 + p2) / two, (p1 - p2) / two)
}

/// Geometric sum `l + l^2 + ... + l^t`, with the degenerate `l = 1` case.
fn geometric_sum<T: Real>(l: T, t: u32) -> T {
    if l == T::one() {
        T::from_count(t as u64)
    } else {
        l * (l.powi(t as i32) - T::one()) / (l - T::one())
    }
}

/// Cumulative neighborhood sizes `m_u(t) = sum_{s=1..t} n_u(s)`, exact.
pub fn cumulative_growth<T: Real>(a: T, b: T, t: u32) -> (T, T) {
    let (l1, l2) = eigenvalues(a, b);
    let (g1, g2) = (geometric_sum(l1, t), geometric_sum(l2, t));
    let two = T::from_f64_lit(2.0);
    ((g1 + g2) / two, (g1 - g2) / two)
}

/// The leading-term variant of [`cumulative_growth`] used in the distance
/// equations: `(l1^(t+1)/(l1-1) +- l2^(t+1)/(l2-1) - 2) / 2`. Differs from
/// the exact form by a t-independent constant.
pub fn cumulative_growth_approx<T: Real>(a: T, b: T, t: u32) -> (T, T) {
    let (l1, l2) = eigenvalues(a, b);
    let one = T::one();
    let two = T::from_f64_lit(2.0);
    let p1 = l1.powi(t as i32 + 1) / (l1 - one);
    let p2 = l2.powi(t as i32 + 1) / (l2 - one);
    ((p1 + p2 - two) / two, (p1 - p2 - two) / two)
}

/// Solves the two distance equations
/// `l1^(d+1)/(l1-1) +- l2^(d+1)/(l2-1) - 2 = n` for real `d` by bisection
/// on `[0, 2 ln n / ln l1]` to within 1e-9. The `+` root `d1` is the
/// expected distance to the reference's own group, the `-` root `d2` to
/// the other group.
pub fn solve_distances<T: Real>(a: T, b: T, n: u64) -> Result<(T, T)> {
    if !(a > b) {
        return Err(Error::Domain("solve_distances", format!("need a > b, got a = {a}, b = {b}")));
    }
    let (l1, l2) = eigenvalues(a, b);
    if !(l1 > T::one()) {
        return Err(Error::Domain("solve_distances", format!("lambda1 = {l1} must exceed 1")));
    }
    if l2 == T::one() {
        return Err(Error::Domain("solve_distances", "lambda2 = 1 makes the equation singular".into()));
    }
    let one = T::one();
    let two = T::from_f64_lit(2.0);
    let nf = T::from_count(n);
    let hi = two * nf.ln() / l1.ln();
    let f = |d: T, sign: T| {
        l1.powf(d + one) / (l1 - one) + sign * l2.powf(d + one) / (l2 - one) - two - nf
    };
    let d1 = bisect("d1", |d| f(d, one), T::zero(), hi)?;
    let d2 = bisect("d2", |d| f(d, -one), T::zero(), hi)?;
    Ok((d1, d2))
}

fn bisect<T: Real>(what: &'static str, f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> Result<T> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo <= T::zero() && fhi >= T::zero()) {
        return Err(Error::NoSignChange {
            what,
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let tol = T::from_f64_lit(1e-9);
    while hi - lo > tol {
        let mid = (lo + hi) / T::from_f64_lit(2.0);
        if f(mid) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::from_f64_lit(2.0))
}

/// Asymptotic cost penalty for misplacing one node:
/// `2 ln(lambda1) c^2 n^(2 alpha - 1) / ln n`. Grows without bound in `n`
/// exactly when the parameters sit above the detectability threshold.
pub fn cost_gap<T: Real>(a: T, b: T, n: u64) -> Result<T> {
    let q = spectral_quantities(a, b, n)?;
    let nf = T::from_count(n);
    let two = T::from_f64_lit(2.0);
    Ok(two * q.lambda1.ln() * q.c * q.c * nf.powf(two * q.alpha - T::one()) / nf.ln())
}
