//! Classical orthogonal polynomials, their zeros, and Gauss weights.
//!
//! Zeros are found in two stages. A Sturm-count bisection on the (hardware
//! precision) Jacobi matrix of the three-term recurrence isolates every root;
//! Newton's method on the big-float recurrence then polishes each root,
//! doubling the working precision per sweep until the context precision is
//! reached.

mod cache;

pub use cache::{available_mesh, build_mesh, build_mesh_with, cache_root_from_env, CacheOrigin, MeshBuild, MeshListing, MeshQuery};

use std::fmt;
use std::str::FromStr;

use log::trace;
use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::numeric::{BigReal, PrecisionContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolyFamily {
    /// Weight 1 on [-1, 1].
    Legendre,
    /// Weight e^{-x} on [0, inf).
    Laguerre,
    /// Weight e^{-x^2} on (-inf, inf).
    Hermite,
}

impl PolyFamily {
    pub const ALL: [PolyFamily; 3] = [PolyFamily::Legendre, PolyFamily::Laguerre, PolyFamily::Hermite];

    pub fn name(self) -> &'static str {
        match self {
            PolyFamily::Legendre => "legendre",
            PolyFamily::Laguerre => "laguerre",
            PolyFamily::Hermite => "hermite",
        }
    }

    /// Meshes symmetric about the origin.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, PolyFamily::Laguerre)
    }

    /// The weight function w(x).
    pub fn weight(self, x: &Float) -> Float {
        match self {
            PolyFamily::Legendre => Float::with_val(x.prec(), 1),
            PolyFamily::Laguerre => Float::with_val(x.prec(), -x).exp(),
            PolyFamily::Hermite => (-Float::with_val(x.prec(), x.square_ref())).exp(),
        }
    }
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" => Ok(PolyFamily::Legendre),
            "laguerre" => Ok(PolyFamily::Laguerre),
            "hermite" => Ok(PolyFamily::Hermite),
            _ => Err(Error::InvalidOption(format!(
                "unknown polynomial family `{s}` (expected legendre, laguerre or hermite)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeshKey {
    pub family: PolyFamily,
    pub dimension: usize,
    pub precision: u32,
}

impl MeshKey {
    pub fn new(family: PolyFamily, dimension: usize, precision: u32) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidOption("mesh dimension must be at least 1".into()));
        }
        PrecisionContext::new(precision)?;
        Ok(Self {
            family,
            dimension,
            precision,
        })
    }

    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::new(self.precision).expect("validated at construction")
    }
}

/// Mesh points with their Gauss weights `w_k` and Lagrange weights
/// `λ_k = w_k / w(x_k)`, in reference coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshRecord {
    pub key: MeshKey,
    pub points: Vec<BigReal>,
    pub gauss_weights: Vec<BigReal>,
    pub lagrange_weights: Vec<BigReal>,
}

impl MeshRecord {
    /// Computes the mesh from scratch, without touching any cache.
    pub fn compute(key: MeshKey) -> Result<Self> {
        let ctx = key.context();
        let points = mesh_points(key.family, key.dimension, &ctx)?;
        let (gauss_weights, lagrange_weights) = mesh_weights(key.family, key.dimension, &points, &ctx)?;
        Ok(Self {
            key,
            points,
            gauss_weights,
            lagrange_weights,
        })
    }

    pub fn dimension(&self) -> usize {
        self.points.len()
    }

    pub fn family(&self) -> PolyFamily {
        self.key.family
    }

    pub fn context(&self) -> PrecisionContext {
        self.key.context()
    }
}

/// Runs the recurrence up to degree `n`, returning `(p_n, p_{n-1}, p'_n)`.
fn recurrence(family: PolyFamily, n: usize, x: &Float, bits: u32) -> (Float, Float, Float) {
    let mut prev = Float::with_val(bits, 0);
    let mut cur = Float::with_val(bits, 1);
    if n == 0 {
        return (cur, prev, Float::with_val(bits, 0));
    }
    let mut dprev = Float::with_val(bits, 0);
    let mut dcur = Float::with_val(bits, 0);
    let mut next = Float::new(bits);
    let mut dnext = Float::new(bits);
    let mut t = Float::new(bits);
    match family {
        PolyFamily::Legendre => {
            // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
            // (k+1) P'_{k+1} = (2k+1) (P_k + x P'_k) - k P'_{k-1}
            for k in 0..n as u64 {
                next.assign(x * &cur);
                next *= 2 * k + 1;
                t.assign(&prev * k);
                next -= &t;
                next /= k + 1;

                dnext.assign(x * &dcur);
                dnext += &cur;
                dnext *= 2 * k + 1;
                t.assign(&dprev * k);
                dnext -= &t;
                dnext /= k + 1;

                std::mem::swap(&mut prev, &mut cur);
                std::mem::swap(&mut cur, &mut next);
                std::mem::swap(&mut dprev, &mut dcur);
                std::mem::swap(&mut dcur, &mut dnext);
            }
        }
        PolyFamily::Laguerre => {
            // (k+1) L_{k+1} = (2k+1 - x) L_k - k L_{k-1}
            // (k+1) L'_{k+1} = (2k+1 - x) L'_k - L_k - k L'_{k-1}
            let mut coef = Float::new(bits);
            for k in 0..n as u64 {
                coef.assign(2 * k + 1);
                coef -= x;

                next.assign(&coef * &cur);
                t.assign(&prev * k);
                next -= &t;
                next /= k + 1;

                dnext.assign(&coef * &dcur);
                dnext -= &cur;
                t.assign(&dprev * k);
                dnext -= &t;
                dnext /= k + 1;

                std::mem::swap(&mut prev, &mut cur);
                std::mem::swap(&mut cur, &mut next);
                std::mem::swap(&mut dprev, &mut dcur);
                std::mem::swap(&mut dcur, &mut dnext);
            }
        }
        PolyFamily::Hermite => {
            // H_{k+1} = 2x H_k - 2k H_{k-1};  H'_n = 2n H_{n-1}
            let two_x = Float::with_val(bits, x * 2u32);
            for k in 0..n as u64 {
                next.assign(&two_x * &cur);
                t.assign(&prev * (2 * k));
                next -= &t;
                std::mem::swap(&mut prev, &mut cur);
                std::mem::swap(&mut cur, &mut next);
            }
            dcur.assign(&prev * (2 * n as u64));
        }
    }
    (cur, prev, dcur)
}


/// `(P_N(x), P'_N(x))` for the given family by upward recurrence.
pub fn poly_eval(family: PolyFamily, n: usize, x: &BigReal, ctx: &PrecisionContext) -> (BigReal, BigReal) {
    let x = Float::with_val(ctx.bits(), x);
    let (p, _, dp) = recurrence(family, n, &x, ctx.bits());
    (p, dp)
}

/// Value of the degree-`n` polynomial only (also used for `n + 1` and `n - 1`
/// terms of the weight formulas).
pub(crate) fn poly_value(family: PolyFamily, n: usize, x: &Float, bits: u32) -> Float {
    recurrence(family, n, x, bits).0
}

/// Second derivative of `P_N` at one of its zeros, from the family's
/// differential equation.
pub(crate) fn second_derivative_at_root(family: PolyFamily, x: &Float, dp: &Float) -> Float {
    let bits = x.prec();
    match family {
        // (1 - x^2) P'' = 2x P' - N(N+1) P
        PolyFamily::Legendre => {
            let one_minus = Float::with_val(bits, 1 - Float::with_val(bits, x.square_ref()));
            Float::with_val(bits, x * dp) * 2u32 / one_minus
        }
        // x L'' = (x - 1) L' - N L
        PolyFamily::Laguerre => Float::with_val(bits, x - 1u32) * dp / x,
        // H'' = 2x H' - 2N H
        PolyFamily::Hermite => Float::with_val(bits, x * dp) * 2u32,
    }
}

/// Monic Jacobi-matrix recurrence coefficients: diagonal `a_k` and squared
/// off-diagonal `b_k^2` (index `k` couples `k-1` and `k`).
fn jacobi_coefficients(family: PolyFamily, n: usize) -> (Vec<f64>, Vec<f64>) {
    let a = (0..n)
        .map(|k| match family {
            PolyFamily::Laguerre => (2 * k + 1) as f64,
            _ => 0.0,
        })
        .collect();
    let b2 = (0..n)
        .map(|k| {
            let k = k as f64;
            if k == 0.0 {
                return 0.0;
            }
            match family {
                PolyFamily::Legendre => k * k / (4.0 * k * k - 1.0),
                PolyFamily::Laguerre => k * k,
                PolyFamily::Hermite => k / 2.0,
            }
        })
        .collect();
    (a, b2)
}

/// Number of zeros strictly below `x` (Sturm count via LDL^T pivots).
fn sturm_count(a: &[f64], b2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for k in 0..a.len() {
        d = if k == 0 { a[0] - x } else { a[k] - x - b2[k] / d };
        if d == 0.0 {
            d = -f64::EPSILON * (x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Hardware-precision isolation of the zeros with indices in `wanted`.
fn isolate_roots(family: PolyFamily, n: usize, wanted: std::ops::Range<usize>) -> Vec<f64> {
    let (a, b2) = jacobi_coefficients(family, n);
    // Gershgorin bounds on the spectrum.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n {
        let r = b2[k].sqrt() + if k + 1 < n { b2[k + 1].sqrt() } else { 0.0 };
        lo = lo.min(a[k] - r);
        hi = hi.max(a[k] + r);
    }
    lo -= 1.0;
    hi += 1.0;
    wanted
        .map(|j| {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..2000 {
                let mid = 0.5 * (l + h);
                if mid <= l || mid >= h || h - l <= 2.0 * f64::EPSILON * l.abs().max(h.abs()) {
                    break;
                }
                if sturm_count(&a, &b2, mid) > j {
                    h = mid;
                } else {
                    l = mid;
                }
            }
            0.5 * (l + h)
        })
        .collect()
}

/// Newton polish from a hardware-precision estimate to the context precision.
fn polish_root(family: PolyFamily, n: usize, guess: f64, index: usize, ctx: &PrecisionContext) -> Result<Float> {
    let target = ctx.bits();
    let tol = ctx.refinement_tol();
    let mut bits = 128.min(target);
    let mut x = Float::with_val(bits, guess);
    let mut dx = Float::new(bits);
    let mut sweeps = 0;
    loop {
        x.set_prec(bits);
        dx.set_prec(bits);
        let steps = if bits < target { 2 } else { 12 };
        for _ in 0..steps {
            sweeps += 1;
            let (p, _, dp) = recurrence(family, n, &x, bits);
            if dp.is_zero() {
                return Err(Error::RootRefinementFailure {
                    family: family.name(),
                    dimension: n,
                    index,
                });
            }
            dx.assign(&p / &dp);
            x -= &dx;
            if bits == target {
                let scale = Float::with_val(bits, x.abs_ref()).max(&Float::with_val(bits, 1));
                if Float::with_val(bits, dx.abs_ref()) <= Float::with_val(bits, &tol * &scale) {
                    trace!("{family} N={n} root {index}: converged after {sweeps} Newton steps");
                    return Ok(x);
                }
            }
        }
        if bits == target {
            return Err(Error::RootRefinementFailure {
                family: family.name(),
                dimension: n,
                index,
            });
        }
        bits = (bits * 2).min(target);
    }
}

/// The `n` zeros of the degree-`n` family polynomial, strictly ascending.
pub fn mesh_points(family: PolyFamily, n: usize, ctx: &PrecisionContext) -> Result<Vec<BigReal>> {
    if n == 0 {
        return Err(Error::InvalidOption("mesh dimension must be at least 1".into()));
    }
    log::debug!("refining {n} {family} roots at {ctx}");
    let bits = ctx.bits();
    let points = if family.is_symmetric() {
        // Refine the non-negative half and mirror it.
        let half = n / 2;
        let upper_start = n - half;
        let guesses = isolate_roots(family, n, upper_start..n);
        let mut upper = Vec::with_capacity(half);
        for (offset, g) in guesses.into_iter().enumerate() {
            upper.push(polish_root(family, n, g, upper_start + offset, ctx)?);
        }
        let mut pts: Vec<Float> = upper.iter().rev().map(|x| Float::with_val(bits, -x)).collect();
        if n % 2 == 1 {
            pts.push(Float::with_val(bits, 0));
        }
        pts.extend(upper);
        pts
    } else {
        isolate_roots(family, n, 0..n)
            .into_iter()
            .enumerate()
            .map(|(i, g)| polish_root(family, n, g, i, ctx))
            .collect::<Result<Vec<_>>>()?
    };
    for k in 1..points.len() {
        if points[k] <= points[k - 1] {
            return Err(Error::RootRefinementFailure {
                family: family.name(),
                dimension: n,
                index: k,
            });
        }
    }
    Ok(points)
}

/// Gauss weights `w_k` and Lagrange weights `λ_k = w_k / w(x_k)` for the zeros
/// produced by [`mesh_points`].
pub fn mesh_weights(
    family: PolyFamily,
    n: usize,
    points: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<(Vec<BigReal>, Vec<BigReal>)> {
    let bits = ctx.bits();
    let sqrt_pi = ctx.pi().sqrt();
    // 2^{N-1} N! sqrt(pi) / N^2
    let hermite_numerator = if family == PolyFamily::Hermite {
        let mut c = Float::with_val(bits, Float::factorial(n as u32));
        c <<= (n as i32) - 1;
        c *= &sqrt_pi;
        c /= (n * n) as u64;
        Some(c)
    } else {
        None
    };
    let mut gauss = Vec::with_capacity(n);
    let mut lagrange = Vec::with_capacity(n);
    for (k, x) in points.iter().enumerate() {
        let x = Float::with_val(bits, x);
        let w = match family {
            PolyFamily::Legendre => {
                let (_, _, dp) = recurrence(family, n, &x, bits);
                let one_minus = Float::with_val(bits, 1 - Float::with_val(bits, x.square_ref()));
                Float::with_val(bits, 2) / (one_minus * dp.square())
            }
            PolyFamily::Laguerre => {
                let next = poly_value(family, n + 1, &x, bits);
                let denom = next.square() * ((n as u64 + 1) * (n as u64 + 1));
                Float::with_val(bits, &x / denom)
            }
            PolyFamily::Hermite => {
                let prev = poly_value(family, n - 1, &x, bits);
                Float::with_val(bits, hermite_numerator.as_ref().expect("hermite") / prev.square())
            }
        };
        if !(w.is_finite() && w.is_sign_positive() && !w.is_zero()) {
            return Err(Error::WeightComputationFailure {
                family: family.name(),
                dimension: n,
                index: k,
            });
        }
        let lambda = match family {
            PolyFamily::Legendre => w.clone(),
            PolyFamily::Laguerre => Float::with_val(bits, &w * Float::with_val(bits, x.exp_ref())),
            PolyFamily::Hermite => {
                let e = Float::with_val(bits, x.square_ref()).exp();
                Float::with_val(bits, &w * e)
            }
        };
        gauss.push(w);
        lagrange.push(lambda);
    }
    Ok((gauss, lagrange))
}
