//! Lagrange functions, kinetic matrices, and the affine maps carrying a
//! reference mesh onto the physical domain.

use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{parse_scalar, BigReal, PrecisionContext};
use crate::orthopoly::{poly_eval, second_derivative_at_root, MeshRecord, PolyFamily};

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Finite { a: BigReal, b: BigReal },
    /// `[a, ∞)`
    SemiInfiniteRight { a: BigReal },
    /// `(-∞, b]`
    SemiInfiniteLeft { b: BigReal },
    Infinite,
}

impl DomainSpec {
    pub fn finite(a: BigReal, b: BigReal) -> Result<Self> {
        if a < b {
            Ok(DomainSpec::Finite { a, b })
        } else {
            Err(Error::InvalidDomain(format!("finite domain needs a < b, got ({a}, {b})")))
        }
    }

    /// Parses `"<a>,<b>"` where each endpoint is a real scalar literal or
    /// `inf` / `-inf`.
    pub fn parse(text: &str, ctx: &PrecisionContext) -> Result<Self> {
        let Some((lo, hi)) = text.split_once(',') else {
            return Err(Error::InvalidDomain(format!("expected `a,b`, got `{text}`")));
        };
        let classify = |s: &str, offset: usize| -> Result<Endpoint> {
            let s = s.trim();
            match s.to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => return Ok(Endpoint::PosInf),
                "-inf" | "-infinity" => return Ok(Endpoint::NegInf),
                _ => {}
            }
            let v = parse_scalar(s, ctx).map_err(|e| match e {
                Error::Parse { offset: o, message } => Error::Parse {
                    offset: o + offset,
                    message,
                },
                other => other,
            })?;
            if !v.imag().is_zero() {
                return Err(Error::InvalidDomain(format!("endpoint `{s}` is not real")));
            }
            Ok(Endpoint::Value(v.real().clone()))
        };
        let lo = classify(lo, 0)?;
        let hi = classify(hi, text.find(',').unwrap_or(0) + 1)?;
        match (lo, hi) {
            (Endpoint::NegInf, Endpoint::PosInf) => Ok(DomainSpec::Infinite),
            (Endpoint::Value(a), Endpoint::PosInf) => Ok(DomainSpec::SemiInfiniteRight { a }),
            (Endpoint::NegInf, Endpoint::Value(b)) => Ok(DomainSpec::SemiInfiniteLeft { b }),
            (Endpoint::Value(a), Endpoint::Value(b)) => DomainSpec::finite(a, b),
            _ => Err(Error::InvalidDomain(format!("`{text}` is not an interval"))),
        }
    }

    /// Whether `x` lies strictly inside the domain.
    pub fn contains(&self, x: &Float) -> bool {
        match self {
            DomainSpec::Finite { a, b } => a < x && x < b,
            DomainSpec::SemiInfiniteRight { a } => a < x,
            DomainSpec::SemiInfiniteLeft { b } => x < b,
            DomainSpec::Infinite => x.is_finite(),
        }
    }
}

enum Endpoint {
    NegInf,
    PosInf,
    Value(BigReal),
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: &Float| x.to_f64().to_string();
        match self {
            DomainSpec::Finite { a, b } => write!(f, "({}, {})", show(a), show(b)),
            DomainSpec::SemiInfiniteRight { a } => write!(f, "({}, inf)", show(a)),
            DomainSpec::SemiInfiniteLeft { b } => write!(f, "(-inf, {})", show(b)),
            DomainSpec::Infinite => f.write_str("(-inf, inf)"),
        }
    }
}

/// Finite → Legendre, half-lines → Laguerre, real line → Hermite.
pub fn choose_family(domain: &DomainSpec) -> PolyFamily {
    match domain {
        DomainSpec::Finite { .. } => PolyFamily::Legendre,
        DomainSpec::SemiInfiniteRight { .. } | DomainSpec::SemiInfiniteLeft { .. } => PolyFamily::Laguerre,
        DomainSpec::Infinite => PolyFamily::Hermite,
    }
}

/// A reference mesh carried onto the physical domain. Physical points are
/// always ascending; for `(-∞, b]` the reflection reverses the node order, so
/// physical index `k` corresponds to reference index `N - 1 - k`.
#[derive(Debug, Clone)]
pub struct MappedMesh {
    pub reference: MeshRecord,
    pub domain: DomainSpec,
    pub scaling: BigReal,
    pub physical_points: Vec<BigReal>,
    pub jacobian: BigReal,
    pub physical_lambda: Vec<BigReal>,
    reversed: bool,
}

impl MappedMesh {
    pub fn dimension(&self) -> usize {
        self.physical_points.len()
    }

    pub fn context(&self) -> PrecisionContext {
        self.reference.context()
    }

    /// Reference index of physical node `k` (both 0-based).
    pub fn reference_index(&self, k: usize) -> usize {
        if self.reversed {
            self.dimension() - 1 - k
        } else {
            k
        }
    }

    /// Reference coordinate of a physical point.
    pub fn inverse_map(&self, x: &Float) -> Float {
        let bits = self.context().bits();
        match &self.domain {
            DomainSpec::Infinite => Float::with_val(bits, x / &self.scaling),
            DomainSpec::SemiInfiniteRight { a } => Float::with_val(bits, x - a) / &self.scaling,
            DomainSpec::SemiInfiniteLeft { b } => Float::with_val(bits, b - x) / &self.scaling,
            DomainSpec::Finite { a, b } => {
                let twice = Float::with_val(bits, x * 2u32) - a - b;
                twice / Float::with_val(bits, b - a)
            }
        }
    }

    /// Kinetic matrix in physical node order.
    pub fn kinetic(&self) -> Result<KineticMatrix> {
        let t = kinetic_matrix(
            self.reference.family(),
            self.dimension(),
            &self.reference.points,
            &self.context(),
        )?;
        Ok(if self.reversed { t.reversed() } else { t })
    }
}

pub fn map_mesh(record: &MeshRecord, domain: &DomainSpec, h: &BigReal) -> Result<MappedMesh> {
    let ctx = record.context();
    let bits = ctx.bits();
    if !(h.is_finite() && *h > 0) {
        return Err(Error::InvalidScaling(format!("h must be positive, got {h}")));
    }
    let expected = choose_family(domain);
    if record.family() != expected {
        return Err(Error::InvalidOption(format!(
            "{} mesh cannot be mapped onto {domain}; expected {expected}",
            record.family()
        )));
    }
    let h = Float::with_val(bits, h);
    let n = record.dimension();
    let (mut points, jacobian, reversed): (Vec<Float>, Float, bool) = match domain {
        DomainSpec::Infinite => (
            record.points.iter().map(|x| Float::with_val(bits, x * &h)).collect(),
            h.clone(),
            false,
        ),
        DomainSpec::SemiInfiniteRight { a } => (
            record.points.iter().map(|x| Float::with_val(bits, x * &h) + a).collect(),
            h.clone(),
            false,
        ),
        DomainSpec::SemiInfiniteLeft { b } => (
            record
                .points
                .iter()
                .map(|x| Float::with_val(bits, b - Float::with_val(bits, x * &h)))
                .collect(),
            h.clone(),
            true,
        ),
        DomainSpec::Finite { a, b } => {
            if h != 1 {
                return Err(Error::InvalidScaling(
                    "finite domains fix the Jacobian to (b-a)/2; scaling must be 1".into(),
                ));
            }
            let half_width = Float::with_val(bits, b - a) / 2u32;
            let mid = Float::with_val(bits, a + b) / 2u32;
            (
                record
                    .points
                    .iter()
                    .map(|x| Float::with_val(bits, x * &half_width) + &mid)
                    .collect(),
                half_width,
                false,
            )
        }
    };
    if reversed {
        points.reverse();
    }
    let physical_lambda = (0..n)
        .map(|k| {
            let r = if reversed { n - 1 - k } else { k };
            Float::with_val(bits, &record.lagrange_weights[r] * &jacobian)
        })
        .collect();
    for (k, x) in points.iter().enumerate() {
        if !domain.contains(x) || (k > 0 && points[k - 1] >= *x) {
            return Err(Error::OutOfDomain(format!("mapped node {k} = {x}")));
        }
    }
    Ok(MappedMesh {
        reference: record.clone(),
        domain: domain.clone(),
        scaling: h,
        physical_points: points,
        jacobian,
        physical_lambda,
        reversed,
    })
}

/// Symmetric kinetic matrix `T_ij = -<f_i|∂²|f_j>` under Gauss quadrature,
/// stored dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticMatrix {
    pub family: PolyFamily,
    pub n: usize,
    pub entries: Vec<BigReal>,
}

impl KineticMatrix {
    pub fn get(&self, i: usize, j: usize) -> &BigReal {
        &self.entries[i * self.n + j]
    }

    fn reversed(self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.entries[(n - 1 - i) * n + (n - 1 - j)].clone());
            }
        }
        KineticMatrix { entries, ..self }
    }
}

pub fn kinetic_matrix(
    family: PolyFamily,
    n: usize,
    points: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<KineticMatrix> {
    assert_eq!(points.len(), n, "reference mesh size mismatch");
    let bits = ctx.bits();
    let x: Vec<Float> = points.iter().map(|p| Float::with_val(bits, p)).collect();
    for i in 1..n {
        for j in 0..i {
            if x[i] == x[j] {
                return Err(Error::DegenerateMesh(j, i));
            }
        }
    }
    let nn = n as u64;
    // Per-node helpers: 1 - x^2 and sqrt(1 - x^2) for Legendre, sqrt(x) for Laguerre.
    let aux: Vec<Float> = x
        .iter()
        .map(|xi| match family {
            PolyFamily::Legendre => Float::with_val(bits, 1 - Float::with_val(bits, xi.square_ref())),
            PolyFamily::Laguerre => Float::with_val(bits, xi.sqrt_ref()),
            PolyFamily::Hermite => Float::new(bits),
        })
        .collect();
    let sqrt_aux: Vec<Float> = match family {
        PolyFamily::Legendre => aux.iter().map(|v| Float::with_val(bits, v.sqrt_ref())).collect(),
        _ => Vec::new(),
    };
    let mut entries = vec![Float::new(bits); n * n];
    for i in 0..n {
        let xi = &x[i];
        let diag = match family {
            PolyFamily::Legendre => {
                let u = &aux[i];
                let num = Float::with_val(bits, u * (nn * (nn + 1))) + 4u32;
                num / (Float::with_val(bits, u.square_ref()) * 3u32)
            }
            PolyFamily::Laguerre => {
                let num = Float::with_val(bits, xi * (4 * nn + 2)) - Float::with_val(bits, xi.square_ref()) + 4u32;
                num / (Float::with_val(bits, xi.square_ref()) * 12u32)
            }
            PolyFamily::Hermite => (Float::with_val(bits, 2 * nn + 1) - Float::with_val(bits, xi.square_ref())) / 3u32,
        };
        entries[i * n + i] = diag;
        for j in 0..i {
            let xj = &x[j];
            let d2 = Float::with_val(bits, xi - xj).square();
            let odd = (i + j) % 2 == 1;
            let mut v = match family {
                PolyFamily::Legendre => {
                    // (-1)^{i+j+1} (2 x_i x_j - 2) / [(x_i-x_j)^2 sqrt((1-x_i^2)(1-x_j^2))]
                    let num = Float::with_val(bits, xi * xj) * 2u32 - 2u32;
                    let den = d2 * &sqrt_aux[i] * &sqrt_aux[j];
                    let v = num / den;
                    if odd {
                        v
                    } else {
                        -v
                    }
                }
                PolyFamily::Laguerre => {
                    let num = Float::with_val(bits, xi + xj);
                    let den = d2 * &aux[i] * &aux[j];
                    num / den
                }
                PolyFamily::Hermite => Float::with_val(bits, 2u32) / d2,
            };
            if family != PolyFamily::Legendre && odd {
                v = -v;
            }
            entries[j * n + i] = v.clone();
            entries[i * n + j] = v;
        }
    }
    Ok(KineticMatrix { family, n, entries })
}

/// `f_i(x)` at a reference coordinate (`i` is 1-based).
pub fn lagrange_eval(record: &MeshRecord, i: usize, x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let n = record.dimension();
    if i == 0 || i > n {
        return Err(Error::BadIndex { index: i, dimension: n });
    }
    let bits = ctx.bits();
    let family = record.family();
    let xi = Float::with_val(bits, &record.points[i - 1]);
    let x = Float::with_val(bits, x);
    let delta = Float::with_val(bits, &x - &xi);

    // P_N(x) / (x - x_i), with a Taylor expansion about the node when x is
    // within 10^{-P/2} of it.
    let near = {
        let scale = Float::with_val(bits, xi.abs_ref()).max(&Float::with_val(bits, 1));
        Float::with_val(bits, delta.abs_ref()) <= ctx.pow10_neg(ctx.digits() as i64 / 2) * scale
    };
    let quotient = if near {
        let (_, dp) = poly_eval(family, n, &xi, ctx);
        let d2 = second_derivative_at_root(family, &xi, &dp);
        dp + d2 * &delta / 2u32
    } else {
        let (p, _) = poly_eval(family, n, &x, ctx);
        p / &delta
    };

    let sign_odd = |k: usize| if k % 2 == 1 { -1i32 } else { 1 };
    let value = match family {
        PolyFamily::Legendre => {
            // (-1)^{N+i} (x+1)(1-x) / sqrt(2 (x_i+1)(1-x_i)) * P_N(x)/(x-x_i)
            let factor = Float::with_val(bits, &x + 1u32) * Float::with_val(bits, 1 - &x);
            let norm = (Float::with_val(bits, &xi + 1u32) * Float::with_val(bits, 1 - &xi) * 2u32).sqrt();
            factor / norm * quotient * sign_odd(n + i)
        }
        PolyFamily::Laguerre => {
            // (-1)^i x / sqrt(x_i) * L_N(x)/(x-x_i) * e^{-x/2}
            let damp = (-Float::with_val(bits, &x / 2u32)).exp();
            Float::with_val(bits, &x / xi.sqrt()) * quotient * damp * sign_odd(i)
        }
        PolyFamily::Hermite => {
            // (-1)^{N-i} (2 h_N)^{-1/2} H_N(x)/(x-x_i) e^{-x^2/2},  h_N = 2^N N! sqrt(pi)
            let mut two_h = Float::with_val(bits, Float::factorial(n as u32));
            two_h <<= n as i32 + 1;
            two_h *= ctx.pi().sqrt();
            let damp = (-Float::with_val(bits, x.square_ref()) / 2u32).exp();
            quotient * damp / two_h.sqrt() * sign_odd(n + i)
        }
    };
    Ok(value)
}

/// `h_eff^{-1/2} f_i(t^{-1}(x))` at a physical coordinate (`i` is the 1-based
/// physical node index).
pub fn mapped_lagrange_eval(mesh: &MappedMesh, i: usize, x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let n = mesh.dimension();
    if i == 0 || i > n {
        return Err(Error::BadIndex { index: i, dimension: n });
    }
    if !mesh.domain.contains(x) {
        return Err(Error::OutOfDomain(x.to_string()));
    }
    let reference = mesh.inverse_map(x);
    let f = lagrange_eval(&mesh.reference, mesh.reference_index(i - 1) + 1, &reference, ctx)?;
    Ok(f / Float::with_val(ctx.bits(), mesh.jacobian.sqrt_ref()))
}
