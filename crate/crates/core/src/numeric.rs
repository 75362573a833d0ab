//! Precision-carrying scalars.
//!
//! Precision is specified in decimal digits. A [`PrecisionContext`] carries the
//! user-facing digit count `P` plus a band of guard digits that absorbs
//! cancellation in recurrences and eigen-solvers; every big-float created under
//! the context gets `ceil((P + guard) * log2(10))` mantissa bits.

use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Arbitrary-precision real number.
pub type BigReal = Float;
/// Arbitrary-precision complex number; both components share one precision.
pub type BigComplex = Complex;

pub const MIN_DIGITS: u32 = 16;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
    guard: u32,
}

/// Builds a context with the default guard band of `10 + ceil(log10 P)` digits.
pub fn make_context(digits: u32) -> Result<PrecisionContext> {
    PrecisionContext::new(digits)
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::InvalidPrecision(digits));
        }
        let guard = 10 + (digits.max(2) as f64).log10().ceil() as u32;
        Ok(Self { digits, guard })
    }

    pub fn with_guard(digits: u32, guard: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::InvalidPrecision(digits));
        }
        Ok(Self { digits, guard })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    /// Digits carried internally: `P + guard`.
    pub fn internal_digits(&self) -> u32 {
        self.digits + self.guard
    }

    /// Mantissa bits for every value created under this context.
    pub fn bits(&self) -> u32 {
        digits_to_bits(self.internal_digits())
    }

    pub fn real<T>(&self, value: T) -> BigReal
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn complex<T>(&self, value: T) -> BigComplex
    where
        Complex: rug::Assign<T>,
    {
        Complex::with_val(self.bits(), value)
    }

    pub fn zero(&self) -> BigReal {
        Float::new(self.bits())
    }

    /// `10^(-k)` at context precision.
    pub fn pow10_neg(&self, k: i64) -> BigReal {
        let ten = self.real(10);
        ten.pow(-k)
    }

    /// Relative tolerance `10^-(P + guard - 3)` used as the convergence target
    /// of iterative refinements.
    pub fn refinement_tol(&self) -> BigReal {
        self.pow10_neg(self.internal_digits() as i64 - 3)
    }

    /// Tolerance `10^-(P - k)` for user-facing accuracy contracts.
    pub fn contract_tol(&self, slack: u32) -> BigReal {
        self.pow10_neg(self.digits as i64 - slack as i64)
    }

    pub fn pi(&self) -> BigReal {
        Float::with_val(self.bits(), rug::float::Constant::Pi)
    }
}

impl fmt::Display for PrecisionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} digits (+{} guard)", self.digits, self.guard)
    }
}

/// Mantissa bits needed to carry `digits` decimal digits, plus four spare bits
/// so that a `digits`-digit decimal string survives a parse/print round trip.
pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32 + 4
}

/// Significant decimal digits representable by a mantissa of `bits` bits.
pub fn bits_to_digits(bits: u32) -> usize {
    (bits as f64 / LOG2_10).floor() as usize
}

/// Parses an unsigned decimal literal (`12`, `1.5`, `.25`, `3e-4`) exactly.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], Some(&text[pos + 1..])),
        None => (text, None),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut exp10: i64 = -(frac_part.len() as i64);
    if let Some(e) = exponent {
        let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let value: i64 = e.parse().ok()?;
        exp10 = exp10.checked_add(value)?;
    }
    let digits = format!("{int_part}{frac_part}");
    let mantissa = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).ok()?;
    let scale = Integer::from(Integer::u_pow_u(10, exp10.unsigned_abs() as u32));
    Some(if exp10 >= 0 {
        Rational::from(mantissa * scale)
    } else {
        Rational::from((mantissa, scale))
    })
}

/// Parses an unsigned real magnitude: a decimal literal or an integer ratio `p/q`.
fn parse_magnitude(text: &str, offset: usize, ctx: &PrecisionContext) -> Result<BigReal> {
    if let Some((num, den)) = text.split_once('/') {
        let is_int = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if !is_int(num) || !is_int(den) {
            return Err(Error::parse(offset, format!("malformed rational `{text}`")));
        }
        let den = Integer::from_str_radix(den, 10).expect("digits");
        if den == 0 {
            return Err(Error::parse(offset, "zero denominator"));
        }
        let num = Integer::from_str_radix(num, 10).expect("digits");
        return Ok(ctx.real(num) / ctx.real(den));
    }
    parse_decimal(text)
        .map(|q| ctx.real(&q))
        .ok_or_else(|| Error::parse(offset, format!("malformed number `{text}`")))
}

/// Parses scalar literals such as `3/2`, `-0.25`, `2i`, `i`, `1.5-2i` or `1e-3`.
pub fn parse_scalar(text: &str, ctx: &PrecisionContext) -> Result<BigComplex> {
    let src = text.trim();
    if src.is_empty() {
        return Err(Error::parse(0, "empty scalar"));
    }
    let base = text.len() - text.trim_start().len();

    // Split into at most two signed terms; a sign directly after an exponent
    // marker belongs to the exponent.
    let bytes = src.as_bytes();
    let mut cuts = Vec::new();
    for (i, &b) in bytes.iter().enumerate().skip(1) {
        if (b == b'+' || b == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            cuts.push(i);
        }
    }
    if cuts.len() > 1 {
        return Err(Error::parse(base + cuts[1], "too many terms"));
    }
    let mut terms = vec![];
    let mut start = 0;
    for &c in cuts.iter().chain(std::iter::once(&src.len())) {
        terms.push((start, &src[start..c]));
        start = c;
    }

    let mut re = ctx.zero();
    let mut im = ctx.zero();
    let mut seen_re = false;
    let mut seen_im = false;
    for (pos, term) in terms {
        let (negative, body) = match term.as_bytes().first() {
            Some(b'-') => (true, &term[1..]),
            Some(b'+') => (false, &term[1..]),
            _ => (false, term),
        };
        let body_offset = base + pos + (term.len() - body.len());
        let body = body.trim();
        if body.is_empty() {
            return Err(Error::parse(body_offset, "missing magnitude"));
        }
        let (imaginary, magnitude) = match body.strip_suffix('i') {
            Some(m) => (true, m.trim_end().strip_suffix('*').unwrap_or(m).trim_end()),
            None => (false, body),
        };
        let mut value = if imaginary && magnitude.is_empty() {
            ctx.real(1)
        } else {
            parse_magnitude(magnitude, body_offset, ctx)?
        };
        if negative {
            value = -value;
        }
        let slot = if imaginary { &mut seen_im } else { &mut seen_re };
        if *slot {
            return Err(Error::parse(body_offset, "duplicate real or imaginary part"));
        }
        *slot = true;
        if imaginary {
            im = value;
        } else {
            re = value;
        }
    }
    Ok(Complex::with_val(ctx.bits(), (re, im)))
}

/// Renders `x` with `digits` significant digits (round-to-nearest).
fn format_real(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return if digits <= 1 {
            "0".to_string()
        } else {
            format!("0.{}", "0".repeat(digits - 1))
        };
    }
    let (negative, mantissa, exp) = x.to_sign_string_exp_round(10, Some(digits), Round::Nearest);
    let exp = exp.expect("finite non-zero value") as i64;
    let sign = if negative { "-" } else { "" };
    let d = mantissa.len() as i64;
    // value = 0.mantissa * 10^exp
    if (-4..=0).contains(&exp) {
        format!("{sign}0.{}{mantissa}", "0".repeat((-exp) as usize))
    } else if exp > 0 && exp < d {
        let (head, tail) = mantissa.split_at(exp as usize);
        format!("{sign}{head}.{tail}")
    } else if exp == d {
        format!("{sign}{mantissa}")
    } else {
        let (head, tail) = mantissa.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{}", exp - 1)
        } else {
            format!("{sign}{head}.{tail}e{}", exp - 1)
        }
    }
}

/// Decimal rendering of a real or complex scalar; values with an exactly zero
/// imaginary part print as plain reals, values with a zero real part print
/// only the imaginary component.
pub fn format_scalar(x: &BigComplex, digits: usize) -> Result<String> {
    let available = bits_to_digits(x.prec().0.min(x.prec().1));
    if digits == 0 || digits > available {
        return Err(Error::Truncation {
            requested: digits,
            available,
        });
    }
    let (re, im) = (x.real(), x.imag());
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::Evaluation {
            node: "format".into(),
            reason: "non-finite value".into(),
        });
    }
    Ok(if im.is_zero() {
        format_real(re, digits)
    } else if re.is_zero() {
        format!("{}i", format_real(im, digits))
    } else {
        let imag = format_real(im, digits);
        match imag.strip_prefix('-') {
            Some(abs) => format!("{}-{abs}i", format_real(re, digits)),
            None => format!("{}+{imag}i", format_real(re, digits)),
        }
    })
}

pub fn format_real_scalar(x: &BigReal, digits: usize) -> Result<String> {
    format_scalar(&Complex::with_val(x.prec(), (x, 0)), digits)
}

/// Number of leading decimal digits on which `a` and `b` agree, measured as
/// `-log10(|a - b| / max(|b|, tiny))`. Returns `f64::INFINITY` for exact equality.
pub fn agreeing_digits(a: &Float, b: &Float) -> f64 {
    let diff = Float::with_val(a.prec().max(b.prec()), a - b).abs();
    if diff.is_zero() {
        return f64::INFINITY;
    }
    let scale = Float::with_val(b.prec(), b.abs_ref());
    let denom = if scale.is_zero() { Float::with_val(53, 1) } else { scale };
    let ratio = diff / denom;
    -ratio.log10().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(d: u32) -> PrecisionContext {
        make_context(d).unwrap()
    }

    #[test]
    fn context_guard_defaults() {
        let c = ctx(50);
        assert_eq!((c.digits(), c.guard()), (50, 12));
        let c = ctx(16);
        assert_eq!((c.digits(), c.guard()), (16, 12));
        let c = ctx(300);
        assert_eq!(c.guard(), 13);
        assert!(matches!(make_context(10), Err(Error::InvalidPrecision(10))));
    }

    #[test]
    fn context_bits_cover_internal_digits() {
        let c = ctx(100);
        assert!(bits_to_digits(c.bits()) >= c.internal_digits() as usize);
    }

    #[test]
    fn parse_scalar_examples() {
        let c = ctx(30);
        let v = parse_scalar("3/2", &c).unwrap();
        assert_eq!(*v.real(), 1.5);
        assert!(v.imag().is_zero());
        let v = parse_scalar("i", &c).unwrap();
        assert!(v.real().is_zero());
        assert_eq!(*v.imag(), 1);
        let v = parse_scalar("-2.5+3i", &c).unwrap();
        assert_eq!((v.real().to_f64(), v.imag().to_f64()), (-2.5, 3.0));
        let v = parse_scalar("1e-3", &c).unwrap();
        assert_eq!(*v.real(), Float::with_val(c.bits(), Float::parse("0.001").unwrap()));
        assert!(matches!(parse_scalar("1.5.2", &c), Err(Error::Parse { .. })));
        assert!(parse_scalar("1/0", &c).is_err());
        assert!(parse_scalar("", &c).is_err());
        assert!(parse_scalar("2+3", &c).is_err());
    }

    #[test]
    fn format_scalar_examples() {
        let c = ctx(50);
        let third = c.complex(c.real(1) / 3u32);
        assert_eq!(format_scalar(&third, 10).unwrap(), "0.3333333333");
        let i = c.complex((0, 1));
        assert_eq!(format_scalar(&i, 5).unwrap(), "1.0000i");
        let half = c.complex(-0.5);
        assert_eq!(format_scalar(&half, 3).unwrap(), "-0.500");
        let tiny = c.complex(c.real(24129) * c.pow10_neg(68));
        assert_eq!(format_scalar(&tiny, 5).unwrap(), "2.4129e-64");
        let z = c.complex((1.5, -2));
        assert_eq!(format_scalar(&z, 3).unwrap(), "1.50-2.00i");
        assert!(matches!(
            format_scalar(&third, 500),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn exact_decimal_parsing() {
        assert_eq!(parse_decimal("1.5").unwrap(), Rational::from((3, 2)));
        assert_eq!(parse_decimal(".25").unwrap(), Rational::from((1, 4)));
        assert_eq!(parse_decimal("2e3").unwrap(), Rational::from(2000));
        assert!(parse_decimal("1.2.3").is_none());
        assert!(parse_decimal("e5").is_none());
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(m in -1_000_000_000i64..1_000_000_000, e in -30i32..30, d in 5usize..40) {
            let c = ctx(60);
            let x = c.complex(c.real(m) * c.real(10).pow(e) / 7u32);
            let s = format_scalar(&x, d).unwrap();
            let back = parse_scalar(&s, &c).unwrap();
            prop_assert_eq!(format_scalar(&back, d).unwrap(), s);
        }

        #[test]
        fn add_sub_preserves_digits(a in -1.0e5f64..1.0e5, b in -1.0e5f64..1.0e5) {
            let c = ctx(40);
            let x = c.real(a) / 3u32;
            let y = c.real(b) / 7u32;
            let back = Float::with_val(c.bits(), &x + &y) - &y;
            if !x.is_zero() {
                prop_assert!(agreeing_digits(&back, &x) >= c.digits() as f64);
            }
        }
    }
}
