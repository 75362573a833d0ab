use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numeric::{BigComplex, BigReal, PrecisionContext};

use super::{Function, Node, PotentialExpr};

/// Intermediate value: stays on the real line for as long as possible so
/// that real expressions at real points have an exactly zero imaginary part.
enum Value {
    Real(Float),
    Complex(Complex),
}

impl Value {
    fn into_complex(self, bits: u32) -> Complex {
        match self {
            Value::Real(r) => Complex::with_val(bits, (r, 0)),
            Value::Complex(c) => c,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Value::Real(r) => r.is_zero(),
            Value::Complex(c) => c.is_zero(),
        }
    }
}

fn fail(node: &Node, reason: &str) -> Error {
    Error::Evaluation {
        node: node.to_string(),
        reason: reason.to_string(),
    }
}

struct Evaluator<'a> {
    x: &'a Complex,
    bits: u32,
}

impl Evaluator<'_> {
    fn eval(&self, node: &Node) -> Result<Value> {
        let bits = self.bits;
        let v = match node {
            Node::Number(q) => Value::Real(Float::with_val(bits, q)),
            Node::Variable => {
                if self.x.imag().is_zero() {
                    Value::Real(Float::with_val(bits, self.x.real()))
                } else {
                    Value::Complex(Complex::with_val(bits, self.x))
                }
            }
            Node::ImaginaryUnit => Value::Complex(Complex::with_val(bits, (0, 1))),
            Node::Negate(a) => match self.eval(a)? {
                Value::Real(r) => Value::Real(-r),
                Value::Complex(c) => Value::Complex(-c),
            },
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let (l, r) = (self.eval(a)?, self.eval(b)?);
                if matches!(node, Node::Div(..)) && r.is_zero() {
                    return Err(fail(node, "division by zero"));
                }
                match (l, r) {
                    (Value::Real(l), Value::Real(r)) => Value::Real(match node {
                        Node::Add(..) => l + r,
                        Node::Sub(..) => l - r,
                        Node::Mul(..) => l * r,
                        _ => l / r,
                    }),
                    (l, r) => {
                        let (l, r) = (l.into_complex(bits), r.into_complex(bits));
                        Value::Complex(match node {
                            Node::Add(..) => l + r,
                            Node::Sub(..) => l - r,
                            Node::Mul(..) => l * r,
                            _ => l / r,
                        })
                    }
                }
            }
            Node::Pow(a, b) => self.pow(node, self.eval(a)?, self.eval(b)?)?,
            Node::Call(f, a) => self.call(node, *f, self.eval(a)?)?,
        };
        let finite = match &v {
            Value::Real(r) => r.is_finite(),
            Value::Complex(c) => c.real().is_finite() && c.imag().is_finite(),
        };
        if finite {
            Ok(v)
        } else {
            Err(fail(node, "overflow or undefined result"))
        }
    }

    fn pow(&self, node: &Node, base: Value, exp: Value) -> Result<Value> {
        let bits = self.bits;
        if base.is_zero() {
            let sign = match &exp {
                Value::Real(e) => e.cmp0(),
                Value::Complex(e) => e.real().cmp0(),
            };
            return match sign {
                Some(std::cmp::Ordering::Greater) => Ok(Value::Real(Float::new(bits))),
                Some(std::cmp::Ordering::Equal) if exp.is_zero() => Ok(Value::Real(Float::with_val(bits, 1))),
                _ => Err(fail(node, "zero raised to a non-positive power")),
            };
        }
        Ok(match (base, exp) {
            (Value::Real(b), Value::Real(e)) if e.is_integer() => match e.to_i32_saturating() {
                Some(k) if Float::with_val(bits, k) == e => Value::Real(b.pow(k)),
                _ => Value::Real(b.pow(e)),
            },
            (Value::Real(b), Value::Real(e)) if b.is_sign_positive() => Value::Real(b.pow(e)),
            (Value::Complex(b), Value::Real(e)) if e.is_integer() && e.to_i32_saturating().is_some() => {
                let k = e.to_i32_saturating().unwrap();
                if Float::with_val(bits, k) == e {
                    Value::Complex(b.pow(k))
                } else {
                    Value::Complex(b.pow(e))
                }
            }
            (b, e) => Value::Complex(b.into_complex(bits).pow(e.into_complex(bits))),
        })
    }

    fn call(&self, node: &Node, f: Function, arg: Value) -> Result<Value> {
        let bits = self.bits;
        Ok(match arg {
            Value::Real(x) => match f {
                Function::Exp => Value::Real(x.exp()),
                Function::Sin => Value::Real(x.sin()),
                Function::Cos => Value::Real(x.cos()),
                Function::Tan => Value::Real(x.tan()),
                Function::Sinh => Value::Real(x.sinh()),
                Function::Cosh => Value::Real(x.cosh()),
                Function::Tanh => Value::Real(x.tanh()),
                Function::Abs => Value::Real(x.abs()),
                Function::Log if x.is_zero() => return Err(fail(node, "logarithm of zero")),
                Function::Log if x.is_sign_positive() => Value::Real(x.ln()),
                Function::Sqrt if !x.is_sign_negative() || x.is_zero() => Value::Real(x.sqrt()),
                Function::Log | Function::Sqrt => {
                    return self.call(node, f, Value::Complex(Complex::with_val(bits, (x, 0))));
                }
            },
            Value::Complex(z) => match f {
                Function::Exp => Value::Complex(z.exp()),
                Function::Sin => Value::Complex(z.sin()),
                Function::Cos => Value::Complex(z.cos()),
                Function::Tan => Value::Complex(z.tan()),
                Function::Sinh => Value::Complex(z.sinh()),
                Function::Cosh => Value::Complex(z.cosh()),
                Function::Tanh => Value::Complex(z.tanh()),
                Function::Abs => Value::Real(z.abs().into_real_imag().0),
                Function::Log if z.is_zero() => return Err(fail(node, "logarithm of zero")),
                Function::Log => Value::Complex(z.ln()),
                Function::Sqrt => Value::Complex(z.sqrt()),
            },
        })
    }
}

/// Evaluates `expr` at `x` with the working precision of `ctx`.
pub fn eval_expr(expr: &PotentialExpr, x: &BigComplex, ctx: &PrecisionContext) -> Result<BigComplex> {
    let bits = ctx.bits();
    let ev = Evaluator { x, bits };
    Ok(ev.eval(&expr.root)?.into_complex(bits))
}

/// Convenience wrapper for a real argument.
pub fn eval_real(expr: &PotentialExpr, x: &BigReal, ctx: &PrecisionContext) -> Result<BigComplex> {
    eval_expr(expr, &Complex::with_val(ctx.bits(), (x, 0)), ctx)
}

/// True when `expr` is numerically real at every point: `|Im v| <=
/// 10^{-(P-2)} (1 + |v|)`.
pub fn realness_probe(expr: &PotentialExpr, points: &[BigReal], ctx: &PrecisionContext) -> Result<bool> {
    let tol = ctx.pow10_neg(ctx.digits() as i64 - 2);
    for x in points {
        let v = eval_real(expr, x, ctx)?;
        let modulus = Float::with_val(ctx.bits(), v.abs_ref());
        if Float::with_val(ctx.bits(), v.imag().abs_ref()) > Float::with_val(ctx.bits(), &tol * (modulus + 1u32)) {
            return Ok(false);
        }
    }
    Ok(true)
}
