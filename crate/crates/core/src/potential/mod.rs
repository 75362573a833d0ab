//! One-variable expression language for potentials and observables.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | 'r' | 'i' | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are exact decimals (`3`, `0.25`, `1e-3`); write rationals as
//! `p/q`. `x` and `r` both name the coordinate but cannot be mixed in one
//! expression. There is no implicit multiplication.

mod eval;
mod parser;

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};

use crate::error::{Error, Result};

pub use eval::{eval_expr, eval_real, realness_probe};
pub use parser::parse_potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Function {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Abs,
}

impl Function {
    pub const ALL: [Function; 10] = [
        Function::Exp,
        Function::Log,
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Sinh,
        Function::Cosh,
        Function::Tanh,
        Function::Sqrt,
        Function::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sinh => "sinh",
            Function::Cosh => "cosh",
            Function::Tanh => "tanh",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
        }
    }

    pub fn lookup(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(Rational),
    Variable,
    ImaginaryUnit,
    Negate(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Function, Box<Node>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr {
    pub root: Node,
    /// The coordinate symbol as written (`x` or `r`); `None` for constants.
    pub variable: Option<char>,
}

impl PotentialExpr {
    pub fn symbol(&self) -> char {
        self.variable.unwrap_or('x')
    }

    /// True when the tree contains `i`, `log`, `sqrt`, or a non-integer
    /// exponent, i.e. when a real argument might produce a complex value.
    pub fn may_be_complex(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Number(_) | Node::Variable => false,
                Node::ImaginaryUnit => true,
                Node::Negate(a) => walk(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => walk(a) || walk(b),
                Node::Pow(a, b) => walk(a) || walk(b) || !integer_literal(b),
                Node::Call(Function::Log | Function::Sqrt, _) => true,
                Node::Call(_, a) => walk(a),
            }
        }
        fn integer_literal(b: &Node) -> bool {
            match b {
                Node::Negate(a) => integer_literal(a),
                Node::Number(q) => q.is_integer(),
                _ => false,
            }
        }
        walk(&self.root)
    }
}

impl FromStr for PotentialExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_potential(s)
    }
}

// Binding strength used when printing: sums < products < unary minus < powers < atoms.
fn precedence(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Negate(_) => 3,
        Node::Number(q) if *q < 0 => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

/// Exact decimal spelling of a rational whose denominator has no prime
/// factors besides 2 and 5; `None` otherwise.
fn decimal_string(q: &Rational) -> Option<String> {
    let mut den = q.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_divisible_u(2) {
        den /= 2u32;
        twos += 1;
    }
    while den.is_divisible_u(5) {
        den /= 5u32;
        fives += 1;
    }
    if den != 1 {
        return None;
    }
    let places = twos.max(fives);
    let scaled = Integer::from(q.numer() * Integer::from(Integer::u_pow_u(10, places))) / q.denom();
    let digits = scaled.abs().to_string();
    let sign = if *q < 0 { "-" } else { "" };
    if places == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    Some(format!("{sign}{int}.{frac}"))
}

struct Printer<'a> {
    node: &'a Node,
    symbol: char,
}

impl Printer<'_> {
    fn child<'b>(&self, node: &'b Node) -> Printer<'b> {
        Printer { node, symbol: self.symbol }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, node: &Node, min: u8) -> fmt::Result {
        if precedence(node) < min {
            write!(f, "({})", self.child(node))
        } else {
            write!(f, "{}", self.child(node))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Node::Number(q) => match decimal_string(q) {
                Some(s) => f.write_str(&s),
                None => write!(f, "({}/{})", q.numer(), q.denom()),
            },
            Node::Variable => write!(f, "{}", self.symbol),
            Node::ImaginaryUnit => f.write_str("i"),
            Node::Negate(a) => {
                f.write_str("-")?;
                self.write_at(f, a, 3)
            }
            Node::Add(a, b) | Node::Sub(a, b) => {
                self.write_at(f, a, 1)?;
                f.write_str(if matches!(self.node, Node::Add(..)) { " + " } else { " - " })?;
                self.write_at(f, b, 2)
            }
            Node::Mul(a, b) | Node::Div(a, b) => {
                self.write_at(f, a, 2)?;
                f.write_str(if matches!(self.node, Node::Mul(..)) { "*" } else { "/" })?;
                self.write_at(f, b, 3)
            }
            Node::Pow(a, b) => {
                self.write_at(f, a, 5)?;
                f.write_str("^")?;
                self.write_at(f, b, 3)
            }
            Node::Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
        }
    }
}

impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            Printer {
                node: &self.root,
                symbol: self.symbol()
            }
        )
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Printer { node: self, symbol: 'x' })
    }
}
