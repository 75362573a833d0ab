use crate::error::{Error, Result};
use crate::numeric::parse_decimal;

use super::{Function, Node, PotentialExpr};

/// Parses an expression; error offsets count characters from the start of
/// `src`.
pub fn parse_potential(src: &str) -> Result<PotentialExpr> {
    let mut p = Parser {
        chars: src.chars().map(|c| if c == '\u{2212}' { '-' } else { c }).collect(),
        pos: 0,
        variable: None,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(Error::parse(p.pos, "empty expression"));
    }
    let root = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(Error::parse(p.pos, format!("unexpected `{c}`")));
    }
    Ok(PotentialExpr {
        root,
        variable: p.variable,
    })
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    variable: Option<char>,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    /// Consumes `c` after optional whitespace.
    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Negate(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        let node = match self.peek() {
            None => return Err(Error::parse(start, "unexpected end of expression")),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if !self.eat(')') {
                    return Err(Error::parse(self.pos, "expected `)`"));
                }
                inner
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number()?,
            Some(c) if c.is_alphabetic() || c == '_' => self.identifier()?,
            Some(c) => return Err(Error::parse(start, format!("unexpected `{c}`"))),
        };
        // Reject juxtaposition such as `2x` or `x(1)`.
        if let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '(' || c == '.' {
                return Err(Error::parse(self.pos, "implicit multiplication is not supported"));
            }
        }
        Ok(node)
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        // Exponent only when digits follow, so `2e` stays an error at `e`.
        if matches!(self.peek(), Some('e' | 'E')) {
            let mut look = self.pos + 1;
            if matches!(self.chars.get(look), Some('+' | '-')) {
                look += 1;
            }
            if self.chars.get(look).is_some_and(|c| c.is_ascii_digit()) {
                self.pos = look;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        parse_decimal(&text)
            .map(Node::Number)
            .ok_or_else(|| Error::parse(start, format!("malformed number `{text}`")))
    }

    fn identifier(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match name.as_str() {
            "x" | "r" => {
                let c = name.chars().next().unwrap();
                match self.variable {
                    Some(first) if first != c => {
                        return Err(Error::MultipleVariables { first, second: c });
                    }
                    _ => self.variable = Some(c),
                }
                return Ok(Node::Variable);
            }
            "i" => return Ok(Node::ImaginaryUnit),
            _ => {}
        }
        let Some(func) = Function::lookup(&name) else {
            self.skip_ws();
            if self.peek() == Some('(') {
                return Err(Error::UnknownFunction { name, offset: start });
            }
            return Err(Error::parse(start, format!("unknown identifier `{name}`")));
        };
        if !self.eat('(') {
            return Err(Error::parse(self.pos, format!("expected `(` after `{name}`")));
        }
        let arg = self.expr()?;
        if !self.eat(')') {
            return Err(Error::parse(self.pos, "expected `)`"));
        }
        Ok(Node::Call(func, Box::new(arg)))
    }
}
