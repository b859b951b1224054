//! Tiny expression grammar for coefficients and delays.
//!
//! Grammar: `number | t | sin(expr) | expr (+|-|*|/) expr | expr^number |
//! (expr)` with the usual precedence (`^` tightest, then unary minus, then
//! `*` `/`, then `+` `-`). This covers every coefficient shape the worked
//! equations need: power laws like `1/t^2`, affine delays `t - 3`, q-shifts
//! `t/2`, and the sinusoid-modulated constant `(1 - sin(t))/3`.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    Sin(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e.normalized())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::Sin(e) => e.eval(t).sin(),
            Expr::Neg(e) => -e.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, p) => a.eval(t).powf(*p),
        }
    }

    /// Fold unary minus on literals so parse(render(e)) == e structurally.
    pub fn normalized(self) -> Expr {
        match self {
            Expr::Neg(e) => match e.normalized() {
                Expr::Num(v) => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            },
            Expr::Sin(e) => Expr::Sin(Box::new(e.normalized())),
            Expr::Add(a, b) => Expr::Add(Box::new(a.normalized()), Box::new(b.normalized())),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.normalized()), Box::new(b.normalized())),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.normalized()), Box::new(b.normalized())),
            Expr::Div(a, b) => Expr::Div(Box::new(a.normalized()), Box::new(b.normalized())),
            Expr::Pow(a, p) => Expr::Pow(Box::new(a.normalized()), p),
            leaf => leaf,
        }
    }

    /// True when the expression is the literal constant `v`.
    pub fn is_const(&self, v: f64) -> bool {
        matches!(self, Expr::Num(c) if *c == v)
    }
}

impl fmt::Display for Expr {
    // fully parenthesized so the output reparses to the same AST
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::T => write!(f, "t"),
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            // base gets its own parens so a negative literal base reparses
            // as the base, not as a unary minus applied to the power
            Expr::Pow(a, p) => write!(f, "(({a})^{p})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    // power := atom ('^' signed-number)?
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let neg = self.eat(b'-');
            let n = self.number()?;
            Ok(Expr::Pow(Box::new(base), if neg { -n } else { n }))
        } else {
            Ok(base)
        }
    }

    // atom := number | 't' | 'sin' '(' expr ')' | '(' expr ')'
    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match word {
                    "t" => Ok(Expr::T),
                    "sin" => {
                        self.skip_ws();
                        if !self.eat(b'(') {
                            return Err(self.err("expected '(' after sin"));
                        }
                        let e = self.expr()?;
                        self.skip_ws();
                        if !self.eat(b')') {
                            return Err(self.err("expected ')'"));
                        }
                        Ok(Expr::Sin(Box::new(e)))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.err(&format!("unknown name '{word}'")))
                    }
                }
            }
            _ => Err(self.err("expected a number, 't', 'sin(', or '('")),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.peek() == Some(b'e') || self.peek() == Some(b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.peek() == Some(b'+') || self.peek() == Some(b'-') {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // not an exponent after all
            }
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<f64>()
            .map_err(|e| ParseError {
                pos: start,
                msg: e.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_law() {
        let e = Expr::parse("1/t^2").unwrap();
        assert_eq!(e.eval(4.0), 1.0 / 16.0);
    }

    #[test]
    fn affine_delay() {
        let e = Expr::parse("t - 3").unwrap();
        assert_eq!(e.eval(10.0), 7.0);
    }

    #[test]
    fn sinusoid_coefficient() {
        let e = Expr::parse("(1 - sin(t))/3").unwrap();
        let t = 2.0;
        assert!((e.eval(t) - (1.0 - t.sin()) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_unary() {
        assert_eq!(Expr::parse("2*t^2").unwrap().eval(3.0), 18.0);
        assert_eq!(Expr::parse("-t^2").unwrap().eval(3.0), -9.0);
        assert_eq!(Expr::parse("2 - -3").unwrap().eval(0.0), 5.0);
        assert_eq!(Expr::parse("t^-1").unwrap().eval(4.0), 0.25);
        assert_eq!(Expr::parse("1 - 2 - 3").unwrap().eval(0.0), -4.0);
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(Expr::parse("1e-4").unwrap().eval(0.0), 1e-4);
        assert_eq!(Expr::parse("2.5E2").unwrap().eval(0.0), 250.0);
    }

    #[test]
    fn errors_carry_position() {
        let e = Expr::parse("1 + foo").unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("1 + ").is_err());
        assert!(Expr::parse("1 2").is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-100.0f64..100.0).prop_map(Expr::Num),
            Just(Expr::T),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expr::Sin(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a)).normalized()),
                (inner, -6i32..6).prop_map(|(a, p)| Expr::Pow(Box::new(a), p as f64)),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_reparse_roundtrip(e in arb_expr()) {
            let rendered = e.to_string();
            let back = Expr::parse(&rendered).unwrap();
            prop_assert_eq!(back, e.clone().normalized(), "render: {}", rendered);
        }
    }
}
