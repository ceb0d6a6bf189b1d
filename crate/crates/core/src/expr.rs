//! Arithmetic expressions in `x` and `y`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | sqrt | abs
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is `2^(-1)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> std::result::Result<Expr, ParseError> {
        Parser::new(text)?.parse_all()
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let v = self.eval_raw(x, y).map_err(|reason| Error::Domain {
            x,
            y,
            reason: reason.to_string(),
        })?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain {
                x,
                y,
                reason: "non-finite result".into(),
            })
        }
    }

    fn eval_raw(&self, x: f64, y: f64) -> std::result::Result<f64, &'static str> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(a) => -a.eval_raw(x, y)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval_raw(x, y)?, b.eval_raw(x, y)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err("division by zero");
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() {
                            return Err("power of a negative base");
                        }
                        v
                    }
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval_raw(x, y)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err("sqrt of a negative number");
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                }
            }
        })
    }

    pub fn uses_variables(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::X | Expr::Y => true,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_variables(),
            Expr::Bin(_, a, b) => a.uses_variables() || b.uses_variables(),
        }
    }

    /// Value of a variable-free expression.
    pub fn constant_value(&self) -> Option<f64> {
        if self.uses_variables() {
            None
        } else {
            self.eval(0.0, 0.0).ok()
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Fully parenthesized; numbers print in shortest round-trip form.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn err(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> std::result::Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit
                .parse()
                .map_err(|_| err(start, format!("malformed number '{lit}'")))?;
            if !v.is_finite() {
                return Err(err(start, format!("number '{lit}' is not finite")));
            }
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(err(start, format!("unexpected character '{ch}'")));
                }
            };
            i += 1;
            out.push((tok, start));
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

impl Parser {
    fn new(text: &str) -> std::result::Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn parse_all(&mut self) -> std::result::Result<Expr, ParseError> {
        let e = self.expr()?;
        match self.peek() {
            Tok::End => Ok(e),
            Tok::RParen => Err(err(self.offset(), "unmatched ')'")),
            _ => Err(err(self.offset(), "expected an operator")),
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> std::result::Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == &Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> std::result::Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                _ => {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| err(at, format!("unknown identifier '{name}'")))?;
                    if self.peek() != &Tok::LParen {
                        return Err(err(self.offset(), format!("expected '(' after '{name}'")));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::call(func, arg))
                }
            },
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::End => Err(err(at, "unexpected end of input")),
            Tok::RParen => Err(err(at, "unexpected ')'")),
            Tok::Op(c) => Err(err(at, format!("unexpected operator '{c}'"))),
        }
    }

    fn expect_rparen(&mut self) -> std::result::Result<(), ParseError> {
        if self.peek() == &Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(err(self.offset(), "expected ')'"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parses_to_constant() {
        let e = Expr::parse("0").unwrap();
        assert_eq!(e, Expr::Num(0.0));
        assert_eq!(e.constant_value(), Some(0.0));
    }

    #[test]
    fn sine_times_exponential() {
        let e = Expr::parse("sin(3.141592653589793*x)*exp(-y)").unwrap();
        assert!((e.eval(0.5, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn error_points_at_offending_token() {
        let e = Expr::parse("x + * y").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(Expr::parse("z").is_err());
        assert_eq!(Expr::parse("sin x").unwrap_err().offset, 4);
        assert_eq!(Expr::parse("(x").unwrap_err().offset, 2);
        assert_eq!(Expr::parse("x)").unwrap_err().offset, 1);
        assert!(Expr::parse("1e999").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let v = |s: &str| Expr::parse(s).unwrap().eval(2.0, 3.0).unwrap();
        assert_eq!(v("-x^2"), -4.0);
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("2^-1"), 0.5);
        assert_eq!(v("1 - 2 - 3"), -4.0);
        assert_eq!(v("8 / 2 / 2"), 2.0);
        assert_eq!(v("x + y * 2"), 8.0);
        assert_eq!(v("1.5e1 + 2E-1"), 15.2);
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("sqrt(x)").unwrap();
        assert!(matches!(e.eval(-1.0, 0.0), Err(Error::Domain { .. })));
        assert!(Expr::parse("1/x").unwrap().eval(0.0, 0.0).is_err());
        assert!(Expr::parse("x^0.5").unwrap().eval(-1.0, 0.0).is_err());
    }

    #[test]
    fn print_parse_fixed_point() {
        for s in ["-x^2 + 3*sin(y)/(1+x)", "abs(-0.1)*exp(2^-y)", "1e-7*x - -y", "0.1+0.2"] {
            let e = Expr::parse(s).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{s}");
        }
        let neg = Expr::bin(BinOp::Mul, Expr::Num(-2.5), Expr::X);
        assert_eq!(Expr::parse(&neg.to_string()).unwrap().eval(2.0, 0.0).unwrap(), -5.0);
    }
}
