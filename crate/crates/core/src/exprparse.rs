//! A small expression language for coefficient input.
//!
//! Grammar (no implicit multiplication):
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?          // right-associative
//! atom   := number | number'i' | 'x' | 'pi' | 'i'
//!         | function '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos tan exp log sqrt sinh cosh abs sgn`. Values are
//! complex; `sqrt` and `log` use the principal branch, `sgn` is the real
//! sign with `sgn(0) = 0` and rejects non-real arguments. Parse failures
//! carry the byte offset and the token class that was expected; evaluation
//! failures carry the abscissa.

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use num_complex::Complex64;
use std::fmt;

/// One-argument functions of the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Abs,
    Sgn,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "abs" => Func::Abs,
            "sgn" => Func::Sgn,
            _ => return None,
        })
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// ---------------------------------------------------------------- lexer --

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
        }
        let c = self.src[self.pos];
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.lex_number(start);
        }
        if c.is_ascii_alphabetic() {
            let mut end = self.pos;
            while end < self.src.len()
                && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
            {
                end += 1;
            }
            let name = std::str::from_utf8(&self.src[start..end])
                .expect("identifier bytes are ASCII")
                .to_string();
            self.pos = end;
            return Ok((Tok::Ident(name), start));
        }
        Err(Error::SyntaxError {
            offset: start,
            expected: "a number, identifier, operator or parenthesis".into(),
        })
    }

    fn lex_number(&mut self, start: usize) -> Result<(Tok, usize)> {
        let mut end = self.pos;
        let mut saw_digit = false;
        while end < self.src.len() && self.src[end].is_ascii_digit() {
            end += 1;
            saw_digit = true;
        }
        if end < self.src.len() && self.src[end] == b'.' {
            end += 1;
            while end < self.src.len() && self.src[end].is_ascii_digit() {
                end += 1;
                saw_digit = true;
            }
        }
        if !saw_digit {
            return Err(Error::SyntaxError {
                offset: start,
                expected: "digits in a numeric literal".into(),
            });
        }
        if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
            let mut probe = end + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                probe += 1;
                while probe < self.src.len() && self.src[probe].is_ascii_digit() {
                    probe += 1;
                }
                end = probe;
            }
        }
        let text = std::str::from_utf8(&self.src[start..end]).expect("number bytes are ASCII");
        let value: f64 = text.parse().map_err(|_| Error::SyntaxError {
            offset: start,
            expected: "a valid numeric literal".into(),
        })?;
        self.pos = end;
        // An `i` glued directly to the literal makes it imaginary.
        if self.pos < self.src.len()
            && self.src[self.pos] == b'i'
            && !(self.pos + 1 < self.src.len()
                && (self.src[self.pos + 1].is_ascii_alphanumeric() || self.src[self.pos + 1] == b'_'))
        {
            self.pos += 1;
            return Ok((Tok::Imag(value), start));
        }
        Ok((Tok::Num(value), start))
    }
}

// --------------------------------------------------------------- parser --

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Tok::Caret) {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Expr::Const(Complex64::new(0.0, v))),
            Tok::LParen => {
                let inner = self.expr()?;
                let off = self.offset();
                match self.bump() {
                    Tok::RParen => Ok(inner),
                    _ => Err(Error::SyntaxError {
                        offset: off,
                        expected: "`)`".into(),
                    }),
                }
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var),
                "pi" => Ok(Expr::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                "i" => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
                _ => {
                    if let Some(f) = Func::from_name(&name) {
                        let off = self.offset();
                        match self.bump() {
                            Tok::LParen => {}
                            _ => {
                                return Err(Error::SyntaxError {
                                    offset: off,
                                    expected: format!("`(` after function `{name}`"),
                                })
                            }
                        }
                        let arg = self.expr()?;
                        let off = self.offset();
                        match self.bump() {
                            Tok::RParen => Ok(Expr::Call(f, Box::new(arg))),
                            _ => Err(Error::SyntaxError {
                                offset: off,
                                expected: "`)`".into(),
                            }),
                        }
                    } else {
                        Err(Error::SyntaxError {
                            offset,
                            expected: "`x`, `pi`, `i` or a known function name".into(),
                        })
                    }
                }
            },
            _ => Err(Error::SyntaxError {
                offset,
                expected: "a number, `x`, `pi`, `i`, a function call, `-` or `(`".into(),
            }),
        }
    }
}

/// Parse an expression in the variable `x`.
pub fn parse(src: &str) -> Result<Expr> {
    let mut lx = Lexer::new(src);
    let mut toks = Vec::new();
    loop {
        let (t, off) = lx.next()?;
        let end = matches!(t, Tok::End);
        toks.push((t, off));
        if end {
            break;
        }
    }
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::End) {
        return Err(Error::SyntaxError {
            offset: p.offset(),
            expected: "an operator or end of input".into(),
        });
    }
    Ok(e)
}

// ----------------------------------------------------------- evaluation --

impl Expr {
    /// Evaluate at a real abscissa.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        let fail = |cause: &str| Error::EvalError {
            x,
            cause: cause.to_string(),
        };
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var => Complex64::new(x, 0.0),
            Expr::Neg(a) => {
                // Negate without minting -0.0 components: a signed zero in
                // the imaginary part would flip sqrt/log onto the lower lip
                // of the branch cut for real inputs.
                let v = a.eval(x)?;
                let flip = |t: f64| if t == 0.0 { 0.0 } else { -t };
                Complex64::new(flip(v.re), flip(v.im))
            }
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den.norm() == 0.0 {
                    return Err(fail("division by zero"));
                }
                a.eval(x)? / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                let exp = b.eval(x)?;
                complex_pow(base, exp).ok_or_else(|| fail("zero base with non-positive power"))?
            }
            Expr::Call(f, a) => {
                let z = a.eval(x)?;
                match f {
                    Func::Sin => z.sin(),
                    Func::Cos => z.cos(),
                    Func::Tan => z.tan(),
                    Func::Exp => z.exp(),
                    Func::Sqrt => z.sqrt(),
                    Func::Sinh => z.sinh(),
                    Func::Cosh => z.cosh(),
                    Func::Abs => Complex64::new(z.norm(), 0.0),
                    Func::Log => {
                        if z.norm() == 0.0 {
                            return Err(fail("log of zero"));
                        }
                        z.ln()
                    }
                    Func::Sgn => {
                        if z.im != 0.0 {
                            return Err(fail("sgn of a non-real value"));
                        }
                        let s = if z.re > 0.0 {
                            1.0
                        } else if z.re < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        Complex64::new(s, 0.0)
                    }
                }
            }
        })
    }

    /// Sample on a mesh, rejecting non-finite values.
    pub fn sample(&self, grid: Grid) -> Result<SampledFunction> {
        let mut values = Vec::with_capacity(grid.len());
        for x in grid.points() {
            let v = self.eval(x)?;
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::EvalError {
                    x,
                    cause: "non-finite value".into(),
                });
            }
            values.push(v);
        }
        Ok(SampledFunction { grid, values })
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }
}

/// Complex power with an exact fast path for small integer exponents, so
/// that real expressions such as `x^2` stay exactly real at negative `x`.
fn complex_pow(base: Complex64, exp: Complex64) -> Option<Complex64> {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 1024.0 {
        let k = exp.re as i64;
        if base.norm() == 0.0 {
            return match k.cmp(&0) {
                std::cmp::Ordering::Greater => Some(Complex64::new(0.0, 0.0)),
                std::cmp::Ordering::Equal => Some(Complex64::new(1.0, 0.0)),
                std::cmp::Ordering::Less => None,
            };
        }
        let mut acc = Complex64::new(1.0, 0.0);
        let mut sq = base;
        let mut n = k.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc *= sq;
            }
            sq *= sq;
            n >>= 1;
        }
        return Some(if k < 0 { acc.inv() } else { acc });
    }
    if base.norm() == 0.0 {
        return if exp.re > 0.0 {
            Some(Complex64::new(0.0, 0.0))
        } else {
            None
        };
    }
    Some(base.powc(exp))
}

// ------------------------------------------------------------- printing --

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with_prec(f, 0)
    }
}

impl Expr {
    fn write_with_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let own = self.prec();
        let parens = own < min_prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => {
                if c.im == 0.0 {
                    if c.re < 0.0 {
                        // A negative constant renders as a negation so the
                        // printed form re-parses to an equal tree.
                        write!(f, "(-{})", crate::fmt::g17(-c.re))?;
                    } else {
                        write!(f, "{}", crate::fmt::g17(c.re))?;
                    }
                } else if c.re == 0.0 {
                    if c.im < 0.0 {
                        write!(f, "(-{}i)", crate::fmt::g17(-c.im))?;
                    } else {
                        write!(f, "{}i", crate::fmt::g17(c.im))?;
                    }
                } else {
                    // Mixed constants cannot be produced by the parser; any
                    // re-parse yields an equivalent sum.
                    write!(
                        f,
                        "({}+{}i)",
                        crate::fmt::g17(c.re),
                        crate::fmt::g17(c.im)
                    )?;
                }
            }
            Expr::Var => write!(f, "x")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_with_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.write_with_prec(f, 1)?;
                write!(f, "+")?;
                b.write_with_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.write_with_prec(f, 1)?;
                write!(f, "-")?;
                b.write_with_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.write_with_prec(f, 2)?;
                write!(f, "*")?;
                b.write_with_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.write_with_prec(f, 2)?;
                write!(f, "/")?;
                b.write_with_prec(f, 3)?;
            }
            Expr::Pow(a, b) => {
                a.write_with_prec(f, 5)?;
                write!(f, "^")?;
                b.write_with_prec(f, 3)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_with_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, x: f64) -> Complex64 {
        parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1+2*3", 0.0), Complex64::new(7.0, 0.0));
        assert_eq!(ev("(1+2)*3", 0.0), Complex64::new(9.0, 0.0));
        assert_eq!(ev("2^3^2", 0.0), Complex64::new(512.0, 0.0));
        assert_eq!(ev("-2^2", 0.0), Complex64::new(-4.0, 0.0));
        assert_eq!(ev("2^-2", 0.0), Complex64::new(0.25, 0.0));
        assert_eq!(ev("6/3/2", 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(ev("1-2-3", 0.0), Complex64::new(-4.0, 0.0));
    }

    #[test]
    fn constants_and_variables() {
        assert_eq!(ev("x", 2.5), Complex64::new(2.5, 0.0));
        assert!((ev("pi", 0.0).re - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(ev("i", 0.0), Complex64::new(0.0, 1.0));
        assert_eq!(ev("2i", 0.0), Complex64::new(0.0, 2.0));
        assert_eq!(ev("1.5e-1i", 0.0), Complex64::new(0.0, 0.15));
        assert_eq!(ev("1+2i", 0.0), Complex64::new(1.0, 2.0));
    }

    #[test]
    fn functions() {
        assert!((ev("sin(pi/2)", 0.0).re - 1.0).abs() < 1e-15);
        assert!((ev("exp(log(3))", 0.0).re - 3.0).abs() < 1e-14);
        assert_eq!(ev("sgn(0)", 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(ev("sgn(x)", -3.0), Complex64::new(-1.0, 0.0));
        assert_eq!(ev("sgn(x)", 3.0), Complex64::new(1.0, 0.0));
        assert_eq!(ev("abs(3i)", 0.0), Complex64::new(3.0, 0.0));
        let s = ev("sqrt(-4)", 0.0);
        assert!((s - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((ev("cosh(1)", 0.0).re - 1.0f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn integer_powers_of_negative_reals_stay_real() {
        let v = ev("x^2", -3.0);
        assert_eq!(v, Complex64::new(9.0, 0.0));
        let v = ev("x^3", -2.0);
        assert_eq!(v, Complex64::new(-8.0, 0.0));
        let v = ev("x^-2", -2.0);
        assert_eq!(v, Complex64::new(0.25, 0.0));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("1+") {
            Err(Error::SyntaxError { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("2 x") {
            Err(Error::SyntaxError { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("sin 3") {
            Err(Error::SyntaxError { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("(1+2") {
            Err(Error::SyntaxError { .. }) => {}
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("foo(3)") {
            Err(Error::SyntaxError { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("1 @ 2") {
            Err(Error::SyntaxError { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn eval_errors() {
        let div = parse("1/x").unwrap().eval(0.0);
        assert!(matches!(div, Err(Error::EvalError { .. })));
        let log = parse("log(x)").unwrap().eval(0.0);
        assert!(matches!(log, Err(Error::EvalError { .. })));
        let sgn = parse("sgn(i)").unwrap().eval(1.0);
        assert!(matches!(sgn, Err(Error::EvalError { .. })));
        let zero_pow = parse("0^-1").unwrap().eval(0.0);
        assert!(matches!(zero_pow, Err(Error::EvalError { .. })));
    }

    #[test]
    fn sampling_rejects_non_finite() {
        let g = Grid::new(0.0, 1000.0, 2).unwrap();
        let r = parse("exp(x)").unwrap().sample(g);
        assert!(matches!(r, Err(Error::EvalError { .. })));
    }

    #[test]
    fn display_round_trips_handwritten_cases() {
        for src in [
            "1+2*3",
            "-x^2",
            "(-x)^2",
            "x^-2",
            "2^3^2",
            "sin(x)*cos(x)",
            "1-2-3",
            "6/3/2",
            "-(x+1)",
            "sgn(x)*abs(x)",
            "1+2i",
            "sqrt(x^2+1)",
            "x/(1+x^2)",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let back = parse(&printed)
                .unwrap_or_else(|err| panic!("`{printed}` failed to re-parse: {err}"));
            assert_eq!(back, e, "round trip failed: `{src}` -> `{printed}`");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0..10.0f64).prop_map(|v| Expr::Const(Complex64::new(v, 0.0))),
            (0.0..10.0f64).prop_map(|v| Expr::Const(Complex64::new(0.0, v))),
            Just(Expr::Var),
        ];
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Pow(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                inner
                    .clone()
                    .prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
                inner.prop_map(|a| Expr::Call(Func::Abs, Box::new(a))),
            ]
        })
    }

    proptest! {
        /// Printing any tree and re-parsing recovers the identical tree.
        #[test]
        fn display_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse(&printed);
            prop_assert!(back.is_ok(), "`{}` failed to parse: {:?}", printed, back.err());
            prop_assert_eq!(back.unwrap(), e, "round trip changed `{}`", printed);
        }
    }
}
