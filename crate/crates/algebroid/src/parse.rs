//! Parser for the textual scalar grammar.
//!
//! The grammar accepted by [`parse_scalar`] covers everything
//! [`Scalar::render`] emits and the handwritten structure files use:
//!
//! ```text
//! expr    := term  { ('+' | '-') term }
//! term    := unary { ('*' | '/') unary }
//! unary   := { '-' | '+' } power
//! power   := atom [ '^' INT ]
//! atom    := INT | IDENT | '(' expr ')' | 'exp' '(' band ')'
//! band    := [ '-' | '+' ] [ INT '*' ] LINEVAR
//! ```
//!
//! * Integer literals are unbounded; rationals are written `p/q` through
//!   the division operator.
//! * `IDENT` must be one of the declared variable names; anything else is
//!   an unknown-variable error carrying the offending position.
//! * `exp(k*t)` requires an integer `k` and the line variable name in the
//!   trailing slot: `exp(x*t)` or `exp(2*x)` are syntax errors, and any
//!   exponential is an error when the context has no line variable.
//! * Division is exact ring division: the divisor must be nonzero and
//!   exponential-free, otherwise parsing fails with the corresponding
//!   arithmetic error.
//! * Whitespace (spaces, tabs, newlines) is insignificant; errors report
//!   1-based line and column of the offending token.
//!
//! Parsing and rendering are mutually inverse on canonical forms: for any
//! scalar `s`, `parse_scalar(s.render(vars), vars, has_t) == s`.

use num::BigInt;

use crate::error::{Error, Result};
use crate::scalar::{Ctx, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(src: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let n = BigInt::parse_bytes(digits.as_bytes(), 10).expect("digits");
                toks.push((Tok::Int(n), tline, tcol));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(name), tline, tcol));
            }
            '+' => {
                bump(&mut chars);
                toks.push((Tok::Plus, tline, tcol));
            }
            '-' => {
                bump(&mut chars);
                toks.push((Tok::Minus, tline, tcol));
            }
            '*' => {
                bump(&mut chars);
                toks.push((Tok::Star, tline, tcol));
            }
            '/' => {
                bump(&mut chars);
                toks.push((Tok::Slash, tline, tcol));
            }
            '^' => {
                bump(&mut chars);
                toks.push((Tok::Caret, tline, tcol));
            }
            '(' => {
                bump(&mut chars);
                toks.push((Tok::LParen, tline, tcol));
            }
            ')' => {
                bump(&mut chars);
                toks.push((Tok::RParen, tline, tcol));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &(Tok, usize, usize) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, usize, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<()> {
        let (tok, line, col) = self.next();
        if &tok == want {
            Ok(())
        } else {
            Err(Error::Parse {
                line,
                col,
                msg: format!("expected {}, found {}", want.describe(), tok.describe()),
            })
        }
    }
}

struct Parser<'a, S: AsRef<str>> {
    lx: Lexer,
    vars: &'a [S],
    ctx: Ctx,
}

impl<'a, S: AsRef<str>> Parser<'a, S> {
    fn expr(&mut self) -> Result<Scalar> {
        let mut acc = self.term()?;
        loop {
            match self.lx.peek().0 {
                Tok::Plus => {
                    self.lx.next();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.lx.next();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = self.unary()?;
        loop {
            match self.lx.peek().0 {
                Tok::Star => {
                    self.lx.next();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    let (_, line, col) = *self.lx.peek();
                    self.lx.next();
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs).map_err(|e| match e {
                        Error::DivisionByZero | Error::ExponentialDivisor => Error::Parse {
                            line,
                            col,
                            msg: e.to_string(),
                        },
                        other => other,
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar> {
        let mut negate = false;
        loop {
            match self.lx.peek().0 {
                Tok::Minus => {
                    self.lx.next();
                    negate = !negate;
                }
                Tok::Plus => {
                    self.lx.next();
                }
                _ => break,
            }
        }
        let v = self.power()?;
        Ok(if negate { v.neg() } else { v })
    }

    fn power(&mut self) -> Result<Scalar> {
        let base = self.atom()?;
        if self.lx.peek().0 == Tok::Caret {
            self.lx.next();
            let (tok, line, col) = self.lx.next();
            let Tok::Int(n) = tok else {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("expected integer exponent after `^`, found {}", tok.describe()),
                });
            };
            let e: u32 = n.try_into().map_err(|_| Error::Parse {
                line,
                col,
                msg: "exponent out of range".into(),
            })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Scalar> {
        let (tok, line, col) = self.lx.next();
        match tok {
            Tok::Int(n) => Ok(Scalar::from_rat(
                self.ctx,
                num::BigRational::from_integer(n),
            )),
            Tok::LParen => {
                let inner = self.expr()?;
                self.lx.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "exp" => self.exp_atom(line, col),
            Tok::Ident(name) => {
                match self.vars.iter().position(|v| v.as_ref() == name) {
                    Some(i) => Ok(Scalar::var(self.ctx, i)),
                    None => Err(Error::Parse {
                        line,
                        col,
                        msg: format!("unknown variable `{name}`"),
                    }),
                }
            }
            other => Err(Error::Parse {
                line,
                col,
                msg: format!("expected a value, found {}", other.describe()),
            }),
        }
    }

    /// Parses the `( band )` tail of an exponential, having already
    /// consumed the `exp` identifier at (`line`, `col`).
    fn exp_atom(&mut self, line: usize, col: usize) -> Result<Scalar> {
        if !self.ctx.has_t {
            return Err(Error::Parse {
                line,
                col,
                msg: "exponential requires a line variable in the context".into(),
            });
        }
        let line_name = self.vars[self.ctx.nvars - 1].as_ref();
        self.lx.expect(&Tok::LParen)?;
        let mut sign = 1i64;
        loop {
            match self.lx.peek().0 {
                Tok::Minus => {
                    self.lx.next();
                    sign = -sign;
                }
                Tok::Plus => {
                    self.lx.next();
                }
                _ => break,
            }
        }
        let (tok, tl, tc) = self.lx.next();
        let k: i64 = match tok {
            Tok::Int(n) => {
                let k: i64 = (&n).try_into().map_err(|_| Error::Parse {
                    line: tl,
                    col: tc,
                    msg: "exponential band index out of range".into(),
                })?;
                self.lx.expect(&Tok::Star)?;
                let (vtok, vl, vc) = self.lx.next();
                match vtok {
                    Tok::Ident(ref v) if v == line_name => {}
                    other => {
                        return Err(Error::Parse {
                            line: vl,
                            col: vc,
                            msg: format!(
                                "malformed exponential: expected the line variable `{line_name}`, found {}",
                                other.describe()
                            ),
                        });
                    }
                }
                k
            }
            Tok::Ident(ref v) if v == line_name => 1,
            other => {
                return Err(Error::Parse {
                    line: tl,
                    col: tc,
                    msg: format!(
                        "malformed exponential: expected `k*{line_name}` with integer k, found {}",
                        other.describe()
                    ),
                });
            }
        };
        self.lx.expect(&Tok::RParen)?;
        Ok(Scalar::exp_t(self.ctx, sign * k))
    }
}

/// Parse a scalar from source text, over the ordered variable names `vars`.
/// When `has_t` is set, the **last** name is the line variable and
/// exponentials `exp(k*t)` are admitted.
pub fn parse_scalar<S: AsRef<str>>(src: &str, vars: &[S], has_t: bool) -> Result<Scalar> {
    let ctx = if has_t {
        Ctx::with_line(vars.len())
    } else {
        Ctx::new(vars.len())
    };
    let lx = lex(src)?;
    let mut p = Parser { lx, vars, ctx };
    let value = p.expr()?;
    let (tok, line, col) = p.lx.next();
    if tok != Tok::Eof {
        return Err(Error::Parse {
            line,
            col,
            msg: format!("unexpected {} after expression", tok.describe()),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    const XYT: [&str; 3] = ["x", "y", "t"];

    #[test]
    fn parses_polynomials_and_rationals() {
        let s = parse_scalar("3/2*x^2 - y + 1", &["x", "y"], false).unwrap();
        assert_eq!(s.render(&["x", "y"]), "3/2*x^2 - y + 1");
    }

    #[test]
    fn parses_exponentials_in_all_spellings() {
        let a = parse_scalar("exp(-2*t)", &XYT, true).unwrap();
        let b = parse_scalar("exp(-t)", &XYT, true).unwrap();
        let c = parse_scalar("exp(t)", &XYT, true).unwrap();
        assert_eq!(a, b.mul(&b));
        assert!(b.mul(&c).is_one());
    }

    #[test]
    fn malformed_exponential_argument_is_a_syntax_error() {
        let err = parse_scalar("exp(x*t)", &XYT, true).unwrap_err();
        match err {
            Error::Parse { line: 1, col, ref msg } => {
                assert_eq!(col, 5);
                assert!(msg.contains("malformed exponential"), "got: {msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn exponential_without_line_variable_is_an_error() {
        let err = parse_scalar("exp(2*t)", &["x", "y"], false).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn unknown_variable_reports_position() {
        let err = parse_scalar("x +\n  z*2", &["x", "y"], false).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                col: 3,
                msg: "unknown variable `z`".into()
            }
        );
    }

    #[test]
    fn truncated_input_reports_position() {
        let err = parse_scalar("1 +", &["x"], false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, col: 4, .. }), "got {err:?}");
    }

    #[test]
    fn division_by_zero_in_source_is_a_parse_error() {
        let err = parse_scalar("1/(x - x)", &["x"], false).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "got {err:?}");
    }

    #[test]
    fn unary_minus_binds_atoms() {
        let s = parse_scalar("-x^2 + - -y", &["x", "y"], false).unwrap();
        assert_eq!(s.render(&["x", "y"]), "-x^2 + y");
    }

    #[test]
    fn render_parse_round_trip() {
        let cases = [
            "x^2*y - 3*x + 1/2",
            "(x + 1)/x^2",
            "-1/x^2",
            "(x + 1)*exp(-2*t) - y",
            "exp(3*t)/(x + 1)",
            "0",
        ];
        for src in cases {
            let s = parse_scalar(src, &XYT, true).unwrap();
            let rendered = s.render(&XYT);
            let back = parse_scalar(&rendered, &XYT, true).unwrap();
            assert_eq!(s, back, "round trip failed for {src} -> {rendered}");
        }
    }
}
