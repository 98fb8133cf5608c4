//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := integer | '-' integer | '(' '-'? integer ')'
//! atom     := number | 'pi' | func '(' expr ')' | ident | '(' expr ')'
//! func     := 'sin' | 'cos' | 'sqrt' | 'exp'
//! ```
//!
//! The parser produces raw (unsimplified) trees; whitespace is insignificant.

use super::{Expr, Func};
use crate::error::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Tok)>, ExprError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while let Some(t) = lx.next()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
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
            return Ok(Some((start, t)));
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start).map(Some);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            return Ok(Some((start, Tok::Ident(s.to_string()))));
        }
        Err(ExprError::Syntax {
            offset: start,
            message: format!("unexpected character '{}'", c as char),
        })
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok), ExprError> {
        let bytes = self.src;
        let mut integral = true;
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            integral = false;
            self.pos += 1;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                integral = false;
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&bytes[start..self.pos]).expect("ascii");
        let bad = || ExprError::Syntax {
            offset: start,
            message: format!("malformed number '{text}'"),
        };
        if integral {
            if let Ok(i) = text.parse::<i64>() {
                return Ok((start, Tok::Int(i)));
            }
        }
        let v: f64 = text.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        Ok((start, Tok::Num(v)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.i).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|(_, t)| t.clone());
        self.i += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::raw_add(&lhs, &rhs);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::raw_sub(&lhs, &rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::raw_mul(&lhs, &rhs);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Expr::raw_div(&lhs, &rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::raw_neg(&inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let n = self.exponent()?;
            if let Some(Tok::Caret) = self.peek() {
                return self.err("chained '^' is ambiguous; use parentheses");
            }
            return Ok(Expr::raw_pow(&base, n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ExprError> {
        let paren = matches!(self.peek(), Some(Tok::LParen));
        if paren {
            self.bump();
        }
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if neg {
            self.bump();
        }
        let n = match self.peek() {
            Some(Tok::Int(i)) => {
                let i = *i;
                self.bump();
                i32::try_from(i).or_else(|_| self.err("exponent out of range"))?
            }
            _ => return self.err("expected integer exponent"),
        };
        if paren {
            match self.peek() {
                Some(Tok::RParen) => {
                    self.bump();
                }
                _ => return self.err("unbalanced parenthesis"),
            }
        }
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(i)) => Ok(Expr::constant(i as f64)),
            Some(Tok::Num(v)) => Ok(Expr::constant(v)),
            Some(Tok::Ident(name)) => {
                if let Some(Tok::LParen) = self.peek() {
                    let f = Func::from_name(&name).ok_or(ExprError::UnknownFunction {
                        name: name.clone(),
                        offset: at,
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.close()?;
                    return Ok(Expr::raw_func(f, &arg));
                }
                if name == "pi" {
                    return Ok(Expr::constant(std::f64::consts::PI));
                }
                if Func::from_name(&name).is_some() {
                    return Err(ExprError::Syntax {
                        offset: at,
                        message: format!("function '{name}' requires an argument"),
                    });
                }
                Ok(Expr::var(&name))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Some(t) => Err(ExprError::Syntax {
                offset: at,
                message: format!("unexpected token {t:?}"),
            }),
            None => Err(ExprError::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn close(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.bump();
                Ok(())
            }
            _ => self.err("unbalanced parenthesis"),
        }
    }
}

/// Parse an expression. Errors carry the byte offset of the offending token.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser {
        toks,
        i: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.i < p.toks.len() {
        return match p.peek() {
            Some(Tok::RParen) => p.err("unbalanced parenthesis"),
            _ => p.err("unexpected trailing input"),
        };
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = parse("2*(u").unwrap_err();
        assert_eq!(
            err,
            ExprError::Syntax {
                offset: 4,
                message: "unbalanced parenthesis".into()
            }
        );
        assert!(matches!(
            parse("u)").unwrap_err(),
            ExprError::Syntax { offset: 1, .. }
        ));
    }

    #[test]
    fn unknown_function() {
        assert_eq!(
            parse("1 + tan(u)").unwrap_err(),
            ExprError::UnknownFunction {
                name: "tan".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn numbers_and_exponents() {
        let e = parse("1.5e-3*u^(-2) + 2^3").unwrap();
        assert_eq!(e.to_string(), "0.0015*u^(-2) + 2^3");
        assert!(parse("u^2^3").is_err());
        assert!(parse("u^x").is_err());
        assert!(parse("").is_err());
        assert!(parse("1e999").is_err());
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-u^2").unwrap();
        assert_eq!(e.structure(), "Neg(Pow(Var u, 2))");
    }

    #[test]
    fn pi_is_a_constant() {
        assert_eq!(parse("pi").unwrap(), Expr::constant(std::f64::consts::PI));
    }
}
