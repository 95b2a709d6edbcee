//! Parser for the amplitude/position expression language:
//! integers, `c(m)` for 2cos(pi/m), unary minus, `+ - * /` and parentheses.

use num_bigint::BigInt;
use thiserror::Error;

use super::{AlgebraicReal, ArithError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at column {column}")]
pub struct ExprError {
    /// 1-based column within the expression text.
    pub column: usize,
    pub message: String,
}

impl ExprError {
    fn new(pos: usize, message: impl Into<String>) -> ExprError {
        ExprError {
            column: pos + 1,
            message: message.into(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ExprError::new(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn arith(&self, at: usize, r: Result<AlgebraicReal, ArithError>) -> Result<AlgebraicReal, ExprError> {
        r.map_err(|e| ExprError::new(at, e.to_string()))
    }

    fn expr(&mut self) -> Result<AlgebraicReal, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    let at = self.pos;
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = self.arith(at, acc.try_add(&rhs))?;
                }
                Some(b'-') => {
                    let at = self.pos;
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = self.arith(at, acc.try_sub(&rhs))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<AlgebraicReal, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    let at = self.pos;
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.arith(at, acc.try_mul(&rhs))?;
                }
                Some(b'/') => {
                    let at = self.pos;
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.arith(at, acc.try_div(&rhs))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<AlgebraicReal, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn integer(&mut self) -> Result<BigInt, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ExprError::new(start, "expected integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn atom(&mut self) -> Result<AlgebraicReal, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(b'c') => {
                let at = self.pos;
                self.pos += 1;
                self.expect(b'(')?;
                let m_at = self.pos;
                let m = self.integer()?;
                self.expect(b')')?;
                let m: u32 = m
                    .try_into()
                    .map_err(|_| ExprError::new(m_at, "bond order too large"))?;
                if m < 2 {
                    return Err(ExprError::new(m_at, "c(m) requires m >= 2"));
                }
                self.arith(at, AlgebraicReal::try_two_cos(m))
            }
            Some(c) if c.is_ascii_digit() => Ok(AlgebraicReal::from_integer(self.integer()?)),
            Some(c) => Err(ExprError::new(self.pos, format!("unexpected '{}'", c as char))),
            None => Err(ExprError::new(self.pos, "unexpected end of expression")),
        }
    }
}

/// Parses one expression.
pub fn parse_expr(text: &str) -> Result<AlgebraicReal, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ExprError::new(p.pos, "trailing input"));
    }
    Ok(v)
}

/// Splits a comma-separated list of expressions, respecting parentheses.
pub fn parse_expr_list(text: &str) -> Result<Vec<AlgebraicReal>, ExprError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b',' if depth == 0 => {
                out.push(parse_expr(&text[start..i]).map_err(|e| shift(e, start))?);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(parse_expr(&text[start..]).map_err(|e| shift(e, start))?);
    Ok(out)
}

fn shift(mut e: ExprError, by: usize) -> ExprError {
    e.column += by;
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> AlgebraicReal {
        AlgebraicReal::from_ratio(n, d)
    }

    #[test]
    fn rationals_and_precedence() {
        assert_eq!(parse_expr("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_expr("1+2*3").unwrap(), q(7, 1));
        assert_eq!(parse_expr("(1+2)*3").unwrap(), q(9, 1));
        assert_eq!(parse_expr("-3/4").unwrap(), q(-3, 4));
        assert_eq!(parse_expr("2-3-4").unwrap(), q(-5, 1));
        assert_eq!(parse_expr(" 7 / 2 / 7 ").unwrap(), q(1, 2));
    }

    #[test]
    fn cosine_constants() {
        assert_eq!(parse_expr("c(2)").unwrap(), q(0, 1));
        assert_eq!(parse_expr("c(3)").unwrap(), q(1, 1));
        assert_eq!(parse_expr("c(4)*c(4)").unwrap(), q(2, 1));
        let phi = parse_expr("c(5)").unwrap();
        assert_eq!(parse_expr("c(5)*c(5)-c(5)").unwrap(), q(1, 1));
        assert_eq!(phi, AlgebraicReal::two_cos(5));
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_expr("1+").unwrap_err();
        assert_eq!(e.column, 3);
        let e = parse_expr("c(1)").unwrap_err();
        assert_eq!(e.column, 3);
        let e = parse_expr("1/0").unwrap_err();
        assert_eq!(e.column, 2);
        let e = parse_expr("2 x").unwrap_err();
        assert_eq!(e.column, 3);
    }

    #[test]
    fn lists() {
        let v = parse_expr_list("1,(1+c(5))/4,-2").unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[2], q(-2, 1));
        let e = parse_expr_list("1,2,x").unwrap_err();
        assert_eq!(e.column, 5);
    }

    #[test]
    fn display_round_trips() {
        for s in ["1/2+3/4*c(5)", "c(7)*c(7)-1/3*c(7)+2", "-c(12)", "c(4)/3-c(20)"] {
            let v = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&v.to_string()).unwrap(), v, "{s} -> {v}");
        }
    }
}
