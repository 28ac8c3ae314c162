//! Text form: `c * x<i>^<k>` products joined by `+`/`-`, variables `x1…xn`.
//! `*` and `^1` are optional and whitespace is ignored.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::{ExponentVector, PolyError, SparsePolynomial};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

type Term = (f64, Vec<(usize, u32)>);

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<f64, PolyError> {
        let start = self.pos;
        let mut seen = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            seen += self.digits();
        }
        if seen == 0 {
            self.pos = start;
            return self.err("expected a number");
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                self.err(format!("invalid number '{text}'"))
            }
        }
    }

    fn integer(&mut self) -> Result<u32, PolyError> {
        self.skip_ws();
        let start = self.pos;
        if self.digits() == 0 {
            return self.err("expected a nonnegative integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<u32>().or_else(|_| {
            self.pos = start;
            self.err("integer out of range")
        })
    }

    fn variable(&mut self) -> Result<(usize, u32), PolyError> {
        // at 'x'
        self.pos += 1;
        let start = self.pos;
        if self.digits() == 0 {
            return self.err("expected variable index after 'x'");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let index: usize = match text.parse() {
            Ok(i) if i >= 1 => i,
            _ => {
                self.pos = start;
                return self.err("variables are numbered from x1");
            }
        };
        let mut power = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            power = self.integer()?;
        }
        Ok((index - 1, power))
    }

    fn term(&mut self) -> Result<Term, PolyError> {
        let mut coef = 1.0;
        let mut vars = Vec::new();
        let mut factors = 0;
        loop {
            match self.peek() {
                Some(b'x') => vars.push(self.variable()?),
                Some(c) if c.is_ascii_digit() || c == b'.' => coef *= self.number()?,
                _ if factors == 0 => return self.err("expected a term"),
                _ => return self.err("expected a factor after '*'"),
            }
            factors += 1;
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                }
                Some(b'x') => {}
                Some(c) if c.is_ascii_digit() || c == b'.' => {}
                _ => break,
            }
        }
        Ok((coef, vars))
    }

    fn polynomial(&mut self) -> Result<Vec<Term>, PolyError> {
        let mut out = Vec::new();
        if self.peek().is_none() {
            return self.err("empty polynomial");
        }
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    1.0
                }
                Some(b'-') => {
                    self.pos += 1;
                    -1.0
                }
                Some(_) if first => 1.0,
                Some(c) => return self.err(format!("unexpected '{}'", c as char)),
            };
            let (c, vars) = self.term()?;
            out.push((sign * c, vars));
            first = false;
        }
        Ok(out)
    }
}

/// Parses the text form. With `n = None` the variable count is the largest
/// index that occurs (at least 1).
pub fn parse_polynomial(s: &str, n: Option<usize>) -> Result<SparsePolynomial, PolyError> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
    };
    let terms = p.polynomial()?;
    let max_index = terms
        .iter()
        .flat_map(|(_, v)| v.iter().map(|(i, _)| i + 1))
        .max()
        .unwrap_or(0);
    let n = match n {
        Some(n) if max_index > n => {
            return Err(PolyError::Syntax {
                pos: 0,
                msg: format!("variable x{max_index} exceeds declared count {n}"),
            })
        }
        Some(n) => n,
        None => max_index.max(1),
    };
    SparsePolynomial::from_terms(
        n,
        terms.into_iter().map(|(c, vars)| {
            let mut alpha = vec![0u32; n];
            for (i, k) in vars {
                alpha[i] += k;
            }
            (ExponentVector::new(alpha), c)
        }),
    )
}

impl FromStr for SparsePolynomial {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, PolyError> {
        parse_polynomial(s, None)
    }
}

/// Ascending total degree; within a degree, larger leading exponents first.
fn display_order(a: &ExponentVector, b: &ExponentVector) -> Ordering {
    a.order().cmp(&b.order()).then_with(|| b.cmp(a))
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by(|(a, _), (b, _)| display_order(a, b));
        for (k, (alpha, c)) in terms.into_iter().enumerate() {
            let sign = if c < 0.0 { "-" } else { "+" };
            if k == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let mono: Vec<String> = alpha
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_example_polynomial() {
        let f = parse_polynomial("5*x1 + 6*x2 + x1^3 - x2^2", None).unwrap();
        assert_eq!(f.n(), 2);
        assert_eq!(f.coefficient_of(&[1, 0]), 5.0);
        assert_eq!(f.coefficient_of(&[0, 1]), 6.0);
        assert_eq!(f.coefficient_of(&[3, 0]), 1.0);
        assert_eq!(f.coefficient_of(&[0, 2]), -1.0);
        assert_eq!(f.len(), 4);
    }

    #[test]
    fn optional_star_and_power() {
        let a = parse_polynomial("2 x1 x2^1 - 0.5x3", None).unwrap();
        let b = parse_polynomial("2*x1*x2 - 0.5*x3", None).unwrap();
        assert_eq!(a, b);
        let c = parse_polynomial("x1*x1", None).unwrap();
        assert_eq!(c.coefficient_of(&[2]), 1.0);
        let d = parse_polynomial("1.5e-3 * x1 - 2E2", None).unwrap();
        assert_eq!(d.coefficient_of(&[1]), 1.5e-3);
        assert_eq!(d.constant_term(), -200.0);
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(
            parse_polynomial("", None),
            Err(PolyError::Syntax { pos: 0, .. })
        ));
        assert!(matches!(
            parse_polynomial("   ", None),
            Err(PolyError::Syntax { .. })
        ));
        match parse_polynomial("x1 + * x2", None) {
            Err(PolyError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_polynomial("x0", None).is_err());
        assert!(parse_polynomial("x1 + y", None).is_err());
        assert!(parse_polynomial("x3", Some(2)).is_err());
        assert!(parse_polynomial("x1^", None).is_err());
    }

    #[test]
    fn formats_canonically() {
        let f = parse_polynomial("x1^3 - x2^2 + 6*x2 + 5*x1", None).unwrap();
        assert_eq!(f.to_string(), "5*x1 + 6*x2 - x2^2 + x1^3");
        assert_eq!(SparsePolynomial::zero(3).to_string(), "0");
        let g = parse_polynomial("-x1 - 7", None).unwrap();
        assert_eq!(g.to_string(), "-7 - x1");
    }

    fn arb_poly() -> impl Strategy<Value = SparsePolynomial> {
        (1usize..4).prop_flat_map(|n| {
            prop::collection::vec((prop::collection::vec(0u32..5, n), -100.0f64..100.0), 0..8)
                .prop_map(move |ts| {
                    SparsePolynomial::from_terms(
                        n,
                        ts.into_iter().map(|(a, c)| (ExponentVector::new(a), c)),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(p in arb_poly()) {
            let s = p.to_string();
            let q = parse_polynomial(&s, Some(p.n())).unwrap();
            prop_assert_eq!(&q, &p);
            prop_assert_eq!(q.to_string(), s);
        }
    }
}
