//! Laurent-series literals.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := ['-'] factor ('*' factor)*
//! factor := atom ['^' ['-'] int]
//! atom   := int | 'a' | 'u' | '(' expr ')' | 'O' '(' expr ')'
//! ```
//!
//! `a` is the generator of `F_q` over `F_p` (only when `q > p`), `u` the
//! uniformizer. Negative exponents need an invertible base, e.g. `u^-2`.
//! `O(u^k)` marks absolute precision `k`; without it a literal is exact.
//! Whitespace is ignored. Example: `(a+1)*u^-1 + a*u^2 + O(u^8)`.

use kisin_core::series::EXACT;
use kisin_core::{Field, Fq, LaurentSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tok {
    Int(i64),
    A,
    U,
    Big,
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '0'..='9' => {
                let mut v: i64 = 0;
                while let Some(&d) = chars.peek() {
                    let Some(x) = d.to_digit(10) else { break };
                    v = v.checked_mul(10).and_then(|v| v.checked_add(x as i64)).ok_or("integer literal too large")?;
                    chars.next();
                }
                out.push(Tok::Int(v));
            }
            _ => {
                chars.next();
                out.push(match c {
                    'a' => Tok::A,
                    'u' => Tok::U,
                    'O' => Tok::Big,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    other => return Err(format!("unexpected character {other:?}")),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    field: &'a Field,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn eat(&mut self, t: Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(format!("expected {t:?} at token {}", self.pos))
        }
    }

    fn expr(&mut self) -> Result<LaurentSeries, String> {
        let mut acc = self.term()?;
        loop {
            // a `-` is left for `term`, which reads it as negation
            if self.eat(Tok::Plus) || self.peek() == Some(Tok::Minus) {
                let t = self.term()?;
                acc = acc.add(&t, self.field);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LaurentSeries, String> {
        let negate = self.eat(Tok::Minus);
        let mut acc = self.factor()?;
        while self.eat(Tok::Star) {
            let f = self.factor()?;
            acc = acc.mul(&f, self.field);
        }
        Ok(if negate { acc.neg(self.field) } else { acc })
    }

    fn factor(&mut self) -> Result<LaurentSeries, String> {
        let base = self.atom()?;
        if !self.eat(Tok::Caret) {
            return Ok(base);
        }
        let neg = self.eat(Tok::Minus);
        let Some(Tok::Int(k)) = self.peek() else { return Err("expected an integer exponent".into()) };
        self.pos += 1;
        let mut out = LaurentSeries::one();
        for _ in 0..k {
            out = out.mul(&base, self.field);
        }
        if neg {
            if !(base.is_exact() && base.coeffs().len() == 1) {
                return Err("negative exponents need an exact monomial base".into());
            }
            out = out.inv(self.field).map_err(|e| e.to_string())?;
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<LaurentSeries, String> {
        let t = self.peek().ok_or("unexpected end of literal")?;
        self.pos += 1;
        match t {
            Tok::Int(n) => Ok(LaurentSeries::monomial(self.field.from_int(n), 0)),
            Tok::A => {
                if self.field.degree() == 1 {
                    return Err("the generator `a` only exists when q > p".into());
                }
                Ok(LaurentSeries::monomial(self.field.generator(), 0))
            }
            Tok::U => Ok(LaurentSeries::u_pow(1)),
            Tok::Open => {
                let v = self.expr()?;
                self.expect(Tok::Close)?;
                Ok(v)
            }
            Tok::Big => {
                self.expect(Tok::Open)?;
                let v = self.expr()?;
                self.expect(Tok::Close)?;
                let mut terms = v.terms();
                match (terms.next(), terms.next()) {
                    (Some((k, c)), None) if c == Fq::ONE && v.is_exact() => Ok(LaurentSeries::zero(k)),
                    _ => Err("O(...) takes a single power of u".into()),
                }
            }
            other => Err(format!("unexpected {other:?}")),
        }
    }
}

/// Parses a literal over `field`.
pub fn parse_series(s: &str, field: &Field) -> Result<LaurentSeries, String> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err("empty literal".into());
    }
    let mut p = Parser { toks, pos: 0, field };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input at token {}", p.pos));
    }
    Ok(v)
}

/// Canonical text of a series; `parse_series` inverts it.
pub fn format_series(s: &LaurentSeries, field: &Field) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (k, c) in s.terms() {
        let coef = field.format(c);
        let coef = if coef.contains('+') { format!("({coef})") } else { coef };
        parts.push(match (k, coef.as_str()) {
            (0, _) => coef,
            (1, "1") => "u".into(),
            (_, "1") => format!("u^{k}"),
            (1, _) => format!("{coef}*u"),
            _ => format!("{coef}*u^{k}"),
        });
    }
    if s.prec() < EXACT {
        parts.push(format!("O(u^{})", s.prec()));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_over_prime_field() {
        let f = Field::new(3, 1).unwrap();
        let s = parse_series("2*u^-1 + 1 - u^2", &f).unwrap();
        assert_eq!(s.terms().collect::<Vec<_>>(), vec![(-1, Fq(2)), (0, Fq(1)), (2, Fq(2))]);
        assert!(s.is_exact());
        assert_eq!(format_series(&s, &f), "2*u^-1 + 1 + 2*u^2");
        assert!(parse_series("a*u", &f).is_err());
        assert!(parse_series("u^-1 + ", &f).is_err());
    }

    #[test]
    fn literals_with_generator_and_precision() {
        let f = Field::new(2, 2).unwrap();
        let text = "(a+1)*u^-1 + a*u^2 + O(u^8)";
        let s = parse_series(text, &f).unwrap();
        assert_eq!(s.prec(), 8);
        assert_eq!(format_series(&s, &f), text);
        assert_eq!(parse_series(&format_series(&s, &f), &f).unwrap(), s);
        let zero = parse_series("O(u^3)", &f).unwrap();
        assert!(zero.is_zero_at_prec());
        assert_eq!(format_series(&zero, &f), "O(u^3)");
    }

    #[test]
    fn products_and_powers() {
        let f = Field::new(2, 1).unwrap();
        // (1+u)^2 = 1 + u^2 in characteristic 2
        let s = parse_series("(1 + u)^2", &f).unwrap();
        assert_eq!(format_series(&s, &f), "1 + u^2");
        assert!(parse_series("(1+u)^-1", &f).is_err());
        assert_eq!(format_series(&parse_series("0", &f).unwrap(), &f), "0");
    }
}
