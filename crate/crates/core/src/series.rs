//! Truncated Laurent series over `F_q` with absolute `u`-adic precision.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{precision, Result};
use crate::field::{FqContext, Fq};

/// Precision value standing for "known exactly".
pub const EXACT: i64 = i64::MAX / 4;

/// Relative precision given to the inverse of an exact series that is not a
/// monomial (its expansion is infinite, so some truncation is unavoidable).
pub const EXACT_INVERSE_RELATIVE_PRECISION: i64 = 64;

/// Saturating addition on precisions, keeping `EXACT` absorbing.
#[inline]
pub fn prec_add(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        (a + b).min(EXACT)
    }
}

#[inline]
fn prec_mul(a: i64, k: i64) -> i64 {
    if a >= EXACT {
        EXACT
    } else {
        a.saturating_mul(k).min(EXACT)
    }
}

/// `Σ c_k u^k` known modulo `u^prec`.
///
/// Stored as the first certified nonzero coefficient index `val` followed by
/// the coefficients up to the last nonzero one; coefficients between the
/// stored tail and `prec` are zero. A series whose known coefficients all
/// vanish is "zero at precision" and has `val == prec`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    val: i64,
    coeffs: Vec<Fq>,
    prec: i64,
}

impl LaurentSeries {
    pub fn zero(prec: i64) -> Self {
        LaurentSeries { val: prec, coeffs: Vec::new(), prec }
    }

    pub fn exact_zero() -> Self {
        Self::zero(EXACT)
    }

    pub fn one() -> Self {
        Self::monomial(Fq::ONE, 0)
    }

    /// Exact `c·u^k`.
    pub fn monomial(c: Fq, k: i64) -> Self {
        if c.is_zero() {
            return Self::exact_zero();
        }
        LaurentSeries { val: k, coeffs: vec![c], prec: EXACT }
    }

    /// Exact `u^k`.
    pub fn u_pow(k: i64) -> Self {
        Self::monomial(Fq::ONE, k)
    }

    /// Series with coefficient `coeffs[i]` at `u^{start+i}`, known mod `u^prec`.
    /// Coefficients at or beyond `prec` are dropped.
    pub fn from_coeffs(start: i64, coeffs: Vec<Fq>, prec: i64) -> Self {
        let keep = if prec >= EXACT { coeffs.len() } else { (prec - start).clamp(0, coeffs.len() as i64) as usize };
        let mut coeffs = coeffs;
        coeffs.truncate(keep);
        Self::normalized(start, coeffs, prec)
    }

    fn normalized(start: i64, mut coeffs: Vec<Fq>, prec: i64) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Self::zero(prec),
            Some(0) => LaurentSeries { val: start, coeffs, prec },
            Some(k) => LaurentSeries { val: start + k as i64, coeffs: coeffs.split_off(k), prec },
        }
    }

    /// Absolute precision: the series is known modulo `u^prec`.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    /// Index of the first possibly nonzero coefficient (`prec` when zero).
    pub fn val(&self) -> i64 {
        self.val
    }

    /// Certified valuation, `None` when zero at the stored precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Zero at the stored precision (possibly nonzero beyond it).
    pub fn is_zero_at_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.is_exact()
    }

    /// Lower bound on the true valuation.
    pub fn val_lower_bound(&self) -> i64 {
        self.val
    }

    /// Stored nonzero-led coefficient run starting at `val`.
    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    /// Index one past the last stored coefficient.
    pub fn end(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    /// Coefficient of `u^k`; `None` if `k` is beyond the known precision.
    pub fn coeff(&self, k: i64) -> Option<Fq> {
        if k >= self.prec {
            return None;
        }
        if k < self.val || k >= self.end() {
            return Some(Fq::ZERO);
        }
        Some(self.coeffs[(k - self.val) as usize])
    }

    /// Nonzero terms `(exponent, coefficient)` in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fq)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, &c)| (self.val + i as i64, c))
    }

    /// Forgets everything at and beyond `u^prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::from_coeffs(self.val, self.coeffs.clone(), prec)
    }

    /// Same coefficients, precision set to `prec`, which must not exceed
    /// what is known unless the caller knows the value is exact.
    pub fn with_prec(&self, prec: i64) -> Self {
        Self::from_coeffs(self.val, self.coeffs.clone(), prec)
    }

    /// Terms of exponent `< k` as a series with precision `k` clipped to ours.
    pub fn head(&self, k: i64) -> Self {
        self.truncate(k)
    }

    /// Multiplication by the exact monomial `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            val: prec_add(self.val, k),
            coeffs: self.coeffs.clone(),
            prec: prec_add(self.prec, k),
        }
    }

    pub fn neg(&self, f: &FqContext) -> Self {
        LaurentSeries { val: self.val, coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(), prec: self.prec }
    }

    pub fn scale(&self, c: Fq, f: &FqContext) -> Self {
        if c.is_zero() {
            return Self::exact_zero();
        }
        LaurentSeries { val: self.val, coeffs: self.coeffs.iter().map(|&x| f.mul(x, c)).collect(), prec: self.prec }
    }

    pub fn add(&self, other: &Self, f: &FqContext) -> Self {
        let prec = self.prec.min(other.prec);
        let (a, b) = (self.coeffs.is_empty(), other.coeffs.is_empty());
        if a && b {
            return Self::zero(prec);
        }
        if a {
            return other.truncate(prec);
        }
        if b {
            return self.truncate(prec);
        }
        let lo = self.val.min(other.val);
        let hi = self.end().max(other.end()).min(prec);
        if hi <= lo {
            return Self::zero(prec);
        }
        let mut out = vec![Fq::ZERO; (hi - lo) as usize];
        for (src, start) in [(&self.coeffs, self.val), (&other.coeffs, other.val)] {
            for (i, &c) in src.iter().enumerate() {
                let k = start + i as i64;
                if k >= hi {
                    break;
                }
                let slot = &mut out[(k - lo) as usize];
                *slot = f.add(*slot, c);
            }
        }
        Self::normalized(lo, out, prec)
    }

    pub fn sub(&self, other: &Self, f: &FqContext) -> Self {
        self.add(&other.neg(f), f)
    }

    pub fn mul(&self, other: &Self, f: &FqContext) -> Self {
        let prec = prec_add(self.prec, other.val).min(prec_add(other.prec, self.val));
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero(prec);
        }
        let lo = self.val + other.val;
        let full = self.coeffs.len() + other.coeffs.len() - 1;
        let len = if prec >= EXACT { full } else { ((prec - lo).max(0) as usize).min(full) };
        let mut out = vec![Fq::ZERO; len];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if i >= len || x.is_zero() {
                continue;
            }
            for (j, &y) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !y.is_zero() {
                    out[i + j] = f.add(out[i + j], f.mul(x, y));
                }
            }
        }
        Self::normalized(lo, out, prec)
    }

    /// Multiplicative inverse; the series must be certified nonzero.
    pub fn inv(&self, f: &FqContext) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(precision("cannot invert a series that is zero at its precision"));
        }
        let v = self.val;
        let rel = if self.is_exact() {
            if self.coeffs.len() == 1 {
                return Ok(Self::monomial(f.inv(self.coeffs[0]), -v));
            }
            EXACT_INVERSE_RELATIVE_PRECISION
        } else {
            self.prec - v
        };
        let n = rel as usize;
        let c0inv = f.inv(self.coeffs[0]);
        let mut b = vec![Fq::ZERO; n];
        b[0] = c0inv;
        for k in 1..n {
            let mut acc = Fq::ZERO;
            for i in 1..=k.min(self.coeffs.len() - 1) {
                acc = f.add(acc, f.mul(self.coeffs[i], b[k - i]));
            }
            b[k] = f.neg(f.mul(c0inv, acc));
        }
        Ok(Self::normalized(-v, b, -v + rel))
    }

    /// The unit `u^{-val}·s`; requires a certified valuation.
    pub fn unit_part(&self) -> Result<Self> {
        let v = self.valuation().ok_or_else(|| precision("unit part of an uncertified series"))?;
        Ok(self.shift(-v))
    }

    /// `s(u^k)`: Frobenius substitution for `k = p`, tame base change otherwise.
    /// Coefficients are not touched.
    pub fn substitute_power(&self, k: i64) -> Self {
        assert!(k >= 1);
        if self.coeffs.is_empty() {
            return Self::zero(prec_mul(self.prec, k));
        }
        let mut out = vec![Fq::ZERO; (self.coeffs.len() - 1) * k as usize + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i * k as usize] = c;
        }
        LaurentSeries { val: self.val * k, coeffs: out, prec: prec_mul(self.prec, k) }
    }

    /// Frobenius `u ↦ u^p` (coefficients untouched).
    pub fn frobenius(&self, p: u32) -> Self {
        self.substitute_power(p as i64)
    }

    /// Applies a coefficient map that fixes zero (e.g. a field embedding).
    pub fn map_coeffs(&self, map: impl Fn(Fq) -> Fq) -> Self {
        Self::normalized(self.val, self.coeffs.iter().map(|&c| map(c)).collect(), self.prec)
    }

    /// Agreement of all coefficients below `min(prec₁, prec₂)`.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.agrees_below(other, self.prec.min(other.prec))
    }

    /// Agreement of coefficients of exponent `< k`.
    pub fn agrees_below(&self, other: &Self, k: i64) -> bool {
        let lo = self.val.min(other.val);
        let hi = self.end().max(other.end()).min(k);
        (lo..hi).all(|i| self.coeff(i).unwrap_or(Fq::ZERO) == other.coeff(i).unwrap_or(Fq::ZERO))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn s(start: i64, cs: &[u16], prec: i64) -> LaurentSeries {
        LaurentSeries::from_coeffs(start, cs.iter().map(|&c| Fq(c)).collect(), prec)
    }

    #[test]
    fn normalization_and_zero() {
        let x = s(-2, &[0, 0, 1, 0], 5);
        assert_eq!(x.val(), 0);
        assert_eq!(x.coeffs(), &[Fq(1)]);
        let z = s(0, &[0, 0], 3);
        assert!(z.is_zero_at_prec());
        assert_eq!(z.val(), 3);
        assert_eq!(z.valuation(), None);
    }

    #[test]
    fn multiplication_precision_rule() {
        let f = Field::new(2, 1).unwrap();
        // (1 + u) mod u^3 times u^2 mod u^4
        let a = s(0, &[1, 1], 3);
        let b = s(2, &[1], 4);
        let c = a.mul(&b, &f);
        // min(0 + 4, 2 + 3)
        assert_eq!(c.prec(), 4);
        assert_eq!(c.coeff(2), Some(Fq(1)));
        assert_eq!(c.coeff(3), Some(Fq(1)));
        assert_eq!(c.coeff(4), None);
    }

    #[test]
    fn frobenius_examples() {
        let x = s(1, &[1, 1], 3);
        let y = x.frobenius(2);
        assert_eq!(y.prec(), 6);
        assert_eq!(y.terms().collect::<Vec<_>>(), vec![(2, Fq(1)), (4, Fq(1))]);
        let c = LaurentSeries::monomial(Fq(1), 0);
        assert_eq!(c.frobenius(3), c);
        assert_eq!(LaurentSeries::u_pow(-1).frobenius(5), LaurentSeries::u_pow(-5));
    }

    #[test]
    fn inverse_roundtrip() {
        let f = Field::new(3, 2).unwrap();
        let x = s(-1, &[2, 1, 5, 0, 7], 10);
        let y = x.inv(&f).unwrap();
        let one = x.mul(&y, &f);
        assert_eq!(one.valuation(), Some(0));
        assert!(one.agrees_with(&LaurentSeries::one()));
        // inverse known mod u^12, product mod u^min(10 + 1, 12 - 1)
        assert_eq!(one.prec(), 11);
    }

    #[test]
    fn exact_arithmetic_stays_exact() {
        let f = Field::new(2, 1).unwrap();
        let x = LaurentSeries::u_pow(3).add(&LaurentSeries::one(), &f);
        assert!(x.is_exact());
        let y = x.mul(&x, &f);
        assert_eq!(y.terms().collect::<Vec<_>>(), vec![(0, Fq(1)), (6, Fq(1))]);
        assert!(x.inv(&f).unwrap().prec() < EXACT);
        assert!(LaurentSeries::u_pow(3).inv(&f).unwrap().is_exact());
    }
}
