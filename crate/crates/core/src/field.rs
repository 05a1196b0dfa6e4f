//! Finite fields `F_q`, `q = p^r`, with table-driven arithmetic.
//!
//! An element is stored as the index `Σ c_i p^i` of its coefficient vector
//! `(c_0, …, c_{r-1})` with respect to the power basis `1, a, …, a^{r-1}`,
//! where `a` is a root of the modulus.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Largest field size supported by the `u16` element encoding.
pub const MAX_FIELD_SIZE: u32 = 1 << 16;

/// A field element, encoded as its base-`p` digit index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(pub u16);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Precomputed arithmetic for one finite field.
pub struct FqContext {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u16>,
    log: Vec<u16>,
    add: Vec<u16>,
    neg: Vec<u16>,
}

/// Shared handle to a field context. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<FqContext>);

impl Deref for Field {
    type Target = FqContext;
    fn deref(&self) -> &FqContext {
        &self.0
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Field) -> bool {
        self.p == other.p && self.r == other.r
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomials over F_p, low degree first.
fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_trim(a.to_vec());
    let b = poly_trim(b.to_vec());
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let c = (r[r.len() - 1] * lead_inv) % p;
        for (i, &bi) in b.iter().enumerate() {
            r[i + shift] = (r[i + shift] + p - (c * bi) % p) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Monic polynomial of degree `deg` whose lower coefficients are the base-`p`
/// digits of `idx`, with `c_0` the most significant digit.
fn monic_from_lex_index(idx: u64, deg: u32, p: u32) -> Vec<u32> {
    let mut coeffs = vec![0u32; deg as usize + 1];
    coeffs[deg as usize] = 1;
    let mut x = idx;
    for i in (0..deg as usize).rev() {
        coeffs[i] = (x % p as u64) as u32;
        x /= p as u64;
    }
    coeffs
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() as u32 - 1;
    if deg <= 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d);
        for idx in 0..count {
            let g = monic_from_lex_index(idx, d, p);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The lexicographically least monic irreducible polynomial of degree `r`
/// over `F_p`, comparing coefficients from the constant term upwards.
pub fn least_irreducible(p: u32, r: u32) -> Vec<u32> {
    let count = (p as u64).pow(r);
    (0..count)
        .map(|idx| monic_from_lex_index(idx, r, p))
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

impl Field {
    /// Builds `F_{p^r}`.
    pub fn new(p: u32, r: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if r == 0 {
            return Err(Error::InvalidField(String::from("extension degree must be positive")));
        }
        let q = (p as u64).checked_pow(r).filter(|&q| q <= MAX_FIELD_SIZE as u64).ok_or_else(|| {
            Error::InvalidField(format!("{p}^{r} exceeds the supported field size"))
        })? as u32;
        let modulus = least_irreducible(p, r);
        let ctx = FqContext::build(p, r, q, modulus);
        Ok(Field(Arc::new(ctx)))
    }

    /// Builds `F_q` from the field size.
    pub fn with_size(q: u32) -> Result<Field> {
        if q < 2 {
            return Err(Error::InvalidField(format!("{q} is not a prime power")));
        }
        let mut p = 2;
        while q % p != 0 {
            p += 1;
        }
        let (mut r, mut x) = (0, q);
        while x % p == 0 {
            x /= p;
            r += 1;
        }
        if x != 1 {
            return Err(Error::InvalidField(format!("{q} is not a prime power")));
        }
        Field::new(p, r)
    }

    /// The degree-`m` extension `F_{q^m}`.
    pub fn extension(&self, m: u32) -> Result<Field> {
        Field::new(self.p, self.r * m)
    }

    /// Images of every element of `self` under a fixed embedding into `big`.
    ///
    /// The generator is sent to the root of the modulus with the smallest
    /// index in `big`, so the embedding is deterministic.
    pub fn embedding_into(&self, big: &Field) -> Result<Vec<Fq>> {
        if big.p != self.p || big.r % self.r != 0 {
            return Err(Error::FieldMismatch);
        }
        let root = (0..big.q)
            .map(|i| Fq(i as u16))
            .find(|&x| {
                let mut acc = Fq::ZERO;
                for &c in self.modulus.iter().rev() {
                    acc = big.add(big.mul(acc, x), big.from_int(c as i64));
                }
                acc.is_zero()
            })
            .ok_or(Error::FieldMismatch)?;
        Ok((0..self.q)
            .map(|idx| {
                let digits = self.digits(Fq(idx as u16));
                let mut acc = Fq::ZERO;
                for &c in digits.iter().rev() {
                    acc = big.add(big.mul(acc, root), big.from_int(c as i64));
                }
                acc
            })
            .collect())
    }
}

impl FqContext {
    fn build(p: u32, r: u32, q: u32, modulus: Vec<u32>) -> FqContext {
        let r_us = r as usize;
        let digits_of = |mut x: u32| {
            let mut d = vec![0u32; r_us];
            for slot in d.iter_mut() {
                *slot = x % p;
                x /= p;
            }
            d
        };
        let index_of = |d: &[u32]| d.iter().rev().fold(0u32, |acc, &c| acc * p + c);
        let add = if q <= 256 {
            let mut t = vec![0u16; (q * q) as usize];
            for x in 0..q {
                let dx = digits_of(x);
                for y in 0..q {
                    let dy = digits_of(y);
                    let s: Vec<u32> = dx.iter().zip(&dy).map(|(a, b)| (a + b) % p).collect();
                    t[(x * q + y) as usize] = index_of(&s) as u16;
                }
            }
            t
        } else {
            Vec::new()
        };
        let neg = (0..q)
            .map(|x| {
                let d: Vec<u32> = digits_of(x).iter().map(|&c| (p - c) % p).collect();
                index_of(&d) as u16
            })
            .collect();
        // Multiplication by polynomial arithmetic, used only to find a
        // primitive element and fill the log tables.
        let polymul = |x: u32, y: u32| -> u32 {
            let (dx, dy) = (digits_of(x), digits_of(y));
            let mut prod = vec![0u32; 2 * r_us];
            for (i, a) in dx.iter().enumerate() {
                for (j, b) in dy.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + a * b) % p;
                }
            }
            let mut rem = poly_rem(&prod, &modulus, p);
            rem.resize(r_us, 0);
            index_of(&rem)
        };
        let order = q - 1;
        let mut exp = vec![0u16; order as usize];
        let mut log = vec![0u16; q as usize];
        for g in 1..q {
            let mut x = 1u32;
            let mut ok = true;
            for k in 0..order {
                if k > 0 && x == 1 {
                    ok = false;
                    break;
                }
                exp[k as usize] = x as u16;
                x = polymul(x, g);
            }
            if ok && x == 1 {
                break;
            }
        }
        for (k, &x) in exp.iter().enumerate() {
            log[x as usize] = k as u16;
        }
        FqContext { p, r, q, modulus, exp, log, add, neg }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// `[F_q : F_p]`.
    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn size(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q).map(|i| Fq(i as u16))
    }

    #[inline]
    pub fn add(&self, x: Fq, y: Fq) -> Fq {
        if x.is_zero() {
            return y;
        }
        if y.is_zero() {
            return x;
        }
        if self.p == 2 {
            return Fq(x.0 ^ y.0);
        }
        if !self.add.is_empty() {
            return Fq(self.add[x.0 as usize * self.q as usize + y.0 as usize]);
        }
        let (mut a, mut b) = (x.0 as u32, y.0 as u32);
        let (mut out, mut place) = (0u32, 1u32);
        for _ in 0..self.r {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        Fq(out as u16)
    }

    #[inline]
    pub fn neg(&self, x: Fq) -> Fq {
        Fq(self.neg[x.0 as usize])
    }

    #[inline]
    pub fn sub(&self, x: Fq, y: Fq) -> Fq {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: Fq, y: Fq) -> Fq {
        if x.is_zero() || y.is_zero() {
            return Fq::ZERO;
        }
        let order = self.q as usize - 1;
        let k = (self.log[x.0 as usize] as usize + self.log[y.0 as usize] as usize) % order;
        Fq(self.exp[k])
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv(&self, x: Fq) -> Fq {
        assert!(!x.is_zero(), "inverse of zero in F_q");
        let order = self.q as usize - 1;
        let k = (order - self.log[x.0 as usize] as usize) % order;
        Fq(self.exp[k])
    }

    pub fn pow(&self, x: Fq, e: u64) -> Fq {
        if e == 0 {
            return Fq::ONE;
        }
        if x.is_zero() {
            return Fq::ZERO;
        }
        let order = self.q as u64 - 1;
        let k = (self.log[x.0 as usize] as u64 * (e % order)) % order;
        Fq(self.exp[k as usize])
    }

    /// Absolute Frobenius `x ↦ x^p`.
    pub fn frobenius(&self, x: Fq) -> Fq {
        self.pow(x, self.p as u64)
    }

    /// Image of an integer under `Z → F_p ⊆ F_q`.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p as i64) as u16)
    }

    /// The generator `a` of the power basis.
    pub fn generator(&self) -> Fq {
        if self.r == 1 {
            // F_p = F_p[a]/(a - c) for the least root c of the modulus.
            return self.neg(Fq(self.modulus[0] as u16));
        }
        Fq(self.p as u16)
    }

    /// Base-`p` digits (coefficients of `1, a, …, a^{r-1}`).
    pub fn digits(&self, x: Fq) -> Vec<u32> {
        let mut v = x.0 as u32;
        (0..self.r)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> Fq {
        let mut out = Fq::ZERO;
        let mut power = Fq::ONE;
        let a = self.generator();
        for &d in digits {
            out = self.add(out, self.mul(self.from_int(d as i64), power));
            power = self.mul(power, a);
        }
        out
    }

    /// Renders an element as a polynomial in `a`, e.g. `a+1` or `2*a^2`.
    pub fn format(&self, x: Fq) -> String {
        if self.r == 1 {
            return format!("{}", x.0);
        }
        let mut parts = Vec::new();
        for (k, &d) in self.digits(x).iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => String::from("a"),
                _ => format!("a^{k}"),
            };
            parts.push(match (d, k) {
                (_, 0) => format!("{d}"),
                (1, _) => mono,
                _ => format!("{d}*{mono}"),
            });
        }
        if parts.is_empty() {
            String::from("0")
        } else {
            parts.join("+")
        }
    }
}
