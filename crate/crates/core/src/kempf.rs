//! Semi-stability of subspaces `S ⊂ M ⊗ N` and the Kempf filtration.
//!
//! For a filtration pair `α` with weights `w = (x, y)` on adapted bases of
//! complete flags, `deg_α(S)` is the largest total weight of a basis of the
//! coordinate matroid of `S` in the basis `m_k ⊗ n_l`. Hence on the cone of
//! weights compatible with a fixed pair of flags
//!
//! `f(S, α)·|α| = μ_α(M⊗N) - μ_α(S) = min_P ℓ_P·w`,
//!
//! a minimum of linear forms, one per matroid basis `P`. Maximizing
//! `min_P ℓ_P·w / |w|` over the cone is the least-distance problem
//! `min |w|` subject to `ℓ_P·w ≥ 1` and the cone inequalities; the optimum
//! `w*` gives `f = 1/|w*|`. When all `ℓ_P` coincide this reduces to an
//! isotonic projection of `ℓ`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{Fq, FqContext};
use crate::filtered::{kron_vec, FilteredSpace, FiltrationPair};
use crate::fqlin::{FqMatrix, FqSubspace};
use crate::matrix::subsets;
use crate::optim::{isotonic_projection, least_distance};
use crate::rational::{small, BigQ, Q};

/// All complete flags of `F_q^n`, each as an adapted basis (`V_k` is the
/// span of the first `k` vectors).
pub fn complete_flags(n: usize, f: &FqContext) -> Vec<Vec<Vec<Fq>>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    flags_rec(n, f, &mut cur, &mut out);
    out
}

fn flags_rec(n: usize, f: &FqContext, cur: &mut Vec<Vec<Fq>>, out: &mut Vec<Vec<Vec<Fq>>>) {
    if cur.len() == n {
        out.push(cur.clone());
        return;
    }
    let pivots: Vec<usize> = if cur.is_empty() { Vec::new() } else { FqMatrix::from_rows(cur, n).rref(f).1 };
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    // one representative per line of the quotient: supported on the free
    // coordinates, first nonzero entry equal to one
    let q = f.size() as usize;
    let k = free.len();
    for lead in 0..k {
        let rest = k - lead - 1;
        for mut idx in 0..q.pow(rest as u32) {
            let mut v = vec![Fq::ZERO; n];
            v[free[lead]] = Fq::ONE;
            for &c in &free[lead + 1..] {
                v[c] = Fq((idx % q) as u16);
                idx /= q;
            }
            cur.push(v);
            flags_rec(n, f, cur, out);
            cur.pop();
        }
    }
}

/// Number of complete flags of `F_q^n`.
pub fn flag_count(n: usize, q: u64) -> u64 {
    (1..=n as u32).map(|k| (q.pow(k) - 1) / (q - 1)).product()
}

#[derive(Clone, Copy, Debug)]
pub struct KempfOptions {
    /// Largest number of flag pairs examined.
    pub max_flag_pairs: u64,
    /// Largest number of coordinate subsets tested per flag pair.
    pub max_matroid_subsets: u64,
}

impl Default for KempfOptions {
    fn default() -> Self {
        KempfOptions { max_flag_pairs: 200_000, max_matroid_subsets: 20_000 }
    }
}

/// The optimal destabilizing filtration pair.
#[derive(Clone, Debug)]
pub struct KempfResult {
    /// Primitive integral weights.
    pub pair: FiltrationPair,
    /// `f(S, α)²`.
    pub value_squared: Q,
}

/// Per flag pair: the maximum of `f` on the cone, when positive.
#[derive(Clone, Debug)]
pub struct FlagOptimum {
    pub weights: Vec<BigQ>,
    pub value_squared: BigQ,
}

/// Distinct weight-count vectors `c_P ∈ ℤ^{a+b}` over the bases `P` of the
/// coordinate matroid of `coords` (rows span `S`).
fn basis_vectors(coords: &[Vec<Fq>], a: usize, b: usize, f: &FqContext, opts: &KempfOptions) -> Result<Vec<Vec<i64>>> {
    let d = coords.len();
    let dim = a * b;
    let mut total: u64 = 1;
    for i in 0..d as u64 {
        total = total * (dim as u64 - i) / (i + 1);
    }
    if total > opts.max_matroid_subsets {
        return Err(Error::ScaleTooLarge(alloc::format!("{total} coordinate subsets")));
    }
    let m = FqMatrix::from_rows(coords, dim);
    let mut out: Vec<Vec<i64>> = Vec::new();
    for cols in subsets(dim, d) {
        let rows: Vec<Vec<Fq>> = (0..d).map(|i| cols.iter().map(|&c| m.get(i, c)).collect()).collect();
        if FqMatrix::from_rows(&rows, d).rank(f) < d {
            continue;
        }
        let mut c = vec![0i64; a + b];
        for &p in &cols {
            c[p / b] += 1;
            c[a + p % b] += 1;
        }
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn linear_forms(cs: &[Vec<i64>], a: usize, b: usize, d: usize) -> Vec<Vec<BigQ>> {
    let ia = BigQ::new(BigInt::one(), BigInt::from(a));
    let ib = BigQ::new(BigInt::one(), BigInt::from(b));
    let dd = BigInt::from(d);
    cs.iter()
        .map(|c| {
            (0..a + b)
                .map(|k| {
                    let base = if k < a { ia.clone() } else { ib.clone() };
                    base - BigQ::new(BigInt::from(c[k]), dd.clone())
                })
                .collect()
        })
        .collect()
}

fn dot(u: &[BigQ], v: &[BigQ]) -> BigQ {
    u.iter().zip(v).fold(BigQ::zero(), |acc, (x, y)| acc + x * y)
}

/// `max f(S, α)` over weights compatible with the flags whose adapted bases
/// are `mb`, `nb`; `None` when `f ≤ 0` on the whole cone.
pub fn flag_pair_optimum(
    s: &FqSubspace,
    mb: &[Vec<Fq>],
    nb: &[Vec<Fq>],
    f: &FqContext,
    opts: &KempfOptions,
) -> Result<Option<FlagOptimum>> {
    let (a, b) = (mb.len(), nb.len());
    let d = s.dim();
    if d == 0 || d == a * b {
        return Ok(None);
    }
    // columns of p are the vectors m_k ⊗ n_l
    let mut cols = Vec::with_capacity(a * b);
    for mv in mb {
        for nv in nb {
            cols.push(kron_vec(mv, nv, f));
        }
    }
    let pinv = FqMatrix::from_rows(&cols, a * b)
        .transpose()
        .inverse(f)
        .ok_or_else(|| Error::Internal(String::from("flag bases are not bases")))?;
    let coords: Vec<Vec<Fq>> = s.basis().iter().map(|v| pinv.mul_vec(v, f)).collect();
    let cs = basis_vectors(&coords, a, b, f, opts)?;
    let forms = linear_forms(&cs, a, b, d);
    let w = if forms.len() == 1 {
        let proj: Vec<BigQ> = isotonic_projection(&forms[0][..a]).into_iter().chain(isotonic_projection(&forms[0][a..])).collect();
        let n2 = dot(&proj, &proj);
        if n2.is_zero() {
            return Ok(None);
        }
        proj.iter().map(|x| x / &n2).collect()
    } else {
        let mut g = forms.clone();
        let mut h = vec![BigQ::one(); forms.len()];
        for (start, len) in [(0, a), (a, b)] {
            for k in start..start + len - 1 {
                let mut row = vec![BigQ::zero(); a + b];
                row[k] = -BigQ::one();
                row[k + 1] = BigQ::one();
                g.push(row);
                h.push(BigQ::zero());
            }
        }
        match least_distance(&g, &h, a + b)? {
            Some(w) => w,
            None => return Ok(None),
        }
    };
    let min = forms.iter().map(|l| dot(l, &w)).min().unwrap();
    let norm = dot(&w, &w);
    if !min.is_positive() {
        return Ok(None);
    }
    Ok(Some(FlagOptimum { value_squared: &min * &min / norm, weights: w }))
}

/// Scales a nonzero rational vector to the primitive integral vector on
/// the same ray.
pub fn primitive_integral(w: &[BigQ]) -> Vec<BigInt> {
    let l = w.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = w.iter().map(|x| (x * BigQ::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

fn to_pair(mb: &[Vec<Fq>], nb: &[Vec<Fq>], w: &[BigInt], f: &FqContext) -> Result<FiltrationPair> {
    let a = mb.len();
    let conv = |x: &BigInt| -> Result<Q> {
        small(&BigQ::from_integer(x.clone())).ok_or_else(|| Error::ScaleTooLarge(String::from("weights exceed machine integers")))
    };
    let x: Vec<Q> = w[..a].iter().map(conv).collect::<Result<_>>()?;
    let y: Vec<Q> = w[a..].iter().map(conv).collect::<Result<_>>()?;
    Ok(FiltrationPair { m: FilteredSpace::new(mb.to_vec(), x, f)?, n: FilteredSpace::new(nb.to_vec(), y, f)? })
}

fn check_dims(s: &FqSubspace, a: usize, b: usize) -> Result<()> {
    if s.ambient_dim() != a * b {
        return Err(Error::DimensionMismatch(alloc::format!("subspace of F^{} is not in F^{a} ⊗ F^{b}", s.ambient_dim())));
    }
    Ok(())
}

fn flag_pairs(a: usize, b: usize, f: &FqContext, opts: &KempfOptions) -> Result<(Vec<Vec<Vec<Fq>>>, Vec<Vec<Vec<Fq>>>)> {
    let q = f.size() as u64;
    let count = flag_count(a, q).saturating_mul(flag_count(b, q));
    if count > opts.max_flag_pairs {
        return Err(Error::ScaleTooLarge(alloc::format!("{count} flag pairs")));
    }
    Ok((complete_flags(a, f), complete_flags(b, f)))
}

/// `S` is semi-stable in `F_q^a ⊗ F_q^b`: `μ_α(S) ≥ μ_α(M⊗N)` for every
/// filtration pair defined over `F_q`.
pub fn is_semistable_subspace(s: &FqSubspace, a: usize, b: usize, f: &FqContext, opts: &KempfOptions) -> Result<bool> {
    check_dims(s, a, b)?;
    let (mf, nf) = flag_pairs(a, b, f, opts)?;
    for mb in &mf {
        for nb in &nf {
            if flag_pair_optimum(s, mb, nb, f, opts)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The Kempf filtration of an unstable `S`: the unique (up to scaling)
/// filtration pair maximizing `f(S, α)`, with primitive integral weights.
pub fn kempf_filtration(s: &FqSubspace, a: usize, b: usize, f: &FqContext, opts: &KempfOptions) -> Result<KempfResult> {
    check_dims(s, a, b)?;
    let (mf, nf) = flag_pairs(a, b, f, opts)?;
    // ties are only ambiguous at the overall maximum
    let mut best: Option<(BigQ, Vec<FiltrationPair>)> = None;
    for mb in &mf {
        for nb in &nf {
            let Some(opt) = flag_pair_optimum(s, mb, nb, f, opts)? else { continue };
            let pair = to_pair(mb, nb, &primitive_integral(&opt.weights), f)?;
            match &mut best {
                Some((v, _)) if opt.value_squared < *v => {}
                Some((v, ps)) if opt.value_squared == *v => {
                    if !ps.iter().any(|p| p.same_pair(&pair, f)) {
                        ps.push(pair);
                    }
                }
                _ => best = Some((opt.value_squared, vec![pair])),
            }
        }
    }
    let (v, mut pairs) = best.ok_or(Error::NotUnstable)?;
    if pairs.len() > 1 {
        return Err(Error::AmbiguousMaximizer);
    }
    let pair = pairs.pop().expect("nonempty");
    let value_squared = small(&v).ok_or_else(|| Error::ScaleTooLarge(String::from("instability value")))?;
    Ok(KempfResult { pair, value_squared })
}

/// `⊕_ℓ gr^ℓ_α S`, embedded in `M ⊗ N` through the splitting given by the
/// adapted bases of `α`.
pub fn kempf_semisimplify(s: &FqSubspace, pair: &FiltrationPair, f: &FqContext) -> Result<FqSubspace> {
    let t = pair.tensor(f);
    let n = t.dim();
    if s.ambient_dim() != n {
        return Err(Error::DimensionMismatch(String::from("subspace and filtration pair disagree in dimension")));
    }
    let p = FqMatrix::from_rows(t.basis(), n).transpose();
    let pinv = p.inverse(f).ok_or_else(|| Error::Internal(String::from("adapted basis is not a basis")))?;
    let mut gens = Vec::new();
    for l in t.jumps() {
        let piece = s.intersect(&t.step(l, f), f);
        for v in piece.basis() {
            let mut c = pinv.mul_vec(v, f);
            for (k, w) in t.weights().iter().enumerate() {
                if *w != l {
                    c[k] = Fq::ZERO;
                }
            }
            gens.push(p.mul_vec(&c, f));
        }
    }
    Ok(FqSubspace::span(n, &gens, f))
}

/// `μ_α(M)` and `μ_α(N)`.
pub fn factor_slopes(pair: &FiltrationPair) -> (Q, Q) {
    (pair.m.slope(), pair.n.slope())
}
