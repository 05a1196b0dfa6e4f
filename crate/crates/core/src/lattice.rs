//! Saturated subspaces and lattices in `F_q((u))^n`.
//!
//! A saturated rank-`d` submodule of `F_q[[u]]^n` is stored in its *chart*
//! form: a basis `V` with `V[R] = I`, where `R` are the pivot rows of the
//! reduced column echelon form of `V mod u`. The chart is unique and depends
//! continuously on the subspace, which is what the fixed-point search needs.
//! A lattice of rank `d` is a chart together with a lower-triangular Hermite
//! matrix of coordinates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{precision, Error, Result};
use crate::field::{Field, Fq, FqContext};
use crate::fqlin::FqMatrix;
use crate::matrix::SeriesMatrix;
use crate::series::{LaurentSeries, EXACT};
use crate::smith::{integral_kernel, inverse, ZeroPolicy};

/// A saturated submodule of `F_q[[u]]^n` (equivalently, an `F_q((u))`-subspace)
/// in chart form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pivots: Vec<usize>,
    basis: SeriesMatrix,
}

impl Chart {
    /// The zero subspace of `F_q((u))^n`.
    pub fn zero(field: &Field, n: usize) -> Chart {
        Chart { pivots: Vec::new(), basis: SeriesMatrix::zeros(field, n, 0) }
    }

    /// The whole space.
    pub fn full(field: &Field, n: usize) -> Chart {
        Chart { pivots: (0..n).collect(), basis: SeriesMatrix::identity(field, n) }
    }

    /// Assembles a chart from data already in chart form.
    pub(crate) fn from_parts(pivots: Vec<usize>, basis: SeriesMatrix) -> Chart {
        Chart { pivots, basis }
    }

    /// Chart of the `F_q`-rational subspace spanned by constant vectors.
    pub fn from_constant_columns(field: &Field, n: usize, cols: &[Vec<Fq>]) -> Result<Chart> {
        let m = SeriesMatrix::from_fn(field, n, cols.len(), |i, j| LaurentSeries::monomial(cols[j][i], 0));
        saturate(&m, ZeroPolicy::Strict)
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis(&self) -> &SeriesMatrix {
        &self.basis
    }

    pub fn field(&self) -> &Field {
        self.basis.field()
    }

    /// Precision to which the chart is known.
    pub fn precision(&self) -> i64 {
        self.basis.min_prec()
    }

    pub fn truncate(&self, prec: i64) -> Chart {
        let mut basis = self.basis.truncate(prec);
        for (j, &r) in self.pivots.iter().enumerate() {
            for (jj, _) in self.pivots.iter().enumerate() {
                basis.set(r, jj, if j == jj { LaurentSeries::one() } else { LaurentSeries::exact_zero() });
            }
        }
        Chart { pivots: self.pivots.clone(), basis }
    }

    /// Same pivots and the same coefficients below `u^k`.
    pub fn agrees_below(&self, other: &Chart, k: i64) -> bool {
        self.pivots == other.pivots
            && self.basis.entries().iter().zip(other.basis.entries()).all(|(a, b)| a.agrees_below(b, k))
    }

    /// Agreement at the common known precision.
    pub fn agrees_with(&self, other: &Chart) -> bool {
        self.agrees_below(other, self.precision().min(other.precision()))
    }

    /// Reduction mod `u`, as an `n × d` matrix over `F_q`.
    pub fn reduction(&self) -> Result<FqMatrix> {
        reduction_mod_u(&self.basis)
    }

    /// Hashable key: pivots and all coefficients below `u^k`.
    pub fn key(&self, k: i64) -> (Vec<usize>, Vec<Vec<Fq>>) {
        let coeffs = self
            .basis
            .entries()
            .iter()
            .map(|x| (0..k).map(|i| x.coeff(i).unwrap_or(Fq::ZERO)).collect())
            .collect();
        (self.pivots.clone(), coeffs)
    }

    /// Coordinates of a vector of the subspace in the chart basis.
    pub fn coordinates(&self, x: &[LaurentSeries]) -> Vec<LaurentSeries> {
        self.pivots.iter().map(|&r| x[r].clone()).collect()
    }

    /// Membership of a column vector, decided at the known precision.
    pub fn contains(&self, x: &[LaurentSeries]) -> bool {
        let f: &FqContext = self.field();
        let c = self.coordinates(x);
        (0..self.ambient_dim()).all(|i| {
            let mut acc = x[i].clone();
            for (j, cj) in c.iter().enumerate() {
                acc = acc.sub(&self.basis.get(i, j).mul(cj, f), f);
            }
            acc.is_zero_at_prec()
        })
    }

    /// Whether every basis vector of `other` lies in `self`.
    pub fn contains_chart(&self, other: &Chart) -> bool {
        (0..other.dim()).all(|j| self.contains(&other.basis.column(j)))
    }

    /// Expresses a subspace of `self` in the coordinates of the chart basis.
    pub fn restrict(&self, sub: &Chart) -> Result<Chart> {
        let coords = sub.basis.submatrix(&self.pivots, &(0..sub.dim()).collect::<Vec<_>>());
        saturate(&coords, ZeroPolicy::Strict)
    }

    /// Pushes a chart given in `self`-coordinates back to the ambient space.
    pub fn extend(&self, inner: &Chart) -> Result<Chart> {
        saturate(&self.basis.mul(inner.basis())?, ZeroPolicy::Strict)
    }
}

/// Coefficients of `u^0` of an integral matrix.
pub fn reduction_mod_u(m: &SeriesMatrix) -> Result<FqMatrix> {
    let mut out = FqMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let x = m.get(i, j);
            if x.val_lower_bound() < 0 {
                return Err(Error::Internal(alloc::string::String::from("reduction of a non-integral matrix")));
            }
            out.set(i, j, x.coeff(0).ok_or_else(|| precision("entry not known modulo u"))?);
        }
    }
    Ok(out)
}

/// Saturation of the `F_q[[u]]`-span of the columns of `w` (i.e. the
/// `F_q((u))`-span intersected with `F_q[[u]]^n`), in chart form.
///
/// Under [`ZeroPolicy::Strict`] a column may only be dropped as dependent
/// when its residue is exactly zero.
pub fn saturate(w: &SeriesMatrix, policy: ZeroPolicy) -> Result<Chart> {
    let field = w.field().clone();
    let f: &FqContext = &field;
    let n = w.rows();
    let mut remaining: Vec<Vec<LaurentSeries>> = (0..w.cols()).map(|j| w.column(j)).collect();
    let mut done: Vec<(usize, Vec<LaurentSeries>)> = Vec::new();
    let mut used = vec![false; n];
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize, i64)> = None;
        let mut weakest = i64::MAX;
        let mut all_exact_zero = true;
        for (c, col) in remaining.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                if used[i] {
                    continue;
                }
                match x.valuation() {
                    Some(v) => {
                        all_exact_zero = false;
                        if best.is_none_or(|(_, _, b)| v < b) {
                            best = Some((c, i, v));
                        }
                    }
                    None => {
                        if !x.is_exact() {
                            all_exact_zero = false;
                        }
                        weakest = weakest.min(x.prec());
                    }
                }
            }
        }
        let Some((c, i, v)) = best else {
            if all_exact_zero || policy == ZeroPolicy::TreatAsZero {
                break;
            }
            return Err(precision("cannot decide the rank of a span: residue vanishes only at precision"));
        };
        if policy == ZeroPolicy::Strict && weakest < v {
            return Err(precision("an entry known only below the pivot valuation may be a smaller pivot"));
        }
        let mut col = remaining.remove(c);
        let inv = col[i].inv(f)?;
        for x in col.iter_mut() {
            *x = x.mul(&inv, f);
        }
        col[i] = LaurentSeries::one();
        let fix = |other: &mut Vec<LaurentSeries>| {
            if other[i].is_exact_zero() {
                return;
            }
            let factor = other[i].clone();
            for (k, x) in other.iter_mut().enumerate() {
                if k == i || col[k].is_exact_zero() {
                    continue;
                }
                *x = x.sub(&factor.mul(&col[k], f), f);
            }
            other[i] = LaurentSeries::exact_zero();
        };
        for other in remaining.iter_mut() {
            fix(other);
        }
        for (_, other) in done.iter_mut() {
            fix(other);
        }
        used[i] = true;
        done.push((i, col));
    }
    done.sort_by_key(|(r, _)| *r);
    let rows: Vec<usize> = done.iter().map(|(r, _)| *r).collect();
    let cols: Vec<Vec<LaurentSeries>> = done.into_iter().map(|(_, c)| c).collect();
    let sat = SeriesMatrix::from_columns(&field, n, &cols);
    rechart(sat, rows)
}

/// Moves a saturated basis with unit pivots at `rows` into chart form.
fn rechart(v: SeriesMatrix, rows: Vec<usize>) -> Result<Chart> {
    let field = v.field().clone();
    let d = v.cols();
    if d == 0 {
        return Ok(Chart::zero(&field, v.rows()));
    }
    let red = reduction_mod_u(&v)?;
    let pivots = red.prefix_rank_rows(&field);
    debug_assert_eq!(pivots.len(), d);
    let basis = if pivots == rows {
        v
    } else {
        let all: Vec<usize> = (0..d).collect();
        let block = v.submatrix(&pivots, &all);
        v.mul(&inverse(&block)?)?
    };
    let mut basis = basis;
    for (j, &r) in pivots.iter().enumerate() {
        for jj in 0..d {
            basis.set(r, jj, if j == jj { LaurentSeries::one() } else { LaurentSeries::exact_zero() });
        }
    }
    Ok(Chart { pivots, basis })
}

/// Canonical basis of a lattice of full rank `d` inside a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeForm {
    /// The saturation (the `F_q((u))`-span).
    pub chart: Chart,
    /// Lower-triangular Hermite matrix `H` with `basis = chart·H`.
    pub hermite: SeriesMatrix,
    /// Exponents of the diagonal of `H`.
    pub diagonal: Vec<i64>,
}

impl LatticeForm {
    pub fn basis(&self) -> Result<SeriesMatrix> {
        self.chart.basis().mul(&self.hermite)
    }

    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// Exact comparison of canonical data.
    pub fn same_lattice(&self, other: &LatticeForm) -> bool {
        self.chart.agrees_with(&other.chart) && self.diagonal == other.diagonal && self.hermite.agrees_with(&other.hermite)
    }
}

/// Lower-triangular Hermite form of a square matrix under column operations:
/// diagonal `u^{d_i}`, zeros above the diagonal and entries of row `i` left of
/// the diagonal reduced modulo `u^{d_i}` (only exponents `< d_i` survive).
pub fn hermite_lower(h: &SeriesMatrix) -> Result<(SeriesMatrix, Vec<i64>)> {
    if !h.is_square() {
        return Err(Error::NonSquare { rows: h.rows(), cols: h.cols() });
    }
    let field = h.field().clone();
    let f: &FqContext = &field;
    let n = h.rows();
    let mut cols: Vec<Vec<LaurentSeries>> = (0..n).map(|j| h.column(j)).collect();
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<(usize, i64)> = None;
        let mut weakest = i64::MAX;
        for (j, col) in cols.iter().enumerate().skip(i) {
            match col[i].valuation() {
                Some(v) => {
                    if best.is_none_or(|(_, b)| v < b) {
                        best = Some((j, v));
                    }
                }
                None => weakest = weakest.min(col[i].prec()),
            }
        }
        let Some((j, v)) = best else {
            return Err(if cols.iter().skip(i).all(|c| c[i].is_exact_zero()) {
                Error::Singular
            } else {
                precision("no certified pivot in a Hermite row")
            });
        };
        if weakest < v {
            return Err(precision("an entry known only below the pivot valuation may be a smaller pivot"));
        }
        cols.swap(i, j);
        let winv = cols[i][i].unit_part()?.inv(f)?;
        for x in cols[i].iter_mut() {
            *x = x.mul(&winv, f);
        }
        cols[i][i] = LaurentSeries::u_pow(v);
        let pivot = cols[i].clone();
        for col in cols.iter_mut().skip(i + 1) {
            if col[i].is_exact_zero() {
                continue;
            }
            let factor = col[i].shift(-v);
            for k in i + 1..n {
                if pivot[k].is_exact_zero() {
                    continue;
                }
                col[k] = col[k].sub(&factor.mul(&pivot[k], f), f);
            }
            col[i] = LaurentSeries::exact_zero();
        }
        diag.push(v);
    }
    // Reduce below-diagonal entries row by row; column i only touches rows > i.
    for i in 1..n {
        let d = diag[i];
        let pivot = cols[i].clone();
        for col in cols.iter_mut().take(i) {
            let x = col[i].clone();
            if x.is_exact_zero() {
                continue;
            }
            if x.prec() < d {
                return Err(precision("entry not known to the pivot valuation"));
            }
            let low: Vec<(i64, Fq)> = x.terms().filter(|&(k, _)| k < d).collect();
            let high: Vec<(i64, Fq)> = x.terms().filter(|&(k, _)| k >= d).collect();
            let quotient = terms_to_series(&high, d, x.prec());
            if !quotient.is_exact_zero() {
                for k in i + 1..n {
                    if pivot[k].is_exact_zero() {
                        continue;
                    }
                    col[k] = col[k].sub(&quotient.mul(&pivot[k], f), f);
                }
            }
            col[i] = terms_to_series(&low, 0, EXACT);
        }
    }
    Ok((SeriesMatrix::from_columns(&field, n, &cols), diag))
}

/// Series `Σ c·u^{k - shift}` over the given terms, known mod `u^{prec - shift}`.
fn terms_to_series(terms: &[(i64, Fq)], shift: i64, prec: i64) -> LaurentSeries {
    let p = if prec >= EXACT { EXACT } else { prec - shift };
    let Some(&(lo, _)) = terms.first() else {
        return LaurentSeries::zero(p);
    };
    let hi = terms.last().unwrap().0;
    let mut coeffs = vec![Fq::ZERO; (hi - lo + 1) as usize];
    for &(k, c) in terms {
        coeffs[(k - lo) as usize] = c;
    }
    LaurentSeries::from_coeffs(lo - shift, coeffs, p)
}

/// Canonical form of the lattice spanned by the (independent) columns of `g`.
pub fn lattice_canonical(g: &SeriesMatrix) -> Result<LatticeForm> {
    let chart = saturate(g, ZeroPolicy::Strict)?;
    if chart.dim() != g.cols() {
        return Err(Error::Singular);
    }
    let coords = g.submatrix(chart.pivots(), &(0..g.cols()).collect::<Vec<_>>());
    let (hermite, diagonal) = hermite_lower(&coords)?;
    Ok(LatticeForm { chart, hermite, diagonal })
}

/// Intersection of the `F_q[[u]]`-spans of the columns of `a` and `b`,
/// returned as a canonical basis (possibly with zero columns).
pub fn lattice_intersect(a: &SeriesMatrix, b: &SeriesMatrix, policy: ZeroPolicy) -> Result<SeriesMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(alloc::string::String::from("lattices in different ambient spaces")));
    }
    let f: &FqContext = a.field();
    let stacked = a.hcat(&b.map(|x| x.neg(f)))?;
    let kernel = integral_kernel(&stacked, policy)?;
    if kernel.cols() == 0 {
        return Ok(SeriesMatrix::zeros(a.field(), a.rows(), 0));
    }
    let top = kernel.submatrix(&(0..a.cols()).collect::<Vec<_>>(), &(0..kernel.cols()).collect::<Vec<_>>());
    let basis = a.mul(&top)?;
    lattice_canonical(&basis)?.basis()
}
