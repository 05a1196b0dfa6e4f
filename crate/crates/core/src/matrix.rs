//! Dense matrices of Laurent series.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Field, Fq};
use crate::series::{LaurentSeries, EXACT};

/// Row-major matrix over `F_q((u))`. Entries carry their own precision;
/// exact entries (identity blocks, pivots) stay exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<LaurentSeries>,
}

impl SeriesMatrix {
    pub fn from_entries(field: &Field, rows: usize, cols: usize, entries: Vec<LaurentSeries>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        SeriesMatrix { field: field.clone(), rows, cols, entries }
    }

    pub fn from_fn(field: &Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> LaurentSeries) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::from_entries(field, rows, cols, entries)
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        Self::from_fn(field, rows, cols, |_, _| LaurentSeries::exact_zero())
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        Self::diagonal_u(field, &alloc::vec![0; n])
    }

    /// `diag(u^{d_1}, …, u^{d_n})`, exact.
    pub fn diagonal_u(field: &Field, exps: &[i64]) -> Self {
        let n = exps.len();
        Self::from_fn(field, n, n, |i, j| if i == j { LaurentSeries::u_pow(exps[i]) } else { LaurentSeries::exact_zero() })
    }

    /// Constant matrix from rows of field elements, exact.
    pub fn from_constants(field: &Field, rows: &[Vec<Fq>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(field, r, c, |i, j| LaurentSeries::monomial(rows[i][j], 0))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &LaurentSeries {
        &self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: LaurentSeries) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[LaurentSeries] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<LaurentSeries> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(field: &Field, rows: usize, cols: &[Vec<LaurentSeries>]) -> Self {
        Self::from_fn(field, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &*self.field;
        Ok(Self::from_fn(&self.field, self.rows, other.cols, |i, j| {
            let mut acc = LaurentSeries::exact_zero();
            for k in 0..self.cols {
                let (a, b) = (self.get(i, k), other.get(k, j));
                if a.is_exact_zero() || b.is_exact_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b, f), f);
            }
            acc
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(alloc::string::String::from("matrix sum")));
        }
        let f = &*self.field;
        Ok(Self::from_fn(&self.field, self.rows, self.cols, |i, j| self.get(i, j).add(other.get(i, j), f)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let f = &*self.field;
        self.add(&other.map(|x| x.neg(f)))
    }

    pub fn map(&self, f: impl Fn(&LaurentSeries) -> LaurentSeries) -> Self {
        SeriesMatrix { field: self.field.clone(), rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Entrywise `u ↦ u^p`.
    pub fn frobenius(&self) -> Self {
        let p = self.field.characteristic();
        self.map(|x| x.frobenius(p))
    }

    /// Multiplication by the scalar `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        self.map(|x| x.shift(k))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        self.map(|x| x.truncate(prec))
    }

    /// Kronecker product; the row index of `a ⊗ b` is `i·rows(b) + k`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        let f = &*self.field;
        let (r2, c2) = (other.rows, other.cols);
        Ok(Self::from_fn(&self.field, self.rows * r2, self.cols * c2, |i, j| {
            self.get(i / r2, j / c2).mul(other.get(i % r2, j % c2), f)
        }))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(&self.field, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn hcat(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(alloc::string::String::from("hcat")));
        }
        Ok(Self::from_fn(&self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    /// Minimum certified valuation over all entries (`None` if all vanish).
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries.iter().filter_map(|x| x.valuation()).min()
    }

    /// Lower bound for every entry's valuation, counting entries that are
    /// zero at precision by their precision.
    pub fn val_lower_bound(&self) -> i64 {
        self.entries.iter().map(|x| x.val_lower_bound()).min().unwrap_or(EXACT)
    }

    /// Smallest absolute precision among the entries.
    pub fn min_prec(&self) -> i64 {
        self.entries.iter().map(|x| x.prec()).min().unwrap_or(EXACT)
    }

    /// All entries provably in `F_q[[u]]`.
    pub fn is_integral(&self) -> bool {
        self.val_lower_bound() >= 0
    }

    /// Entrywise agreement at the common known precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a.agrees_with(b))
    }

    /// Every entry zero modulo its precision.
    pub fn is_zero_at_prec(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero_at_prec())
    }

    /// Applies a coefficient map into another field.
    pub fn map_field(&self, target: &Field, map: impl Fn(Fq) -> Fq) -> Self {
        SeriesMatrix {
            field: target.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|x| x.map_coeffs(&map)).collect(),
        }
    }

    /// Entrywise `u ↦ t^m`.
    pub fn substitute_power(&self, m: i64) -> Self {
        self.map(|x| x.substitute_power(m))
    }

    /// Determinant by cofactor expansion (division free; meant for n ≤ 6).
    pub fn det(&self) -> Result<LaurentSeries> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.det_minor(&idx, &idx))
    }

    fn det_minor(&self, rows: &[usize], cols: &[usize]) -> LaurentSeries {
        let f = &*self.field;
        match rows.len() {
            0 => LaurentSeries::one(),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                let a = self.get(rows[0], cols[0]).mul(self.get(rows[1], cols[1]), f);
                let b = self.get(rows[0], cols[1]).mul(self.get(rows[1], cols[0]), f);
                a.sub(&b, f)
            }
            _ => {
                let mut acc = LaurentSeries::exact_zero();
                let sub_rows = &rows[1..];
                for (k, &c) in cols.iter().enumerate() {
                    let a = self.get(rows[0], c);
                    if a.is_exact_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = a.mul(&self.det_minor(sub_rows, &sub_cols), f);
                    acc = if k % 2 == 0 { acc.add(&term, f) } else { acc.sub(&term, f) };
                }
                acc
            }
        }
    }

    /// `d`-th compound matrix: minors indexed by `d`-subsets in lexicographic order.
    pub fn compound(&self, d: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let subsets = subsets(self.rows, d);
        let m = subsets.len();
        Ok(Self::from_fn(&self.field, m, m, |i, j| self.det_minor(&subsets[i], &subsets[j])))
    }
}

/// All `d`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < d - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    rec(0, n, d, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::new(2, 1).unwrap()
    }

    #[test]
    fn kron_of_identities() {
        let f = f2();
        let a = SeriesMatrix::identity(&f, 2);
        let b = SeriesMatrix::identity(&f, 3);
        assert_eq!(a.kron(&b).unwrap(), SeriesMatrix::identity(&f, 6));
    }

    #[test]
    fn det_of_antidiagonal() {
        let f = f2();
        let m = SeriesMatrix::from_fn(&f, 2, 2, |i, j| match (i, j) {
            (0, 1) => LaurentSeries::u_pow(1),
            (1, 0) => LaurentSeries::one(),
            _ => LaurentSeries::exact_zero(),
        });
        assert_eq!(m.det().unwrap().valuation(), Some(1));
    }

    #[test]
    fn compound_of_diagonal() {
        let f = f2();
        let m = SeriesMatrix::diagonal_u(&f, &[0, 1, 2]);
        let c = m.compound(2).unwrap();
        assert_eq!(c, SeriesMatrix::diagonal_u(&f, &[1, 2, 3]));
        assert_eq!(subsets(4, 2).len(), 6);
    }
}
