//! Dense linear algebra over `F_q`.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{Fq, FqContext};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FqMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Fq>,
}

impl FqMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FqMatrix { rows, cols, data: vec![Fq::ZERO; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<Fq>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Fq) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Fq> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Fq>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Self, f: &FqContext) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Fq], f: &FqContext) -> Vec<Fq> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(Fq::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
            .collect()
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self, f: &FqContext) -> (FqMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c));
            for j in 0..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, f: &FqContext) -> usize {
        self.rref(f).1.len()
    }

    /// Basis of `{x : M x = 0}`.
    pub fn kernel(&self, f: &FqContext) -> Vec<Vec<Fq>> {
        let (r, pivots) = self.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![Fq::ZERO; self.cols];
                v[fc] = Fq::ONE;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(i, fc));
                }
                v
            })
            .collect()
    }

    /// Inverse of a square matrix, if it is invertible.
    pub fn inverse(&self, f: &FqContext) -> Option<FqMatrix> {
        let n = self.rows;
        if n != self.cols {
            return None;
        }
        let mut aug = FqMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, Fq::ONE);
        }
        let (r, pivots) = aug.rref(f);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = FqMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j));
            }
        }
        Some(inv)
    }

    /// Rows at which the rank of the leading rows increases (the pivot rows of
    /// the reduced column echelon form).
    pub fn prefix_rank_rows(&self, f: &FqContext) -> Vec<usize> {
        self.transpose().rref(f).1
    }
}

/// A subspace of `F_q^n`, stored by its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqSubspace {
    n: usize,
    basis: Vec<Vec<Fq>>,
}

impl FqSubspace {
    pub fn span(n: usize, vectors: &[Vec<Fq>], f: &FqContext) -> Self {
        if vectors.is_empty() {
            return Self::zero(n);
        }
        let (r, pivots) = FqMatrix::from_rows(vectors, n).rref(f);
        FqSubspace { n, basis: (0..pivots.len()).map(|i| r.row(i).to_vec()).collect() }
    }

    pub fn zero(n: usize) -> Self {
        FqSubspace { n, basis: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![Fq::ZERO; n];
                v[i] = Fq::ONE;
                v
            })
            .collect();
        FqSubspace { n, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Fq>] {
        &self.basis
    }

    pub fn contains(&self, v: &[Fq], f: &FqContext) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        FqMatrix::from_rows(&rows, self.n).rank(f) == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Self, f: &FqContext) -> bool {
        self.basis.iter().all(|v| other.contains(v, f))
    }

    pub fn sum(&self, other: &Self, f: &FqContext) -> Self {
        let mut rows = self.basis.clone();
        rows.extend(other.basis.iter().cloned());
        Self::span(self.n, &rows, f)
    }

    /// Orthogonal complement for the standard bilinear form.
    pub fn complement(&self, f: &FqContext) -> Self {
        if self.basis.is_empty() {
            return Self::full(self.n);
        }
        let k = FqMatrix::from_rows(&self.basis, self.n).kernel(f);
        Self::span(self.n, &k, f)
    }

    pub fn intersect(&self, other: &Self, f: &FqContext) -> Self {
        self.complement(f).sum(&other.complement(f), f).complement(f)
    }

    /// Image under a linear map `x ↦ M x`.
    pub fn image(&self, m: &FqMatrix, f: &FqContext) -> Self {
        let vs: Vec<Vec<Fq>> = self.basis.iter().map(|v| m.mul_vec(v, f)).collect();
        Self::span(m.rows(), &vs, f)
    }
}
