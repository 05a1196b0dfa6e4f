//! Smith normal form over `F_q[[u]]` and what follows from it:
//! valuations of determinants, inverses, relative positions, kernels.

use alloc::vec::Vec;

use crate::error::{precision, Error, Result};
use crate::field::FqContext;
use crate::matrix::SeriesMatrix;
use crate::series::LaurentSeries;

/// How to treat entries that vanish at the known precision once no
/// certified pivot is left.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZeroPolicy {
    /// Only exact zeros count as zero; anything else is an error.
    #[default]
    Strict,
    /// Zero at precision is taken to be zero.
    TreatAsZero,
}

/// `left · m · right = diag(u^{d_1}, …, u^{d_r}, 0, …)` with `left`, `right`
/// invertible over `F_q[[u]]` and `d_1 ≤ … ≤ d_r`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub left: SeriesMatrix,
    pub divisors: Vec<i64>,
    pub right: SeriesMatrix,
}

type Grid = Vec<Vec<LaurentSeries>>;

fn grid_of(m: &SeriesMatrix) -> Grid {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect()).collect()
}

fn identity_grid(n: usize) -> Grid {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { LaurentSeries::one() } else { LaurentSeries::exact_zero() }).collect())
        .collect()
}

fn matrix_of(m: &SeriesMatrix, g: Grid) -> SeriesMatrix {
    let rows = g.len();
    let cols = g.first().map_or(0, |r| r.len());
    SeriesMatrix::from_entries(m.field(), rows, cols, g.into_iter().flatten().collect())
}

/// Finds the pivot of the block `[k.., k..]`: the certified entry of least
/// valuation, first in row-major order. Entries that are zero at precision
/// must be known at least up to that valuation, otherwise they could hide a
/// smaller one.
pub(crate) fn choose_pivot(grid: &Grid, k: usize) -> Result<Option<(usize, usize, i64)>> {
    let mut best: Option<(usize, usize, i64)> = None;
    let mut weakest = i64::MAX;
    for (i, row) in grid.iter().enumerate().skip(k) {
        for (j, x) in row.iter().enumerate().skip(k) {
            match x.valuation() {
                Some(v) => {
                    if best.is_none_or(|(_, _, b)| v < b) {
                        best = Some((i, j, v));
                    }
                }
                None => weakest = weakest.min(x.prec()),
            }
        }
    }
    if let Some((_, _, v)) = best {
        if weakest < v {
            return Err(precision("an entry known only below the pivot valuation may be a smaller pivot"));
        }
    }
    Ok(best)
}

struct Elimination {
    grid: Grid,
    left: Option<Grid>,
    right: Option<Grid>,
    divisors: Vec<i64>,
}

fn eliminate(m: &SeriesMatrix, track: bool) -> Result<Elimination> {
    let f: &FqContext = m.field();
    let (rows, cols) = (m.rows(), m.cols());
    let mut grid = grid_of(m);
    let mut left = track.then(|| identity_grid(rows));
    let mut right = track.then(|| identity_grid(cols));
    let mut divisors = Vec::new();
    for k in 0..rows.min(cols) {
        let Some((pi, pj, v)) = choose_pivot(&grid, k)? else { break };
        grid.swap(k, pi);
        if let Some(l) = left.as_mut() {
            l.swap(k, pi);
        }
        if pj != k {
            for row in grid.iter_mut() {
                row.swap(k, pj);
            }
            if let Some(r) = right.as_mut() {
                for row in r.iter_mut() {
                    row.swap(k, pj);
                }
            }
        }
        let winv = grid[k][k].unit_part()?.inv(f)?;
        for j in k + 1..cols {
            grid[k][j] = grid[k][j].mul(&winv, f);
        }
        if let Some(l) = left.as_mut() {
            for x in l[k].iter_mut() {
                *x = x.mul(&winv, f);
            }
        }
        grid[k][k] = LaurentSeries::u_pow(v);
        for i in k + 1..rows {
            if grid[i][k].is_exact_zero() {
                continue;
            }
            let factor = grid[i][k].shift(-v);
            for j in k + 1..cols {
                if grid[k][j].is_exact_zero() {
                    continue;
                }
                let t = factor.mul(&grid[k][j], f);
                grid[i][j] = grid[i][j].sub(&t, f);
            }
            if let Some(l) = left.as_mut() {
                for j in 0..rows {
                    if l[k][j].is_exact_zero() {
                        continue;
                    }
                    let t = factor.mul(&l[k][j], f);
                    l[i][j] = l[i][j].sub(&t, f);
                }
            }
            grid[i][k] = LaurentSeries::exact_zero();
        }
        for j in k + 1..cols {
            if grid[k][j].is_exact_zero() {
                continue;
            }
            let factor = grid[k][j].shift(-v);
            if let Some(r) = right.as_mut() {
                for row in r.iter_mut() {
                    if row[k].is_exact_zero() {
                        continue;
                    }
                    let t = factor.mul(&row[k], f);
                    row[j] = row[j].sub(&t, f);
                }
            }
            grid[k][j] = LaurentSeries::exact_zero();
        }
        divisors.push(v);
    }
    Ok(Elimination { grid, left, right, divisors })
}

fn remaining_is_exact_zero(e: &Elimination) -> bool {
    let r = e.divisors.len();
    e.grid.iter().skip(r).all(|row| row.iter().skip(r).all(|x| x.is_exact_zero()))
}

/// Smith normal form of a rectangular matrix. The rank is the number of
/// divisors; under [`ZeroPolicy::Strict`] the leftover block must be exactly zero.
pub fn smith_rect(m: &SeriesMatrix, policy: ZeroPolicy) -> Result<SmithForm> {
    let e = eliminate(m, true)?;
    if policy == ZeroPolicy::Strict && !remaining_is_exact_zero(&e) {
        return Err(precision("rank cannot be certified: leftover entries vanish only at precision"));
    }
    Ok(SmithForm { left: matrix_of(m, e.left.unwrap()), divisors: e.divisors, right: matrix_of(m, e.right.unwrap()) })
}

/// Smith normal form of a square matrix of full rank over `F_q((u))`.
pub fn smith_normal_form(m: &SeriesMatrix) -> Result<SmithForm> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let e = eliminate(m, true)?;
    check_full_rank(&e, m.rows())?;
    Ok(SmithForm { left: matrix_of(m, e.left.unwrap()), divisors: e.divisors, right: matrix_of(m, e.right.unwrap()) })
}

fn check_full_rank(e: &Elimination, n: usize) -> Result<()> {
    if e.divisors.len() < n {
        if remaining_is_exact_zero(e) {
            return Err(Error::Singular);
        }
        return Err(precision("determinant vanishes at the known precision"));
    }
    Ok(())
}

/// Elementary divisors of a square matrix, ascending.
pub fn elementary_divisors(m: &SeriesMatrix) -> Result<Vec<i64>> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.rows(), cols: m.cols() });
    }
    let e = eliminate(m, false)?;
    check_full_rank(&e, m.rows())?;
    Ok(e.divisors)
}

/// `val_u(det m)`, certified.
pub fn val_det(m: &SeriesMatrix) -> Result<i64> {
    Ok(elementary_divisors(m)?.iter().sum())
}

/// Inverse over `F_q((u))`: `m⁻¹ = right · diag(u^{-d}) · left`.
pub fn inverse(m: &SeriesMatrix) -> Result<SeriesMatrix> {
    let s = smith_normal_form(m)?;
    let neg: Vec<i64> = s.divisors.iter().map(|d| -d).collect();
    let dinv = SeriesMatrix::diagonal_u(m.field(), &neg);
    s.right.mul(&dinv)?.mul(&s.left)
}

/// Relative position of the lattices spanned by the columns of `a` and `b`:
/// the elementary divisors of `a⁻¹·b`.
pub fn lattice_relative_position(a: &SeriesMatrix, b: &SeriesMatrix) -> Result<Vec<i64>> {
    elementary_divisors(&inverse(a)?.mul(b)?)
}

/// Basis of `ker(m) ∩ F_q[[u]]^cols`, saturated, as the columns of the
/// returned matrix.
pub fn integral_kernel(m: &SeriesMatrix, policy: ZeroPolicy) -> Result<SeriesMatrix> {
    let s = smith_rect(m, policy)?;
    let r = s.divisors.len();
    let keep: Vec<usize> = (r..m.cols()).collect();
    let all: Vec<usize> = (0..m.cols()).collect();
    Ok(s.right.submatrix(&all, &keep))
}
