//! φ-stable subspaces of an étale φ-module.
//!
//! A `d`-dimensional subspace `S` is φ-stable iff it is a fixed point of
//! `T(S) = saturate(span(A·φ(S)))`. Because `φ` multiplies `u`-adic precision
//! by `p` while `A` and `A⁻¹` shift valuations by a bounded amount, `T` is a
//! contraction on small enough balls of the Grassmannian. The search walks the
//! tree of balls `{S : S ≡ S₀ mod u^N}` in chart coordinates:
//!
//! * a ball whose image provably misses it is pruned (it holds no fixed point);
//! * a ball mapped into itself with strictly better precision holds exactly
//!   one fixed point, which is then computed by iteration;
//! * otherwise the ball is split into its `q^{d(n-d)}` sub-balls.
//!
//! Every fixed point lies in a ball of every level, so the search is complete,
//! and distinct balls of one level are disjoint, so it is duplicate free.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{precision, Error, Result};
use crate::field::{Field, Fq};
use crate::lattice::{saturate, Chart};
use crate::matrix::SeriesMatrix;
use crate::module::EtalePhiModule;
use crate::series::{LaurentSeries, EXACT};
use crate::smith::{inverse, ZeroPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Adaptive refinement of balls, starting from `Gr(d, n)(F_q)`.
    Tree,
    /// Brute force over every chart modulo `u^{seed_precision}`.
    Flat { seed_precision: i64 },
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    pub mode: SearchMode,
    /// Requested precision of the returned subspaces; the effective target is
    /// `max(4·N₀, requested)` with `N₀` the default seed precision.
    pub target_precision: Option<i64>,
    /// Deepest ball level explored before reporting non-convergence.
    pub max_depth: i64,
    /// Maximal number of balls examined.
    pub node_budget: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { mode: SearchMode::Tree, target_precision: None, max_depth: 48, node_budget: 2_000_000 }
    }
}

/// A φ-stable subspace, certified stable modulo `u^{verified_prec}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiStableSubspace {
    pub chart: Chart,
    pub verified_prec: i64,
}

impl PhiStableSubspace {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// The zero subspace and the whole space are stable, exactly.
    pub fn trivial(field: &Field, n: usize, full: bool) -> Self {
        let chart = if full { Chart::full(field, n) } else { Chart::zero(field, n) };
        PhiStableSubspace { chart, verified_prec: EXACT }
    }
}

/// `c = max(0, -min val A, -min val A⁻¹)`.
pub fn contraction_constant(a: &SeriesMatrix) -> Result<i64> {
    let ainv = inverse(a)?;
    Ok(0.max(-a.val_lower_bound()).max(-ainv.val_lower_bound()))
}

/// `N₀ = floor(c/(p-1)) + 1 + 2`.
pub fn default_seed_precision(a: &SeriesMatrix) -> Result<i64> {
    let p = a.field().characteristic() as i64;
    Ok(contraction_constant(a)? / (p - 1) + 3)
}

/// `T(S) = saturate(span(A·φ(S)))`.
pub fn frobenius_image(a: &SeriesMatrix, s: &Chart) -> Result<Chart> {
    let w = a.mul(&s.basis().frobenius())?;
    saturate(&w, ZeroPolicy::Strict)
}

/// A ball in chart coordinates: pivot rows and, for each non-pivot entry, its
/// coefficients below `u^N`.
#[derive(Clone)]
struct Ball {
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
    coeffs: Vec<Vec<Fq>>,
    level: i64,
}

impl Ball {
    fn chart(&self, field: &Field, n: usize) -> Chart {
        let d = self.pivots.len();
        let mut m = SeriesMatrix::zeros(field, n, d);
        for (j, &r) in self.pivots.iter().enumerate() {
            m.set(r, j, LaurentSeries::one());
        }
        for (&(i, j), c) in self.free.iter().zip(&self.coeffs) {
            m.set(i, j, LaurentSeries::from_coeffs(0, c.clone(), self.level));
        }
        Chart::from_parts(self.pivots.clone(), m)
    }

    fn children(&self, q: u32) -> Vec<Ball> {
        let k = self.free.len();
        let total = (q as usize).pow(k as u32);
        (0..total)
            .map(|mut idx| {
                let mut child = self.clone();
                for c in child.coeffs.iter_mut() {
                    c.push(Fq((idx % q as usize) as u16));
                    idx /= q as usize;
                }
                child.level += 1;
                child
            })
            .collect()
    }
}

/// All balls of level 1: the points of `Gr(d, n)(F_q)` in reduced column
/// echelon form.
fn level_one(n: usize, d: usize, q: u32) -> Vec<Ball> {
    let mut out = Vec::new();
    for pivots in crate::matrix::subsets(n, d) {
        let mut free = Vec::new();
        let mut fixed_zero = Vec::new();
        for i in 0..n {
            if pivots.contains(&i) {
                continue;
            }
            for (j, &r) in pivots.iter().enumerate() {
                if i > r {
                    free.push((i, j));
                } else {
                    fixed_zero.push((i, j));
                }
            }
        }
        let k = free.len();
        for mut idx in 0..(q as usize).pow(k as u32) {
            let mut entries: Vec<((usize, usize), Vec<Fq>)> = Vec::new();
            for &pos in &free {
                entries.push((pos, vec![Fq((idx % q as usize) as u16)]));
                idx /= q as usize;
            }
            for &pos in &fixed_zero {
                entries.push((pos, vec![Fq::ZERO]));
            }
            entries.sort_by_key(|(pos, _)| *pos);
            let (free_all, coeffs) = entries.into_iter().unzip();
            out.push(Ball { pivots: pivots.clone(), free: free_all, coeffs, level: 1 });
        }
    }
    out
}

enum Verdict {
    Prune,
    Split,
    Contract(Chart),
}

fn examine(a: &SeriesMatrix, ball: &Ball, field: &Field, n: usize) -> Result<Verdict> {
    let s = ball.chart(field, n);
    let t = match frobenius_image(a, &s) {
        Ok(t) => t,
        Err(Error::InsufficientPrecision(_)) => return Ok(Verdict::Split),
        Err(e) => return Err(e),
    };
    let p = t.precision();
    if p < 1 {
        return Ok(Verdict::Split);
    }
    if !t.agrees_below(&s, p.min(ball.level)) {
        return Ok(Verdict::Prune);
    }
    if p > ball.level {
        return Ok(Verdict::Contract(t));
    }
    Ok(Verdict::Split)
}

/// Iterates `T` from a point of a contracting ball until the target
/// precision is reached or precision stops improving (finite-precision `A`).
fn converge(a: &SeriesMatrix, start: Chart, target: i64) -> Result<PhiStableSubspace> {
    let mut x = start;
    loop {
        let px = x.precision();
        if px >= target {
            return Ok(PhiStableSubspace { chart: x.truncate(target), verified_prec: target });
        }
        let y = frobenius_image(a, &x)?;
        if y.precision() <= px {
            return Ok(PhiStableSubspace { chart: x, verified_prec: px });
        }
        debug_assert!(y.agrees_below(&x, px));
        x = y;
    }
}

/// Complete, duplicate-free list of `d`-dimensional φ-stable subspaces of
/// `F_q((u))^n` for the Frobenius matrix `a`.
pub fn stable_subspaces_of_matrix(a: &SeriesMatrix, d: usize, opts: &EnumerationOptions) -> Result<Vec<PhiStableSubspace>> {
    let field = a.field().clone();
    let n = a.rows();
    if d == 0 || d == n {
        return Ok(vec![PhiStableSubspace::trivial(&field, n, d == n)]);
    }
    if d > n {
        return Err(Error::DimensionMismatch(alloc::format!("subspace dimension {d} in a space of dimension {n}")));
    }
    let c = contraction_constant(a)?;
    let p = field.characteristic() as i64;
    let n0 = c / (p - 1) + 3;
    let target = (4 * n0).max(opts.target_precision.unwrap_or(0));
    let q = field.size();
    let mut found = Vec::new();
    match opts.mode {
        SearchMode::Tree => {
            let precision_horizon = a.min_prec().saturating_add(c + 1);
            let mut stack = level_one(n, d, q);
            stack.reverse();
            let mut budget = opts.node_budget;
            while let Some(ball) = stack.pop() {
                budget = budget.checked_sub(1).ok_or_else(|| Error::BudgetExceeded(alloc::string::String::from("subspace search")))?;
                match examine(a, &ball, &field, n)? {
                    Verdict::Prune => {}
                    Verdict::Contract(t) => found.push(converge(a, t, target)?),
                    Verdict::Split => {
                        // beyond this level T(S) is no better known than A
                        if ball.level > precision_horizon {
                            return Err(precision("Frobenius matrix is not known precisely enough to separate stable subspaces"));
                        }
                        if ball.level >= opts.max_depth {
                            return Err(Error::NonConvergence(opts.max_depth));
                        }
                        let mut kids = ball.children(q);
                        kids.reverse();
                        stack.extend(kids);
                    }
                }
            }
        }
        SearchMode::Flat { seed_precision } => {
            let bound = c / (p - 1);
            if seed_precision <= bound {
                return Err(Error::SeedPrecisionTooSmall { seed: seed_precision, bound });
            }
            let mut seeds = level_one(n, d, q);
            for _ in 1..seed_precision {
                seeds = seeds.iter().flat_map(|b| b.children(q)).collect();
                if seeds.len() > opts.node_budget {
                    return Err(Error::BudgetExceeded(alloc::string::String::from("flat seed set")));
                }
            }
            for seed in &seeds {
                let s = seed.chart(&field, n);
                let t = frobenius_image(a, &s)?;
                let pt = t.precision();
                if pt >= 1 && !t.agrees_below(&s, pt.min(seed_precision)) {
                    continue;
                }
                if pt <= seed_precision {
                    return Err(Error::SeedPrecisionTooSmall { seed: seed_precision, bound });
                }
                let x = converge(a, t, target)?;
                if !found.iter().any(|y: &PhiStableSubspace| y.chart.agrees_with(&x.chart)) {
                    found.push(x);
                }
            }
        }
    }
    Ok(found)
}

pub fn enumerate_phi_stable_subspaces(m: &EtalePhiModule, d: usize, opts: &EnumerationOptions) -> Result<Vec<PhiStableSubspace>> {
    stable_subspaces_of_matrix(m.frobenius_matrix(), d, opts)
}

/// Stable subspaces of every dimension `0..=n`, indexed by dimension.
pub fn enumerate_all(m: &EtalePhiModule, opts: &EnumerationOptions) -> Result<Vec<Vec<PhiStableSubspace>>> {
    (0..=m.dim()).map(|d| enumerate_phi_stable_subspaces(m, d, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(m: &SeriesMatrix, d: usize) -> usize {
        stable_subspaces_of_matrix(m, d, &EnumerationOptions::default()).unwrap().len()
    }

    #[test]
    fn identity_gives_rational_grassmannian() {
        for (q, n, d, expected) in [(2, 2, 1, 3), (2, 3, 1, 7), (2, 3, 2, 7), (3, 2, 1, 4), (2, 4, 2, 35), (4, 2, 1, 5)] {
            let f = Field::with_size(q).unwrap();
            assert_eq!(count(&SeriesMatrix::identity(&f, n), d), expected, "q={q} n={n} d={d}");
        }
    }

    #[test]
    fn diagonal_lines_over_f2() {
        // besides e1 and e2, the line of u*e1 + e2 is stable:
        // phi(u e1 + e2) = u^2 e1 + u e2 = u (u e1 + e2)
        let f = Field::new(2, 1).unwrap();
        let a = SeriesMatrix::diagonal_u(&f, &[0, 1]);
        let lines = stable_subspaces_of_matrix(&a, 1, &EnumerationOptions::default()).unwrap();
        assert_eq!(lines.len(), 3);
        let mut seen: Vec<(usize, LaurentSeries)> = lines
            .iter()
            .map(|l| {
                let r = l.chart.pivots()[0];
                (r, l.chart.basis().get(1 - r, 0).clone())
            })
            .collect();
        seen.sort_by_key(|(r, x)| (*r, !x.is_zero_at_prec()));
        assert_eq!(seen[0].0, 0);
        assert!(seen[0].1.is_zero_at_prec());
        assert!(seen[1].1.is_zero_at_prec());
        assert!(seen[2].1.agrees_with(&LaurentSeries::u_pow(1)));
        // over F_3 a stable (y, 1) would need 2·val(y) = 1: only e1, e2
        let f3 = Field::new(3, 1).unwrap();
        let a3 = SeriesMatrix::diagonal_u(&f3, &[0, 1]);
        assert_eq!(count(&a3, 1), 2);
    }

    #[test]
    fn antidiagonal_has_no_line() {
        let f = Field::new(2, 1).unwrap();
        let a = SeriesMatrix::from_fn(&f, 2, 2, |i, j| match (i, j) {
            (0, 1) => LaurentSeries::u_pow(1),
            (1, 0) => LaurentSeries::one(),
            _ => LaurentSeries::exact_zero(),
        });
        assert_eq!(count(&a, 1), 0);
    }

    #[test]
    fn flat_mode_agrees_and_checks_seed_bound() {
        let f = Field::new(2, 1).unwrap();
        let a = SeriesMatrix::diagonal_u(&f, &[0, 2]);
        let tree = stable_subspaces_of_matrix(&a, 1, &EnumerationOptions::default()).unwrap();
        let flat_opts = EnumerationOptions { mode: SearchMode::Flat { seed_precision: 4 }, ..Default::default() };
        let flat = stable_subspaces_of_matrix(&a, 1, &flat_opts).unwrap();
        assert_eq!(tree.len(), flat.len());
        for x in &tree {
            assert!(flat.iter().any(|y| y.chart.agrees_with(&x.chart)));
        }
        let bad = EnumerationOptions { mode: SearchMode::Flat { seed_precision: 1 }, ..Default::default() };
        let a = SeriesMatrix::diagonal_u(&f, &[0, 3]);
        assert!(matches!(stable_subspaces_of_matrix(&a, 1, &bad), Err(Error::SeedPrecisionTooSmall { .. })));
    }
}
