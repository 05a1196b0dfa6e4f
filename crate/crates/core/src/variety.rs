//! Points of Kisin varieties: lattices of bounded Hodge type in a fixed
//! étale φ-module, their HN strata and contact-set invariants.
//!
//! Hodge types are weakly increasing integer vectors `ν = (a₁ ≤ … ≤ a_n)`
//! with Hodge polygon `P_ν(i) = a₁ + … + a_i`.
//!
//! Window bound. Let `L = g·L₀` have Hodge type in `[a₁, a_n]` and let the
//! elementary divisors of `A` lie in `[α₁, α_n]`. Comparing the smallest
//! (or largest) elementary divisor `s` of `g` on the two sides of
//! `A·φ(g)·L₀ = g·B·L₀` gives `α₁ + p·s ≤ s + a_n` and `s + a₁ ≤ α_n + p·s`,
//! so every elementary divisor of `g` lies in
//! `[⌈(a₁ - α_n)/(p-1)⌉, ⌊(a_n - α₁)/(p-1)⌋]`. Enumerating that window is
//! therefore complete.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::Fq;
use crate::hn::{cloud_from_subspaces, hull_of_cloud};
use crate::matrix::SeriesMatrix;
use crate::module::{BaseChange, EtalePhiModule, KisinLattice};
use crate::polygon::Polygon;
use crate::rational::Q;
use crate::series::LaurentSeries;
use crate::smith::{elementary_divisors, val_det};
use crate::subspace::{enumerate_all, EnumerationOptions, PhiStableSubspace};

/// A weakly increasing integer vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HodgeType(Vec<i64>);

impl HodgeType {
    /// Sorts its input.
    pub fn new(mut a: Vec<i64>) -> Self {
        a.sort();
        HodgeType(a)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn polygon(&self) -> Polygon {
        Polygon::from_unit_slopes(&self.0)
    }

    /// `P_ν(i)`.
    pub fn partial_sum(&self, i: usize) -> i64 {
        self.0[..i].iter().sum()
    }
}

fn partial_sums(v: &[Q]) -> Vec<Q> {
    let mut sorted = v.to_vec();
    sorted.sort();
    sorted
        .iter()
        .scan(Q::zero(), |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn dominates(lower: &[Q], upper: &[Q]) -> Result<bool> {
    if lower.len() != upper.len() {
        return Err(Error::LengthMismatch(lower.len(), upper.len()));
    }
    let (a, b) = (partial_sums(lower), partial_sums(upper));
    Ok(a.last() == b.last() && a.iter().zip(&b).all(|(x, y)| x <= y))
}

/// Bruhat order `ν′ ≤ ν`: partial sums of `ν′` dominate those of `ν`, with
/// equal totals.
pub fn hodge_dominance(nu_prime: &[i64], nu: &[i64]) -> Result<bool> {
    if nu_prime.len() != nu.len() {
        return Err(Error::LengthMismatch(nu_prime.len(), nu.len()));
    }
    let a: Vec<Q> = nu_prime.iter().map(|&x| Q::from(x)).collect();
    let b: Vec<Q> = nu.iter().map(|&x| Q::from(x)).collect();
    dominates(&b, &a)
}

/// `λ′ ≺ λ`: `λ′ - λ` is a nonnegative combination of the coroots
/// `e_i - e_{i+1}` after sorting both increasingly, i.e. the partial sums of
/// `λ′` are at least those of `λ` and the totals agree.
pub fn prec_order(lambda_prime: &[Q], lambda: &[Q]) -> Result<bool> {
    if lambda_prime.len() != lambda.len() {
        return Err(Error::LengthMismatch(lambda_prime.len(), lambda.len()));
    }
    dominates(lambda, lambda_prime)
}

/// Whether the enumeration provably contains every point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    Certified,
    WindowLimited,
}

#[derive(Clone, Debug)]
pub struct VarietyPoint {
    pub lattice: KisinLattice,
    /// Diagonal exponents of the lower Hermite basis.
    pub diagonal: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct VarietyEnumeration {
    pub module: EtalePhiModule,
    pub nu: HodgeType,
    /// Elementary divisors of lattice bases range over `[window.0, window.1]`.
    pub window: (i64, i64),
    pub points: Vec<VarietyPoint>,
    pub completeness: Completeness,
    /// Why the point set is empty before any lattice was examined, e.g.
    /// [`Error::DetConstraintInfeasible`].
    pub empty_reason: Option<Error>,
}

#[derive(Clone, Copy, Debug)]
pub struct VarietyOptions {
    /// Symmetric cap `[-W, W]` on the window; `None` uses the proven bound.
    pub window: Option<i64>,
    /// Points over `F_{q^m}`.
    pub extension: u32,
    /// Largest number of candidate lattices examined.
    pub budget: u64,
}

impl Default for VarietyOptions {
    fn default() -> Self {
        VarietyOptions { window: None, extension: 1, budget: 2_000_000 }
    }
}

/// `D = (Σ a_i - val det A)/(p-1)`, the forced `val det g`.
pub fn determinant_constraint(m: &EtalePhiModule, nu: &HodgeType) -> Result<i64> {
    let num = nu.total() - m.val_det()?;
    let p1 = m.p() as i64 - 1;
    if num % p1 != 0 {
        return Err(Error::DetConstraintInfeasible);
    }
    Ok(num / p1)
}

/// The proven window for elementary divisors of lattice bases.
pub fn window_bound(m: &EtalePhiModule, nu: &HodgeType) -> Result<(i64, i64)> {
    let alpha = elementary_divisors(m.frobenius_matrix())?;
    let p1 = m.p() as i64 - 1;
    let (a1, an) = (nu.0[0], *nu.0.last().unwrap());
    let lo = -((alpha.last().unwrap() - a1).div_euclid(p1));
    let hi = (an - alpha[0]).div_euclid(p1);
    Ok((lo, hi))
}

/// Exact inverse of a lower-triangular matrix with monomial diagonal.
pub fn lower_triangular_inverse(g: &SeriesMatrix) -> Result<SeriesMatrix> {
    let field = g.field().clone();
    let f = &*field;
    let n = g.rows();
    let mut x = SeriesMatrix::zeros(&field, n, n);
    for i in 0..n {
        let d = g.get(i, i);
        if d.coeffs().len() != 1 {
            return Err(Error::Internal(String::from("diagonal entry is not a monomial")));
        }
        let dinv = d.inv(f)?;
        x.set(i, i, dinv.clone());
        for j in 0..i {
            let mut acc = LaurentSeries::exact_zero();
            for k in j..i {
                acc = acc.add(&g.get(i, k).mul(x.get(k, j), f), f);
            }
            x.set(i, j, acc.mul(&dinv, f).neg(f));
        }
    }
    Ok(x)
}

/// Lower Hermite bases with diagonal `u^{d_i}`, `d_i ∈ [lo, hi]`,
/// `Σ d_i = total`, and off-diagonal exponents in `[lo, d_i)`.
fn hermite_bases(field: &crate::field::Field, n: usize, lo: i64, hi: i64, total: i64, budget: u64) -> Result<Vec<SeriesMatrix>> {
    let q = field.size() as u64;
    let mut diags: Vec<Vec<i64>> = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, lo: i64, hi: i64, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let k = n - cur.len();
        if k == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for d in lo..=hi {
            let rest = left - d;
            if rest < lo * (k as i64 - 1) || rest > hi * (k as i64 - 1) {
                continue;
            }
            cur.push(d);
            rec(n, lo, hi, rest, cur, out);
            cur.pop();
        }
    }
    rec(n, lo, hi, total, &mut cur, &mut diags);
    let mut count: u64 = 0;
    for d in &diags {
        let free: u64 = (0..n).map(|i| i as u64 * (d[i] - lo) as u64).sum();
        count = count.saturating_add(q.saturating_pow(free as u32));
    }
    if count > budget {
        return Err(Error::BudgetExceeded(alloc::format!("{count} lattice bases in the window")));
    }
    let mut out = Vec::with_capacity(count as usize);
    for d in diags {
        // slots: (row, col, exponent)
        let mut slots = Vec::new();
        for i in 0..n {
            for j in 0..i {
                for k in lo..d[i] {
                    slots.push((i, j, k));
                }
            }
        }
        let total = q.pow(slots.len() as u32);
        for mut idx in 0..total {
            let mut g = SeriesMatrix::diagonal_u(field, &d);
            let mut coeffs: BTreeMap<(usize, usize), Vec<(i64, Fq)>> = BTreeMap::new();
            for &(i, j, k) in &slots {
                let c = Fq((idx % q) as u16);
                idx /= q;
                if !c.is_zero() {
                    coeffs.entry((i, j)).or_default().push((k, c));
                }
            }
            for ((i, j), terms) in coeffs {
                let start = terms[0].0;
                let end = terms.last().unwrap().0;
                let mut cs = vec![Fq::ZERO; (end - start + 1) as usize];
                for (k, c) in terms {
                    cs[(k - start) as usize] = c;
                }
                g.set(i, j, LaurentSeries::from_coeffs(start, cs, crate::series::EXACT));
            }
            out.push(g);
        }
    }
    Ok(out)
}

/// All lattices in `m` (over `F_{q^ext}`) with Hodge type `≤ ν`.
pub fn enumerate_points(m: &EtalePhiModule, nu: &HodgeType, opts: &VarietyOptions) -> Result<VarietyEnumeration> {
    if nu.len() != m.dim() {
        return Err(Error::LengthMismatch(nu.len(), m.dim()));
    }
    let m = if opts.extension > 1 { m.base_change(BaseChange::Unramified(opts.extension))? } else { m.clone() };
    let total = match determinant_constraint(&m, nu) {
        Ok(t) => t,
        Err(e @ Error::DetConstraintInfeasible) => {
            return Ok(VarietyEnumeration {
                module: m,
                nu: nu.clone(),
                window: (0, -1),
                points: Vec::new(),
                completeness: Completeness::Certified,
                empty_reason: Some(e),
            });
        }
        Err(e) => return Err(e),
    };
    let (plo, phi) = window_bound(&m, nu)?;
    let (lo, hi, completeness) = match opts.window {
        Some(w) if plo < -w || phi > w => ((plo).max(-w), phi.min(w), Completeness::WindowLimited),
        _ => (plo, phi, Completeness::Certified),
    };
    let mut points = Vec::new();
    if lo <= hi {
        let n = m.dim();
        for g in hermite_bases(m.field(), n, lo, hi, total, opts.budget)? {
            let ginv = lower_triangular_inverse(&g)?;
            // u^{hi}·L₀ ⊆ L
            if ginv.val_lower_bound() < -hi {
                continue;
            }
            let b = ginv.mul(m.frobenius_matrix())?.mul(&g.frobenius())?;
            let divisors = elementary_divisors(&b)?;
            if !hodge_dominance(&divisors, nu.entries())? {
                continue;
            }
            let diagonal: Vec<i64> = (0..n).map(|i| g.get(i, i).val()).collect();
            let lattice = m.lattice(g)?;
            points.push(VarietyPoint { lattice, diagonal });
        }
    }
    Ok(VarietyEnumeration { module: m, nu: nu.clone(), window: (lo, hi), points, completeness, empty_reason: None })
}

/// The semilinear determinant identity for a point.
pub fn satisfies_determinant_constraint(en: &VarietyEnumeration, point: &VarietyPoint) -> Result<bool> {
    Ok(val_det(point.lattice.basis())? == determinant_constraint(&en.module, &en.nu)?)
}

/// Stable subspaces of the ambient module, shared by all points.
pub fn ambient_subspaces(en: &VarietyEnumeration, opts: &EnumerationOptions) -> Result<Vec<Vec<PhiStableSubspace>>> {
    enumerate_all(&en.module, opts)
}

/// Normalized HN polygon of a point.
pub fn point_polygon(point: &VarietyPoint, subspaces: &[Vec<PhiStableSubspace>]) -> Result<Polygon> {
    Ok(hull_of_cloud(&cloud_from_subspaces(&point.lattice, subspaces)?))
}

/// Every realized slope, scaled by `e`, must lie in `[a₁, a_n]`; the
/// candidate enumeration relies on it. Not known to be a theorem, so it is
/// checked rather than assumed.
pub fn check_slope_range(en: &VarietyEnumeration, polygons: &[Polygon]) -> Result<()> {
    let a = en.nu.entries();
    let (lo, hi) = (Q::from(a[0]), Q::from(a[a.len() - 1]));
    let e = Q::from(en.module.e() as i64);
    for p in polygons {
        if p.slopes().iter().any(|s| *s * e < lo || *s * e > hi) {
            return Err(Error::Internal(alloc::format!("realized slope outside the Hodge range: {:?}", p.slopes())));
        }
    }
    Ok(())
}

/// Groups point indices by polygon.
pub fn strata(polygons: &[Polygon]) -> BTreeMap<Polygon, Vec<usize>> {
    let mut out: BTreeMap<Polygon, Vec<usize>> = BTreeMap::new();
    for (i, p) in polygons.iter().enumerate() {
        out.entry(p.clone()).or_default().push(i);
    }
    out
}

/// HN polygons of all points, grouped.
pub fn stratify(en: &VarietyEnumeration, opts: &EnumerationOptions) -> Result<(Vec<Polygon>, BTreeMap<Polygon, Vec<usize>>)> {
    let subs = ambient_subspaces(en, opts)?;
    let polys: Vec<Polygon> = en.points.iter().map(|p| point_polygon(p, &subs)).collect::<Result<_>>()?;
    check_slope_range(en, &polys)?;
    let groups = strata(&polys);
    Ok((polys, groups))
}

/// `e·HN(x) ≥ P_ν(x)` at every breakpoint of either polygon, with equal
/// endpoints.
pub fn hn_over_hodge(polygon: &Polygon, nu: &HodgeType, e: u32) -> bool {
    let scaled = polygon.scale_down(Q::from(1), Q::new(1, e as i64));
    scaled.end() == nu.polygon().end() && scaled.lies_above(&nu.polygon())
}

pub fn hn_over_hodge_check(en: &VarietyEnumeration, polygons: &[Polygon]) -> bool {
    let e = en.module.e();
    polygons.iter().all(|p| hn_over_hodge(p, &en.nu, e))
}

/// The contact set `J = {d ∈ 1..n-1 : e·P(d) = P_ν(d)}`.
///
/// The weight-pairing criterion pairs the `d`-th fundamental weight with
/// the top `d` entries of a cocharacter; since both polygons have the same
/// total, equality of top-`d` sums is contact at `n - d`. Taken over all `d`
/// both indexings describe the same family of strata, and the contact set
/// itself is what is stored.
pub fn component_invariant(polygon: &Polygon, nu: &HodgeType, e: u32) -> Result<Vec<usize>> {
    if !hn_over_hodge(polygon, nu, e) {
        return Err(Error::NotDominating);
    }
    let scaled = polygon.scale_down(Q::from(1), Q::new(1, e as i64));
    let n = nu.len();
    Ok((1..n).filter(|&d| scaled.eval(Q::from(d as i64)) == Some(Q::from(nu.partial_sum(d)))).collect())
}

/// All convex polygons from `(0, 0)` to `(n, Σa)` with integral vertices,
/// lying on or above `P_ν`, with slopes in `[a₁, a_n]`, each with its
/// contact set (for `e = 1`).
pub fn enumerate_candidate_polygons(nu: &HodgeType) -> Vec<(Polygon, Vec<usize>)> {
    let n = nu.len() as i64;
    let a = nu.entries();
    let (a1, an) = (a[0], a[a.len() - 1]);
    let hodge = nu.polygon();
    let mut out = Vec::new();
    let mut path = vec![(0i64, 0i64)];
    fn above(hodge: &Polygon, from: (i64, i64), to: (i64, i64)) -> bool {
        (from.0..=to.0).all(|x| {
            let y = Q::from(from.1) + Q::new((to.1 - from.1) * (x - from.0), to.0 - from.0);
            hodge.eval(Q::from(x)).is_some_and(|h| y >= h)
        })
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(n: i64, a1: i64, an: i64, total: i64, hodge: &Polygon, last: Option<Q>, path: &mut Vec<(i64, i64)>, out: &mut Vec<Polygon>) {
        let (x, y) = *path.last().unwrap();
        if x == n {
            if y == total {
                let pts: Vec<(Q, Q)> = path.iter().map(|&(x, y)| (Q::from(x), Q::from(y))).collect();
                out.push(Polygon::lower_hull(&pts));
            }
            return;
        }
        for nx in x + 1..=n {
            let dx = nx - x;
            for ny in y + a1 * dx..=y + an * dx {
                let s = Q::new(ny - y, dx);
                if last.is_some_and(|l| s <= l) || !above(hodge, (x, y), (nx, ny)) {
                    continue;
                }
                path.push((nx, ny));
                rec(n, a1, an, total, hodge, Some(s), path, out);
                path.pop();
            }
        }
    }
    let mut polys = Vec::new();
    rec(n, a1, an, nu.total(), &hodge, None, &mut path, &mut polys);
    polys.sort();
    for p in polys {
        let j = component_invariant(&p, nu, 1).expect("candidates dominate the Hodge polygon");
        out.push((p, j));
    }
    out
}

/// For each candidate `P₀`, the points whose polygon lies on or above it.
/// Sets only shrink as `P₀` rises.
pub fn semicontinuity(polygons: &[Polygon], candidates: &[Polygon]) -> Vec<(Polygon, Vec<usize>)> {
    candidates
        .iter()
        .map(|p0| (p0.clone(), polygons.iter().enumerate().filter(|(_, p)| p.lies_above(p0)).map(|(i, _)| i).collect()))
        .collect()
}

/// `J` recomputed through exterior powers: `d ∈ J` iff `∧^d` of the lattice,
/// with Frobenius divided by `u^{P_ν(d)}`, has a nonzero étale part.
pub fn contact_via_exterior_powers(point: &VarietyPoint, nu: &HodgeType, opts: &EnumerationOptions) -> Result<Vec<usize>> {
    let l = &point.lattice;
    let n = l.rank();
    let mut out = Vec::new();
    for d in 1..n {
        let wedge = l.exterior_power(d)?;
        let shifted = KisinLattice::from_frobenius(l.field(), l.e(), wedge.frobenius_matrix().shift(-nu.partial_sum(d)))?;
        if !shifted.is_effective() {
            return Err(Error::NotDominating);
        }
        let subs = enumerate_all(shifted.parent(), opts)?;
        let cloud = cloud_from_subspaces(&shifted, &subs)?;
        if cloud.iter().any(|s| s.rank > 0 && s.degree.is_zero()) {
            out.push(d);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn orders() {
        assert!(hodge_dominance(&[0, 1], &[0, 1]).unwrap());
        assert!(prec_order(&[q(0, 1); 3], &[q(-1, 1), q(0, 1), q(1, 1)]).unwrap());
        assert!(!prec_order(&[q(-1, 1), q(0, 1), q(1, 1)], &[q(0, 1); 3]).unwrap());
        assert!(matches!(hodge_dominance(&[0], &[0, 1]), Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn identity_module_colength_one() {
        let f = Field::new(2, 1).unwrap();
        let m = EtalePhiModule::new(&f, 1, SeriesMatrix::identity(&f, 2)).unwrap();
        let nu = HodgeType::new(vec![0, 1]);
        let en = enumerate_points(&m, &nu, &VarietyOptions::default()).unwrap();
        assert_eq!(en.window, (0, 1));
        assert_eq!(en.completeness, Completeness::Certified);
        assert_eq!(en.points.len(), 3);
        let (polys, groups) = stratify(&en, &EnumerationOptions::default()).unwrap();
        assert_eq!(groups.len(), 1);
        assert!(hn_over_hodge_check(&en, &polys));
        for p in &en.points {
            assert!(satisfies_determinant_constraint(&en, p).unwrap());
        }
        let f3 = Field::new(3, 1).unwrap();
        let m3 = EtalePhiModule::new(&f3, 1, SeriesMatrix::identity(&f3, 2)).unwrap();
        let empty = enumerate_points(&m3, &nu, &VarietyOptions::default()).unwrap();
        assert!(empty.points.is_empty());
        assert_eq!(empty.empty_reason, Some(Error::DetConstraintInfeasible));
    }

    #[test]
    fn contact_sets_agree_with_exterior_powers() {
        let f = Field::new(2, 1).unwrap();
        let u = LaurentSeries::monomial(Fq::ONE, 1);
        let mut a = SeriesMatrix::identity(&f, 2);
        a.set(0, 1, u);
        let m = EtalePhiModule::new(&f, 1, a).unwrap();
        for nu in [vec![0, 1], vec![0, 2], vec![-1, 1]] {
            let nu = HodgeType::new(nu);
            let en = enumerate_points(&m, &nu, &VarietyOptions::default()).unwrap();
            assert!(!en.points.is_empty());
            let (polys, _) = stratify(&en, &EnumerationOptions::default()).unwrap();
            for (pt, poly) in en.points.iter().zip(&polys) {
                let j = component_invariant(poly, &nu, 1).unwrap();
                assert_eq!(contact_via_exterior_powers(pt, &nu, &EnumerationOptions::default()).unwrap(), j);
            }
        }
    }

    #[test]
    fn candidate_counts() {
        assert_eq!(enumerate_candidate_polygons(&HodgeType::new(vec![0, 0, 1])).len(), 3);
        assert_eq!(enumerate_candidate_polygons(&HodgeType::new(vec![-1, 0, 1])).len(), 4);
        let flat = enumerate_candidate_polygons(&HodgeType::new(vec![0, 0]));
        assert_eq!(flat.len(), 1);
        assert_eq!(flat[0].1, vec![1]);
    }

    #[test]
    fn contact_sets() {
        let nu = HodgeType::new(vec![0, 0, 1]);
        let line = Polygon::from_segments(&[(Q::from(3), q(1, 3))]);
        assert_eq!(component_invariant(&line, &nu, 1).unwrap(), Vec::<usize>::new());
        let mid = Polygon::from_segments(&[(Q::from(1), q(0, 1)), (Q::from(2), q(1, 2))]);
        assert_eq!(component_invariant(&mid, &nu, 1).unwrap(), vec![1]);
        assert_eq!(component_invariant(&nu.polygon(), &nu, 1).unwrap(), vec![1, 2]);
    }
}
