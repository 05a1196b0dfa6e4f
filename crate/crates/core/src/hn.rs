//! Strict subobjects, the Harder–Narasimhan polygon and filtration.
//!
//! Strict subobjects of a lattice `𝔐` correspond to φ-stable subspaces `S` of
//! its generic fiber via `S ↦ S ∩ 𝔐`. In lattice coordinates `S ∩ 𝔐` is the
//! saturated chart `V` of `S`, and its Frobenius matrix is
//! `B_S = (B·φ(V))[R]`, the pivot rows of `B·φ(V) = V·B_S`.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{saturate, Chart};
use crate::matrix::SeriesMatrix;
use crate::module::{BaseChange, KisinLattice};
use crate::polygon::Polygon;
use crate::rational::Q;
use crate::series::LaurentSeries;
use crate::smith::{inverse, val_det, ZeroPolicy};
use crate::subspace::{enumerate_all, EnumerationOptions, PhiStableSubspace};

#[derive(Clone, Copy, Debug)]
pub struct HnOptions {
    pub enumeration: EnumerationOptions,
    /// Subobjects are searched over `F_{q^m}` for this `m`.
    pub extension: u32,
}

impl Default for HnOptions {
    fn default() -> Self {
        HnOptions { enumeration: EnumerationOptions::default(), extension: 1 }
    }
}

/// A strict subobject `S ∩ 𝔐`.
#[derive(Clone, Debug)]
pub struct Subobject {
    /// Saturated chart in lattice coordinates.
    pub chart: Chart,
    /// Frobenius matrix in the chart basis.
    pub frob: SeriesMatrix,
    pub rank: usize,
    pub degree: Q,
}

impl Subobject {
    pub fn slope(&self) -> Q {
        self.degree / Q::from(self.rank as i64)
    }

    pub fn point(&self) -> (Q, Q) {
        (Q::from(self.rank as i64), self.degree)
    }

    pub fn as_lattice(&self, l: &KisinLattice) -> Result<KisinLattice> {
        KisinLattice::from_frobenius(l.field(), l.e(), self.frob.clone())
    }
}

/// `S ∩ 𝔐` for a subspace given by its chart in lattice coordinates.
pub fn strict_subobject(l: &KisinLattice, chart: &Chart) -> Result<Subobject> {
    let d = chart.dim();
    let e = l.e() as i64;
    if d == 0 {
        let field = l.field();
        return Ok(Subobject { chart: chart.clone(), frob: SeriesMatrix::zeros(field, 0, 0), rank: 0, degree: Q::zero() });
    }
    let w = l.frobenius_matrix().mul(&chart.basis().frobenius())?;
    let cols: Vec<usize> = (0..d).collect();
    let frob = w.submatrix(chart.pivots(), &cols);
    debug_assert!(w.sub(&chart.basis().mul(&frob)?)?.is_zero_at_prec(), "subspace is not φ-stable");
    let degree = Q::new(val_det(&frob)?, e);
    Ok(Subobject { chart: chart.clone(), frob, rank: d, degree })
}

/// Moves a subspace of the ambient module into the coordinates of `l`.
pub fn to_lattice_coordinates(l: &KisinLattice, ginv: &SeriesMatrix, s: &PhiStableSubspace) -> Result<Chart> {
    if s.dim() == 0 {
        return Ok(Chart::zero(l.field(), l.rank()));
    }
    saturate(&ginv.mul(s.chart.basis())?, ZeroPolicy::Strict)
}

/// The subobject cloud of `l` given the stable subspaces of its generic
/// fiber (indexed by dimension), as returned by [`enumerate_all`].
pub fn cloud_from_subspaces(l: &KisinLattice, subspaces: &[Vec<PhiStableSubspace>]) -> Result<Vec<Subobject>> {
    let ginv = inverse(l.basis())?;
    let mut out = Vec::new();
    for layer in subspaces {
        for s in layer {
            let chart = to_lattice_coordinates(l, &ginv, s)?;
            out.push(strict_subobject(l, &chart)?);
        }
    }
    Ok(out)
}

/// Every strict subobject of `l`, including `0` and `l` itself.
pub fn subobject_cloud(l: &KisinLattice, opts: &HnOptions) -> Result<Vec<Subobject>> {
    let l = extend(l, opts.extension)?;
    let subspaces = enumerate_all(l.parent(), &opts.enumeration)?;
    cloud_from_subspaces(&l, &subspaces)
}

fn extend(l: &KisinLattice, m: u32) -> Result<KisinLattice> {
    if m == 1 {
        Ok(l.clone())
    } else {
        l.base_change(BaseChange::Unramified(m))
    }
}

/// Hull of a cloud in `(rank, degree)` coordinates over `F_q`.
pub fn hull_of_cloud(cloud: &[Subobject]) -> Polygon {
    let pts: Vec<(Q, Q)> = cloud.iter().map(Subobject::point).collect();
    Polygon::lower_hull(&pts)
}

/// HN polygon counting ranks and degrees as `F_p`-lengths: from `(0, 0)` to
/// `(n·r, deg·r)` with `q = p^r`.
pub fn hn_polygon(l: &KisinLattice, opts: &HnOptions) -> Result<Polygon> {
    let cloud = subobject_cloud(l, opts)?;
    let r = Q::from(l.field().degree() as i64);
    Ok(hull_of_cloud(&cloud).scale_down(r.recip(), r.recip()))
}

/// HN polygon with both axes divided by `[F:F_p]`, from `(0, 0)` to `(n, deg)`.
pub fn hn_polygon_normalized(l: &KisinLattice, opts: &HnOptions) -> Result<Polygon> {
    let cloud = subobject_cloud(l, opts)?;
    Ok(hull_of_cloud(&cloud))
}

/// The HN filtration, with the polygon it realizes.
#[derive(Clone, Debug)]
pub struct HnFiltration {
    /// `0 = 𝔐₀ ⊂ 𝔐₁ ⊂ … ⊂ 𝔐_k = 𝔐`.
    pub steps: Vec<Subobject>,
    pub polygon: Polygon,
    /// The lattice the steps live in (after any coefficient extension).
    pub lattice: KisinLattice,
}

impl HnFiltration {
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The graded pieces `𝔐_{i+1}/𝔐_i` as lattices.
    pub fn gradeds(&self) -> Result<Vec<KisinLattice>> {
        self.steps.windows(2).map(|w| quotient(&self.lattice, &w[1], &w[0])).collect()
    }

    pub fn graded_slopes(&self) -> Vec<Q> {
        self.polygon.slopes()
    }
}

/// HN filtration from an already computed cloud: the unique witness at each
/// hull vertex, checked to be nested.
pub fn hn_filtration_from_cloud(l: &KisinLattice, cloud: &[Subobject]) -> Result<HnFiltration> {
    let polygon = hull_of_cloud(cloud);
    let mut steps: Vec<Subobject> = Vec::new();
    for &v in polygon.breakpoints() {
        let mut at: Vec<&Subobject> = cloud.iter().filter(|s| s.point() == v).collect();
        if at.len() > 1 {
            // distinct witnesses at a vertex contradict uniqueness of the step
            let first = at[0];
            if at.iter().any(|s| !s.chart.agrees_with(&first.chart)) {
                return Err(Error::AmbiguousHnStep);
            }
            at.truncate(1);
        }
        let step = at.pop().ok_or_else(|| Error::Internal(String::from("hull vertex without witness")))?;
        if let Some(prev) = steps.last() {
            if !step.chart.contains_chart(&prev.chart) {
                return Err(Error::FiltrationWitnessNotNested);
            }
        }
        steps.push(step.clone());
    }
    Ok(HnFiltration { steps, polygon, lattice: l.clone() })
}

pub fn hn_filtration(l: &KisinLattice, opts: &HnOptions) -> Result<HnFiltration> {
    let l = extend(l, opts.extension)?;
    let subspaces = enumerate_all(l.parent(), &opts.enumeration)?;
    hn_filtration_from_cloud(&l, &cloud_from_subspaces(&l, &subspaces)?)
}

pub fn is_semistable(l: &KisinLattice, opts: &HnOptions) -> Result<bool> {
    Ok(hn_polygon_normalized(l, opts)?.is_single_segment())
}

/// Rank of the maximal étale subobject of an effective lattice.
pub fn etale_rank(l: &KisinLattice, opts: &HnOptions) -> Result<i64> {
    if !l.is_effective() {
        return Err(Error::NotEffective);
    }
    let p = hn_polygon_normalized(l, opts)?;
    Ok(match p.segments().first() {
        Some((len, s)) if s.is_zero() => len.to_integer(),
        _ => 0,
    })
}

/// The quotient `big / small` of two nested strict subobjects of `l`, as a
/// lattice in its own right.
pub fn quotient(l: &KisinLattice, big: &Subobject, small: &Subobject) -> Result<KisinLattice> {
    let field = l.field().clone();
    let a = big.rank;
    let inner = if small.rank == 0 { Chart::zero(&field, a) } else { big.chart.restrict(&small.chart)? };
    let b = inner.dim();
    // complete the chart by the unit vectors of its non-pivot rows
    let mut q = SeriesMatrix::zeros(&field, a, a);
    for j in 0..b {
        for i in 0..a {
            q.set(i, j, inner.basis().get(i, j).clone());
        }
    }
    let others: Vec<usize> = (0..a).filter(|i| !inner.pivots().contains(i)).collect();
    for (k, &i) in others.iter().enumerate() {
        q.set(i, b + k, LaurentSeries::one());
    }
    let conj = inverse(&q)?.mul(&big.frob)?.mul(&q.frobenius())?;
    let rest: Vec<usize> = (b..a).collect();
    let frob = conj.submatrix(&rest, &rest);
    KisinLattice::from_frobenius(&field, l.e(), frob)
}

/// Quotient of `l` by one strict subobject.
pub fn quotient_lattice(l: &KisinLattice, sub: &Subobject) -> Result<KisinLattice> {
    let full = strict_subobject(l, &Chart::full(l.field(), l.rank()))?;
    quotient(l, &full, sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn lattice(f: &Field, b: SeriesMatrix) -> KisinLattice {
        KisinLattice::from_frobenius(f, 1, b).unwrap()
    }

    fn antidiag(f: &Field) -> SeriesMatrix {
        SeriesMatrix::from_fn(f, 2, 2, |i, j| match (i, j) {
            (0, 1) => LaurentSeries::u_pow(1),
            (1, 0) => LaurentSeries::one(),
            _ => LaurentSeries::exact_zero(),
        })
    }

    #[test]
    fn diagonal_cloud_and_filtration() {
        let f = Field::new(2, 1).unwrap();
        let l = lattice(&f, SeriesMatrix::diagonal_u(&f, &[0, 1]));
        let opts = HnOptions::default();
        let cloud = subobject_cloud(&l, &opts).unwrap();
        let mut pts: Vec<(Q, Q)> = cloud.iter().map(Subobject::point).collect();
        pts.sort();
        pts.dedup();
        assert_eq!(pts, vec![(q(0), q(0)), (q(1), q(0)), (q(1), q(1)), (q(2), q(1))]);
        let filt = hn_filtration_from_cloud(&l, &cloud).unwrap();
        assert_eq!(filt.polygon.breakpoints(), &[(q(0), q(0)), (q(1), q(0)), (q(2), q(1))]);
        assert_eq!(filt.len(), 2);
        assert_eq!(filt.steps[1].chart.pivots(), &[0]);
        assert!(filt.steps[1].chart.basis().get(1, 0).is_zero_at_prec());
        assert_eq!(etale_rank(&l, &opts).unwrap(), 1);
        let gr = filt.gradeds().unwrap();
        assert_eq!(gr.iter().map(|g| g.degree()).collect::<Vec<_>>(), vec![q(0), q(1)]);
    }

    #[test]
    fn antidiagonal_is_semistable() {
        let f = Field::new(2, 1).unwrap();
        let l = lattice(&f, antidiag(&f));
        let opts = HnOptions::default();
        let p = hn_polygon_normalized(&l, &opts).unwrap();
        assert_eq!(p.breakpoints(), &[(q(0), q(0)), (q(2), q(1))]);
        assert!(is_semistable(&l, &opts).unwrap());
        assert_eq!(etale_rank(&l, &opts).unwrap(), 0);
    }

    #[test]
    fn raw_polygon_counts_fp_lengths() {
        let f = Field::with_size(4).unwrap();
        let l = lattice(&f, SeriesMatrix::diagonal_u(&f, &[0, 1]));
        let raw = hn_polygon(&l, &HnOptions::default()).unwrap();
        assert_eq!(raw.end(), (q(4), q(2)));
        assert_eq!(raw.breakpoints()[1], (q(2), q(0)));
    }

    #[test]
    fn quotient_degrees_add_up() {
        let f = Field::new(3, 1).unwrap();
        let b = SeriesMatrix::from_fn(&f, 2, 2, |i, j| match (i, j) {
            (0, 0) => LaurentSeries::u_pow(1),
            (0, 1) => LaurentSeries::one(),
            (1, 1) => LaurentSeries::u_pow(2),
            _ => LaurentSeries::exact_zero(),
        });
        let l = lattice(&f, b);
        for s in subobject_cloud(&l, &HnOptions::default()).unwrap() {
            let quo = quotient_lattice(&l, &s).unwrap();
            assert_eq!(s.degree + quo.degree(), l.degree());
        }
    }
}
