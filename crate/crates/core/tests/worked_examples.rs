//! Small worked examples, checked end to end through the public API.

use std::collections::BTreeSet;

use kisin_core::filtered::{alt_degree_bound_check, deg_filtered, lattice_filtration_degree, FilteredSpace, FiltrationPair};
use kisin_core::fqlin::FqSubspace;
use kisin_core::hn::{etale_rank, hn_filtration, hn_polygon_normalized, is_semistable, subobject_cloud, HnOptions};
use kisin_core::hom::hom_space;
use kisin_core::kempf::{factor_slopes, is_semistable_subspace, kempf_filtration, KempfOptions};
use kisin_core::lattice::{lattice_intersect, Chart};
use kisin_core::module::{BaseChange, KisinLattice};
use kisin_core::polygon::Polygon;
use kisin_core::rational::Q;
use kisin_core::smith::{elementary_divisors, lattice_relative_position, ZeroPolicy};
use kisin_core::subspace::{enumerate_phi_stable_subspaces, EnumerationOptions};
use kisin_core::variety::{component_invariant, enumerate_candidate_polygons, prec_order, HodgeType};
use kisin_core::{Field, Fq, LaurentSeries, SeriesMatrix};

fn f2() -> Field {
    Field::new(2, 1).unwrap()
}

/// Matrix with monomial entries: `None` is zero, `Some(k)` is `u^k`.
fn mono(f: &Field, rows: &[&[Option<i64>]]) -> SeriesMatrix {
    SeriesMatrix::from_fn(f, rows.len(), rows[0].len(), |i, j| match rows[i][j] {
        Some(k) => LaurentSeries::u_pow(k),
        None => LaurentSeries::exact_zero(),
    })
}

fn lattice(b: SeriesMatrix) -> KisinLattice {
    let f = b.field().clone();
    KisinLattice::from_frobenius(&f, 1, b).unwrap()
}

fn antidiagonal() -> SeriesMatrix {
    mono(&f2(), &[&[None, Some(1)], &[Some(0), None]])
}

fn diag_1_u() -> SeriesMatrix {
    SeriesMatrix::diagonal_u(&f2(), &[0, 1])
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn pts(list: &[(i64, i64)]) -> BTreeSet<(Q, Q)> {
    list.iter().map(|&(x, y)| (Q::from(x), Q::from(y))).collect()
}

#[test]
fn smith_and_relative_position() {
    let f = f2();
    let m = mono(&f, &[&[Some(0), Some(0)], &[Some(1), None]]);
    assert_eq!(elementary_divisors(&m).unwrap(), vec![0, 1]);
    let b = mono(&f, &[&[Some(0), None], &[Some(0), Some(1)]]);
    assert_eq!(lattice_relative_position(&SeriesMatrix::identity(&f, 2), &b).unwrap(), vec![0, 1]);
    assert_eq!(elementary_divisors(&antidiagonal()).unwrap(), vec![0, 1]);
}

#[test]
fn intersection_with_a_line() {
    let f = f2();
    let a = mono(&f, &[&[Some(0), None], &[Some(0), Some(1)]]);
    let b = mono(&f, &[&[Some(0)], &[None]]);
    let x = lattice_intersect(&a, &b, ZeroPolicy::Strict).unwrap();
    assert_eq!(x.cols(), 1);
    assert_eq!(x.get(0, 0).valuation(), Some(1));
    assert!(x.get(1, 0).is_zero_at_prec());
}

#[test]
fn degrees_of_basic_lattices() {
    let l = lattice(antidiagonal());
    assert_eq!((l.degree(), l.slope()), (Q::from(1), q(1, 2)));
    assert_eq!(l.hodge_divisors(), &[0, 1]);
    for e in [1u32, 2] {
        let f = Field::with_size(4).unwrap();
        let one = KisinLattice::from_frobenius(&f, e, SeriesMatrix::identity(&f, 1)).unwrap();
        assert_eq!(one.twist(1).slope(), Q::from(1));
        assert_eq!(one.twist(-2).degree(), Q::from(-2));
    }
}

#[test]
fn tensor_wedge_and_base_change_degrees() {
    let a = lattice(antidiagonal());
    let b = lattice(diag_1_u()).twist(1);
    assert_eq!(a.tensor(&b).unwrap().slope(), a.slope() + b.slope());
    assert_eq!(a.exterior_power(2).unwrap().degree(), a.degree());
    assert_eq!(b.exterior_power(2).unwrap().degree(), b.degree());
    for kind in [BaseChange::Unramified(2), BaseChange::Unramified(3), BaseChange::Tame(3)] {
        assert_eq!(a.base_change(kind).unwrap().degree(), a.degree());
    }
    let t = a.tensor(&a).unwrap();
    assert_eq!(t.slope(), Q::from(1));
    assert!(is_semistable(&t, &HnOptions::default()).unwrap());
}

#[test]
fn stable_lines() {
    let opts = EnumerationOptions::default();
    let d = lattice(diag_1_u());
    let lines = enumerate_phi_stable_subspaces(d.parent(), 1, &opts).unwrap();
    // span(e₁), span(e₂) and span(u·e₁ + e₂)
    assert_eq!(lines.len(), 3);
    let has = |v: &[LaurentSeries]| lines.iter().filter(|s| s.chart.contains(v)).count();
    assert_eq!(has(&[LaurentSeries::one(), LaurentSeries::exact_zero()]), 1);
    assert_eq!(has(&[LaurentSeries::exact_zero(), LaurentSeries::one()]), 1);
    assert_eq!(has(&[LaurentSeries::u_pow(1), LaurentSeries::one()]), 1);
    let anti = lattice(antidiagonal());
    assert!(enumerate_phi_stable_subspaces(anti.parent(), 1, &opts).unwrap().is_empty());
}

#[test]
fn subobject_clouds() {
    let opts = HnOptions::default();
    let etale = subobject_cloud(&lattice(SeriesMatrix::identity(&f2(), 2)), &opts).unwrap();
    assert_eq!(etale.iter().filter(|s| s.point() == (Q::from(1), Q::from(0))).count(), 3);
    let set = |b: SeriesMatrix| subobject_cloud(&lattice(b), &opts).unwrap().iter().map(|s| s.point()).collect::<BTreeSet<_>>();
    assert_eq!(set(diag_1_u()), pts(&[(0, 0), (1, 0), (1, 1), (2, 1)]));
    assert_eq!(set(antidiagonal()), pts(&[(0, 0), (2, 1)]));
}

#[test]
fn polygons_filtrations_and_etale_rank() {
    let opts = HnOptions::default();
    let d = lattice(diag_1_u());
    let p = hn_polygon_normalized(&d, &opts).unwrap();
    assert_eq!(p.breakpoints().iter().copied().collect::<BTreeSet<_>>(), pts(&[(0, 0), (1, 0), (2, 1)]));
    assert_eq!(etale_rank(&d, &opts).unwrap(), 1);
    let filt = hn_filtration(&d, &opts).unwrap();
    assert_eq!(filt.len(), 2);
    assert!(filt.steps[1].chart.contains(&[LaurentSeries::one(), LaurentSeries::exact_zero()]));
    assert_eq!(filt.graded_slopes(), vec![Q::from(0), Q::from(1)]);
    let anti = lattice(antidiagonal());
    let p = hn_polygon_normalized(&anti, &opts).unwrap();
    assert!(p.is_single_segment() && p.slopes() == vec![q(1, 2)]);
    assert!(is_semistable(&anti, &opts).unwrap());
}

#[test]
fn homomorphisms_between_twists() {
    for size in [2u32, 3, 4] {
        let f = Field::with_size(size).unwrap();
        let s = |k: i64| KisinLattice::from_frobenius(&f, 1, SeriesMatrix::diagonal_u(&f, &[k])).unwrap();
        assert!(hom_space(&s(0), &s(1), 16).unwrap().is_zero());
        assert_eq!(hom_space(&s(1), &s(1), 16).unwrap().dim(), 1);
    }
}

fn std_filtration(w: [i64; 2]) -> FilteredSpace {
    let f = f2();
    FilteredSpace::new(vec![vec![Fq::ONE, Fq::ZERO], vec![Fq::ZERO, Fq::ONE]], w.iter().map(|&k| Q::from(k)).collect(), &f).unwrap()
}

#[test]
fn kempf_examples() {
    let f = f2();
    let pair = FiltrationPair { m: std_filtration([-1, 1]), n: std_filtration([-1, 1]) };
    let line = FqSubspace::span(4, &[vec![Fq::ONE, Fq::ZERO, Fq::ZERO, Fq::ZERO]], &f);
    assert_eq!(deg_filtered(&line, &pair.tensor(&f), &f).unwrap(), Q::from(-2));
    let opts = KempfOptions::default();
    assert!(!is_semistable_subspace(&line, 2, 2, &f, &opts).unwrap());
    let k = kempf_filtration(&line, 2, 2, &f, &opts).unwrap();
    assert_eq!(k.value_squared, Q::from(1));
    assert!(k.pair.same_pair(&pair, &f));
    assert_eq!(factor_slopes(&k.pair), (Q::from(0), Q::from(0)));
    let diagonal = FqSubspace::span(4, &[vec![Fq::ONE, Fq::ZERO, Fq::ZERO, Fq::ONE]], &f);
    assert!(is_semistable_subspace(&diagonal, 2, 2, &f, &opts).unwrap());
}

#[test]
fn filtration_degrees_and_the_two_filtration_bound() {
    let f = f2();
    let m = SeriesMatrix::identity(&f, 2);
    let l = SeriesMatrix::diagonal_u(&f, &[0, 2]);
    assert_eq!(lattice_filtration_degree(&m, &l).unwrap(), 2);
    let d = lattice(diag_1_u());
    let s = Chart::from_constant_columns(&f, 2, &[vec![Fq::ONE, Fq::ZERO]]).unwrap();
    let c = alt_degree_bound_check(&d, &s, &m).unwrap();
    assert!(c.holds);
    assert_eq!(c.lhs, Q::from(0));
}

#[test]
fn orders_contact_sets_and_candidates() {
    assert!(prec_order(&[Q::from(0); 3], &[Q::from(-1), Q::from(0), Q::from(1)]).unwrap());
    let nu = HodgeType::new(vec![0, 0, 1]);
    let straight = Polygon::from_segments(&[(Q::from(3), q(1, 3))]);
    assert!(component_invariant(&straight, &nu, 1).unwrap().is_empty());
    let bent = Polygon::from_segments(&[(Q::from(1), Q::from(0)), (Q::from(2), q(1, 2))]);
    assert_eq!(component_invariant(&bent, &nu, 1).unwrap(), vec![1]);

    let multisets = |nu: Vec<i64>| -> BTreeSet<Vec<Q>> {
        enumerate_candidate_polygons(&HodgeType::new(nu))
            .iter()
            .map(|(p, _)| p.segments().iter().flat_map(|&(len, s)| std::iter::repeat_n(s, len.to_integer() as usize)).collect())
            .collect()
    };
    let want = |v: &[&[(i64, i64)]]| -> BTreeSet<Vec<Q>> { v.iter().map(|s| s.iter().map(|&(a, b)| q(a, b)).collect()).collect() };
    assert_eq!(multisets(vec![0, 0, 1]), want(&[&[(1, 3), (1, 3), (1, 3)], &[(0, 1), (1, 2), (1, 2)], &[(0, 1), (0, 1), (1, 1)]]));
    assert_eq!(
        multisets(vec![-1, 0, 1]),
        want(&[&[(0, 1), (0, 1), (0, 1)], &[(-1, 2), (-1, 2), (1, 1)], &[(-1, 1), (1, 2), (1, 2)], &[(-1, 1), (0, 1), (1, 1)]])
    );
    let js: BTreeSet<Vec<usize>> = enumerate_candidate_polygons(&HodgeType::new(vec![0, 0, 1])).into_iter().map(|(_, j)| j).collect();
    assert_eq!(js, BTreeSet::from([vec![], vec![1], vec![1, 2]]));
}
