//! Desk-scale property suite behind `kisin selftest`.
//!
//! The report holds no timings or addresses, so equal seeds give
//! byte-identical JSON.

use kisin_core::filtered::alt_degree_bound_check;
use kisin_core::hn::{cloud_from_subspaces, hn_filtration, hn_polygon_normalized, hull_of_cloud, is_semistable, HnOptions};
use kisin_core::hom::hom_space;
use kisin_core::kempf::{factor_slopes, kempf_filtration, KempfOptions};
use kisin_core::fqlin::FqSubspace;
use kisin_core::lattice::Chart;
use kisin_core::module::{BaseChange, EtalePhiModule, KisinLattice};
use kisin_core::rational::Q;
use kisin_core::subspace::enumerate_all;
use kisin_core::variety::{enumerate_candidate_polygons, enumerate_points, hodge_dominance, prec_order, HodgeType, VarietyOptions};
use kisin_core::{Error, Field, Fq, SeriesMatrix};
use rand::Rng;
use serde::Serialize;

use crate::experiments::{child_rng, semistable_pool, tensor_experiment};
use crate::format::ModuleFile;
use crate::literal::{format_series, parse_series};
use crate::sample::{effective_frobenius, integral_of_colength, lattice_basis, polynomial, unimodular, SampleRng};

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub all_passed: bool,
    pub properties: Vec<PropertyResult>,
}

impl SelftestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes") + "\n"
    }
}

type Outcome = Result<usize, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: kisin_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// A random lattice: `n ≤ 3`, `q ≤ 3`, `e ≤ 2`, inside a module with random
/// effective Frobenius, with a random basis `g`.
pub fn random_lattice(r: &mut SampleRng) -> KisinLattice {
    let q = [2u32, 3][r.gen_range(0..2)];
    let f = Field::with_size(q).expect("small field");
    let n = r.gen_range(1..=3);
    let e = r.gen_range(1..=2);
    let (a, _) = effective_frobenius(r, &f, n, 2);
    let m = EtalePhiModule::new(&f, e, a).expect("invertible");
    let g = lattice_basis(r, &f, n, 1);
    m.lattice(g).expect("invertible basis")
}

fn twist_slopes() -> Outcome {
    let mut cases = 0;
    for q in [2u32, 3, 4] {
        let f = core(Field::with_size(q))?;
        for e in [1u32, 2] {
            for s in -2..=3 {
                let l = core(KisinLattice::from_frobenius(&f, e, SeriesMatrix::identity(&f, 1)))?.twist(s);
                ensure(l.slope() == Q::from(s), || format!("slope of the twist by {s} (q = {q}, e = {e}) is {}", l.slope()))?;
                cases += 1;
            }
        }
    }
    Ok(cases)
}

fn degree_axioms(seed: u64) -> Outcome {
    let mut r = child_rng(seed, 2);
    for i in 0..40 {
        let l = random_lattice(&mut r);
        let e = Q::from(l.e() as i64);
        let det = core(kisin_core::smith::val_det(l.frobenius_matrix()))?;
        let sum: i64 = l.hodge_divisors().iter().sum();
        ensure(l.degree() == Q::from(det) / e && det == sum, || format!("case {i}: degree formulas disagree"))?;
        ensure(core(l.degree_via_twist())? == l.degree(), || format!("case {i}: degree via twist differs"))?;
        let lhs = det;
        let rhs = core(l.parent().val_det())? + (l.p() as i64 - 1) * core(kisin_core::smith::val_det(l.basis()))?;
        ensure(lhs == rhs, || format!("case {i}: determinant identity {lhs} != {rhs}"))?;
        let u = unimodular(&mut r, l.field(), l.rank(), 1);
        let l2 = core(l.change_basis(&u))?;
        ensure(l2.hodge_divisors() == l.hodge_divisors(), || format!("case {i}: divisors changed under a basis change"))?;
    }
    Ok(40)
}

fn strict_inclusion_defect(seed: u64) -> Outcome {
    let mut r = child_rng(seed, 3);
    for i in 0..20 {
        let l = random_lattice(&mut r);
        let t = r.gen_range(1..=3);
        let h = integral_of_colength(&mut r, l.field(), l.rank(), t);
        let sub = core(l.sublattice(&h))?;
        let want = Q::new((l.p() as i64 - 1) * t, l.e() as i64);
        ensure(sub.degree() - l.degree() == want, || format!("case {i}: defect {} != {}", sub.degree() - l.degree(), want))?;
    }
    Ok(20)
}

fn hn_suite(seed: u64) -> Outcome {
    let mut r = child_rng(seed, 4);
    let opts = HnOptions::default();
    for i in 0..30 {
        let l = random_lattice(&mut r);
        let subs = core(enumerate_all(l.parent(), &opts.enumeration))?;
        let cloud = core(cloud_from_subspaces(&l, &subs))?;
        let hull = hull_of_cloud(&cloud);
        ensure(cloud.iter().all(|s| hull.lies_below(s.point())), || format!("case {i}: cloud point below the hull"))?;
        ensure(hull.end() == (Q::from(l.rank() as i64), l.degree()), || format!("case {i}: wrong endpoint"))?;
        let filt = core(hn_filtration(&l, &opts))?;
        for g in core(filt.gradeds())? {
            ensure(core(is_semistable(&g, &opts))?, || format!("case {i}: graded piece not semi-stable"))?;
        }
    }
    Ok(30)
}

fn tensor_subset(seed: u64) -> Outcome {
    let opts = HnOptions::default();
    let pool = core(semistable_pool(seed, &[2, 3], 5, &opts))?;
    let rep = core(tensor_experiment(&pool, &opts))?;
    ensure(rep.counterexamples.is_empty(), || format!("{} counterexamples", rep.counterexamples.len()))?;
    Ok(rep.pairs)
}

fn alt_degree(seed: u64) -> Outcome {
    let mut r = child_rng(seed, 6);
    let opts = HnOptions::default();
    let mut cases = 0;
    while cases < 20 {
        let l = random_lattice(&mut r);
        let subs = core(enumerate_all(l.parent(), &opts.enumeration))?;
        let all: Vec<&Chart> = subs.iter().flatten().map(|s| &s.chart).collect();
        let s = all[r.gen_range(0..all.len())];
        let g0 = lattice_basis(&mut r, l.field(), l.rank(), 1);
        let c = core(alt_degree_bound_check(&l, s, &g0))?;
        ensure(c.holds && c.exact == c.lhs, || format!("case {cases}: lhs {} rhs {} exact {}", c.lhs, c.rhs, c.exact))?;
        cases += 1;
    }
    Ok(cases)
}

fn kempf_balanced() -> Outcome {
    let f = core(Field::new(2, 1))?;
    let opts = KempfOptions::default();
    let mut cases = 0;
    // every line and every hyperplane of F_2^2 ⊗ F_2^2
    for bits in 1u16..16 {
        let v: Vec<Fq> = (0..4).map(|k| Fq((bits >> k) & 1)).collect();
        let line = FqSubspace::span(4, &[v], &f);
        for s in [line.clone(), line.complement(&f)] {
            match kempf_filtration(&s, 2, 2, &f, &opts) {
                Ok(k) => {
                    let (a, b) = factor_slopes(&k.pair);
                    ensure(a == Q::from(0) && b == Q::from(0), || format!("maximizer for {bits:04b} is not balanced"))?;
                    cases += 1;
                }
                Err(Error::NotUnstable) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(cases)
}

fn hom_vanishing() -> Outcome {
    let mut cases = 0;
    for q in [2u32, 3] {
        let f = core(Field::with_size(q))?;
        let tw = |s: i64| KisinLattice::from_frobenius(&f, 1, SeriesMatrix::diagonal_u(&f, &[s]));
        for a in 0..2 {
            for b in a + 1..3 {
                let h = core(hom_space(&core(tw(a))?, &core(tw(b))?, 16))?;
                ensure(h.is_zero(), || format!("Hom(S({a}), S({b})) over F_{q} is nonzero"))?;
                cases += 1;
            }
            let end = core(hom_space(&core(tw(a))?, &core(tw(a))?, 16))?;
            ensure(end.dim() == 1, || format!("End(S({a})) has dimension {}", end.dim()))?;
            cases += 1;
        }
    }
    Ok(cases)
}

fn base_change(seed: u64) -> Outcome {
    let mut r = child_rng(seed, 9);
    let opts = HnOptions::default();
    for i in 0..6 {
        let f = core(Field::new(2, 1))?;
        let (b, _) = effective_frobenius(&mut r, &f, 2, 2);
        let l = core(KisinLattice::from_frobenius(&f, 1, b))?;
        let bc = core(l.base_change(BaseChange::Unramified(2)))?;
        ensure(core(hn_polygon_normalized(&l, &opts))? == core(hn_polygon_normalized(&bc, &opts))?, || format!("case {i}: polygon moved"))?;
        let f3 = core(Field::new(3, 1))?;
        let (b3, _) = effective_frobenius(&mut r, &f3, 2, 2);
        let l3 = core(KisinLattice::from_frobenius(&f3, 1, b3))?;
        ensure(core(l3.base_change(BaseChange::Tame(2)))?.degree() == l3.degree(), || format!("case {i}: tame degree moved"))?;
    }
    Ok(12)
}

fn variety_example() -> Outcome {
    let nu = HodgeType::new(vec![0, 1]);
    let f2 = core(Field::new(2, 1))?;
    let m2 = core(EtalePhiModule::new(&f2, 1, SeriesMatrix::identity(&f2, 2)))?;
    let en = core(enumerate_points(&m2, &nu, &VarietyOptions::default()))?;
    ensure(en.points.len() == 3, || format!("{} points instead of 3", en.points.len()))?;
    let f3 = core(Field::new(3, 1))?;
    let m3 = core(EtalePhiModule::new(&f3, 1, SeriesMatrix::identity(&f3, 2)))?;
    let en3 = core(enumerate_points(&m3, &nu, &VarietyOptions::default()))?;
    ensure(en3.points.is_empty() && en3.empty_reason == Some(Error::DetConstraintInfeasible), || "p = 3 is not infeasible".into())?;
    Ok(2)
}

fn candidate_counts() -> Outcome {
    for (nu, want) in [(vec![0, 0, 1], 3), (vec![-1, 0, 1], 4), (vec![0, 0], 1)] {
        let a = enumerate_candidate_polygons(&HodgeType::new(nu.clone()));
        let b = enumerate_candidate_polygons(&HodgeType::new(nu.clone()));
        ensure(a.len() == want, || format!("{nu:?}: {} candidates instead of {want}", a.len()))?;
        ensure(a == b, || format!("{nu:?}: candidates differ between runs"))?;
    }
    Ok(3)
}

fn tiny_precision() -> Outcome {
    let m = ModuleFile::parse("p = 2\nprecision = 1\nA = [[1, u], [u, 1]]").map_err(|e| e.to_string())?;
    let l = core(m.lattice())?;
    match hn_polygon_normalized(&l, &HnOptions::default()) {
        Err(Error::InsufficientPrecision(_)) => Ok(1),
        other => Err(format!("expected an insufficient-precision error, got {other:?}")),
    }
}

fn literal_round_trip(seed: u64) -> Outcome {
    let mut r = child_rng(seed, 13);
    let f = core(Field::new(2, 2))?;
    for i in 0..50 {
        let lo = r.gen_range(-3..=1);
        let hi = lo + r.gen_range(0..5);
        let s = polynomial(&mut r, &f, lo, hi);
        let s = if r.gen_bool(0.5) { s.truncate(lo + 6) } else { s };
        let text = format_series(&s, &f);
        let back = parse_series(&text, &f)?;
        ensure(back == s && format_series(&back, &f) == text, || format!("case {i}: `{text}` does not round-trip"))?;
    }
    Ok(50)
}

fn bruhat_implies_prec(seed: u64) -> Outcome {
    let mut r = child_rng(seed, 14);
    let mut cases = 0;
    for _ in 0..200 {
        let n = r.gen_range(1..=4);
        let a: Vec<i64> = (0..n).map(|_| r.gen_range(-2..=2)).collect();
        let b: Vec<i64> = (0..n).map(|_| r.gen_range(-2..=2)).collect();
        if core(hodge_dominance(&a, &b))? {
            let qa: Vec<Q> = a.iter().map(|&x| Q::from(x)).collect();
            let qb: Vec<Q> = b.iter().map(|&x| Q::from(x)).collect();
            ensure(core(prec_order(&qa, &qb))?, || format!("{a:?} <= {b:?} but not in the coroot order"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

/// Runs every property with streams derived from `seed`.
pub fn run(seed: u64) -> SelftestReport {
    let props: Vec<(&'static str, Box<dyn Fn() -> Outcome>)> = vec![
        ("tate_twist_slopes", Box::new(twist_slopes)),
        ("degree_axioms", Box::new(move || degree_axioms(seed))),
        ("strict_inclusion_defect", Box::new(move || strict_inclusion_defect(seed))),
        ("hn_suite", Box::new(move || hn_suite(seed))),
        ("tensor_experiment_subset", Box::new(move || tensor_subset(seed))),
        ("alt_degree_bound", Box::new(move || alt_degree(seed))),
        ("kempf_maximizers_balanced", Box::new(kempf_balanced)),
        ("hom_vanishing", Box::new(hom_vanishing)),
        ("base_change_invariance", Box::new(move || base_change(seed))),
        ("variety_colength_one", Box::new(variety_example)),
        ("candidate_polygon_counts", Box::new(candidate_counts)),
        ("tiny_precision_surfaced", Box::new(tiny_precision)),
        ("literal_round_trip", Box::new(move || literal_round_trip(seed))),
        ("bruhat_implies_coroot_order", Box::new(move || bruhat_implies_prec(seed))),
    ];
    let properties: Vec<PropertyResult> = props
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(cases) => PropertyResult { name, passed: true, cases, detail: String::new() },
            Err(detail) => PropertyResult { name, passed: false, cases: 0, detail },
        })
        .collect();
    SelftestReport { seed, all_passed: properties.iter().all(|p| p.passed), properties }
}
