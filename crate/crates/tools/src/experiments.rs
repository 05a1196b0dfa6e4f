//! Experiment drivers shared by the command line and the test suites.

use kisin_core::hn::{hn_filtration, is_semistable, HnOptions};
use kisin_core::module::KisinLattice;
use kisin_core::rational::Q;
use kisin_core::{Field, Fq, LaurentSeries, Result, SeriesMatrix};
use rayon::prelude::*;

use crate::format::ModuleFile;
use crate::sample::{effective_frobenius, rng, SampleRng};

/// Semi-stable lattices of rank ≤ 2 with Hodge divisors in `[0, 2]`, `e = 1`:
/// the twists `𝔖(s)/p` for `s = 0, 1, 2` and random rank-2 lattices that
/// pass the semi-stability test, `per_field` in total for each `q`.
pub fn semistable_pool(seed: u64, fields: &[u32], per_field: usize, opts: &HnOptions) -> Result<Vec<KisinLattice>> {
    let mut r = rng(seed);
    let mut pool = Vec::new();
    for &q in fields {
        let f = Field::with_size(q)?;
        let mut here: Vec<KisinLattice> = (0..3)
            .map(|s| KisinLattice::from_frobenius(&f, 1, SeriesMatrix::diagonal_u(&f, &[s])))
            .collect::<Result<_>>()?;
        here.truncate(per_field);
        while here.len() < per_field {
            let (b, _) = effective_frobenius(&mut r, &f, 2, 2);
            let l = KisinLattice::from_frobenius(&f, 1, b)?;
            if here.iter().any(|x| x.frobenius_matrix() == l.frobenius_matrix()) || !is_semistable(&l, opts)? {
                continue;
            }
            here.push(l);
        }
        pool.extend(here);
    }
    Ok(pool)
}

/// A pair that violated the tensor-product statement.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TensorCounterexample {
    pub left: String,
    pub right: String,
    pub reason: String,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TensorReport {
    pub pairs: usize,
    pub counterexamples: Vec<TensorCounterexample>,
}

/// For all unordered pairs over a common field: `l₁ ⊗ l₂` is semi-stable and
/// `μ(l₁ ⊗ l₂) = μ(l₁) + μ(l₂)`.
pub fn tensor_experiment(pool: &[KisinLattice], opts: &HnOptions) -> Result<TensorReport> {
    let pairs: Vec<(usize, usize)> = (0..pool.len())
        .flat_map(|i| (i..pool.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| pool[i].field() == pool[j].field() && pool[i].e() == pool[j].e())
        .collect();
    let outcomes: Vec<Option<TensorCounterexample>> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<Option<TensorCounterexample>> {
            let (a, b) = (&pool[i], &pool[j]);
            let t = a.tensor(b)?;
            let mut reasons = Vec::new();
            if !is_semistable(a, opts)? || !is_semistable(b, opts)? {
                reasons.push("input not semi-stable");
            }
            if !is_semistable(&t, opts)? {
                reasons.push("tensor product not semi-stable");
            }
            if t.slope() != a.slope() + b.slope() {
                reasons.push("slopes do not add");
            }
            Ok((!reasons.is_empty()).then(|| TensorCounterexample {
                left: ModuleFile::from_lattice(a).to_text(),
                right: ModuleFile::from_lattice(b).to_text(),
                reason: reasons.join("; "),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(TensorReport { pairs: pairs.len(), counterexamples: outcomes.into_iter().flatten().collect() })
}

/// Effective rank-2 Frobenius matrices over `F_2` of the form
/// `diag(u^{a₁}, u^{a₂})·W` with `a₁ ≤ a₂`, `a₁ + a₂ ≤ max_total` and `W`
/// running over `GL_2(F_2[u]/u^{w_prec})` lifted to polynomials of degree
/// `< w_prec`.
///
/// Every effective rank-2 lattice is φ-conjugate to some `D·W`: write
/// `B = U·D·V` and conjugate by `U`.
pub fn rank_two_family(max_total: i64, w_prec: usize) -> Vec<SeriesMatrix> {
    let f = Field::new(2, 1).expect("F_2");
    let polys: Vec<LaurentSeries> = (0u32..1 << w_prec)
        .map(|bits| {
            let c: Vec<Fq> = (0..w_prec).map(|k| Fq(((bits >> k) & 1) as u16)).collect();
            LaurentSeries::from_coeffs(0, c, kisin_core::series::EXACT)
        })
        .collect();
    let mut ws = Vec::new();
    for a in &polys {
        for b in &polys {
            for c in &polys {
                for d in &polys {
                    // invertible iff the constant term of the determinant is 1
                    let det0 = (a.coeff(0).unwrap().0 * d.coeff(0).unwrap().0) ^ (b.coeff(0).unwrap().0 * c.coeff(0).unwrap().0);
                    if det0 == 1 {
                        ws.push(SeriesMatrix::from_entries(&f, 2, 2, vec![a.clone(), b.clone(), c.clone(), d.clone()]));
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for total in 0..=max_total {
        for a1 in 0..=total / 2 {
            let d = SeriesMatrix::diagonal_u(&f, &[a1, total - a1]);
            for w in &ws {
                out.push(d.mul(w).expect("2x2"));
            }
        }
    }
    out
}

/// Degree, slope and HN data of one lattice, as printed by `analyze`.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub rank: usize,
    pub degree: Q,
    pub slope: Q,
    pub divisors: Vec<i64>,
    pub raw: kisin_core::polygon::Polygon,
    pub normalized: kisin_core::polygon::Polygon,
    pub etale_rank: Option<i64>,
    pub semistable: bool,
    pub graded_slopes: Vec<Q>,
}

pub fn analyze(l: &KisinLattice, opts: &HnOptions) -> Result<Analysis> {
    let filt = hn_filtration(l, opts)?;
    let r = Q::from(filt.lattice.field().degree() as i64);
    let normalized = filt.polygon.clone();
    let raw = kisin_core::polygon::Polygon::lower_hull(
        &normalized.breakpoints().iter().map(|&(x, y)| (x * r, y * r)).collect::<Vec<_>>(),
    );
    let etale_rank = if l.is_effective() {
        let first = normalized.segments().first().copied();
        Some(match first {
            Some((len, s)) if s == Q::from(0) => *len.numer(),
            _ => 0,
        })
    } else {
        None
    };
    Ok(Analysis {
        rank: l.rank(),
        degree: l.degree(),
        slope: l.slope(),
        divisors: l.hodge_divisors().to_vec(),
        semistable: normalized.is_single_segment(),
        graded_slopes: normalized.slopes(),
        raw,
        normalized,
        etale_rank,
    })
}

/// Deterministic per-item seeds derived from one master seed.
pub fn child_rng(seed: u64, stream: u64) -> SampleRng {
    rng(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
