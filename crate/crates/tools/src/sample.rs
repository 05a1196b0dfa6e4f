//! Seeded random objects. Every sampler takes the generator explicitly so a
//! fixed seed reproduces the same stream.

use kisin_core::module::KisinLattice;
use kisin_core::series::EXACT;
use kisin_core::{Field, Fq, LaurentSeries, SeriesMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn element(rng: &mut SampleRng, f: &Field) -> Fq {
    Fq(rng.gen_range(0..f.size()) as u16)
}

pub fn nonzero_element(rng: &mut SampleRng, f: &Field) -> Fq {
    Fq(rng.gen_range(1..f.size()) as u16)
}

/// Exact polynomial with exponents in `[lo, hi]`.
pub fn polynomial(rng: &mut SampleRng, f: &Field, lo: i64, hi: i64) -> LaurentSeries {
    if hi < lo {
        return LaurentSeries::exact_zero();
    }
    let coeffs = (lo..=hi).map(|_| element(rng, f)).collect();
    LaurentSeries::from_coeffs(lo, coeffs, EXACT)
}

/// A random element of `GL_n(F_q[u]) ⊂ GL_n(F_q[[u]])`: lower unitriangular
/// times invertible constant times upper unitriangular, with polynomial
/// entries of degree at most `deg`.
pub fn unimodular(rng: &mut SampleRng, f: &Field, n: usize, deg: i64) -> SeriesMatrix {
    let lower = SeriesMatrix::from_fn(f, n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => LaurentSeries::one(),
        std::cmp::Ordering::Greater => polynomial(rng, f, 0, deg),
        std::cmp::Ordering::Less => LaurentSeries::exact_zero(),
    });
    let upper = SeriesMatrix::from_fn(f, n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => LaurentSeries::one(),
        std::cmp::Ordering::Less => polynomial(rng, f, 0, deg),
        std::cmp::Ordering::Greater => LaurentSeries::exact_zero(),
    });
    let c = constant_invertible(rng, f, n);
    lower.mul(&c).and_then(|x| x.mul(&upper)).expect("square factors")
}

/// Uniform-ish invertible constant matrix, by rejection.
pub fn constant_invertible(rng: &mut SampleRng, f: &Field, n: usize) -> SeriesMatrix {
    loop {
        let rows: Vec<Vec<Fq>> = (0..n).map(|_| (0..n).map(|_| element(rng, f)).collect()).collect();
        let m = kisin_core::fqlin::FqMatrix::from_rows(&rows, n);
        if m.rank(f) == n {
            return SeriesMatrix::from_constants(f, &rows);
        }
    }
}

/// Frobenius matrix `U·diag(u^{d_i})·V` with divisors drawn from
/// `[0, max_height]`.
pub fn effective_frobenius(rng: &mut SampleRng, f: &Field, n: usize, max_height: i64) -> (SeriesMatrix, Vec<i64>) {
    let mut d: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_height)).collect();
    d.sort();
    let u = unimodular(rng, f, n, 1);
    let v = unimodular(rng, f, n, 1);
    let b = u.mul(&SeriesMatrix::diagonal_u(f, &d)).and_then(|x| x.mul(&v)).expect("square factors");
    (b, d)
}

/// The standard lattice of a random effective Frobenius.
pub fn effective_lattice(rng: &mut SampleRng, f: &Field, e: u32, n: usize, max_height: i64) -> KisinLattice {
    let (b, _) = effective_frobenius(rng, f, n, max_height);
    KisinLattice::from_frobenius(f, e, b).expect("invertible by construction")
}

/// Integral matrix with `val det = t`: unimodular times a lower-triangular
/// Hermite matrix with diagonal exponents summing to `t`.
pub fn integral_of_colength(rng: &mut SampleRng, f: &Field, n: usize, t: i64) -> SeriesMatrix {
    let mut d = vec![0i64; n];
    for _ in 0..t {
        d[rng.gen_range(0..n)] += 1;
    }
    let h = SeriesMatrix::from_fn(f, n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => LaurentSeries::u_pow(d[i]),
        std::cmp::Ordering::Greater => polynomial(rng, f, 0, d[i] - 1),
        std::cmp::Ordering::Less => LaurentSeries::exact_zero(),
    });
    unimodular(rng, f, n, 1).mul(&h).expect("square factors")
}

/// Random lattice basis `diag(u^{k_i})·U` with `k_i ∈ [-w, w]`.
pub fn lattice_basis(rng: &mut SampleRng, f: &Field, n: usize, w: i64) -> SeriesMatrix {
    let k: Vec<i64> = (0..n).map(|_| rng.gen_range(-w..=w)).collect();
    let u = unimodular(rng, f, n, 1);
    let v = unimodular(rng, f, n, 1);
    u.mul(&SeriesMatrix::diagonal_u(f, &k)).and_then(|x| x.mul(&v)).expect("square factors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use kisin_core::smith::val_det;

    #[test]
    fn samplers_are_seeded_and_well_formed() {
        let f = Field::new(3, 1).unwrap();
        let a = effective_frobenius(&mut rng(7), &f, 3, 2);
        let b = effective_frobenius(&mut rng(7), &f, 3, 2);
        assert_eq!(a.0, b.0);
        assert_eq!(val_det(&a.0).unwrap(), a.1.iter().sum::<i64>());
        let u = unimodular(&mut rng(1), &f, 3, 2);
        assert_eq!(val_det(&u).unwrap(), 0);
        assert!(u.is_integral());
        let h = integral_of_colength(&mut rng(2), &f, 2, 3);
        assert_eq!(val_det(&h).unwrap(), 3);
    }
}
