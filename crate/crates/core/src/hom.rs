//! φ-equivariant maps between lattices.
//!
//! A map `F : 𝔐₁ → 𝔐₂` (an integral `n₂ × n₁` matrix) commutes with Frobenius
//! iff `F·B₁ = B₂·φ(F)`, i.e. `F` is a fixed point of the `F_q`-linear map
//! `T(F) = B₂·φ(F)·B₁⁻¹`. With `c = max(0, -(val B₂ + val B₁⁻¹))`, `T` raises
//! the valuation of a difference from `v` to at least `p·v - c`, so a fixed
//! point is determined by its residue modulo `u^{N₀}`, `N₀ = ⌊c/(p-1)⌋ + 1`,
//! and the residues of fixed points are exactly the fixed points of `T`
//! acting on truncations modulo `u^{N₀}` whose image is integral.

use alloc::vec::Vec;

use crate::error::{precision, Error, Result};
use crate::field::Fq;
use crate::fqlin::FqMatrix;
use crate::matrix::SeriesMatrix;
use crate::module::KisinLattice;
use crate::series::LaurentSeries;
use crate::smith::inverse;

/// An `F_q`-basis of `Hom(𝔐₁, 𝔐₂)`.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub basis: Vec<SeriesMatrix>,
    /// Truncation level that determines a map.
    pub determining_precision: i64,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }
}

/// `Hom(m1, m2)`; each basis map is known to at least `target_precision`
/// when the inputs allow it.
pub fn hom_space(m1: &KisinLattice, m2: &KisinLattice, target_precision: i64) -> Result<HomSpace> {
    if m1.field() != m2.field() || m1.e() != m2.e() {
        return Err(Error::FieldMismatch);
    }
    let field = m1.field().clone();
    let f = &*field;
    let p = m1.p() as i64;
    let (n1, n2) = (m1.rank(), m2.rank());
    let b1inv = inverse(m1.frobenius_matrix())?;
    let b2 = m2.frobenius_matrix();
    let c = 0.max(-(b2.val_lower_bound() + b1inv.val_lower_bound()));
    let n0 = c / (p - 1) + 1;

    // unknown (i, j, k) ↦ coefficient of u^k in F_ij, k < n0
    let idx = |i: usize, j: usize, k: i64| ((i * n1 + j) as i64 * n0 + k) as usize;
    let unknowns = n2 * n1 * n0 as usize;
    // equations: coefficient t in [-c, n0) of T(F) - F, for every entry
    let span = (c + n0) as usize;
    let mut sys = FqMatrix::zeros(n2 * n1 * span, unknowns);
    for i in 0..n2 {
        for j in 0..n1 {
            for k in 0..n0 {
                let col = idx(i, j, k);
                // T(E_ij u^k) = u^{pk} · B₂[:, i] · B₁⁻¹[j, :]
                for a in 0..n2 {
                    for b in 0..n1 {
                        let y = b2.get(a, i).mul(b1inv.get(j, b), f).shift(p * k);
                        if y.prec() < n0 {
                            return Err(precision("Frobenius matrices too coarse for the Hom equation"));
                        }
                        for t in -c..n0 {
                            let v = y.coeff(t).unwrap_or(Fq::ZERO);
                            if !v.is_zero() {
                                let row = (a * n1 + b) * span + (t + c) as usize;
                                sys.set(row, col, f.add(sys.get(row, col), v));
                            }
                        }
                        if y.val() < -c {
                            return Err(Error::Internal(alloc::string::String::from("valuation bound violated")));
                        }
                    }
                }
                // minus the identity
                let row = (i * n1 + j) * span + (k + c) as usize;
                sys.set(row, col, f.sub(sys.get(row, col), Fq::ONE));
            }
        }
    }
    let kernel = sys.kernel(f);
    let mut basis = Vec::with_capacity(kernel.len());
    for v in kernel {
        let mut fm = SeriesMatrix::from_fn(&field, n2, n1, |i, j| {
            let cs: Vec<Fq> = (0..n0).map(|k| v[idx(i, j, k)]).collect();
            LaurentSeries::from_coeffs(0, cs, n0)
        });
        loop {
            let prec = fm.min_prec();
            if prec >= target_precision {
                break;
            }
            let next = b2.mul(&fm.frobenius())?.mul(&b1inv)?;
            if next.min_prec() <= prec {
                break;
            }
            fm = next;
        }
        basis.push(fm);
    }
    Ok(HomSpace { basis, determining_precision: n0 })
}

/// `F·B₁ = B₂·φ(F)` at the known precision.
pub fn is_equivariant(m1: &KisinLattice, m2: &KisinLattice, fm: &SeriesMatrix) -> Result<bool> {
    let lhs = fm.mul(m1.frobenius_matrix())?;
    let rhs = m2.frobenius_matrix().mul(&fm.frobenius())?;
    Ok(lhs.sub(&rhs)?.is_zero_at_prec())
}
