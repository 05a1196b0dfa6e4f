//! Étale φ-modules over `F_q((u))` and Kisin lattices inside them.
//!
//! A module is given by the matrix `A` of its linearized Frobenius in the
//! standard basis: `φ(e_j) = Σ_i A_ij e_i`. A lattice with basis `g` (columns)
//! has Frobenius matrix `B = g⁻¹·A·φ(g)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::lattice::{lattice_canonical, LatticeForm};
use crate::matrix::SeriesMatrix;
use crate::rational::Q;
use crate::smith::{elementary_divisors, inverse, val_det};

/// Scalar extensions of the coefficients or of the base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseChange {
    /// `F_q → F_{q^m}` on coefficients.
    Unramified(u32),
    /// `u = t^m` with `p ∤ m`; the ramification index becomes `m·e`.
    Tame(u32),
}

#[derive(Clone, Debug)]
pub struct EtalePhiModule {
    field: Field,
    e: u32,
    frob: SeriesMatrix,
}

impl EtalePhiModule {
    /// Checks that `A` is square with a certified determinant valuation.
    pub fn new(field: &Field, e: u32, a: SeriesMatrix) -> Result<Self> {
        if e == 0 {
            return Err(Error::InvalidField(alloc::string::String::from("ramification index must be positive")));
        }
        if a.field() != field {
            return Err(Error::FieldMismatch);
        }
        val_det(&a)?;
        Ok(EtalePhiModule { field: field.clone(), e, frob: a })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn p(&self) -> u32 {
        self.field.characteristic()
    }

    pub fn dim(&self) -> usize {
        self.frob.rows()
    }

    pub fn frobenius_matrix(&self) -> &SeriesMatrix {
        &self.frob
    }

    pub fn precision(&self) -> i64 {
        self.frob.min_prec()
    }

    pub fn val_det(&self) -> Result<i64> {
        val_det(&self.frob)
    }

    fn same_base(&self, other: &Self) -> Result<()> {
        if self.field != other.field || self.e != other.e {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// Multiplies the Frobenius by `u^{s·e}`.
    pub fn twist(&self, s: i64) -> Self {
        EtalePhiModule { field: self.field.clone(), e: self.e, frob: self.frob.shift(s * self.e as i64) }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.same_base(other)?;
        Ok(EtalePhiModule { field: self.field.clone(), e: self.e, frob: self.frob.kron(&other.frob)? })
    }

    pub fn dual(&self) -> Result<Self> {
        Ok(EtalePhiModule { field: self.field.clone(), e: self.e, frob: inverse(&self.frob)?.transpose() })
    }

    pub fn exterior_power(&self, d: usize) -> Result<Self> {
        Ok(EtalePhiModule { field: self.field.clone(), e: self.e, frob: self.frob.compound(d)? })
    }

    pub fn base_change(&self, kind: BaseChange) -> Result<Self> {
        let (field, e, frob) = base_change_data(&self.field, self.e, &[&self.frob], kind)?;
        Ok(EtalePhiModule { field, e, frob: frob.into_iter().next().unwrap() })
    }

    /// The lattice spanned by the standard basis.
    pub fn standard_lattice(&self) -> KisinLattice {
        let g = SeriesMatrix::identity(&self.field, self.dim());
        let divisors = elementary_divisors(&self.frob).expect("determinant certified at construction");
        KisinLattice { parent: self.clone(), basis: g, frob: self.frob.clone(), divisors }
    }

    /// The lattice with basis `g` (columns, ambient coordinates).
    pub fn lattice(&self, g: SeriesMatrix) -> Result<KisinLattice> {
        KisinLattice::new(self.clone(), g)
    }
}

fn base_change_data(
    field: &Field,
    e: u32,
    mats: &[&SeriesMatrix],
    kind: BaseChange,
) -> Result<(Field, u32, Vec<SeriesMatrix>)> {
    match kind {
        BaseChange::Unramified(m) => {
            if m == 0 {
                return Err(Error::InvalidField(alloc::string::String::from("extension degree must be positive")));
            }
            if m == 1 {
                return Ok((field.clone(), e, mats.iter().map(|x| (*x).clone()).collect()));
            }
            let big = field.extension(m)?;
            let emb = field.embedding_into(&big)?;
            let out = mats.iter().map(|x| x.map_field(&big, |c| emb[c.0 as usize])).collect();
            Ok((big, e, out))
        }
        BaseChange::Tame(m) => {
            if m == 0 {
                return Err(Error::InvalidField(alloc::string::String::from("tame degree must be positive")));
            }
            if m % field.characteristic() == 0 {
                return Err(Error::TameDegreeNotCoprime { m, p: field.characteristic() });
            }
            let out = mats.iter().map(|x| x.substitute_power(m as i64)).collect();
            Ok((field.clone(), e * m, out))
        }
    }
}

/// A lattice `𝔐 ⊂ M` stable under the linearized Frobenius after inverting `u`.
#[derive(Clone, Debug)]
pub struct KisinLattice {
    parent: EtalePhiModule,
    basis: SeriesMatrix,
    frob: SeriesMatrix,
    divisors: Vec<i64>,
}

impl KisinLattice {
    pub fn new(parent: EtalePhiModule, g: SeriesMatrix) -> Result<Self> {
        if !g.is_square() || g.rows() != parent.dim() {
            return Err(Error::DimensionMismatch(alloc::string::String::from("lattice basis must be n x n")));
        }
        let ginv = inverse(&g)?;
        let frob = ginv.mul(parent.frobenius_matrix())?.mul(&g.frobenius())?;
        Self::assemble(parent, g, frob)
    }

    /// The lattice `F_q[[u]]^n` in the module with Frobenius matrix `b`.
    pub fn from_frobenius(field: &Field, e: u32, b: SeriesMatrix) -> Result<Self> {
        let parent = EtalePhiModule::new(field, e, b)?;
        Ok(parent.standard_lattice())
    }

    fn assemble(parent: EtalePhiModule, basis: SeriesMatrix, frob: SeriesMatrix) -> Result<Self> {
        let divisors = elementary_divisors(&frob)?;
        Ok(KisinLattice { parent, basis, frob, divisors })
    }

    pub fn parent(&self) -> &EtalePhiModule {
        &self.parent
    }

    pub fn field(&self) -> &Field {
        self.parent.field()
    }

    pub fn e(&self) -> u32 {
        self.parent.e()
    }

    pub fn p(&self) -> u32 {
        self.parent.p()
    }

    /// Basis `g` in ambient coordinates.
    pub fn basis(&self) -> &SeriesMatrix {
        &self.basis
    }

    /// `B = g⁻¹·A·φ(g)`.
    pub fn frobenius_matrix(&self) -> &SeriesMatrix {
        &self.frob
    }

    /// Rank over `F_q[[u]]`.
    pub fn rank(&self) -> usize {
        self.frob.rows()
    }

    /// Elementary divisors of `B`, ascending (the Hodge type).
    pub fn hodge_divisors(&self) -> &[i64] {
        &self.divisors
    }

    /// `(1/e)·val_u(det B)`.
    pub fn degree(&self) -> Q {
        Q::new(self.divisors.iter().sum::<i64>(), self.e() as i64)
    }

    pub fn slope(&self) -> Q {
        self.degree() / Q::from(self.rank() as i64)
    }

    /// Degree computed the long way: twist until effective, read the length
    /// of the cokernel of Frobenius, untwist.
    pub fn degree_via_twist(&self) -> Result<Q> {
        let e = self.e() as i64;
        let min = self.divisors.first().copied().unwrap_or(0);
        let s = -min.div_euclid(e);
        let t = self.twist(s);
        if !t.is_effective() {
            return Err(Error::NotEffective);
        }
        let length: i64 = t.hodge_divisors().iter().sum();
        Ok(Q::new(length, e) - Q::from(s * self.rank() as i64))
    }

    /// All Hodge divisors are nonnegative, i.e. `B` is integral.
    pub fn is_effective(&self) -> bool {
        self.divisors.iter().all(|&d| d >= 0)
    }

    /// `[floor(min/e), ceil(max/e)]` over the Hodge divisors.
    pub fn height_window(&self) -> (i64, i64) {
        let e = self.e() as i64;
        let lo = self.divisors.first().copied().unwrap_or(0);
        let hi = self.divisors.last().copied().unwrap_or(0);
        (lo.div_euclid(e), -((-hi).div_euclid(e)))
    }

    pub fn twist(&self, s: i64) -> Self {
        let shift = s * self.e() as i64;
        KisinLattice {
            parent: self.parent.twist(s),
            basis: self.basis.clone(),
            frob: self.frob.shift(shift),
            divisors: self.divisors.iter().map(|d| d + shift).collect(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let parent = self.parent.tensor(&other.parent)?;
        let basis = self.basis.kron(&other.basis)?;
        let frob = self.frob.kron(&other.frob)?;
        Self::assemble(parent, basis, frob)
    }

    pub fn dual(&self) -> Result<Self> {
        let parent = self.parent.dual()?;
        let basis = inverse(&self.basis)?.transpose();
        let frob = inverse(&self.frob)?.transpose();
        Self::assemble(parent, basis, frob)
    }

    pub fn exterior_power(&self, d: usize) -> Result<Self> {
        let parent = self.parent.exterior_power(d)?;
        Self::assemble(parent, self.basis.compound(d)?, self.frob.compound(d)?)
    }

    pub fn base_change(&self, kind: BaseChange) -> Result<Self> {
        let (field, e, mut mats) =
            base_change_data(self.field(), self.e(), &[self.parent.frobenius_matrix(), &self.basis, &self.frob], kind)?;
        let frob = mats.pop().unwrap();
        let basis = mats.pop().unwrap();
        let a = mats.pop().unwrap();
        let parent = EtalePhiModule { field, e, frob: a };
        Self::assemble(parent, basis, frob)
    }

    /// Same lattice, new basis `g·U` with `U ∈ GL_n(F_q[[u]])`.
    pub fn change_basis(&self, unimodular: &SeriesMatrix) -> Result<Self> {
        if !unimodular.is_integral() || val_det(unimodular)? != 0 {
            return Err(Error::DimensionMismatch(alloc::string::String::from("basis change must be unimodular")));
        }
        let basis = self.basis.mul(unimodular)?;
        let frob = inverse(unimodular)?.mul(&self.frob)?.mul(&unimodular.frobenius())?;
        Self::assemble(self.parent.clone(), basis, frob)
    }

    /// The lattice with basis `g·h` (a sublattice when `h` is integral).
    pub fn sublattice(&self, h: &SeriesMatrix) -> Result<Self> {
        let basis = self.basis.mul(h)?;
        let frob = inverse(h)?.mul(&self.frob)?.mul(&h.frobenius())?;
        Self::assemble(self.parent.clone(), basis, frob)
    }

    /// Canonical form of the basis, for equality of lattices.
    pub fn canonical_form(&self) -> Result<LatticeForm> {
        lattice_canonical(&self.basis)
    }

    /// Equal as lattices in the same ambient module.
    pub fn same_lattice(&self, other: &Self) -> Result<bool> {
        Ok(self.canonical_form()?.same_lattice(&other.canonical_form()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::LaurentSeries;

    fn antidiag(f: &Field) -> SeriesMatrix {
        SeriesMatrix::from_fn(f, 2, 2, |i, j| match (i, j) {
            (0, 1) => LaurentSeries::u_pow(1),
            (1, 0) => LaurentSeries::one(),
            _ => LaurentSeries::exact_zero(),
        })
    }

    #[test]
    fn tate_twist_slopes() {
        for q in [2, 3, 4] {
            let f = Field::with_size(q).unwrap();
            for e in [1, 2] {
                let base = KisinLattice::from_frobenius(&f, e, SeriesMatrix::identity(&f, 1)).unwrap();
                for s in -2..=3 {
                    assert_eq!(base.twist(s).slope(), Q::from(s));
                }
            }
        }
    }

    #[test]
    fn antidiagonal_degree() {
        let f = Field::new(2, 1).unwrap();
        let l = KisinLattice::from_frobenius(&f, 1, antidiag(&f)).unwrap();
        assert_eq!(l.hodge_divisors(), &[0, 1]);
        assert_eq!(l.degree(), Q::from(1));
        assert_eq!(l.slope(), Q::new(1, 2));
        assert_eq!(l.degree_via_twist().unwrap(), Q::from(1));
    }

    #[test]
    fn tensor_dual_wedge() {
        let f = Field::new(3, 1).unwrap();
        let l = KisinLattice::from_frobenius(&f, 1, antidiag(&f)).unwrap();
        let t = l.twist(1);
        assert_eq!(l.tensor(&t).unwrap().slope(), l.slope() + t.slope());
        assert_eq!(l.exterior_power(2).unwrap().degree(), l.degree());
        let dd = l.dual().unwrap().dual().unwrap();
        assert!(dd.same_lattice(&l).unwrap());
        assert!(dd.frobenius_matrix().agrees_with(l.frobenius_matrix()));
        assert_eq!(l.dual().unwrap().degree(), -l.degree());
    }

    #[test]
    fn tame_base_change_example() {
        let f = Field::new(3, 1).unwrap();
        let l = KisinLattice::from_frobenius(&f, 1, SeriesMatrix::diagonal_u(&f, &[1])).unwrap();
        let b = l.base_change(BaseChange::Tame(2)).unwrap();
        assert_eq!(b.e(), 2);
        assert_eq!(b.hodge_divisors(), &[2]);
        assert_eq!(b.degree(), Q::from(1));
        assert_eq!(l.base_change(BaseChange::Tame(3)).unwrap_err(), Error::TameDegreeNotCoprime { m: 3, p: 3 });
    }

    #[test]
    fn semilinear_determinant_identity() {
        let f = Field::new(2, 1).unwrap();
        let m = EtalePhiModule::new(&f, 1, antidiag(&f)).unwrap();
        let g = SeriesMatrix::from_fn(&f, 2, 2, |i, j| match (i, j) {
            (0, 0) => LaurentSeries::u_pow(-1),
            (1, 0) => LaurentSeries::one(),
            (1, 1) => LaurentSeries::u_pow(2),
            _ => LaurentSeries::exact_zero(),
        });
        let l = m.lattice(g.clone()).unwrap();
        let lhs: i64 = l.hodge_divisors().iter().sum();
        // val det A + (p - 1)·val det g with p = 2
        assert_eq!(lhs, m.val_det().unwrap() + val_det(&g).unwrap());
    }
}
