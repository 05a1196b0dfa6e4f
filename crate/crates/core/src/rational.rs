//! Exact rationals.

use num_bigint::BigInt;
use num_rational::Ratio;

/// Degrees, slopes and polygon coordinates. All quantities in this crate are
/// small, so machine-word rationals suffice.
pub type Q = Ratio<i64>;

/// Arbitrary-size rationals for the optimization kernels.
pub type BigQ = Ratio<BigInt>;

pub fn big(q: Q) -> BigQ {
    BigQ::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

pub fn small(q: &BigQ) -> Option<Q> {
    use num_traits::ToPrimitive;
    Some(Q::new(q.numer().to_i64()?, q.denom().to_i64()?))
}
