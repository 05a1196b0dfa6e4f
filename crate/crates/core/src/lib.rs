#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod field;
pub mod filtered;
pub mod fqlin;
pub mod lattice;
pub mod matrix;
pub mod hn;
pub mod hom;
pub mod kempf;
pub mod module;
pub mod optim;
pub mod polygon;
pub mod rational;
pub mod series;
pub mod smith;
pub mod subspace;
pub mod variety;

pub use error::{Error, Result};
pub use field::{Field, Fq};
pub use matrix::SeriesMatrix;
pub use series::LaurentSeries;
