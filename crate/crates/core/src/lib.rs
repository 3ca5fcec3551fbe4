//! Exact construction, verification and classification of circular
//! bidiagonal pairs over GF(p), GF(p^k) and Q(ζ_n).

pub mod classify;
pub mod exactla;
pub mod families;
pub mod field;
pub mod qseries;
pub mod sweep;

pub use field::{
    canonical_compare, cyclotomic_polynomial, Element, Field, FieldDescriptor, FieldError,
};
