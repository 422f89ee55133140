//! Exact arithmetic kernels: finite fields, polynomials, residue fields, F_2 linear algebra.

pub mod expr;
pub mod f2;
pub mod gf;
pub mod poly;
pub mod residue;

pub use f2::BitMatrix;
pub use gf::{Fq, Gf};
pub use poly::Poly;
pub use residue::{Res, ResidueField};
