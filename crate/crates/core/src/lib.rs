//! Square-class spaces, Hilbert symbols, Picard 2-ranks and self-equivalence certificates
//! for the rational function field F_q(t) and for elliptic function fields y^2 = f(t).

pub mod algebra;
pub mod backend;
pub mod cert;
pub mod config;
pub mod constructions;
pub mod elliptic;
pub mod equivalence;
pub mod error;
pub mod local_symbols;
pub mod p1;
pub mod sample;
pub mod spaces;

pub use error::{Error, Result};
