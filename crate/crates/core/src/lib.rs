//! Invariant means in three variables.
//!
//! Given a two-variable mean `m`, [`type1::construct_invariant`] builds the
//! three-variable mean `M` with `M(m(a,c), m(a,b), m(b,c)) = M(a,b,c)`;
//! given `M`, [`type2::extract_m`] recovers the `m` with
//! `M(a, b, m(a,b)) = m(a,b)`. [`taylor`] expands invariant means about the
//! diagonal, and [`verify`] runs sampled checks of identities, inequalities
//! and conjectures about them.
//!
//! ```
//! use invariant_means::{catalog, type1};
//!
//! let l3 = type1::construct_invariant(&catalog::logarithmic(), &Default::default()).unwrap();
//! let v = l3.eval(1.0, 2.0, 3.0).unwrap();
//! assert!((v - 1.87917).abs() < 5e-5);
//! ```

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod deriv;
pub mod error;
pub mod exec;
pub mod mean;
pub mod sampling;
pub mod special;
pub mod taylor;
pub mod type1;
pub mod type2;
pub mod verify;

pub use error::{MeanError, Result};
pub use exec::Execution;
pub use mean::{conjugate2, conjugate3, Conjugator, DiagonalDerivatives2, Domain, Mean2, Mean3, MeanFlags};
