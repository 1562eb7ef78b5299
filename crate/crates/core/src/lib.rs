//! Moments of Dirichlet L-functions: exact arithmetic, characters, special functions,
//! the eighth-moment weights, L-function evaluation and moment assembly.

pub mod arith;
pub mod characters;
pub mod error;
pub mod lfunc;
pub mod moments;
pub mod numeric;
pub mod special;
pub mod weights;

pub use error::{Error, Result};
pub use numeric::{Dd, QuadratureSpec};
