pub mod dd;
pub mod quad;

pub use dd::Dd;
pub use quad::{QuadResult, QuadratureSpec};
