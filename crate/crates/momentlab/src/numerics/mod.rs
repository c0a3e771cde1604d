//! Shared numeric kernels: compensated summation, adaptive quadrature, and
//! the special functions used by the zero engine.

pub mod quad;
pub mod special;
pub mod sum;

pub use quad::{integrate, integrate_to_inf};
pub use sum::{CNeumaier, Neumaier};
