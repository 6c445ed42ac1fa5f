//! Real parabolic cylinder functions `U(a, x)`, `V(a, x)` and `W(a, x)` with
//! their derivatives, computed by quadrature along steepest-descent contours.

pub mod api;
pub mod contours;
pub mod error;
pub mod quadrature;
pub mod scalar;
pub mod scaled;
pub mod series;
pub mod ureg;
pub mod wreg;

pub use error::{PcfError, Result};
pub use scaled::ScaledReal;
