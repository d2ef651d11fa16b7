//! Sign of the propagation speed of bistable traveling waves in the diffusive
//! Lotka-Volterra competition system
//!
//! ```text
//! U_t = U_xx + U (1 - U - k1 V)
//! V_t = d V_xx + r V (1 - k2 U - V)
//! ```
//!
//! under strong competition (`k1 > 1`, `k2 > 1`).
//!
//! The crate is organized around four independent routes to the speed sign:
//!
//! * [`theory`] evaluates the explicit sufficient conditions and combines them
//!   into a [`theory::SignVerdict`].
//! * [`supersol`] builds the stationary supersolutions behind those conditions
//!   and certifies the defining inequalities numerically.
//! * [`pde`] simulates the cooperative form of the system and measures the
//!   front speed directly.
//! * [`scan`] sweeps parameter planes and writes CSV/SVG region maps.
//!
//! Speeds follow the traveling-wave convention `(U, V)(x, t) = (Phi, Psi)(x + c t)`:
//! `c < 0` means the front moves towards `+x`, i.e. species `V` invades.

// `!(x > 0.0)` is how NaN inputs get rejected alongside out-of-range ones
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fmt;
pub mod model;
pub mod pde;
pub mod scan;
pub mod supersol;
pub mod theory;

pub use error::{Error, Result};
pub use model::{CompetitionParams, Equilibria, Lv1Params};
