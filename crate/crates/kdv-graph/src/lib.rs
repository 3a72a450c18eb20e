//! Numerics for the Korteweg–de Vries equation on metric star graphs.
//!
//! A star graph joins `k` negative half-lines and `m` positive half-lines at a
//! single vertex (x = 0). The flow `∂_t w + ∂_x³ w + w ∂_x w = 0` on the edges
//! is coupled through 2k+m vertex conditions: scaled continuity of the trace,
//! a first-derivative coupling through a real k×m matrix `B`, and one balance
//! condition on the second derivatives. This crate provides
//!
//! * [`graph`] — the graph/coupling data model and its validation, the
//!   operator norm of `B`, and the coupling classification (unitary group /
//!   contraction semigroup / outside theory);
//! * [`matrix`] — assembly and analysis of the complex vertex coupling matrix
//!   whose invertibility drives the solvability of the forcing system;
//! * [`regularity`] — admissible Sobolev regularity intervals from the
//!   spectral orders, and a grid search for invertible configurations;
//! * [`fracops`] — Riemann–Liouville fractional integrals and derivatives on
//!   uniformly sampled signals;
//! * [`forcing`] — the Airy kernel, the Duhamel boundary forcing operators
//!   with their exact trace identities, and the vertex linear system solve;
//! * [`simulate`] — a Crank–Nicolson method-of-lines simulator on truncated
//!   edges with the vertex conditions imposed as constraint rows;
//! * [`special`] — Gamma and Airy special functions used throughout;
//! * [`signal`] — the uniform-grid sampled-signal carrier type.

pub mod error;
pub mod special;
pub mod signal;
pub mod fracops;
pub mod graph;
pub mod matrix;
pub mod regularity;
pub mod forcing;
pub mod simulate;

mod fft;
mod linalg;

pub use error::{Error, Result};
