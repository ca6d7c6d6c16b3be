//! C*-algebra-valued modular metric spaces on a finite-dimensional matrix model.
//!
//! The crate is organised bottom-up:
//!
//! * [`cstar_algebra`]: matrix elements, involution, norms, spectrum, positive cone.
//! * [`modular_metric`]: modular metrics `ω_λ(x, y)`, sampled axiom checks and
//!   the derived distances `d⁰` and `d*`.
//! * [`cstar_class`]: C*-class functions, the `Ψ` / `Φ_u` families and monotone triples.
//! * [`fixed_point`]: six-map systems, contraction checks, coincidence and
//!   common-fixed-point search.
//! * [`integral_solver`]: a discretized nonlinear integral system and its solver.
//! * [`harness`]: scenario configs, demos and deterministic reports behind the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` deliberately rejects NaN

pub mod checks;
pub mod cstar_algebra;
pub mod cstar_class;
pub mod error;
pub mod fixed_point;
pub mod harness;
pub mod integral_solver;
pub mod modular_metric;
pub mod sampling;

pub use cstar_algebra::{AlgebraContext, Element, NormMode, OrderMode};
pub use error::{Error, Result};
