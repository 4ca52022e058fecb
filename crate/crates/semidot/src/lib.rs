//! Semidiscrete optimal transport between an absolutely continuous source
//! and a finitely supported target.
//!
//! The crate solves the unregularized and entropic semidual problems, builds
//! Laguerre diagrams with facet-level geometry, evaluates the Brenier and
//! entropic maps, and ships an experiment harness for measuring how fast the
//! entropic map approaches the Brenier map as the regularization parameter
//! shrinks (paired against Hölder test fields, in squared `L²`, and under
//! dual Hölder norms), including a sharp-constant check and a CLT-style
//! resampling simulation.
//!
//! Entry points:
//! - [`measures::SourceMeasure`] / [`measures::DiscreteMeasure`]: the marginals.
//! - [`geometry::LaguerreDiagram`]: cell geometry for a potential vector.
//! - [`sd_solver::solve_semidual`] / [`eot_solver::solve_entropic`]: the solvers.
//! - [`maps`]: Brenier and entropic map evaluation.
//! - [`functionals`] and [`experiments`]: pairings, rate sweeps, simulations.
//!
//! The regularization parameter `ε` throughout is the one attached to the
//! quadratic-cost formulation `∫‖x−y‖² dπ + ε·KL(π‖P⊗Q)`; softmax weights
//! therefore carry exponents `2(⟨x,yᵢ⟩−zᵢ)/ε`. On the canonical symmetric
//! instance this gives the closed form `T^ε(x) = tanh(2x/ε)`.

pub mod config;
pub mod eot_solver;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod geometry;
pub mod maps;
pub mod measures;
pub mod output;
pub mod quadrature;
pub mod sd_solver;
pub mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;
