//! Multi-patch NURBS isogeometric analysis for linear elastostatics, with patches
//! joined weakly across non-matching interfaces by Nitsche's method.
//!
//! A typical run builds a [`mesh::MultiPatchModel`] (by hand, from [`models`], or
//! from a JSON document via [`io::load_model`]), assembles it with
//! [`solver::assemble_global`], solves with [`solver::solve`] and samples the
//! result with [`solver::evaluate_field`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coupling;
pub mod elasticity;
pub mod error;
pub mod io;
pub mod mesh;
pub mod models;
pub mod quadrature;
pub mod solver;
pub mod spline;
pub mod verification;

pub use error::{IgaError, Result};
