//! Momentum-space simulation of translation-invariant time-dependent
//! Bogoliubov–de Gennes dynamics near the critical temperature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod linear;
pub mod model;
pub mod observables;
pub mod quadrature;
pub mod resonance;
pub mod spectral;
pub mod state;
pub mod tdgl;

pub use error::{BdgError, Result};
pub use grid::{Dimension, MomentumGrid};
pub use model::{delta_from_alpha, k_t_eval, DeltaField, ModelParams, Potential, RadialFunction};
pub use state::{gibbs_state, normal_state, pressure_difference, BdGState};
