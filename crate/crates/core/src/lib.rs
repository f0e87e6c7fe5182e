//! Fast-slow oscillator toolkit.
//!
//! Three model families share one fixed-step integrator:
//!
//! * FitzHugh–Nagumo relaxation oscillator ([`models::FhnParams`]),
//! * the reduced 3-variable Chay–Keizer burster ([`models::ChayKeizerParams`]),
//! * the 5-variable phantom bursting model ([`models::PbmParams`]).
//!
//! On top of the integrator sit the dynamic-homeostasis analyses
//! (time averages, chair-curve sweeps, seat slopes, oscillation-interval
//! lengths) in [`analysis`], the piecewise-constant parameter noise in
//! [`stochastic`], and the fast-subsystem bifurcation machinery in
//! [`bifurcation`].
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! parallel sweep scheduling live in the `homeodyn-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod bifurcation;
pub mod error;
pub mod models;
pub mod ode;
pub mod stochastic;

mod math;

pub use error::{Error, Result};
pub use models::{ChayKeizerParams, FhnParams, ModelKind, ModelSystem, PbmParams, Timescale};
pub use ode::{integrate, IntegratorConfig, Method, Trajectory, VectorField};
pub use stochastic::{Distribution, NoiseProcess};
