//! Coupled PDE–ODE solvers for slow vehicles acting as moving bottlenecks in
//! LWR traffic: a Godunov fractional-step scheme on a uniform grid and a
//! wave-front-tracking reference solver, plus the scenario library and the
//! refinement / validation harness built on them.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); scenarios,
//! records and studies are `f64`. The aliases below fix the precision.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod gof;
pub mod model;
pub mod record;
pub mod riemann;
pub mod scalar;
pub mod scenario;
pub mod study;
pub mod validate;
pub mod wft;

pub use error::{Error, Result};
pub use record::RunRecord;
pub use scalar::Scalar;
pub use scenario::{builtin, parse_scenario, Scenario};

pub type PhiProfile = model::PhiProfile<f64>;
pub type BottleneckParams = model::BottleneckParams<f64>;
pub type DensityGrid = gof::DensityGrid<f64>;
pub type SimState = gof::SimState<f64>;
pub type FrontList = wft::FrontList<f64>;

pub type PhiProfile32 = model::PhiProfile<f32>;
pub type BottleneckParams32 = model::BottleneckParams<f32>;
pub type DensityGrid32 = gof::DensityGrid<f32>;
pub type SimState32 = gof::SimState<f32>;
pub type FrontList32 = wft::FrontList<f32>;
