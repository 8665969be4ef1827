//! Screw dislocations in planar domains under anti-plane shear.
//!
//! The crate covers the whole pipeline: domains and configurations,
//! Green's functions with their regular parts, renormalised energy and
//! Peach–Koehler forces, adaptive gradient-flow integration with collision
//! events, collision-time bounds, and exact solutions for reference cases.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod mechanics;
pub mod oracles;

pub use bounds::{BoundReport, BoundaryScenario, PairScenario, Scenario, Verdict, Verification};
pub use dynamics::{integrate, IntegrationParams, Sample, Termination, Trajectory};
pub use error::{Error, Result};
pub use geometry::{
    pt, Burgers, Configuration, CurveRow, CurveShape, Dislocation, Domain, ParametricCurve, Point, Polygon,
};
pub use kernels::{evaluator_for, AnalyticKernels, Backend, KernelEvaluator, NumericConfig, NumericKernels};
pub use mechanics::{energy, forces, GlideSet, Mobility};
