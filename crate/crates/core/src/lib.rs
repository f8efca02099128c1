//! Exact quadratic optimal transport on finite metric measure spaces, together
//! with the geometric diagnostics needed to study when transport maps exist:
//! geodesic branching, Bishop–Gromov ratio curves, polar decompositions,
//! Gromov–Hausdorff distortion and tangent-line tests.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`] finite metric measure spaces, metric graphs and measures.
//! * [`geodesy`] discrete geodesics, evaluation, restriction and branching.
//! * [`transport`] the exact Kantorovich solver and everything built on it.
//! * [`curvature`] ball-mass ratio curves and distance binning.
//! * [`tangents`] rescaled balls, correspondences and interval defects.
//! * [`scenarios`] deterministic builders for the model spaces and gadgets.
//! * [`io`] the structured text formats read and written by the CLI.
//!
//! Batch workloads (many independent solves, all-pairs shortest paths, scale
//! sweeps) go through [`exec`], which uses rayon when the `parallel` feature is
//! enabled and plain iterators otherwise.

pub mod curvature;
pub mod error;
pub mod exec;
pub mod geodesy;
pub mod io;
pub mod rational;
pub mod scenarios;
pub mod space;
pub mod tangents;
pub mod transport;

pub use error::{Error, Result};
pub use rational::Rational;
pub use space::{DiscreteMeasure, FiniteMetricMeasureSpace, MetricGraph};
