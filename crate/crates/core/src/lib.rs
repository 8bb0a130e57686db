//! Spectral laboratory for the semiclassical Robin Laplacian on smooth
//! planar domains: curvature wells, the effective boundary Hamiltonian,
//! WKB quasimodes, the tubular 2D operator, tunnelling splittings and
//! Weyl counts.

pub mod discretization;
pub mod effective1d;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod geometry;
pub mod interaction;
pub mod linalg;
pub mod quadrature;
pub mod ref1d;
pub mod tubular2d;
pub mod weyl;
pub mod wkb;

pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentKind};
pub use geometry::{profile_from_spec, CurvatureProfile, CurveSpec};
pub use linalg::EigenOptions;
pub use tubular2d::{TauSpec, TubularSpec};
