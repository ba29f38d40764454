pub mod error;
pub mod geometry;

pub use error::{Error, Result};
pub use geometry::{Christoffel, ManifoldPoint, ManifoldSpec, OrthonormalFrame, TangentVector, Vec3};
pub mod brownian;
pub mod rng;
pub mod stats;

pub use brownian::{FramedPath, NuSpec, TwoSidedPath};
pub use rng::RngStream;
pub use stats::{EnsembleParams, MonteCarloEstimate, VectorEstimate};
pub mod pathcalc;
pub use pathcalc::{CutoffParams, CutoffProcess, CylinderFunction, DirectionField, GradientField, PathLegs, Sampler, Start};
pub mod spde;
pub use spde::{LatticeGaussian, StringState};
pub mod inequalities;
pub use inequalities::InequalityReport;
pub mod measures;
pub use measures::HeatKernel;
