//! Numerical and symbolic laboratory for equidistribution on projective
//! spaces: random sections and their zeros, equilibrium measures of rational
//! maps, Hénon intersection clouds and pluripotential constants.

pub mod dynamics;
pub mod error;
pub mod henon;
pub mod measure;
pub mod potential;
pub mod poly;
pub mod projective;
pub mod report;
pub mod rng;
pub mod sections;
pub mod stats;
pub mod test_function;

pub use error::{GeometryError, LabError, LabResult, PolyError};
pub use measure::EmpiricalMeasure;
pub use projective::ProjectivePoint;
pub use rng::SeedStream;
pub use stats::Estimate;
pub use test_function::{TestFunction, TestFunctionId};
