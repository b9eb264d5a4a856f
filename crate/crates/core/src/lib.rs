//! Fibered measures on `I x T^d`, angle maps, their convolution dynamics,
//! and a homogeneous skew product on `SL(2,R) ⋉ R^2 / SL(2,Z) ⋉ Z^2`.

pub mod angle;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod homogeneous;
pub mod lab;
pub mod measure;
pub mod report;

pub use angle::{wrap, AngleMap, Family, MapDescriptor};
pub use error::{Error, Result};
pub use experiment::{run, Experiment, ExperimentConfig, RunManifest};
pub use grid::FiberGrid;
pub use homogeneous::{GroupElement, LatticeElement, ModelConfig, SkewState};
pub use measure::FiberedMeasure;
