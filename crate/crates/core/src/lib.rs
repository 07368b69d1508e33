pub mod benchgen;
pub mod detect;
pub mod graph;
pub mod library;
pub mod metrics;
pub mod milp;
pub mod ops;
pub mod pipeline;
pub mod scalar;

pub use scalar::Scalar;

pub type Instance = milp::MilpInstance<f64>;
pub type Library = library::StructureLibrary<f64>;
pub type Unit = library::BlockUnit<f64>;
pub type Frame = library::HostFrame<f64>;
pub type Output = ops::GenOutput<f64>;
