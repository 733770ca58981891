//! The simulated sensor node: a deterministic atmosphere, noisy quantized
//! sensors with 4-5 s response latency, and a line whose corruption rate
//! grows with baud rate.

mod climate;
mod corruption;
mod node;
mod sensors;

pub use climate::{Atmosphere, ClimateModel, GroundTruth};
pub use corruption::CorruptionModel;
pub use node::{run_node, spawn_in_process, Node, NodeConfig};
pub use sensors::{SensorNoise, Sensors};
