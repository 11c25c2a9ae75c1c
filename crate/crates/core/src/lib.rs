pub mod assignment;
pub mod attribution;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod pruning;
pub mod search;
pub mod sensitivity;

pub use assignment::{Assignment, Value};
pub use error::Error;

/// Version tag written into every JSON document this crate emits.
pub const FORMAT_VERSION: &str = "1.0";
