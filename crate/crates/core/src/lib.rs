pub mod coframe;
pub mod error;
pub mod expr;
pub mod field;
pub mod forms;
pub mod io;
pub mod report;
pub mod random;
pub mod revolution;
pub mod scenes;
pub mod sampling;
pub mod structures;
pub mod transforms;

pub use error::{Error, Result};
