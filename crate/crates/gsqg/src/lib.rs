pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod oracle;
pub mod profile;
pub mod rearrange;
pub mod run;
pub mod solver;

pub use error::{Error, Result};
