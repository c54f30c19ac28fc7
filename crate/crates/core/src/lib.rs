pub mod bredon;
pub mod catmod;
pub mod cli;
pub mod config;
pub mod error;
pub mod group;
pub mod gset;
pub mod linalg;
pub mod span;
pub mod system;
pub mod tower;
pub mod transfer;

pub use config::Limits;
pub use error::{Error, Result};
