pub mod bistability;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod holstein;
pub mod medium;
pub mod numerics;
pub mod rates;
pub mod response;

pub use error::{Error, Result};
