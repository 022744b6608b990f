pub mod calibration;
pub mod equilibrium;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod lp;
pub mod network;
pub mod rng;
pub mod toll_design;

pub use error::{Error, Result};
