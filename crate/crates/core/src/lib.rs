pub mod error;
pub mod exactlat;

pub use error::{Error, Result};
pub mod numeric;
pub mod counting;
pub mod heights;
pub mod varieties;
pub mod zooming;
pub mod centers;
pub mod diophantine;
pub mod dynamics;
