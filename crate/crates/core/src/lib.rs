pub mod entropy;
pub mod error;
pub mod experiments;
pub mod flows;
pub mod geometry;
pub mod logsobolev;
pub mod warped_product;

pub use error::{Error, Result};
