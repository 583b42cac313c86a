pub mod dissection;
pub mod error;
pub mod family;
pub mod latin;
pub mod matrix;
pub mod modular;
pub mod orthomorphism;
pub mod rowperm;
pub mod search;
pub mod trade;

pub use error::{Error, Result};
