//! Gap patterns of integers coprime to the first k primes: recursive
//! construction, structural verification, segmented scanning, residue
//! analysis, and prime extraction.

pub mod bits;
pub mod error;
pub mod primes;
pub mod reference;
pub mod residue;
pub mod scan;
pub mod wheel;

pub use error::{Error, Result};
