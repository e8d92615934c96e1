//! Exact coordinate calculus for Teichmüller and lamination spaces of
//! triangulated ciliated surfaces.

pub mod charts;
pub mod error;
pub mod laminations;
pub mod laurent;
pub mod markov;
pub mod monodromy;
pub mod pairings;
pub mod poisson;
pub mod semifield;
pub mod surface;

pub use error::{Error, Result};
