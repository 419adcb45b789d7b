//! Computations with modules over A(1) and over the exterior algebra on the
//! Margolis operations, aimed at the Borel-type cohomology of elementary
//! abelian 2-groups with Real connective K-theory coefficients.

pub mod a1mod;
pub mod chart;
pub mod closedform;
pub mod coeff;
pub mod emod;
pub mod error;
pub mod format;
pub mod gflin;
pub mod grmod;
pub mod krassembly;
pub mod rfun;
pub mod towers;
pub mod verify;

pub use error::{Error, Result};
