//! Isometric lifts and model theory for pairs of q-commuting contractions,
//! realized with dense matrices and degree-truncated Hardy spaces.

pub mod error;
pub mod matcore;

pub use error::{Error, Result};
pub mod ando;
pub mod hardy;
pub mod lifts;
pub mod model;
pub mod pseudolift;
pub mod qpair;
pub mod report;
