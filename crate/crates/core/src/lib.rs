//! Exact harmonic analysis and probability on finite Abelian groups, with
//! executable checks of Heyde-type characterization theorems.

pub mod error;
pub mod group;
#[macro_use]
pub mod dist;
pub mod cli;
pub mod config;
pub mod continuum;
pub mod heyde;
pub mod polyfd;

pub use error::{Error, Result};
