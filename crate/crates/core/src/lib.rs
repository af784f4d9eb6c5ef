//! Twisted-sector cohomology, K-theory Euler pairings and Gamma series for
//! Gorenstein toric cones with a projective simplicial triangulation.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod exactnum;
pub mod fans;
pub mod gamma;
pub mod input;
pub mod ktheory;
pub mod lattice;
pub mod lp;
pub mod pairing;
pub mod sectoralg;
pub mod verify;

pub use error::{Error, Result};
