//! Bicubic patches whose diagonal curves `v = u` and `v = 1 − u` are cubic.
//!
//! The crate covers evaluation of Bezier and Hermite bicubic patches, the
//! exact derivation of the linear conditions that make both diagonals
//! cubic, solving and projecting onto those conditions, tessellation with
//! selectable triangulation patterns, continuity measurement across shared
//! edges, and the file formats used by the `smartpatch` command-line tool.

pub mod algebra;
pub mod cli;
pub mod constraints;
pub mod error;
pub mod io;
pub mod patches;
pub mod tessellation;

pub use error::{Error, Result};
