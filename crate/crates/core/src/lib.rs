//! Boris pushers for charged particles in strong toroidal axisymmetric fields,
//! the guiding-center drift system they approximate, and an experiment harness
//! measuring how closely the two agree over long times.

pub mod boris;
pub mod cli_io;
pub mod drift;
pub mod error;
pub mod field;
pub mod harness;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
