//! Spatially resolved two-photon interference between structured light modes.
//!
//! * [`jones`]: Jones vectors, inner products, standard states.
//! * [`modes`]: polarization fields `e(r, φ)`, waveplates and q-plates.
//! * [`engine`]: coincidence rates, visibility maps, heralding, bucket sums.
//! * [`oracle`]: brute-force Fock-space cross-check of the engine.
//! * [`events`]: synthetic event-camera data and the analysis chain.
//! * [`io`], [`config`], [`cli`]: file formats and the command-line surface.

pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod events;
pub mod io;
pub mod jones;
pub mod matrix;
pub mod modes;
pub mod oracle;

pub use error::{ConfigError, Error, Result};
