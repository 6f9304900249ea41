//! Pseudo-spectral simulation of wave maps into the sphere `S^{m-1}` on a
//! periodic torus, together with the harmonic-analysis machinery used to
//! study them: Littlewood-Paley projections, Strichartz-type norms,
//! frequency envelopes, and the dyadic parallel-transport gauge.

pub mod error;
pub mod evolution;
pub mod gauge;
pub mod norms;
pub mod par;
pub mod renorm;
pub mod spectral;

pub use error::{Error, Result};
