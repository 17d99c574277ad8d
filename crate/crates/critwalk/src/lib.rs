//! Simulation library for (near-)critical random graphs.
//!
//! Four models share one skeleton: an exploration process reveals components
//! as positive excursions of an active-count walk, and Monte Carlo over many
//! seeded trials estimates the tails of the largest component's size around
//! its n^{2/3} scaling. Every exploration engine is backed by a brute-force
//! oracle (union-find on materialized instances, exhaustive enumeration at
//! tiny sizes) so the walks can be trusted before they are measured.

pub mod er;
pub mod error;
pub mod harness;
pub mod intersection;
pub mod oracle;
pub mod profile;
pub mod quantum;
pub mod regular;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use profile::ComponentProfile;
pub use rng::{derive_stream, RngStream};
