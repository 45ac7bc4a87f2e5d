//! Simulation data access over a SimDM-described model grid.
//!
//! The crate is organised bottom-up:
//!
//! * [`simdm`]: the metadata instance graph and its validation rules.
//! * [`vo`]: VOSI XML documents and the canonical SimDM JSON form.
//! * [`query`]: the constraint language used by cutouts.
//! * [`catalog`]: ingest into, and reads from, the immutable on-disk catalog.
//! * [`service`]: the HTTP data-access API over an opened catalog.
//! * [`synth`]: a deterministic synthetic model-grid generator.

pub mod catalog;
pub mod query;
pub mod scalar;
pub mod service;
pub mod simdm;
pub mod synth;
pub mod vo;

#[cfg(test)]
pub(crate) mod testutil;

pub use scalar::{Datatype, Scalar};
pub use simdm::{InstanceGraph, ValidationReport};
