//! Capacity-scaling laboratory for large cellular networks.
//!
//! Random networks are instantiated from a set of scaling exponents (bandwidth,
//! area, base-station density, antenna dimensions, relay density and path loss).
//! On each realization the crate computes per-node achievable rates for three
//! infrastructure protocols (single-hop, node multi-hop and relay multi-hop),
//! cut-set upper bounds, and the closed-form exponents they are expected to
//! follow. The [`experiments`] module ties these together with seeded Monte
//! Carlo sweeps and log-log slope regression.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod params;
pub mod protocols;
pub mod special;
pub mod subcell;
pub mod theory;

pub use error::{Error, Result};
pub use geometry::{NetworkRealization, Point2D};
pub use params::{InstanceParams, ModelConstants, ScalingExponents};
pub use protocols::{Direction, Mode, Protocol, RateReport};
