//! Software-in-the-loop simulation of a cooperative drone-tracking ground
//! station for open-path laser gas measurements.
//!
//! The crate is organized bottom-up:
//!
//! * [`geo`]: UTM conversion, the local ENU frame, pixel/angle geometry.
//! * [`vision`]: red-pixel masking, DBSCAN, ellipse fitting, zoom policy.
//! * [`control`]: PI controller, pan-tilt plant model, tracking supervisor.
//! * [`gas`]: gas fields, beam integrals, the laser sensor model.
//! * [`link`]: telemetry wire format and the lossy channel model.
//! * [`sim`]: drone kinematics, the synthetic camera, scenarios, run loop.
//! * [`post`]: time alignment, path-average concentrations, projections.

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod geo;
pub mod gas;
pub mod quadrature;
pub mod control;
pub mod link;
pub mod post;
pub mod sim;
pub mod vision;
