//! Spatial rendering of late reverberation.
//!
//! A shoebox room is simulated with a hybrid image-source / feedback-delay-
//! network model. Inhomogeneous wall absorption is spatially subsampled onto
//! K virtual reverb sources (VRS) by warping the VRS directions per receiver
//! position and blending per-wall absorption with VBAP-style gains. Renders
//! target a spherical loudspeaker array and are evaluated binaurally via
//! interaural coherence and level-difference curves.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod absorption;
pub mod analysis;
pub mod error;
pub mod fdn;
pub mod filter;
pub mod geometry;
pub mod hrir;
pub mod hull;
pub mod ism;
pub mod render;
pub mod scenario;
pub mod vbap;
pub mod wav;

pub use error::{Error, Result};
pub use geometry::{
    direction_set, sphericity, wall_fov, DirectionSet, Pose, ShoeboxRoom, Vec3, Wall,
    BAND_CENTERS, NUM_BANDS, SPEED_OF_SOUND,
};
