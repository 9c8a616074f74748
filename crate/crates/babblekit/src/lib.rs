//! Goal-directed articulatory babbling: discovering the articulation of V,
//! CV and CCV syllables by derivative-free optimization against auditory and
//! somatosensory objectives, with a built-in waveguide vocal tract.
//!
//! The pipeline: an optimizer proposes articulatory targets; the
//! target-approximation model turns them into smooth trajectories; the tube
//! model maps trajectories to area functions, geometric feedback and audio;
//! a perceptual mapping scores the result against the goal syllable; and the
//! loss combines auditory and articulatory objectives, with a penalty for
//! samples whose geometry fails the somatosensory gate (those never reach
//! synthesis and do not consume evaluation budget).
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `babblekit` binary for the experiment harness.

pub mod artic;
pub mod config;
pub mod data;
pub mod error;
pub mod explore;
pub mod harness;
pub mod numerics;
pub mod objectives;
pub mod percept;
pub mod phones;
pub mod tam;
pub mod tpe;
pub mod vtsynth;

pub use artic::{ArticulatorySpace, Target};
pub use error::{Error, Result};
pub use percept::{identify, Inventory, Percept};
pub use tam::{generate_trajectory, SegmentPlan, Trajectory, UtteranceSpec};
