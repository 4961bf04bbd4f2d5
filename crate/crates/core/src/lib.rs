//! Simulation and exact analysis of random walks, the symmetric exclusion
//! process, the interchange process and the chameleon process on finite
//! weighted graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: weighted graphs, generators, hop distances.
//! * [`stream`]: the marked Poisson event stream (graphical construction)
//!   and everything driven by it: interval permutations, particle
//!   trajectories, meeting times and the walk/interchange coupling.
//! * [`exact`]: enumerated state spaces, sparse generators, uniformization,
//!   total variation, mixing times and meeting-time tails.
//! * [`chameleon`]: the red/pink/white chameleon process and its ink.
//! * [`ink`]: the discrete ink chain and its `Fill`-conditioned transform.
//! * [`estimators`]: Monte Carlo estimates with standard errors.
//! * [`bounds`]: canonical-path congestion and its distance lower bound.
//! * [`verify`]: the numeric verification suite used by the CLI and the
//!   acceptance tests.

pub mod bounds;
pub mod chameleon;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod graph;
pub mod ink;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod stream;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{GraphKind, WeightedGraph};
