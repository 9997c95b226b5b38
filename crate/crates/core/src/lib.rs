//! Repeated-game defense of a clustered wireless sensor network against
//! selective forwarding, with hardware-failure detection.
//!
//! A cluster head plays a repeated game against rational cluster members:
//! members that drop packets lose their beacon (acknowledgement and sleep
//! permission) and are forgiven at a fixed round once they forward again.
//! After that point any remaining packet loss or over-transmission is
//! attributed to hardware failure.
//!
//! The crate is organised bottom-up: [`radio`] and [`game`] are pure
//! models, [`sim`] runs the round-based TDMA engine, [`baselines`] holds the
//! comparison games, [`metrics`] derives and serializes results, and [`cli`]
//! wires it all to the command line.

// Negated comparisons below reject NaN as well as out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod game;
pub mod metrics;
pub mod radio;
pub mod rng;
pub mod sim;

pub use baselines::{run_no_defense, run_one_shot, ScenarioId};
pub use config::{FaultModes, MaliciousSpec, ShadowingMode, SimConfig};
pub use error::{Error, Result};
pub use metrics::{Format, MetricsBundle};
pub use sim::{run_simulation, Classification, SimResult};
