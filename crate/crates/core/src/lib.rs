//! Highway lane-change simulation.
//!
//! - [`traffic`]: trajectory corpora (CSV schema, validation, synthesis)
//! - [`idm`]: IDM longitudinal control
//! - [`intention`]: manoeuvre intention and time-to-lane-change
//! - [`env`]: the episodic environment the agent drives in

pub mod env;
pub mod idm;
pub mod intention;
pub mod seeding;
pub mod traffic;
