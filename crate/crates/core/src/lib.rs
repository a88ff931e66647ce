//! Contact-explicit goal-conditioned control at desk scale.
//!
//! Everything a task asks for is expressed as a sequence of contact goals:
//! where an end-effector should touch the world, for how long, and whether it
//! should be in contact at all.  This crate holds the full algorithmic stack
//! built around that representation:
//!
//! - [`contact`]: the goal/plan data model, the reach/hold/detach phase
//!   machine, goal advancement and plan-deviation arithmetic;
//! - [`reward`]: the contact rewards, object-pose reward, discovery bonus and
//!   regularization penalties;
//! - [`gait`]: quadruped contact-plan generation (trot, pace, bound, jump,
//!   crawl) from sampled stride/stance/heading parameters;
//! - [`manip`]: bimanual plan generation (sustained repose, 45-degree
//!   reorientation) over planar object shapes;
//! - [`env`]: deterministic planar environments grounding the rewards, plus a
//!   batch-stepping wrapper;
//! - [`policy`] / [`trainer`]: an actor-critic PPO implementation with GAE,
//!   an optional minimal gated recurrent cell, checkpoint encoding and a
//!   finite-difference gradient checker;
//! - [`scripted`]: white-box controllers that execute plans exactly, used to
//!   validate the planner/environment/metric pipeline end to end;
//! - [`metrics`]: episode logging and the velocity-grid, duration-sweep and
//!   pose-error evaluation protocols.
//!
//! The crate is `no_std` (with `alloc`); all float transcendentals go through
//! `libm` so results are bit-identical across platforms and feature sets.
//! File formats, CLI and anything that touches the filesystem live in the
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod contact;
pub mod env;
pub mod error;
pub mod gait;
pub mod manip;
pub mod math;
pub mod metrics;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod scripted;
pub mod trainer;

pub use error::CoreError;
