//! Core algorithms for centralized coordination of connected vehicles at an
//! unsignalized intersection.
//!
//! The crate is split into four stages that mirror the control pipeline:
//!
//! * [`geometry`]: lane-level movement paths and the conflict relation between
//!   them, built analytically from line and circular-arc segments.
//! * [`milp`]: the target-velocity program. Pairwise collision avoidance at
//!   each conflict point is encoded as a big-M disjunction over one binary per
//!   conflict, solved by branch and bound over a dense bounded-variable
//!   simplex.
//! * [`selector`]: turns an optimal solution into a priority graph and extracts
//!   the subset of vehicles whose commitments can be frozen this round.
//! * [`planner`]: builds synchronous velocity profiles that realize the
//!   optimized velocities with a common virtual delay, and checks transfer
//!   conditions against vehicles committed in earlier rounds.
//!
//! The crate is `no_std` (with `alloc`) so the pipeline can run on embedded
//! roadside hardware; all floating-point math goes through `libm`.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod geometry;
pub mod milp;
pub mod planner;
pub mod selector;
