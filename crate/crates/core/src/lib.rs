//! Lifetime distributions and stochastic comparisons of two-unit repairable
//! standby systems.
//!
//! The crate covers three families of systems:
//!
//! * Markovian warm standby systems (principal rate `λ₁`, standby rate `λ₂`,
//!   repair rate `μ`) and their cold special case `λ₂ = 0`, started either
//!   with a fresh pair or with one unit already under repair ([`markov`]).
//! * Cold standby systems whose two units have arbitrary lifetime and repair
//!   laws ([`general_cold`]).
//! * A discrete-event simulator implementing the model rules directly, used
//!   as an independent oracle for everything else ([`sim`]).
//!
//! Orderings between systems are decided analytically by [`criteria`] and
//! numerically on grids by [`order`].
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod criteria;
pub mod curve;
pub mod dists;
mod error;
mod fm;
pub mod general_cold;
pub mod law;
pub mod markov;
pub mod order;
pub mod poly;
pub mod quad;
pub mod sim;

pub use curve::Curve;
pub use dists::{prob_greater, Distribution};
pub use error::{Error, Result};
pub use law::LifetimeLaw;
pub use markov::{ColdConfig, InitialState, MarkovSystem, WarmConfig};
pub use order::{OrderRelation, OrderVerdict};
