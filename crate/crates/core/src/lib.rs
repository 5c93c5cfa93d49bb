//! Age-of-information optimal channel access for a secondary device sharing
//! spectrum with a primary user whose occupancy is a two-state Markov process.
//!
//! The crate provides the channel model, closed-form analysis of threshold
//! and randomized threshold policies, a constrained MDP solver used to
//! confirm the closed forms numerically, the throughput-optimal Bernoulli
//! benchmark, and a slot-level simulator.

mod error;
mod numeric;

pub mod baseline;
pub mod channel;
pub mod closed_form;
pub mod cmdp;
pub mod params;
pub mod policy;
pub mod sim;

pub use channel::{ChannelTransition, Occupancy, PuRates};
pub use error::{Error, Result};
pub use params::SystemParams;
pub use policy::{Policy, TabularPolicy};
