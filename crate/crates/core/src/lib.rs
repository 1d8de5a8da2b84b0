//! Deterministic simulator for Byzantine Broadcast over a shared channel
//! on which fault-free nodes can only broadcast while faulty nodes may
//! send different payloads to different receivers.
//!
//! The crate is `no_std` with `alloc`; file formats and the command-line
//! runner live in the `selbb` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod adversary;
pub mod audit;
pub mod bits;
pub mod bounds;
pub mod gf;
pub mod protocol;
pub mod rs;
pub mod sim;

pub use adversary::{strategy_catalog, Adversary, AdversaryError, StrategyKind, StrategySpec};
pub use bits::Bits;
pub use protocol::{run_algorithm2, run_byzantine_broadcast, ProtocolError};
pub use sim::{check_bb_properties, BbOutcome, BbVerdict, NodeId, SystemConfig};
