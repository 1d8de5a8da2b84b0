//! The broadcast protocols.

pub mod committee;
pub mod dispute;
pub mod eig;

use thiserror::Error;

use crate::adversary::AdversaryError;
use crate::sim::{ConfigError, SimError};

pub use committee::{majority_vote, run_algorithm2, run_algorithm2_with, CommitteeError, CommitteeLayout};
pub use dispute::{
    run_byzantine_broadcast, run_byzantine_broadcast_with, Claim, GenerationRecord, NodeResolution,
};
pub use eig::{eig_broadcast, run_eig_batch, EigError, EigInstance, EigParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("input has {got} bits, configuration says {expected}")]
    InputLength { expected: usize, got: usize },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Committee(#[from] CommitteeError),
}
