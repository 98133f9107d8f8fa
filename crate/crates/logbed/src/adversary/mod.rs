//! Adversary emulation: the attack-step catalog, the prerequisite digraph,
//! seeded generation of valid attack chains, and step execution.

mod chain;
mod digraph;
mod steps;

use thiserror::Error;

pub use chain::{
    execute_step, exemplary_killchain, exemplary_killchain_spaced, generate_chain,
    generate_chain_spaced, load_chain, save_chain, validate_chain, AttackChain, AttackerState,
    ChainEntry, ChainInvalid, ChainViolation, Channel, KillChainTargets, Phase, PrereqError,
    StepExecution, CHAIN_SCHEMA_VERSION, DEFAULT_ATTACK_IDLE_SECONDS,
};
pub use digraph::{
    build_default_digraph, digraph_from_config, validate_digraph_config, PrereqDigraph,
};
pub use steps::{tactic_coverage, AttackStepName, CoverageMatrix, Family, Tactic};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("unknown attack step {0:?}")]
    UnknownStep(String),
    #[error("cannot generate a chain without targets")]
    NoTargets,
    #[error("no enabled step at position {position} (digraph has no usable entry nodes)")]
    NoEnabledStep { position: usize },
    #[error("kill chain needs a web server and two distinct workstations")]
    BadKillChainTargets,
    #[error("failed to read or write chain file: {0}")]
    Io(#[from] std::io::Error),
    #[error("chain file does not parse: {0}")]
    Parse(String),
    #[error("failed to serialize chain: {0}")]
    Serialize(String),
    #[error("chain file declares schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
}
