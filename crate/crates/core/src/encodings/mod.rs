//! Ready-made tasks and actions: coordinated attack, the mA* and Kominis–Geffner action
//! templates, and the two-counter machine reduction.

mod coordinated;
mod machine;
mod meta;
mod systems;

use thiserror::Error;

use crate::event::ActionError;
use crate::kripke::ModelError;
use crate::planner::TaskError;

pub use coordinated::{alternation, alternation_facts, CoordinatedAttack};
pub use machine::{machine_step, Instruction, MachineConfig, MachineError, TwoCounterMachine};
pub use meta::{
    encode_machine, encode_machine_with, instruction_goal, machine_action, machine_actions,
    meta_chain, meta_chain_state, meta_operation, meta_state, meta_vocabulary, path_formula,
    MetaOp, PathKind, MACHINE_MAX_DEPTH, META_AGENTS, META_ATOMS,
};
pub use systems::{kg_action, mastar_action, KgKind, MaStarKind, Payload};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodingError {
    #[error("observer partition: {0}")]
    Partition(String),
    #[error("`{0}` is not one of the counter atoms p1, p2, p3")]
    NotCounterAtom(String),
    #[error("{0}")]
    BadOperation(String),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Task(#[from] TaskError),
}
