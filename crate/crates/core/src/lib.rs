//! Epistemic planning over dynamic epistemic logic with commutativity axioms.
//!
//! States are finite Kripke models with designated worlds, actions are event models,
//! and [`planner::plan_existence`] runs a breadth-first search over bisimulation-contracted
//! states, pruning successors that leave the chosen logic.

pub mod axioms;
pub mod bisim;
pub mod encodings;
pub mod eval;
pub mod event;
pub mod formula;
pub mod io;
pub mod kripke;
pub mod names;
pub mod parse;
pub mod planner;
pub mod relation;
pub mod vocab;

pub use axioms::{
    check_frame_property, compose_relations, is_l_action, is_l_state, FrameViolation,
    LogicDescription, LogicError, LogicSpec,
};
pub use bisim::{
    bisimilar, bisimulation, canonical_key, characteristic_formula, contract, k_bisimilar,
    CanonicalKey, Partition,
};
pub use eval::{check_names, eval_state, eval_world, satisfying_set, EvalError};
pub use event::{
    applicable, compose_sequence, product_update, Action, ActionBuilder, ActionDescription,
    ActionError, EventModel, SequenceError, UpdateError,
};
pub use formula::Formula;
pub use io::{LoadedTask, TaskFile, TaskFileError};
pub use kripke::{
    validate_state, Closure, EpistemicModel, EpistemicState, Frame, ModelError, StateBuilder,
    StateDescription,
};
pub use names::{AgentId, Atom, EventId, WorldId};
pub use parse::{parse_formula, ParseError};
pub use planner::{
    explain_trace, plan_existence, validate_solution, PlanError, PlanResult, PlanningTask,
    SearchOptions, SearchStats, StepFailure, TaskError, Verdict,
};
pub use relation::Relation;
pub use vocab::{Vocabulary, VocabularyError};
