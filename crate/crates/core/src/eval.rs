//! Set-based model checking: each subformula is evaluated once into the set of worlds satisfying it.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::{EpistemicModel, EpistemicState};
use crate::relation::Relation;
use crate::vocab::Vocabulary;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("empty agent group in common knowledge")]
    EmptyGroup,
}

/// Worlds of `model` satisfying `formula`.
pub fn satisfying_set(model: &EpistemicModel, formula: &Formula) -> Result<FixedBitSet, EvalError> {
    let n = model.world_count();
    let full = || {
        let mut s = FixedBitSet::with_capacity(n);
        s.insert_range(..);
        s
    };
    let agent = |name: &str| {
        model
            .vocab()
            .agent_index(name)
            .ok_or_else(|| EvalError::UnknownAgent(name.to_owned()))
    };
    Ok(match formula {
        Formula::True => full(),
        Formula::False => FixedBitSet::with_capacity(n),
        Formula::Atom(p) => {
            let i = model
                .vocab()
                .atom_index(p.as_str())
                .ok_or_else(|| EvalError::UnknownAtom(p.to_string()))?;
            model.valuation(i).clone()
        }
        Formula::Not(f) => complement(satisfying_set(model, f)?),
        Formula::And(a, b) => {
            let mut s = satisfying_set(model, a)?;
            s.intersect_with(&satisfying_set(model, b)?);
            s
        }
        Formula::Or(a, b) => {
            let mut s = satisfying_set(model, a)?;
            s.union_with(&satisfying_set(model, b)?);
            s
        }
        Formula::Implies(a, b) => {
            let mut s = complement(satisfying_set(model, a)?);
            s.union_with(&satisfying_set(model, b)?);
            s
        }
        Formula::Iff(a, b) => {
            let mut s = satisfying_set(model, a)?;
            s.symmetric_difference_with(&satisfying_set(model, b)?);
            complement(s)
        }
        Formula::Knows(i, f) => {
            let r = &model.relations()[agent(i.as_str())?];
            let sat = satisfying_set(model, f)?;
            let mut out = FixedBitSet::with_capacity(n);
            out.extend((0..n).filter(|&w| r.successors(w).is_subset(&sat)));
            out
        }
        Formula::Possible(i, f) => {
            let r = &model.relations()[agent(i.as_str())?];
            let sat = satisfying_set(model, f)?;
            let mut out = FixedBitSet::with_capacity(n);
            out.extend((0..n).filter(|&w| !r.successors(w).is_disjoint(&sat)));
            out
        }
        Formula::Common(group, f) => {
            if group.is_empty() {
                return Err(EvalError::EmptyGroup);
            }
            let mut rels = Vec::with_capacity(group.len());
            for g in group {
                rels.push(model.relations()[agent(g.as_str())?].transpose());
            }
            // A world fails C_G f iff it reaches a non-f world; walk backwards from those.
            let bad = complement(satisfying_set(model, f)?);
            complement(Relation::reach(n, &bad, rels.iter()))
        }
    })
}

/// Checks that every agent and atom in `formula` belongs to `vocab`.
pub fn check_names(formula: &Formula, vocab: &Vocabulary) -> Result<(), EvalError> {
    match formula {
        Formula::True | Formula::False => Ok(()),
        Formula::Atom(p) => vocab
            .atom_index(p.as_str())
            .map(|_| ())
            .ok_or_else(|| EvalError::UnknownAtom(p.to_string())),
        Formula::Not(f) => check_names(f, vocab),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            check_names(a, vocab)?;
            check_names(b, vocab)
        }
        Formula::Knows(i, f) | Formula::Possible(i, f) => {
            vocab
                .agent_index(i.as_str())
                .ok_or_else(|| EvalError::UnknownAgent(i.to_string()))?;
            check_names(f, vocab)
        }
        Formula::Common(g, f) => {
            if g.is_empty() {
                return Err(EvalError::EmptyGroup);
            }
            for i in g {
                vocab
                    .agent_index(i.as_str())
                    .ok_or_else(|| EvalError::UnknownAgent(i.to_string()))?;
            }
            check_names(f, vocab)
        }
    }
}

fn complement(mut s: FixedBitSet) -> FixedBitSet {
    s.toggle_range(..);
    s
}

pub fn eval_world(
    model: &EpistemicModel,
    world: &str,
    formula: &Formula,
) -> Result<bool, EvalError> {
    let w = model
        .world_index(world)
        .ok_or_else(|| EvalError::UnknownWorld(world.to_owned()))?;
    Ok(satisfying_set(model, formula)?.contains(w))
}

pub fn eval_state(state: &EpistemicState, formula: &Formula) -> Result<bool, EvalError> {
    let sat = satisfying_set(state.model(), formula)?;
    Ok(state.designated().is_subset(&sat))
}
