//! Action templates of two existing planning systems: the knowledge fragment of mA*
//! and the do/update/sense actions of Kominis and Geffner.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EncodingError;
use crate::event::{Action, ActionBuilder};
use crate::formula::Formula;
use crate::names::Atom;
use crate::vocab::Vocabulary;

/// What an action needs besides its frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Payload {
    /// Executability precondition.
    pub pre: Option<Formula>,
    /// Ontic effects `atom := formula`.
    pub effects: Vec<(Atom, Formula)>,
    /// The sensed or announced formula.
    pub condition: Option<Formula>,
}

impl Payload {
    pub fn new() -> Self {
        Payload::default()
    }

    pub fn pre(mut self, f: Formula) -> Self {
        self.pre = Some(f);
        self
    }

    pub fn effect(mut self, atom: &str, f: Formula) -> Self {
        self.effects.push((atom.into(), f));
        self
    }

    pub fn condition(mut self, f: Formula) -> Self {
        self.condition = Some(f);
        self
    }

    fn guarded(&self, f: Formula) -> Formula {
        match &self.pre {
            Some(p) => Formula::and(p.clone(), f),
            None => f,
        }
    }

    fn condition_or_err(&self, action: &str) -> Result<Formula, EncodingError> {
        self.condition
            .clone()
            .ok_or_else(|| EncodingError::BadOperation(format!("`{action}` needs a condition")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaStarKind {
    Ontic,
    Sensing,
    Announcement,
}

fn agent_set<'a>(
    vocab: &Vocabulary,
    agents: &[&'a str],
) -> Result<BTreeSet<&'a str>, EncodingError> {
    let mut set = BTreeSet::new();
    for &a in agents {
        if vocab.agent_index(a).is_none() {
            return Err(EncodingError::Partition(format!("unknown agent `{a}`")));
        }
        if !set.insert(a) {
            return Err(EncodingError::Partition(format!(
                "agent `{a}` listed twice"
            )));
        }
    }
    Ok(set)
}

fn single_event(
    vocab: &Arc<Vocabulary>,
    name: &str,
    pre: Formula,
    effects: &[(Atom, Formula)],
) -> Result<Action, EncodingError> {
    let mut b = ActionBuilder::new(name).event("e1", pre).designated("e1");
    for (atom, f) in effects {
        b = b.post("e1", atom.as_str(), f.clone());
    }
    Ok(b.build(vocab)?)
}

/// Two events for `cond` and `~cond`, confused exactly by `blind`.
fn two_events(
    vocab: &Arc<Vocabulary>,
    name: &str,
    events: [&str; 2],
    pre: [Formula; 2],
    blind: &[&str],
    both_designated: bool,
) -> Result<Action, EncodingError> {
    let [pos, neg] = pre;
    let mut b = ActionBuilder::new(name)
        .event(events[0], pos)
        .event(events[1], neg)
        .designated(events[0]);
    if both_designated {
        b = b.designated(events[1]);
    }
    for a in blind {
        b = b.edge(a, events[0], events[1]);
    }
    Ok(b.build(vocab)?)
}

/// An mA* action with fully observant agents `full` and partially observant agents `partial`.
///
/// Ontic actions must be public. Sensing designates both outcomes; an announcement designates
/// only the one where the condition is true.
pub fn mastar_action(
    vocab: &Arc<Vocabulary>,
    name: &str,
    kind: MaStarKind,
    full: &[&str],
    partial: &[&str],
    payload: &Payload,
) -> Result<Action, EncodingError> {
    let f = agent_set(vocab, full)?;
    let p = agent_set(vocab, partial)?;
    if let Some(both) = f.intersection(&p).next() {
        return Err(EncodingError::Partition(format!(
            "agent `{both}` is both fully and partially observant"
        )));
    }
    if let Some(missing) = vocab
        .agents()
        .iter()
        .find(|a| !f.contains(a.as_str()) && !p.contains(a.as_str()))
    {
        return Err(EncodingError::Partition(format!(
            "agent `{missing}` is oblivious; only fully and partially observant agents are supported"
        )));
    }
    match kind {
        MaStarKind::Ontic => {
            if !p.is_empty() {
                return Err(EncodingError::Partition(
                    "ontic actions must be public".into(),
                ));
            }
            single_event(
                vocab,
                name,
                payload.guarded(Formula::True),
                &payload.effects,
            )
        }
        MaStarKind::Sensing | MaStarKind::Announcement => {
            let cond = payload.condition_or_err(name)?;
            let pre = [
                payload.guarded(cond.clone()),
                payload.guarded(Formula::not(cond)),
            ];
            let blind: Vec<&str> = p.into_iter().collect();
            two_events(
                vocab,
                name,
                ["f1", "f2"],
                pre,
                &blind,
                kind == MaStarKind::Sensing,
            )
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KgKind {
    Do,
    Update,
    Sense,
}

/// A Kominis–Geffner action; `observers` are the agents that see the outcome of a sense action.
///
/// `do` applies the payload's effects, `update` publicly restricts to the condition, and `sense`
/// splits on the condition for everyone outside `observers`.
pub fn kg_action(
    vocab: &Arc<Vocabulary>,
    name: &str,
    kind: KgKind,
    observers: &[&str],
    payload: &Payload,
) -> Result<Action, EncodingError> {
    let obs = agent_set(vocab, observers)?;
    match kind {
        KgKind::Do => single_event(
            vocab,
            name,
            payload.guarded(Formula::True),
            &payload.effects,
        ),
        KgKind::Update => {
            let cond = payload.condition_or_err(name)?;
            single_event(vocab, name, payload.guarded(cond), &[])
        }
        KgKind::Sense => {
            let cond = payload.condition_or_err(name)?;
            let blind: Vec<&str> = vocab
                .agents()
                .iter()
                .map(|a| a.as_str())
                .filter(|a| !obs.contains(a))
                .collect();
            let pre = [
                payload.guarded(cond.clone()),
                payload.guarded(Formula::not(cond)),
            ];
            two_events(vocab, name, ["h1", "h2"], pre, &blind, true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{is_l_action, LogicSpec};

    fn vocab() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::new(["a", "b", "c"], ["p"]).unwrap())
    }

    #[test]
    fn templates_are_commutative() {
        let v = vocab();
        let pay = Payload::new()
            .condition(Formula::atom("p"))
            .effect("p", Formula::True);
        let ontic = mastar_action(&v, "o", MaStarKind::Ontic, &["a", "b", "c"], &[], &pay).unwrap();
        assert_eq!(ontic.model().event_count(), 1);
        assert!(is_l_action(&ontic, LogicSpec::C));
        let sense = mastar_action(&v, "s", MaStarKind::Sensing, &["a"], &["b", "c"], &pay).unwrap();
        assert!(is_l_action(&sense, LogicSpec::C));
        assert_eq!(sense.designated().count_ones(..), 2);
        let ann =
            mastar_action(&v, "n", MaStarKind::Announcement, &["a"], &["b", "c"], &pay).unwrap();
        assert_eq!(ann.designated().count_ones(..), 1);
        let kg = kg_action(&v, "k", KgKind::Sense, &["a", "b", "c"], &pay).unwrap();
        assert!(kg.model().relations().iter().all(|r| r.edge_count() == 2));
    }

    #[test]
    fn partition_errors() {
        let v = vocab();
        let pay = Payload::new().condition(Formula::atom("p"));
        assert!(
            mastar_action(&v, "s", MaStarKind::Sensing, &["a", "b"], &["b", "c"], &pay).is_err()
        );
        assert!(mastar_action(&v, "s", MaStarKind::Sensing, &["a"], &["b"], &pay).is_err());
        assert!(mastar_action(&v, "o", MaStarKind::Ontic, &["a", "b"], &["c"], &pay).is_err());
        assert!(mastar_action(
            &v,
            "s",
            MaStarKind::Sensing,
            &["a", "b", "c"],
            &[],
            &Payload::new()
        )
        .is_err());
    }
}
