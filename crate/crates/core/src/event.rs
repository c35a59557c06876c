//! Event models, actions and the product update.

use std::collections::BTreeMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisim::contract;
use crate::eval::{check_names, satisfying_set, EvalError};
use crate::formula::Formula;
use crate::kripke::{
    name_order, permute_relation, permute_set, Closure, EpistemicModel, EpistemicState, Frame,
};
use crate::names::{EventId, WorldId};
use crate::parse::{parse_formula, ParseError};
use crate::relation::Relation;
use crate::vocab::Vocabulary;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("action `{action}`: {}", .problems.join("; "))]
    Invalid {
        action: String,
        problems: Vec<String>,
    },
    #[error("action `{action}`, event `{event}`: {source}")]
    Formula {
        action: String,
        event: String,
        #[source]
        source: ParseError,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UpdateError {
    #[error("action `{0}` is not applicable")]
    NotApplicable(String),
    #[error("agent/atom universes differ")]
    UniverseMismatch,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventModel {
    vocab: Arc<Vocabulary>,
    events: Vec<EventId>,
    relations: Vec<Relation>,
    pre: Vec<Formula>,
    /// Per event, atom index to assigned formula. Absent atoms keep their value.
    post: Vec<BTreeMap<usize, Formula>>,
}

impl EventModel {
    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[EventId] {
        &self.events
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.binary_search_by(|e| e.as_str().cmp(name)).ok()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn pre(&self, event: usize) -> &Formula {
        &self.pre[event]
    }

    pub fn post(&self, event: usize) -> &BTreeMap<usize, Formula> {
        &self.post[event]
    }

    pub fn is_equivalence(&self) -> bool {
        self.relations.iter().all(Relation::is_equivalence)
    }
}

impl Frame for EventModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn point_count(&self) -> usize {
        self.events.len()
    }

    fn point_name(&self, point: usize) -> &str {
        self.events[point].as_str()
    }

    fn relation(&self, agent: usize) -> &Relation {
        &self.relations[agent]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    name: String,
    model: EventModel,
    designated: FixedBitSet,
}

impl Action {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &EventModel {
        &self.model
    }

    pub fn designated(&self) -> &FixedBitSet {
        &self.designated
    }

    pub fn renamed(&self, name: impl Into<String>) -> Action {
        Action {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Same events with replaced relations; the caller keeps them well-formed.
    pub(crate) fn with_relations(&self, relations: Vec<Relation>) -> Action {
        debug_assert_eq!(relations.len(), self.model.relations.len());
        let mut a = self.clone();
        a.model.relations = relations;
        a
    }

    pub fn to_description(&self) -> ActionDescription {
        let m = &self.model;
        let vocab = &m.vocab;
        ActionDescription {
            name: self.name.clone(),
            events: (0..m.event_count())
                .map(|e| EventDescription {
                    name: m.events[e].to_string(),
                    pre: m.pre[e].to_string(),
                    post: m.post[e]
                        .iter()
                        .map(|(&p, f)| (vocab.atoms()[p].to_string(), f.to_string()))
                        .collect(),
                })
                .collect(),
            relations: vocab
                .agents()
                .iter()
                .zip(&m.relations)
                .map(|(a, r)| {
                    let pairs = r
                        .pairs()
                        .map(|(u, v)| [m.events[u].to_string(), m.events[v].to_string()])
                        .collect();
                    (a.to_string(), pairs)
                })
                .collect(),
            designated: self
                .designated
                .ones()
                .map(|e| m.events[e].to_string())
                .collect(),
            closure: Closure::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDescription {
    pub name: String,
    pub pre: String,
    #[serde(default)]
    pub post: BTreeMap<String, String>,
}

/// JSON form of an action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDescription {
    pub name: String,
    pub events: Vec<EventDescription>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<[String; 2]>>,
    pub designated: Vec<String>,
    #[serde(default)]
    pub closure: Closure,
}

impl ActionDescription {
    pub fn build(&self, vocab: &Arc<Vocabulary>) -> Result<Action, ActionError> {
        let mut b = ActionBuilder::new(&self.name).closure(self.closure);
        let parse = |event: &str, text: &str| {
            parse_formula(text, vocab).map_err(|source| ActionError::Formula {
                action: self.name.clone(),
                event: event.to_owned(),
                source,
            })
        };
        for e in &self.events {
            b = b.event(&e.name, parse(&e.name, &e.pre)?);
            for (atom, text) in &e.post {
                b = b.post(&e.name, atom, parse(&e.name, text)?);
            }
        }
        for (agent, pairs) in &self.relations {
            for [u, v] in pairs {
                b = b.edge(agent, u, v);
            }
        }
        for d in &self.designated {
            b = b.designated(d);
        }
        b.build(vocab)
    }
}

/// An event's name, precondition and postconditions, as given to the builder.
type EventSpec = (String, Formula, Vec<(String, Formula)>);

/// Builds actions from formulas directly. Closure defaults to equivalence.
#[derive(Clone, Debug)]
pub struct ActionBuilder {
    name: String,
    events: Vec<EventSpec>,
    edges: Vec<(String, String, String)>,
    designated: Vec<String>,
    closure: Closure,
    deferred: Vec<String>,
}

impl ActionBuilder {
    pub fn new(name: &str) -> Self {
        ActionBuilder {
            name: name.to_owned(),
            events: Vec::new(),
            edges: Vec::new(),
            designated: Vec::new(),
            closure: Closure::Equivalence,
            deferred: Vec::new(),
        }
    }

    pub fn event(mut self, name: &str, pre: Formula) -> Self {
        self.events.push((name.to_owned(), pre, Vec::new()));
        self
    }

    /// Adds a postcondition to an already-declared event.
    pub fn post(mut self, event: &str, atom: &str, value: Formula) -> Self {
        if let Some(e) = self.events.iter_mut().find(|e| e.0 == event) {
            e.2.push((atom.to_owned(), value));
        } else {
            self.deferred
                .push(format!("postcondition for undeclared event `{event}`"));
        }
        self
    }

    pub fn edge(mut self, agent: &str, e: &str, f: &str) -> Self {
        self.edges
            .push((agent.to_owned(), e.to_owned(), f.to_owned()));
        self
    }

    pub fn designated(mut self, event: &str) -> Self {
        self.designated.push(event.to_owned());
        self
    }

    pub fn closure(mut self, closure: Closure) -> Self {
        self.closure = closure;
        self
    }

    pub fn build(&self, vocab: &Arc<Vocabulary>) -> Result<Action, ActionError> {
        let mut problems = self.deferred.clone();
        let mut names: Vec<&str> = self.events.iter().map(|e| e.0.as_str()).collect();
        names.sort_unstable();
        if names.is_empty() {
            problems.push("no events".to_owned());
        }
        for w in names.windows(2) {
            if w[0] == w[1] {
                problems.push(format!("duplicate event `{}`", w[0]));
            }
        }
        if names.iter().any(|n| n.is_empty()) {
            problems.push("empty event name".to_owned());
        }
        let index = |e: &str| names.binary_search(&e).ok();
        let n = names.len();
        let mut relations = vec![Relation::empty(n); vocab.agent_count()];
        for (agent, e, f) in &self.edges {
            let Some(a) = vocab.agent_index(agent) else {
                problems.push(format!("relation for unknown agent `{agent}`"));
                continue;
            };
            match (index(e), index(f)) {
                (Some(u), Some(v)) => relations[a].insert(u, v),
                _ => {
                    for x in [e, f] {
                        if index(x).is_none() {
                            problems
                                .push(format!("relation `{agent}` references missing event `{x}`"));
                        }
                    }
                }
            }
        }
        let mut pre = vec![Formula::True; n];
        let mut post = vec![BTreeMap::new(); n];
        for (name, p, posts) in &self.events {
            let Some(e) = index(name) else { continue };
            if let Err(err) = check_names(p, vocab) {
                problems.push(format!("event `{name}` precondition: {err}"));
            }
            pre[e] = p.clone();
            for (atom, f) in posts {
                match vocab.atom_index(atom) {
                    Some(i) => {
                        if let Err(err) = check_names(f, vocab) {
                            problems.push(format!("event `{name}` postcondition: {err}"));
                        }
                        post[e].insert(i, f.clone());
                    }
                    None => problems.push(format!("event `{name}` assigns unknown atom `{atom}`")),
                }
            }
        }
        let mut designated = FixedBitSet::with_capacity(n);
        for d in &self.designated {
            match index(d) {
                Some(e) => designated.insert(e),
                None => problems.push(format!("designated event `{d}` is missing")),
            }
        }
        if self.designated.is_empty() {
            problems.push("empty designated set".to_owned());
        }
        if !problems.is_empty() {
            return Err(ActionError::Invalid {
                action: self.name.clone(),
                problems,
            });
        }
        if self.closure == Closure::Equivalence {
            relations = relations
                .iter()
                .map(Relation::equivalence_closure)
                .collect();
        }
        Ok(Action {
            name: self.name.clone(),
            model: EventModel {
                vocab: vocab.clone(),
                events: names.iter().map(|&s| EventId::new(s)).collect(),
                relations,
                pre,
                post,
            },
            designated,
        })
    }
}

fn precondition_sets(s: &EpistemicState, a: &Action) -> Result<Vec<FixedBitSet>, UpdateError> {
    if s.vocab() != a.model.vocab() {
        return Err(UpdateError::UniverseMismatch);
    }
    a.model
        .pre
        .iter()
        .map(|p| satisfying_set(s.model(), p).map_err(UpdateError::from))
        .collect()
}

/// For each designated world, the first designated event whose precondition holds there.
pub fn applicability_witnesses(
    s: &EpistemicState,
    a: &Action,
) -> Result<Vec<(WorldId, Option<EventId>)>, UpdateError> {
    let pre = precondition_sets(s, a)?;
    Ok(s.designated()
        .ones()
        .map(|w| {
            let e = a.designated.ones().find(|&e| pre[e].contains(w));
            (
                s.model().worlds()[w].clone(),
                e.map(|e| a.model.events[e].clone()),
            )
        })
        .collect())
}

pub fn applicable(s: &EpistemicState, a: &Action) -> Result<bool, UpdateError> {
    let pre = precondition_sets(s, a)?;
    Ok(s.designated()
        .ones()
        .all(|w| a.designated.ones().any(|e| pre[e].contains(w))))
}

/// The product update. Postconditions are evaluated in the pre-update model.
pub fn product_update(s: &EpistemicState, a: &Action) -> Result<EpistemicState, UpdateError> {
    let pre = precondition_sets(s, a)?;
    if !s
        .designated()
        .ones()
        .all(|w| a.designated.ones().any(|e| pre[e].contains(w)))
    {
        return Err(UpdateError::NotApplicable(a.name.clone()));
    }
    let m = s.model();
    let em = &a.model;
    let (nw, ne) = (m.world_count(), em.event_count());
    let mut index = vec![usize::MAX; nw * ne];
    let mut pairs = Vec::new();
    for w in 0..nw {
        for e in 0..ne {
            if pre[e].contains(w) {
                index[w * ne + e] = pairs.len();
                pairs.push((w, e));
            }
        }
    }
    let n = pairs.len();
    let relations: Vec<Relation> = m
        .relations()
        .iter()
        .zip(&em.relations)
        .map(|(r, q)| {
            let mut out = Relation::empty(n);
            for (i, &(w, e)) in pairs.iter().enumerate() {
                for v in r.successors(w).ones() {
                    for f in q.successors(e).ones() {
                        let j = index[v * ne + f];
                        if j != usize::MAX {
                            out.insert(i, j);
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut valuation = Vec::with_capacity(m.vocab().atom_count());
    for p in 0..m.vocab().atom_count() {
        let per_event: Vec<FixedBitSet> = (0..ne)
            .map(|e| match em.post[e].get(&p) {
                Some(f) => satisfying_set(m, f),
                None => Ok(m.valuation(p).clone()),
            })
            .collect::<Result<_, _>>()?;
        let mut set = FixedBitSet::with_capacity(n);
        set.extend(
            pairs
                .iter()
                .enumerate()
                .filter(|(_, &(w, e))| per_event[e].contains(w))
                .map(|(i, _)| i),
        );
        valuation.push(set);
    }
    let mut designated = FixedBitSet::with_capacity(n);
    designated.extend(
        pairs
            .iter()
            .enumerate()
            .filter(|(_, &(w, e))| s.designated().contains(w) && a.designated.contains(e))
            .map(|(i, _)| i),
    );
    let names: Vec<String> = pairs
        .iter()
        .map(|&(w, e)| format!("({},{})", m.worlds()[w], em.events[e]))
        .collect();
    // Sort here so the designated set can be permuted alongside.
    let order = name_order(&names);
    let mut new_index = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let model = EpistemicModel::from_parts(
        m.vocab().clone(),
        order
            .iter()
            .map(|&i| WorldId::new(names[i].clone()))
            .collect(),
        relations
            .iter()
            .map(|r| permute_relation(r, &new_index))
            .collect(),
        valuation
            .iter()
            .map(|v| permute_set(v, &new_index))
            .collect(),
    )
    .expect("product worlds have distinct names");
    Ok(
        EpistemicState::new(model, permute_set(&designated, &new_index))
            .expect("applicable update keeps a designated world"),
    )
}

/// Index of the first action that could not be applied.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {index}: {source}")]
pub struct SequenceError {
    pub index: usize,
    #[source]
    pub source: UpdateError,
}

pub fn compose_sequence(
    s0: &EpistemicState,
    actions: &[&Action],
    contract_each: bool,
) -> Result<EpistemicState, SequenceError> {
    let mut s = s0.clone();
    for (index, a) in actions.iter().enumerate() {
        s = product_update(&s, a).map_err(|source| SequenceError { index, source })?;
        if contract_each {
            s = contract(&s);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::bisimilar;
    use crate::kripke::StateBuilder;

    fn vocab() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::new(["a", "b"], ["d", "m_a", "m_b"]).unwrap())
    }

    fn s0() -> EpistemicState {
        StateBuilder::new()
            .world("w1", &["d", "m_a"])
            .world("w2", &["m_a"])
            .edge("b", "w1", "w2")
            .designated("w1")
            .build(&vocab())
            .unwrap()
    }

    #[test]
    fn skip_is_identity() {
        let skip = ActionBuilder::new("skip")
            .event("e", Formula::True)
            .designated("e")
            .build(&vocab())
            .unwrap();
        let s = s0();
        let t = product_update(&s, &skip).unwrap();
        assert_eq!(t.world_count(), 2);
        assert!(bisimilar(&s, &t).unwrap());
    }

    #[test]
    fn false_precondition_blocks() {
        let never = ActionBuilder::new("never")
            .event("e", Formula::False)
            .designated("e")
            .build(&vocab())
            .unwrap();
        assert!(!applicable(&s0(), &never).unwrap());
        assert_eq!(
            product_update(&s0(), &never),
            Err(UpdateError::NotApplicable("never".into()))
        );
    }

    #[test]
    fn postconditions_are_simultaneous() {
        // Swap d and m_b: each reads the old value of the other.
        let swap = ActionBuilder::new("swap")
            .event("e", Formula::True)
            .post("e", "d", Formula::atom("m_b"))
            .post("e", "m_b", Formula::atom("d"))
            .designated("e")
            .build(&vocab())
            .unwrap();
        let t = product_update(&s0(), &swap).unwrap();
        let w = t.model().world_index("(w1,e)").unwrap();
        assert!(!t.model().holds(0, w));
        assert!(t.model().holds(2, w));
    }

    #[test]
    fn builder_reports_problems() {
        let err = ActionBuilder::new("bad")
            .event("e", Formula::True)
            .edge("a", "e", "x")
            .designated("y")
            .build(&vocab())
            .unwrap_err();
        let ActionError::Invalid { problems, .. } = err else {
            panic!()
        };
        assert_eq!(problems.len(), 2);
    }

    #[test]
    fn description_round_trip() {
        let a = ActionBuilder::new("send")
            .event("e1", Formula::and(Formula::atom("d"), Formula::atom("m_a")))
            .post("e1", "m_a", Formula::False)
            .event("e2", Formula::True)
            .edge("a", "e1", "e2")
            .designated("e1")
            .build(&vocab())
            .unwrap();
        assert_eq!(a.to_description().build(&vocab()).unwrap(), a);
    }
}
