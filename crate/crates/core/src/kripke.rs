//! Epistemic models and states.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::names::WorldId;
use crate::relation::Relation;
use crate::vocab::Vocabulary;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid model: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("agent/atom universes differ")]
    UniverseMismatch,
}

/// Anything with per-agent relations over named points: models and event models.
pub trait Frame {
    fn vocabulary(&self) -> &Vocabulary;
    fn point_count(&self) -> usize;
    fn point_name(&self, point: usize) -> &str;
    fn relation(&self, agent: usize) -> &Relation;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpistemicModel {
    vocab: Arc<Vocabulary>,
    worlds: Vec<WorldId>,
    relations: Vec<Relation>,
    valuation: Vec<FixedBitSet>,
}

/// Order in which points must be stored: lexicographic by name.
pub(crate) fn name_order<S: AsRef<str>>(names: &[S]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| names[a].as_ref().cmp(names[b].as_ref()));
    order
}

pub(crate) fn permute_set(set: &FixedBitSet, new_index: &[usize]) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(new_index.len());
    for u in set.ones() {
        out.insert(new_index[u]);
    }
    out
}

pub(crate) fn permute_relation(r: &Relation, new_index: &[usize]) -> Relation {
    Relation::from_pairs(
        new_index.len(),
        r.pairs().map(|(u, v)| (new_index[u], new_index[v])),
    )
}

impl EpistemicModel {
    /// Builds a model from index-based parts; worlds are re-sorted by name.
    ///
    /// Names must be unique and the sizes consistent; violations are reported as `ModelError::Invalid`.
    pub fn from_parts(
        vocab: Arc<Vocabulary>,
        worlds: Vec<WorldId>,
        relations: Vec<Relation>,
        valuation: Vec<FixedBitSet>,
    ) -> Result<Self, ModelError> {
        let mut problems = Vec::new();
        let n = worlds.len();
        if n == 0 {
            problems.push("model has no worlds".to_owned());
        }
        if relations.len() != vocab.agent_count() {
            problems.push(format!(
                "expected {} relations, got {}",
                vocab.agent_count(),
                relations.len()
            ));
        }
        if valuation.len() != vocab.atom_count() {
            problems.push(format!(
                "expected {} valuation entries, got {}",
                vocab.atom_count(),
                valuation.len()
            ));
        }
        if relations.iter().any(|r| r.len() != n)
            || valuation.iter().any(|v| v.ones().any(|w| w >= n))
        {
            problems.push("relation or valuation references a missing world".to_owned());
        }
        let order = name_order(&worlds);
        for pair in order.windows(2) {
            if worlds[pair[0]] == worlds[pair[1]] {
                problems.push(format!("duplicate world `{}`", worlds[pair[0]]));
            }
        }
        if !problems.is_empty() {
            return Err(ModelError::Invalid(problems));
        }
        let mut new_index = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let sorted = order.iter().all(|&i| new_index[i] == i);
        if sorted {
            let valuation = valuation
                .into_iter()
                .map(|mut v| {
                    v.grow(n);
                    v
                })
                .collect();
            return Ok(EpistemicModel {
                vocab,
                worlds,
                relations,
                valuation,
            });
        }
        Ok(EpistemicModel {
            worlds: order.iter().map(|&i| worlds[i].clone()).collect(),
            relations: relations
                .iter()
                .map(|r| permute_relation(r, &new_index))
                .collect(),
            valuation: valuation
                .iter()
                .map(|v| permute_set(v, &new_index))
                .collect(),
            vocab,
        })
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.binary_search_by(|w| w.as_str().cmp(name)).ok()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// Worlds where atom number `atom` holds.
    pub fn valuation(&self, atom: usize) -> &FixedBitSet {
        &self.valuation[atom]
    }

    pub fn holds(&self, atom: usize, world: usize) -> bool {
        self.valuation[atom].contains(world)
    }

    /// Atom indices true at `world`, in vocabulary order.
    pub fn atoms_at(&self, world: usize) -> Vec<usize> {
        (0..self.valuation.len())
            .filter(|&p| self.valuation[p].contains(world))
            .collect()
    }

    pub fn equivalence_closure(&self) -> EpistemicModel {
        EpistemicModel {
            relations: self
                .relations
                .iter()
                .map(Relation::equivalence_closure)
                .collect(),
            ..self.clone()
        }
    }

    pub fn is_equivalence(&self) -> bool {
        self.relations.iter().all(Relation::is_equivalence)
    }

    /// Submodel on `keep` (any order); worlds keep their names.
    pub fn restrict(&self, keep: &FixedBitSet) -> EpistemicModel {
        let kept: Vec<usize> = keep.ones().collect();
        let mut index = vec![usize::MAX; self.world_count()];
        for (i, &w) in kept.iter().enumerate() {
            index[w] = i;
        }
        let valuation = self
            .valuation
            .iter()
            .map(|v| {
                let mut out = FixedBitSet::with_capacity(kept.len());
                out.extend(
                    v.ones()
                        .filter(|&w| index[w] != usize::MAX)
                        .map(|w| index[w]),
                );
                out
            })
            .collect();
        EpistemicModel {
            vocab: self.vocab.clone(),
            worlds: kept.iter().map(|&w| self.worlds[w].clone()).collect(),
            relations: self.relations.iter().map(|r| r.restrict(&kept)).collect(),
            valuation,
        }
    }

    /// Structural invariants of an already-built model; empty for anything this crate constructs.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.world_count();
        if n == 0 {
            out.push("model has no worlds".to_owned());
        }
        if self.relations.iter().any(|r| r.len() != n) {
            out.push("relation size differs from world count".to_owned());
        }
        if self.valuation.iter().any(|v| v.ones().any(|w| w >= n)) {
            out.push("valuation references a missing world".to_owned());
        }
        if self.worlds.windows(2).any(|p| p[0] >= p[1]) {
            out.push("world names are not unique and sorted".to_owned());
        }
        out
    }
}

impl Frame for EpistemicModel {
    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn point_count(&self) -> usize {
        self.worlds.len()
    }

    fn point_name(&self, point: usize) -> &str {
        self.worlds[point].as_str()
    }

    fn relation(&self, agent: usize) -> &Relation {
        &self.relations[agent]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpistemicState {
    model: EpistemicModel,
    designated: FixedBitSet,
}

impl EpistemicState {
    pub fn new(model: EpistemicModel, designated: FixedBitSet) -> Result<Self, ModelError> {
        let n = model.world_count();
        if designated.ones().any(|w| w >= n) {
            return Err(ModelError::Invalid(vec![
                "designated world out of range".into()
            ]));
        }
        if designated.is_clear() {
            return Err(ModelError::Invalid(vec!["empty designated set".into()]));
        }
        let mut designated = designated;
        designated.grow(n);
        Ok(EpistemicState { model, designated })
    }

    pub fn model(&self) -> &EpistemicModel {
        &self.model
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.model.vocab
    }

    pub fn designated(&self) -> &FixedBitSet {
        &self.designated
    }

    pub fn designated_names(&self) -> Vec<&str> {
        self.designated
            .ones()
            .map(|w| self.model.worlds[w].as_str())
            .collect()
    }

    pub fn world_count(&self) -> usize {
        self.model.world_count()
    }

    /// Same model, different designated worlds.
    pub fn with_designated(&self, designated: FixedBitSet) -> Result<Self, ModelError> {
        EpistemicState::new(self.model.clone(), designated)
    }

    /// Worlds reachable from the designated set along any agent's relation.
    pub fn generated(&self) -> FixedBitSet {
        Relation::reach(
            self.world_count(),
            &self.designated,
            self.model.relations.iter(),
        )
    }

    pub fn equivalence_closure(&self) -> EpistemicState {
        EpistemicState {
            model: self.model.equivalence_closure(),
            designated: self.designated.clone(),
        }
    }

    pub fn to_description(&self) -> StateDescription {
        let m = &self.model;
        let vocab = &m.vocab;
        StateDescription {
            worlds: (0..m.world_count())
                .map(|w| WorldDescription {
                    name: m.worlds[w].to_string(),
                    atoms: m
                        .atoms_at(w)
                        .into_iter()
                        .map(|p| vocab.atoms()[p].to_string())
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
                        .map(|(u, v)| [m.worlds[u].to_string(), m.worlds[v].to_string()])
                        .collect();
                    (a.to_string(), pairs)
                })
                .collect(),
            valuation: None,
            designated: self
                .designated_names()
                .into_iter()
                .map(str::to_owned)
                .collect(),
            closure: Closure::None,
        }
    }
}

/// One line per world (`*` marks designated ones), then one line per agent listing its
/// non-singleton classes, or its non-loop edges when the relation is not an equivalence.
impl fmt::Display for EpistemicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.model;
        for w in 0..m.world_count() {
            let mark = if self.designated.contains(w) {
                '*'
            } else {
                ' '
            };
            let atoms: Vec<&str> = m
                .atoms_at(w)
                .into_iter()
                .map(|p| m.vocab.atoms()[p].as_str())
                .collect();
            writeln!(f, "{mark} {}: {{{}}}", m.worlds[w], atoms.join(", "))?;
        }
        for (agent, r) in m.vocab.agents().iter().zip(&m.relations) {
            let parts: Vec<String> = if r.is_equivalence() {
                let mut seen = FixedBitSet::with_capacity(r.len());
                let mut classes = Vec::new();
                for w in 0..r.len() {
                    if seen.contains(w) || r.successors(w).count_ones(..) < 2 {
                        continue;
                    }
                    seen.union_with(r.successors(w));
                    let names: Vec<&str> = r
                        .successors(w)
                        .ones()
                        .map(|v| m.worlds[v].as_str())
                        .collect();
                    classes.push(format!("{{{}}}", names.join(", ")));
                }
                classes
            } else {
                r.pairs()
                    .filter(|(u, v)| u != v)
                    .map(|(u, v)| format!("{}->{}", m.worlds[u], m.worlds[v]))
                    .collect()
            };
            if parts.is_empty() {
                writeln!(f, "  {agent}: -")?;
            } else {
                writeln!(f, "  {agent}: {}", parts.join(" "))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    Equivalence,
    #[default]
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldDescription {
    pub name: String,
    #[serde(default)]
    pub atoms: Vec<String>,
}

/// JSON form of a state. Valuations may be given per world (`atoms`) or per atom (`valuation`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDescription {
    pub worlds: Vec<WorldDescription>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<BTreeMap<String, Vec<String>>>,
    pub designated: Vec<String>,
    #[serde(default)]
    pub closure: Closure,
}

/// Checks a description against the vocabulary; every violation names its offender.
pub fn validate_state(desc: &StateDescription, vocab: &Vocabulary) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = BTreeMap::new();
    if desc.worlds.is_empty() {
        out.push("model has no worlds".to_owned());
    }
    for w in &desc.worlds {
        if w.name.is_empty() {
            out.push("empty world name".to_owned());
        }
        if seen.insert(w.name.as_str(), ()).is_some() {
            out.push(format!("duplicate world `{}`", w.name));
        }
        for p in &w.atoms {
            if vocab.atom_index(p).is_none() {
                out.push(format!("world `{}` uses unknown atom `{p}`", w.name));
            }
        }
    }
    let known = |w: &str| seen.contains_key(w);
    for (agent, pairs) in &desc.relations {
        if vocab.agent_index(agent).is_none() {
            out.push(format!("relation for unknown agent `{agent}`"));
        }
        for [u, v] in pairs {
            for x in [u, v] {
                if !known(x) {
                    out.push(format!("relation `{agent}` references missing world `{x}`"));
                }
            }
        }
    }
    if let Some(val) = &desc.valuation {
        for (p, ws) in val {
            if vocab.atom_index(p).is_none() {
                out.push(format!("valuation for unknown atom `{p}`"));
            }
            for w in ws {
                if !known(w) {
                    out.push(format!("valuation of `{p}` references missing world `{w}`"));
                }
            }
        }
    }
    if desc.designated.is_empty() {
        out.push("empty designated set".to_owned());
    }
    for w in &desc.designated {
        if !known(w) {
            out.push(format!("designated world `{w}` is missing"));
        }
    }
    out
}

impl StateDescription {
    pub fn build(&self, vocab: &Arc<Vocabulary>) -> Result<EpistemicState, ModelError> {
        let problems = validate_state(self, vocab);
        if !problems.is_empty() {
            return Err(ModelError::Invalid(problems));
        }
        let mut names: Vec<&str> = self.worlds.iter().map(|w| w.name.as_str()).collect();
        names.sort_unstable();
        let index = |w: &str| names.binary_search(&w).expect("validated");
        let n = names.len();
        let mut relations = vec![Relation::empty(n); vocab.agent_count()];
        for (agent, pairs) in &self.relations {
            let a = vocab.agent_index(agent).expect("validated");
            for [u, v] in pairs {
                relations[a].insert(index(u), index(v));
            }
        }
        if self.closure == Closure::Equivalence {
            relations = relations
                .iter()
                .map(Relation::equivalence_closure)
                .collect();
        }
        let mut valuation = vec![FixedBitSet::with_capacity(n); vocab.atom_count()];
        for w in &self.worlds {
            for p in &w.atoms {
                valuation[vocab.atom_index(p).expect("validated")].insert(index(&w.name));
            }
        }
        if let Some(val) = &self.valuation {
            for (p, ws) in val {
                for w in ws {
                    valuation[vocab.atom_index(p).expect("validated")].insert(index(w));
                }
            }
        }
        let mut designated = FixedBitSet::with_capacity(n);
        for w in &self.designated {
            designated.insert(index(w));
        }
        let model = EpistemicModel::from_parts(
            vocab.clone(),
            names.iter().map(|&s| WorldId::new(s)).collect(),
            relations,
            valuation,
        )?;
        EpistemicState::new(model, designated)
    }
}

/// Convenience builder used by fixtures and tests.
#[derive(Clone, Debug)]
pub struct StateBuilder {
    desc: StateDescription,
}

impl StateBuilder {
    pub fn new() -> Self {
        StateBuilder {
            desc: StateDescription {
                worlds: Vec::new(),
                relations: BTreeMap::new(),
                valuation: None,
                designated: Vec::new(),
                closure: Closure::Equivalence,
            },
        }
    }

    pub fn world(mut self, name: &str, atoms: &[&str]) -> Self {
        self.desc.worlds.push(WorldDescription {
            name: name.to_owned(),
            atoms: atoms.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn edge(mut self, agent: &str, u: &str, v: &str) -> Self {
        self.desc
            .relations
            .entry(agent.to_owned())
            .or_default()
            .push([u.to_owned(), v.to_owned()]);
        self
    }

    pub fn designated(mut self, name: &str) -> Self {
        self.desc.designated.push(name.to_owned());
        self
    }

    pub fn closure(mut self, closure: Closure) -> Self {
        self.desc.closure = closure;
        self
    }

    pub fn build(&self, vocab: &Arc<Vocabulary>) -> Result<EpistemicState, ModelError> {
        self.desc.build(vocab)
    }

    pub fn description(&self) -> &StateDescription {
        &self.desc
    }
}

impl Default for StateBuilder {
    fn default() -> Self {
        Self::new()
    }
}
