use std::collections::BTreeMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{compose, random_state, LogicDescription, LogicSpec};
use crate::eval::satisfying_set;
use crate::formula::Formula;
use crate::kripke::{EpistemicState, StateDescription};
use crate::names::AgentId;
use crate::relation::Relation;
use crate::vocab::Vocabulary;

const MAX_WORLDS: usize = 6;
const FORMULA_DEPTH: usize = 3;
const DRAWS_PER_GROUP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// Two permutations of the same box sequence are equivalent.
    BoxPermutation,
    /// The group chain implies every box sequence over the group.
    ChainImplication,
    /// The group chain is equivalent to common knowledge.
    CommonKnowledge,
    /// Every pair reachable within the group is joined by one pass of the chain.
    Diameter,
}

impl Probe {
    pub const ALL: [Probe; 4] = [
        Probe::BoxPermutation,
        Probe::ChainImplication,
        Probe::CommonKnowledge,
        Probe::Diameter,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeCounterexample {
    pub probe: Probe,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    pub state: StateDescription,
    pub group: Vec<AgentId>,
    /// The formula that fails, or the missing pair for `Diameter`.
    pub formula: String,
    pub world: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProbeReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logic: Option<LogicDescription>,
    pub agents: usize,
    pub trials: u64,
    pub seed: u64,
    pub states: usize,
    /// Trials whose generated state failed to repair.
    pub discarded: usize,
    pub checks: BTreeMap<Probe, usize>,
    /// Checks not applicable to the group or logic.
    pub skipped: BTreeMap<Probe, usize>,
    pub counterexamples: Vec<ProbeCounterexample>,
}

impl ProbeReport {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn count(&self, probe: Probe) -> usize {
        self.counterexamples
            .iter()
            .filter(|c| c.probe == probe)
            .count()
    }

    fn merge(&mut self, other: ProbeReport) {
        self.states += other.states;
        self.discarded += other.discarded;
        for (p, c) in other.checks {
            *self.checks.entry(p).or_default() += c;
        }
        for (p, c) in other.skipped {
            *self.skipped.entry(p).or_default() += c;
        }
        self.counterexamples.extend(other.counterexamples);
    }
}

fn agent_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                char::from(b'a' + i as u8).to_string()
            } else {
                format!("a{i}")
            }
        })
        .collect()
}

/// Runs `trials` probes on random contracted `spec`-states over `agents` agents and atoms `p, q, r`.
///
/// Trial `t` draws from its own generator seeded with `seed + t`, so the report does not depend
/// on evaluation order.
pub fn probe_theorems(spec: LogicSpec, agents: usize, trials: u64, seed: u64) -> ProbeReport {
    let vocab = Arc::new(
        Vocabulary::new(agent_names(agents.max(1)), ["p", "q", "r"])
            .expect("generated names are valid"),
    );
    let mut report = ProbeReport {
        logic: Some(spec.to_description()),
        agents: vocab.agent_count(),
        trials,
        seed,
        ..ProbeReport::default()
    };
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t));
        let Some(state) = random_state(&vocab, spec, MAX_WORLDS, &mut rng) else {
            report.discarded += 1;
            continue;
        };
        let mut one = probe_state(&state, spec, &mut rng);
        for c in &mut one.counterexamples {
            c.trial = Some(t);
        }
        report.merge(one);
    }
    report
}

/// Groups probed under `spec`, each with its box chain.
fn groups(spec: LogicSpec, n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let min = match spec {
        LogicSpec::WCl(l) => (l as usize).max(2),
        _ => 2,
    };
    let mut out = Vec::new();
    for size in min..=n {
        if matches!(spec, LogicSpec::Cb(_)) && size != 2 {
            continue;
        }
        for g in (0..n).combinations(size) {
            let chain = match spec {
                LogicSpec::Cb(b) => g.repeat(b as usize),
                _ => g.clone(),
            };
            out.push((g, chain));
        }
    }
    out
}

fn random_formula(rng: &mut impl Rng, vocab: &Vocabulary, depth: usize) -> Formula {
    let atom = |rng: &mut dyn rand::RngCore| {
        Formula::Atom(vocab.atoms()[rng.gen_range(0..vocab.atom_count())].clone())
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return atom(rng);
    }
    let agent = vocab.agents()[rng.gen_range(0..vocab.agent_count())].clone();
    match rng.gen_range(0..5) {
        0 => Formula::not(random_formula(rng, vocab, depth)),
        1 => Formula::and(
            random_formula(rng, vocab, depth - 1),
            random_formula(rng, vocab, depth - 1),
        ),
        2 => Formula::or(
            random_formula(rng, vocab, depth - 1),
            random_formula(rng, vocab, depth - 1),
        ),
        3 => Formula::knows(agent, random_formula(rng, vocab, depth - 1)),
        _ => Formula::possible(agent, random_formula(rng, vocab, depth - 1)),
    }
}

/// Runs every probe of `spec` on one state, at every world.
pub fn probe_state(state: &EpistemicState, spec: LogicSpec, rng: &mut impl Rng) -> ProbeReport {
    let vocab = state.vocab().clone();
    let n = vocab.agent_count();
    let mut report = ProbeReport {
        logic: Some(spec.to_description()),
        agents: n,
        states: 1,
        ..ProbeReport::default()
    };
    let groups = groups(spec, n);
    if groups.is_empty() {
        for p in Probe::ALL {
            *report.skipped.entry(p).or_default() += 1;
        }
        return report;
    }
    for (g, chain) in &groups {
        for _ in 0..DRAWS_PER_GROUP {
            let phi = random_formula(rng, &vocab, FORMULA_DEPTH);
            probe_group(state, spec, g, chain, &phi, rng, &mut report);
        }
        diameter(state, g, chain, &mut report);
    }
    report
}

/// Runs the formula probes for one group and one `phi`.
pub(crate) fn probe_group(
    state: &EpistemicState,
    spec: LogicSpec,
    group: &[usize],
    chain: &[usize],
    phi: &Formula,
    rng: &mut impl Rng,
    report: &mut ProbeReport,
) {
    let model = state.model();
    let agents = model.vocab().agents();
    let names = |seq: &[usize]| seq.iter().map(|&a| &agents[a]).collect::<Vec<_>>();
    let sat =
        |f: &Formula| satisfying_set(model, f).expect("probe formulas use the state's vocabulary");
    let n = agents.len();
    let boxed_chain = Formula::boxes(names(chain), phi.clone());
    let chain_sat = sat(&boxed_chain);

    let fail = |probe: Probe, formula: Formula, holds: &FixedBitSet, report: &mut ProbeReport| {
        *report.checks.entry(probe).or_default() += 1;
        if let Some(w) = (0..model.world_count()).find(|&w| !holds.contains(w)) {
            report.counterexamples.push(ProbeCounterexample {
                probe,
                trial: None,
                state: state.to_description(),
                group: group.iter().map(|&a| agents[a].clone()).collect(),
                formula: formula.to_string(),
                world: model.worlds()[w].to_string(),
            });
        }
    };
    let iff_set = |a: &FixedBitSet, b: &FixedBitSet| {
        let mut x = a.clone();
        x.symmetric_difference_with(b);
        x.toggle_range(..);
        x
    };

    // Box permutation: no analogue is stated for the b-fold logic.
    if matches!(spec, LogicSpec::Cb(_)) {
        *report.skipped.entry(Probe::BoxPermutation).or_default() += 1;
    } else {
        let mut v: Vec<usize> = match spec {
            // Must mention every group agent.
            LogicSpec::WCl(_) => {
                let mut v = group.to_vec();
                let extra = rng.gen_range(0..=(n + 2).saturating_sub(v.len()));
                v.extend((0..extra).map(|_| group[rng.gen_range(0..group.len())]));
                v
            }
            _ => {
                let len = rng.gen_range(2..=n + 2);
                (0..len)
                    .map(|_| group[rng.gen_range(0..group.len())])
                    .collect()
            }
        };
        v.shuffle(rng);
        let mut w = v.clone();
        w.shuffle(rng);
        let lhs = Formula::boxes(names(&v), phi.clone());
        let rhs = Formula::boxes(names(&w), phi.clone());
        let holds = iff_set(&sat(&lhs), &sat(&rhs));
        fail(
            Probe::BoxPermutation,
            Formula::iff(lhs, rhs),
            &holds,
            report,
        );
    }

    let len = rng.gen_range(0..=n + 2);
    let v: Vec<usize> = (0..len)
        .map(|_| group[rng.gen_range(0..group.len())])
        .collect();
    let target = Formula::boxes(names(&v), phi.clone());
    let mut holds = chain_sat.clone();
    holds.toggle_range(..);
    holds.union_with(&sat(&target));
    fail(
        Probe::ChainImplication,
        Formula::implies(boxed_chain.clone(), target),
        &holds,
        report,
    );

    let ck = Formula::Common(
        group.iter().map(|&a| agents[a].clone()).collect(),
        Box::new(phi.clone()),
    );
    let holds = iff_set(&chain_sat, &sat(&ck));
    fail(
        Probe::CommonKnowledge,
        Formula::iff(boxed_chain, ck),
        &holds,
        report,
    );
}

/// Every pair connected within `group` must be joined by the chain composition.
fn diameter(state: &EpistemicState, group: &[usize], chain: &[usize], report: &mut ProbeReport) {
    let model = state.model();
    let n = model.world_count();
    let rels: Vec<&Relation> = group.iter().map(|&a| &model.relations()[a]).collect();
    let joined = compose(model, chain);
    *report.checks.entry(Probe::Diameter).or_default() += 1;
    for u in 0..n {
        let mut start = FixedBitSet::with_capacity(n);
        start.insert(u);
        let reached = Relation::reach(n, &start, rels.iter().copied());
        if let Some(w) = reached.ones().find(|&w| !joined.contains(u, w)) {
            let agents = model.vocab().agents();
            report.counterexamples.push(ProbeCounterexample {
                probe: Probe::Diameter,
                trial: None,
                state: state.to_description(),
                group: group.iter().map(|&a| agents[a].clone()).collect(),
                formula: format!(
                    "({}, {}) reachable but not in R_{}",
                    model.worlds()[u],
                    model.worlds()[w],
                    chain.iter().map(|&a| agents[a].as_str()).join(";R_")
                ),
                world: model.worlds()[u].to_string(),
            });
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::StateBuilder;

    #[test]
    fn commutative_states_have_no_counterexamples() {
        let report = probe_theorems(LogicSpec::C, 3, 30, 11);
        assert!(report.is_clean(), "{:#?}", report.counterexamples.first());
        assert_eq!(report.discarded, 0);
        assert!(report.checks[&Probe::CommonKnowledge] > 0);
    }

    #[test]
    fn chain_breaks_common_knowledge() {
        let vocab = Arc::new(Vocabulary::new(["a", "b"], ["d"]).unwrap());
        let s = StateBuilder::new()
            .world("x", &["d"])
            .world("y", &["d"])
            .world("z", &["d"])
            .world("u", &[])
            .edge("a", "x", "y")
            .edge("b", "y", "z")
            .edge("a", "z", "u")
            .designated("x")
            .build(&vocab)
            .unwrap();
        let mut report = ProbeReport::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        probe_group(
            &s,
            LogicSpec::S5,
            &[0, 1],
            &[0, 1],
            &Formula::atom("d"),
            &mut rng,
            &mut report,
        );
        assert_eq!(report.count(Probe::CommonKnowledge), 1);
    }

    #[test]
    fn single_agent_is_skipped() {
        let report = probe_theorems(LogicSpec::S5, 1, 5, 0);
        assert!(report.is_clean());
        assert!(report.checks.is_empty());
        assert_eq!(report.skipped[&Probe::CommonKnowledge], 5);
    }
}
