use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::Rng;

use super::{inclusions, LogicSpec};
use crate::bisim::contract;
use crate::kripke::{EpistemicModel, EpistemicState};
use crate::names::WorldId;
use crate::relation::Relation;
use crate::vocab::Vocabulary;

const REPAIR_ROUNDS: usize = 100;

fn random_partition(rng: &mut impl Rng, n: usize) -> Relation {
    let block: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut r = Relation::empty(n);
    for u in 0..n {
        for v in 0..n {
            if block[u] == block[v] {
                r.insert(u, v);
            }
        }
    }
    r
}

fn compose_all(rels: &[Relation], seq: &[usize]) -> Relation {
    seq[1..]
        .iter()
        .fold(rels[seq[0]].clone(), |acc, &a| acc.then(&rels[a]))
}

/// Adds every pair an inclusion of `spec` requires as a direct edge of the first agent on its
/// right-hand side, then re-closes. Returns `false` if no fixpoint is reached in time.
pub(crate) fn repair(rels: &mut [Relation], spec: LogicSpec) -> bool {
    let constraints = inclusions(spec, rels.len());
    for _ in 0..REPAIR_ROUNDS {
        let mut changed = false;
        for (lhs, rhs) in &constraints {
            let l = compose_all(rels, lhs);
            let r = compose_all(rels, rhs);
            if l.is_subset(&r) {
                continue;
            }
            let missing: Vec<(usize, usize)> =
                l.pairs().filter(|&(u, v)| !r.contains(u, v)).collect();
            let target = &mut rels[rhs[0]];
            for (u, v) in missing {
                target.insert(u, v);
            }
            *target = target.equivalence_closure();
            changed = true;
        }
        if !changed {
            return true;
        }
    }
    false
}

/// A random contracted state satisfying `spec`, with up to `max_worlds` worlds.
///
/// Each agent starts from a random partition, which is then repaired towards the
/// commutativity condition. `None` if the repair does not converge.
pub fn random_state(
    vocab: &Arc<Vocabulary>,
    spec: LogicSpec,
    max_worlds: usize,
    rng: &mut impl Rng,
) -> Option<EpistemicState> {
    let n = rng.gen_range(1..=max_worlds.max(1));
    let worlds: Vec<WorldId> = (0..n).map(|i| WorldId::new(format!("w{i}"))).collect();
    let mut rels: Vec<Relation> = (0..vocab.agent_count())
        .map(|_| random_partition(rng, n))
        .collect();
    if !repair(&mut rels, spec) {
        return None;
    }
    let valuation = (0..vocab.atom_count())
        .map(|_| {
            let mut v = FixedBitSet::with_capacity(n);
            v.extend((0..n).filter(|_| rng.gen_bool(0.5)));
            v
        })
        .collect();
    let model = EpistemicModel::from_parts(vocab.clone(), worlds, rels, valuation).ok()?;
    let mut designated = FixedBitSet::with_capacity(n);
    designated.insert(rng.gen_range(0..n));
    for w in 0..n {
        if rng.gen_bool(0.2) {
            designated.insert(w);
        }
    }
    let state = EpistemicState::new(model, designated).ok()?;
    Some(contract(&state))
}
