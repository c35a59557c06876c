//! Bisimulation via signature refinement, contraction, canonical keys and characteristic formulas.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::eval::EvalError;
use crate::formula::Formula;
use crate::kripke::{EpistemicModel, EpistemicState, ModelError};
use crate::names::WorldId;
use crate::relation::Relation;

/// Refines colors until stable or until `rounds` rounds have run.
///
/// Round 0 colors by valuation. Round `r + 1` colors by the round-`r` color plus, per agent,
/// the set of successor colors. Colors are ranks of sorted signatures, so they depend only on
/// structure, never on world names.
pub(crate) fn refine(
    relations: &[Relation],
    valuation: &[FixedBitSet],
    n: usize,
    rounds: Option<usize>,
) -> Vec<u32> {
    let initial: Vec<Vec<u32>> = (0..n)
        .map(|w| {
            (0..valuation.len())
                .filter(|&p| valuation[p].contains(w))
                .map(|p| p as u32)
                .collect()
        })
        .collect();
    let (mut colors, mut count) = rank(&initial);
    let mut round = 0;
    while rounds.is_none_or(|k| round < k) {
        let signatures: Vec<Vec<u32>> = (0..n)
            .map(|w| {
                let mut sig = vec![colors[w]];
                for r in relations {
                    let mut succ: Vec<u32> = r.successors(w).ones().map(|v| colors[v]).collect();
                    succ.sort_unstable();
                    succ.dedup();
                    sig.push(succ.len() as u32);
                    sig.extend(succ);
                }
                sig
            })
            .collect();
        let (next, next_count) = rank(&signatures);
        round += 1;
        colors = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    colors
}

fn rank(signatures: &[Vec<u32>]) -> (Vec<u32>, usize) {
    let mut table: BTreeMap<&[u32], u32> = signatures.iter().map(|s| (s.as_slice(), 0)).collect();
    for (i, v) in table.values_mut().enumerate() {
        *v = i as u32;
    }
    let colors = signatures.iter().map(|s| table[s.as_slice()]).collect();
    (colors, table.len())
}

/// Stable partition of a model's worlds into bisimulation classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    fn from_colors(colors: &[u32]) -> Self {
        let count = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); count];
        for (w, &c) in colors.iter().enumerate() {
            blocks[c as usize].push(w);
        }
        Partition {
            block_of: colors.iter().map(|&c| c as usize).collect(),
            blocks,
        }
    }

    pub fn block_of(&self, world: usize) -> usize {
        self.block_of[world]
    }

    /// Blocks in canonical color order; members in increasing world index.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// World-level bisimulation classes of `model`.
pub fn bisimulation_partition(model: &EpistemicModel) -> Partition {
    Partition::from_colors(&model_colors(model, None))
}

fn model_colors(model: &EpistemicModel, rounds: Option<usize>) -> Vec<u32> {
    let valuation: Vec<FixedBitSet> = (0..model.vocab().atom_count())
        .map(|p| model.valuation(p).clone())
        .collect();
    refine(model.relations(), &valuation, model.world_count(), rounds)
}

/// Worlds `u`, `v` of one model agree up to depth `rounds` (or fully when `None`).
pub fn worlds_bisimilar(model: &EpistemicModel, u: usize, v: usize, rounds: Option<usize>) -> bool {
    let colors = model_colors(model, rounds);
    colors[u] == colors[v]
}

/// Colors of the disjoint union of two states' models; `t`'s worlds are offset by `|s|`.
fn union_colors(
    s: &EpistemicState,
    t: &EpistemicState,
    rounds: Option<usize>,
) -> Result<Vec<u32>, ModelError> {
    if s.vocab() != t.vocab() {
        return Err(ModelError::UniverseMismatch);
    }
    let (ms, mt) = (s.model(), t.model());
    let off = ms.world_count();
    let n = off + mt.world_count();
    let relations: Vec<Relation> = ms
        .relations()
        .iter()
        .zip(mt.relations())
        .map(|(a, b)| {
            Relation::from_pairs(
                n,
                a.pairs().chain(b.pairs().map(|(u, v)| (u + off, v + off))),
            )
        })
        .collect();
    let valuation: Vec<FixedBitSet> = (0..s.vocab().atom_count())
        .map(|p| {
            let mut set = FixedBitSet::with_capacity(n);
            set.extend(ms.valuation(p).ones());
            set.extend(mt.valuation(p).ones().map(|w| w + off));
            set
        })
        .collect();
    Ok(refine(&relations, &valuation, n, rounds))
}

fn designated_match(s: &EpistemicState, t: &EpistemicState, colors: &[u32]) -> bool {
    let off = s.world_count();
    let cs: Vec<u32> = s.designated().ones().map(|w| colors[w]).collect();
    let ct: Vec<u32> = t.designated().ones().map(|w| colors[w + off]).collect();
    cs.iter().all(|c| ct.contains(c)) && ct.iter().all(|c| cs.contains(c))
}

/// The largest bisimulation between `s` and `t` when they are bisimilar, as world-name pairs.
pub fn bisimulation(
    s: &EpistemicState,
    t: &EpistemicState,
) -> Result<Option<Vec<(WorldId, WorldId)>>, ModelError> {
    let colors = union_colors(s, t, None)?;
    if !designated_match(s, t, &colors) {
        return Ok(None);
    }
    let off = s.world_count();
    let mut z = Vec::new();
    for u in 0..off {
        for v in 0..t.world_count() {
            if colors[u] == colors[v + off] {
                z.push((s.model().worlds()[u].clone(), t.model().worlds()[v].clone()));
            }
        }
    }
    Ok(Some(z))
}

pub fn bisimilar(s: &EpistemicState, t: &EpistemicState) -> Result<bool, ModelError> {
    let colors = union_colors(s, t, None)?;
    Ok(designated_match(s, t, &colors))
}

pub fn k_bisimilar(s: &EpistemicState, t: &EpistemicState, k: usize) -> Result<bool, ModelError> {
    let colors = union_colors(s, t, Some(k))?;
    Ok(designated_match(s, t, &colors))
}

/// Quotient of the designated-generated submodel by its largest bisimulation.
///
/// Each block is named after its lexicographically smallest member.
pub fn contract(s: &EpistemicState) -> EpistemicState {
    let generated = s.generated();
    let (model, designated) = if generated.count_ones(..) == s.world_count() {
        (s.model().clone(), s.designated().clone())
    } else {
        let kept: Vec<usize> = generated.ones().collect();
        let m = s.model().restrict(&generated);
        let mut d = FixedBitSet::with_capacity(kept.len());
        for (i, &w) in kept.iter().enumerate() {
            if s.designated().contains(w) {
                d.insert(i);
            }
        }
        (m, d)
    };
    let partition = bisimulation_partition(&model);
    let count = partition.len();
    if count == model.world_count() {
        return EpistemicState::new(model, designated)
            .expect("designated worlds survive restriction");
    }
    let names: Vec<WorldId> = partition
        .blocks()
        .iter()
        .map(|b| model.worlds()[b[0]].clone())
        .collect();
    let relations = model
        .relations()
        .iter()
        .map(|r| {
            Relation::from_pairs(
                count,
                r.pairs()
                    .map(|(u, v)| (partition.block_of(u), partition.block_of(v))),
            )
        })
        .collect();
    let valuation = (0..model.vocab().atom_count())
        .map(|p| {
            let mut set = FixedBitSet::with_capacity(count);
            set.extend(model.valuation(p).ones().map(|w| partition.block_of(w)));
            set
        })
        .collect();
    let mut d = FixedBitSet::with_capacity(count);
    d.extend(designated.ones().map(|w| partition.block_of(w)));
    let quotient =
        EpistemicModel::from_parts(Arc::clone(model.vocab()), names, relations, valuation)
            .expect("block names are distinct members");
    // from_parts re-sorts worlds by name; designated indices follow the block order, so remap.
    let mut remapped = FixedBitSet::with_capacity(count);
    for b in d.ones() {
        let name = model.worlds()[partition.blocks()[b][0]].as_str();
        remapped.insert(quotient.world_index(name).expect("block name present"));
    }
    EpistemicState::new(quotient, remapped).expect("non-empty designated")
}

/// Name-free serialization of a contracted state; equal exactly for bisimilar states.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

const KEY_VERSION: u8 = 1;

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// 64-bit FNV-1a digest, for logs.
    pub fn digest(&self) -> u64 {
        self.0.iter().fold(0xcbf2_9ce4_8422_2325_u64, |h, &b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({:016x})", self.digest())
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.digest())
    }
}

pub fn canonical_key(s: &EpistemicState) -> CanonicalKey {
    canonical_key_contracted(&contract(s))
}

/// Key of a state that is already contracted.
pub fn canonical_key_contracted(c: &EpistemicState) -> CanonicalKey {
    let m = c.model();
    let colors = model_colors(m, None);
    let n = m.world_count();
    debug_assert_eq!(
        colors
            .iter()
            .collect::<std::collections::BTreeSet<_>>()
            .len(),
        n,
        "contracted worlds must have distinct colors"
    );
    let mut order = vec![0usize; n];
    for (w, &col) in colors.iter().enumerate() {
        order[col as usize] = w;
    }
    let vocab = m.vocab();
    let mut out = vec![KEY_VERSION];
    let push = |out: &mut Vec<u8>, x: usize| out.extend_from_slice(&(x as u32).to_le_bytes());
    push(&mut out, n);
    push(&mut out, vocab.agent_count());
    push(&mut out, vocab.atom_count());
    let width = vocab.atom_count().div_ceil(8);
    for &w in &order {
        let mut bits = vec![0u8; width];
        for p in 0..vocab.atom_count() {
            if m.holds(p, w) {
                bits[p / 8] |= 1 << (p % 8);
            }
        }
        out.extend_from_slice(&bits);
    }
    for r in m.relations() {
        let mut edges: Vec<(u32, u32)> = r.pairs().map(|(u, v)| (colors[u], colors[v])).collect();
        edges.sort_unstable();
        push(&mut out, edges.len());
        for (u, v) in edges {
            push(&mut out, u as usize);
            push(&mut out, v as usize);
        }
    }
    let mut designated: Vec<u32> = c.designated().ones().map(|w| colors[w]).collect();
    designated.sort_unstable();
    push(&mut out, designated.len());
    for d in designated {
        push(&mut out, d as usize);
    }
    CanonicalKey(out)
}

/// The k-characteristic formula of world `w`: true exactly at worlds k-bisimilar to `w`.
pub fn characteristic_formula(
    model: &EpistemicModel,
    world: &str,
    k: usize,
) -> Result<Formula, EvalError> {
    let w = model
        .world_index(world)
        .ok_or_else(|| EvalError::UnknownWorld(world.to_owned()))?;
    Ok(characteristic_formula_at(model, w, k))
}

pub fn characteristic_formula_at(model: &EpistemicModel, w: usize, k: usize) -> Formula {
    let n = model.world_count();
    let vocab = model.vocab();
    let literals: Vec<Formula> = (0..n)
        .map(|v| {
            Formula::conj(vocab.atoms().iter().enumerate().map(|(p, atom)| {
                let a = Formula::Atom(atom.clone());
                if model.holds(p, v) {
                    a
                } else {
                    Formula::not(a)
                }
            }))
        })
        .collect();
    let mut level = literals.clone();
    for _ in 0..k {
        level = (0..n)
            .map(|v| {
                let mut parts = vec![literals[v].clone()];
                for (i, agent) in vocab.agents().iter().enumerate() {
                    let succ: Vec<usize> = model.relations()[i].successors(v).ones().collect();
                    let forth = Formula::conj(
                        succ.iter()
                            .map(|&u| Formula::possible(agent.clone(), level[u].clone())),
                    );
                    let back = Formula::knows(
                        agent.clone(),
                        Formula::disj(succ.iter().map(|&u| level[u].clone())),
                    );
                    parts.push(Formula::and(forth, back));
                }
                Formula::conj(parts)
            })
            .collect();
    }
    level.swap_remove(w)
}
