//! Reference implementations used as oracles by the integration tests. They work on dense
//! boolean matrices and share nothing with the engine beyond the model accessors.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use epiplan_core::axioms::random_state;
use epiplan_core::encodings::Instruction;
use epiplan_core::*;
use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;

/// `rel[agent][u][v]` and per-world atom names.
#[derive(Clone, Debug)]
pub struct Dense {
    pub names: Vec<String>,
    pub agents: Vec<String>,
    pub rel: Vec<Vec<Vec<bool>>>,
    pub val: Vec<BTreeSet<String>>,
}

impl Dense {
    pub fn of(m: &(impl Frame + ?Sized)) -> Self {
        let n = m.point_count();
        let vocab = m.vocabulary();
        let rel = (0..vocab.agent_count())
            .map(|a| {
                let r = m.relation(a);
                (0..n)
                    .map(|u| (0..n).map(|v| r.contains(u, v)).collect())
                    .collect()
            })
            .collect();
        Dense {
            names: (0..n).map(|w| m.point_name(w).to_owned()).collect(),
            agents: vocab
                .agents()
                .iter()
                .map(|a| a.as_str().to_owned())
                .collect(),
            rel,
            val: vec![BTreeSet::new(); n],
        }
    }

    pub fn of_model(m: &EpistemicModel) -> Self {
        let mut d = Self::of(m);
        for w in 0..m.world_count() {
            d.val[w] = m
                .atoms_at(w)
                .into_iter()
                .map(|p| m.vocab().atoms()[p].as_str().to_owned())
                .collect();
        }
        d
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn world(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| n == name)
            .unwrap_or_else(|| panic!("no world {name}"))
    }

    fn agent(&self, a: &str) -> usize {
        self.agents
            .iter()
            .position(|x| x == a)
            .unwrap_or_else(|| panic!("no agent {a}"))
    }

    fn succ(&self, a: usize, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| self.rel[a][u][v])
    }
}

/// Worlds reachable from `w` through the union of `group`'s relations, `w` included.
pub fn reachable(d: &Dense, w: usize, group: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; d.len()];
    seen[w] = true;
    let mut queue = VecDeque::from([w]);
    while let Some(u) = queue.pop_front() {
        for &a in group {
            for v in 0..d.len() {
                if d.rel[a][u][v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    (0..d.len()).filter(|&v| seen[v]).collect()
}

/// Truth of `f` at `w` by direct recursion on the clauses.
pub fn holds(d: &Dense, w: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => d.val[w].contains(p.as_str()),
        Formula::Not(a) => !holds(d, w, a),
        Formula::And(a, b) => holds(d, w, a) && holds(d, w, b),
        Formula::Or(a, b) => holds(d, w, a) || holds(d, w, b),
        Formula::Implies(a, b) => !holds(d, w, a) || holds(d, w, b),
        Formula::Iff(a, b) => holds(d, w, a) == holds(d, w, b),
        Formula::Knows(i, a) => d.succ(d.agent(i.as_str()), w).all(|v| holds(d, v, a)),
        Formula::Possible(i, a) => d.succ(d.agent(i.as_str()), w).any(|v| holds(d, v, a)),
        Formula::Common(g, a) => {
            let group: Vec<usize> = g.iter().map(|i| d.agent(i.as_str())).collect();
            reachable(d, w, &group).into_iter().all(|v| holds(d, v, a))
        }
    }
}

pub fn holds_in_state(s: &EpistemicState, f: &Formula) -> bool {
    let d = Dense::of_model(s.model());
    s.designated().ones().all(|w| holds(&d, w, f))
}

/// Greatest bisimulation between the worlds of `s` and `t`: start from equal valuations and
/// delete pairs violating forth or back until nothing changes.
pub fn greatest_bisimulation(s: &Dense, t: &Dense) -> Vec<Vec<bool>> {
    assert_eq!(s.agents, t.agents);
    let mut z: Vec<Vec<bool>> = (0..s.len())
        .map(|u| (0..t.len()).map(|v| s.val[u] == t.val[v]).collect())
        .collect();
    loop {
        let mut changed = false;
        for u in 0..s.len() {
            for v in 0..t.len() {
                if !z[u][v] {
                    continue;
                }
                let ok = (0..s.agents.len()).all(|a| {
                    s.succ(a, u).all(|u2| t.succ(a, v).any(|v2| z[u2][v2]))
                        && t.succ(a, v).all(|v2| s.succ(a, u).any(|u2| z[u2][v2]))
                });
                if !ok {
                    z[u][v] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return z;
        }
    }
}

/// `k`-bisimilarity between the worlds of one model, layer by layer.
pub fn k_bisimulation(d: &Dense, k: usize) -> Vec<Vec<bool>> {
    let n = d.len();
    let base: Vec<Vec<bool>> = (0..n)
        .map(|u| (0..n).map(|v| d.val[u] == d.val[v]).collect())
        .collect();
    let mut z = base.clone();
    for _ in 0..k {
        let prev = z.clone();
        for u in 0..n {
            for v in 0..n {
                z[u][v] = base[u][v]
                    && (0..d.agents.len()).all(|a| {
                        d.succ(a, u).all(|u2| d.succ(a, v).any(|v2| prev[u2][v2]))
                            && d.succ(a, v).all(|v2| d.succ(a, u).any(|u2| prev[u2][v2]))
                    });
            }
        }
    }
    z
}

pub fn states_bisimilar(s: &EpistemicState, t: &EpistemicState) -> bool {
    let (ds, dt) = (Dense::of_model(s.model()), Dense::of_model(t.model()));
    let z = greatest_bisimulation(&ds, &dt);
    s.designated()
        .ones()
        .all(|u| t.designated().ones().any(|v| z[u][v]))
        && t.designated()
            .ones()
            .all(|v| s.designated().ones().any(|u| z[u][v]))
}

/// Property (1) for agents `i`, `j` by a triple loop: every `x R_j y R_i z` has some `y'` with
/// `x R_i y' R_j z`.
pub fn commutes(d: &Dense, i: usize, j: usize) -> bool {
    let n = d.len();
    for x in 0..n {
        for y in d.succ(j, x) {
            for z in d.succ(i, y) {
                if !(0..n).any(|y2| d.rel[i][x][y2] && d.rel[j][y2][z]) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_s5(d: &Dense) -> bool {
    let n = d.len();
    (0..d.agents.len()).all(|a| {
        let r = &d.rel[a];
        (0..n).all(|u| r[u][u])
            && (0..n).all(|u| (0..n).all(|v| r[u][v] == r[v][u]))
            && (0..n).all(|u| (0..n).all(|v| !r[u][v] || (0..n).all(|w| !r[v][w] || r[u][w])))
    })
}

pub fn is_c_frame(d: &Dense) -> bool {
    let m = d.agents.len();
    (0..m).all(|i| (0..m).all(|j| commutes(d, i, j)))
}

/// Pairs joined by a path following `seq` from left to right.
pub fn compose(d: &Dense, seq: &[usize]) -> Vec<Vec<bool>> {
    let n = d.len();
    let mut r: Vec<Vec<bool>> = (0..n).map(|u| (0..n).map(|v| u == v).collect()).collect();
    for &a in seq {
        r = (0..n)
            .map(|u| {
                (0..n)
                    .map(|w| (0..n).any(|v| r[u][v] && d.rel[a][v][w]))
                    .collect()
            })
            .collect();
    }
    r
}

/// `(R_j;R_i)^b ⊆ (R_i;R_j)^b` for every pair of agents.
pub fn is_cb_frame(d: &Dense, b: usize) -> bool {
    let m = d.agents.len();
    for i in 0..m {
        for j in 0..m {
            let lhs = compose(d, &[j, i].repeat(b));
            let rhs = compose(d, &[i, j].repeat(b));
            if (0..d.len()).any(|u| (0..d.len()).any(|v| lhs[u][v] && !rhs[u][v])) {
                return false;
            }
        }
    }
    true
}

/// Frame test for a logic, built from the helpers above.
pub fn frame_ok(d: &Dense, logic: LogicSpec) -> bool {
    is_s5(d)
        && match logic {
            LogicSpec::S5 => true,
            LogicSpec::C => is_c_frame(d),
            LogicSpec::Cb(b) => is_cb_frame(d, b as usize),
            LogicSpec::WCl(_) => panic!("no oracle for wCl"),
        }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bounded {
    /// A shortest plan.
    Plan(Vec<String>),
    /// Some layer up to the depth bound has no successors.
    Exhausted,
    /// The last layer is still non-empty.
    Open,
}

/// Breadth-first search over raw products, with no contraction and no duplicate detection.
pub fn exhaustive_plan(
    s0: &EpistemicState,
    actions: &[Action],
    goal: &Formula,
    logic: LogicSpec,
    depth: usize,
) -> Bounded {
    if holds_in_state(s0, goal) {
        return Bounded::Plan(Vec::new());
    }
    let mut layer = vec![(s0.clone(), Vec::<String>::new())];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (s, plan) in &layer {
            for a in actions {
                if !applicable(s, a).unwrap() {
                    continue;
                }
                let t = product_update(s, a).unwrap();
                if !frame_ok(&Dense::of_model(t.model()), logic) {
                    continue;
                }
                let mut p = plan.clone();
                p.push(a.name().to_owned());
                if holds_in_state(&t, goal) {
                    return Bounded::Plan(p);
                }
                next.push((t, p));
            }
        }
        if next.is_empty() {
            return Bounded::Exhausted;
        }
        layer = next;
    }
    Bounded::Open
}

pub fn random_formula(
    rng: &mut impl Rng,
    atoms: &[&str],
    agents: &[&str],
    depth: usize,
) -> Formula {
    let leaf = |rng: &mut dyn rand::RngCore| match rng.gen_range(0..6) {
        0 => Formula::True,
        1 => Formula::False,
        _ => Formula::atom(*atoms.choose(rng).unwrap()),
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let sub = |rng: &mut _| random_formula(rng, atoms, agents, depth - 1);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::knows(*agents.choose(rng).unwrap(), sub(rng)),
        5 => Formula::possible(*agents.choose(rng).unwrap(), sub(rng)),
        6 => {
            let mut g: Vec<&str> = agents
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.6))
                .collect();
            if g.is_empty() {
                g.push(agents[0]);
            }
            Formula::common(g, sub(rng))
        }
        _ => Formula::iff(sub(rng), sub(rng)),
    }
}

/// A model with arbitrary relations (not necessarily S5).
pub fn random_model(
    vocab: &Arc<Vocabulary>,
    rng: &mut impl Rng,
    max_worlds: usize,
    density: f64,
) -> EpistemicModel {
    let n = rng.gen_range(1..=max_worlds);
    let worlds = (0..n).map(|i| WorldId::new(format!("w{i}"))).collect();
    let relations = (0..vocab.agent_count())
        .map(|_| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|_| rng.gen_bool(density))
                .collect();
            Relation::from_pairs(n, pairs)
        })
        .collect();
    let valuation = (0..vocab.atom_count())
        .map(|_| {
            let mut b = FixedBitSet::with_capacity(n);
            for w in 0..n {
                b.set(w, rng.gen_bool(0.5));
            }
            b
        })
        .collect();
    EpistemicModel::from_parts(vocab.clone(), worlds, relations, valuation).unwrap()
}

/// Turns a state into an action with the same frame: worlds become events with the given
/// preconditions and no postconditions.
pub fn state_as_action(s: &EpistemicState, name: &str, pre: impl Fn(usize) -> Formula) -> Action {
    let m = s.model();
    let mut b = ActionBuilder::new(name).closure(Closure::None);
    for w in 0..m.world_count() {
        b = b.event(m.worlds()[w].as_str(), pre(w));
    }
    for (a, agent) in m.vocab().agents().iter().enumerate() {
        for (u, v) in m.relations()[a].pairs() {
            b = b.edge(
                agent.as_str(),
                m.worlds()[u].as_str(),
                m.worlds()[v].as_str(),
            );
        }
    }
    for w in s.designated().ones() {
        b = b.designated(m.worlds()[w].as_str());
    }
    b.build(m.vocab()).unwrap()
}

/// Plain two-counter interpreter: configurations `(k, l, m)` for `steps` steps, stopping at halt.
pub fn run_machine(program: &[Instruction], steps: usize) -> Vec<(usize, u64, u64)> {
    let mut c = (0usize, 0u64, 0u64);
    let mut out = vec![c];
    for _ in 0..steps {
        let (k, l, m) = c;
        c = match program[k] {
            Instruction::Halt => break,
            Instruction::Inc { counter: 0 } => (k + 1, l + 1, m),
            Instruction::Inc { .. } => (k + 1, l, m + 1),
            Instruction::Jump { target } => (target, l, m),
            Instruction::Jzdec { counter, target } => {
                let v = if counter == 0 { l } else { m };
                match (v, counter) {
                    (0, _) => (target, l, m),
                    (_, 0) => (k + 1, l - 1, m),
                    _ => (k + 1, l, m - 1),
                }
            }
        };
        out.push(c);
    }
    out
}

/// Steps until halt, if within `limit`.
pub fn halting_steps(program: &[Instruction], limit: usize) -> Option<usize> {
    let run = run_machine(program, limit);
    let last = run.last().unwrap().0;
    matches!(program[last], Instruction::Halt).then(|| run.len() - 1)
}

/// A bisimilar copy of `s` with every world duplicated up to `copies` times and names shuffled.
pub fn inflate(
    s: &EpistemicState,
    copies: usize,
    max_worlds: usize,
    rng: &mut impl Rng,
) -> EpistemicState {
    let m = s.model();
    let n = m.world_count();
    let mut origin: Vec<usize> = (0..n).collect();
    while origin.len() < max_worlds && rng.gen_bool(0.7) {
        let w = rng.gen_range(0..n);
        if origin.iter().filter(|&&x| x == w).count() < copies {
            origin.push(w);
        }
    }
    origin.shuffle(rng);
    let size = origin.len();
    assert!(size <= 10, "single-digit names keep the sorted order");
    let worlds = (0..size).map(|i| WorldId::new(format!("x{i}"))).collect();
    let relations = m
        .relations()
        .iter()
        .map(|r| {
            let pairs: Vec<_> = (0..size)
                .flat_map(|u| (0..size).map(move |v| (u, v)))
                .filter(|&(u, v)| r.contains(origin[u], origin[v]))
                .collect();
            Relation::from_pairs(size, pairs)
        })
        .collect();
    let valuation = (0..m.vocab().atom_count())
        .map(|p| {
            let mut b = FixedBitSet::with_capacity(size);
            for (i, &o) in origin.iter().enumerate() {
                b.set(i, m.holds(p, o));
            }
            b
        })
        .collect();
    let model =
        EpistemicModel::from_parts(m.vocab().clone(), worlds, relations, valuation).unwrap();
    // Worlds are re-sorted by name, which matches the x-index order.
    let mut designated = FixedBitSet::with_capacity(size);
    for w in s.designated().ones() {
        let mine: Vec<usize> = (0..size).filter(|&i| origin[i] == w).collect();
        designated.insert(*mine.choose(rng).unwrap());
        for &i in &mine {
            if rng.gen_bool(0.3) {
                designated.insert(i);
            }
        }
    }
    EpistemicState::new(model, designated).unwrap()
}

/// A random task over atoms `p, q, r` and agents `a, b`: a `logic`-state, one to three actions
/// with `logic` frames, and a goal that fails initially.
pub fn random_task(
    rng: &mut impl Rng,
    vocab: &Arc<Vocabulary>,
    logic: LogicSpec,
) -> Option<(EpistemicState, Vec<Action>, Formula)> {
    let atoms = ["p", "q", "r"];
    let agents = ["a", "b"];
    let s0 = random_state(vocab, logic, 3, rng)?;
    let count = rng.gen_range(1..=3);
    let mut actions = Vec::new();
    for i in 0..count {
        let frame = random_state(vocab, logic, 2, rng)?;
        let pres: Vec<Formula> = (0..frame.world_count())
            .map(|_| {
                if rng.gen_bool(0.3) {
                    Formula::True
                } else {
                    random_formula(rng, &atoms, &agents, 1)
                }
            })
            .collect();
        let action = state_as_action(&frame, &format!("act{i}"), |w| pres[w].clone());
        let mut desc = action.to_description();
        for ev in &mut desc.events {
            for p in atoms {
                if rng.gen_bool(0.5) {
                    let value = random_formula(rng, &atoms, &agents, 1);
                    ev.post.insert(p.to_owned(), value.to_string());
                }
            }
        }
        actions.push(desc.build(vocab).unwrap());
    }
    // Most goals are read off a state at the end of a short random walk, so that plans exist.
    let mut end = s0.clone();
    if rng.gen_bool(0.7) {
        for _ in 0..rng.gen_range(1..=3) {
            let options: Vec<&Action> = actions
                .iter()
                .filter(|a| applicable(&end, a).unwrap())
                .collect();
            let Some(a) = options.choose(rng) else { break };
            end = product_update(&end, a).unwrap();
        }
    }
    // Half the time the goal must also fail one step in, which pushes plans past length 1.
    let near: Vec<EpistemicState> = if rng.gen_bool(0.5) {
        actions
            .iter()
            .filter(|a| applicable(&s0, a).unwrap())
            .map(|a| product_update(&s0, a).unwrap())
            .collect()
    } else {
        Vec::new()
    };
    for _ in 0..200 {
        let depth = 1 + usize::from(rng.gen_bool(0.5));
        let goal = random_formula(rng, &atoms, &agents, depth);
        if holds_in_state(&end, &goal)
            && !holds_in_state(&s0, &goal)
            && near.iter().all(|s| !holds_in_state(s, &goal))
        {
            return Some((s0, actions, goal));
        }
    }
    let goal = random_formula(rng, &atoms, &agents, 1);
    let goal = if holds_in_state(&s0, &goal) {
        Formula::not(goal)
    } else {
        goal
    };
    Some((s0, actions, goal))
}
