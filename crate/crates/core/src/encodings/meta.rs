//! Meta-chains and the actions that simulate a two-counter machine over agents `0, 1, 2`.
//!
//! A counter value `n` is a chain of `n + 1` three-world meta-worlds. In a single chain the
//! worlds are `w1 .. w{3n+3}`; meta-world `j` holds the r-world `w{3j+1}`, the top world
//! `w{3j+2}` and the bottom world `w{3j+3}`.

use std::sync::Arc;

use super::machine::{Instruction, MachineConfig, TwoCounterMachine};
use super::EncodingError;
use crate::axioms::{repair, LogicSpec};
use crate::event::{Action, ActionBuilder};
use crate::formula::Formula;
use crate::kripke::{EpistemicModel, EpistemicState, StateBuilder};
use crate::planner::{PlanningTask, SearchOptions};
use crate::vocab::Vocabulary;

pub const META_AGENTS: [&str; 3] = ["0", "1", "2"];
pub const META_ATOMS: [&str; 4] = ["p1", "p2", "p3", "r"];
/// Default depth cap for encoded machines.
pub const MACHINE_MAX_DEPTH: usize = 32;

pub fn meta_vocabulary() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::new(META_AGENTS, META_ATOMS).expect("fixed names are valid"))
}

fn agent(i: usize) -> &'static str {
    META_AGENTS[i]
}

fn check_atom(p: &str) -> Result<(), EncodingError> {
    if META_ATOMS[..3].contains(&p) {
        Ok(())
    } else {
        Err(EncodingError::NotCounterAtom(p.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// Bottom world.
    Lambda,
    /// Top world.
    Mu,
    /// r-world.
    Tau,
}

/// The path formulas `λ_i(p)`, `μ_i(p)` and `τ_i(p)`.
pub fn path_formula(kind: PathKind, p: &str, i: usize) -> Formula {
    let atom = || Formula::atom(p);
    let r = || Formula::atom("r");
    let lambda = |i: usize| -> Formula {
        if i == 0 {
            Formula::conj([
                atom(),
                Formula::knows("0", Formula::not(r())),
                Formula::knows("1", Formula::not(r())),
            ])
        } else {
            let mu = path_formula(PathKind::Mu, p, i - 1);
            Formula::conj([
                atom(),
                Formula::not(r()),
                Formula::not(mu.clone()),
                Formula::or(
                    Formula::possible("0", mu.clone()),
                    Formula::possible("1", mu),
                ),
            ])
        }
    };
    match kind {
        PathKind::Lambda => lambda(i),
        PathKind::Mu => {
            let l = lambda(i);
            Formula::conj([atom(), Formula::possible("2", l.clone()), Formula::not(l)])
        }
        PathKind::Tau => {
            let mu = path_formula(PathKind::Mu, p, i);
            Formula::conj([
                atom(),
                r(),
                Formula::or(
                    Formula::possible("0", mu.clone()),
                    Formula::possible("1", mu),
                ),
            ])
        }
    }
}

/// `φ_k = M[0] μ_k(p1)`: the instruction counter is `k`.
pub fn instruction_goal(k: usize) -> Formula {
    Formula::possible("0", path_formula(PathKind::Mu, "p1", k))
}

fn add_chain(mut b: StateBuilder, p: &str, n: usize, prefix: &str) -> StateBuilder {
    let w = |j: usize| format!("{prefix}w{j}");
    for j in 0..=n {
        let own = agent(j % 2);
        let (r_world, top, bottom) = (w(3 * j + 1), w(3 * j + 2), w(3 * j + 3));
        b = b
            .world(&r_world, &[p, "r"])
            .world(&top, &[p])
            .world(&bottom, &[p])
            .edge(own, &top, &r_world)
            .edge("2", &top, &bottom);
        if j > 0 {
            b = b.edge(own, &w(3 * j), &top);
        }
    }
    b
}

/// META-CHAIN(p, n) as a state designated at its first top world `w2`.
pub fn meta_chain_state(
    vocab: &Arc<Vocabulary>,
    p: &str,
    n: usize,
) -> Result<EpistemicState, EncodingError> {
    check_atom(p)?;
    Ok(add_chain(StateBuilder::new(), p, n, "")
        .designated("w2")
        .build(vocab)?)
}

pub fn meta_chain(
    vocab: &Arc<Vocabulary>,
    p: &str,
    n: usize,
) -> Result<EpistemicModel, EncodingError> {
    Ok(meta_chain_state(vocab, p, n)?.model().clone())
}

/// META-S for a configuration: chains for `p1, p2, p3` of lengths `k, l, m`, whose top worlds
/// hang off the designated root `w0` by agent 0. Chain worlds are prefixed `p1.` and so on.
pub fn meta_state(
    vocab: &Arc<Vocabulary>,
    c: MachineConfig,
) -> Result<EpistemicState, EncodingError> {
    let mut b = StateBuilder::new().world("w0", &[]).designated("w0");
    for (p, n) in [("p1", c.k), ("p2", c.l as usize), ("p3", c.m as usize)] {
        let prefix = format!("{p}.");
        b = add_chain(b, p, n, &prefix).edge("0", "w0", &format!("{prefix}w2"));
    }
    Ok(b.build(vocab)?)
}

/// Integer operations on one meta-chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetaOp {
    /// Appends a meta-world linked by agent `i`; right for chains of length `n` with `i = 1 - n mod 2`.
    Inc(u8),
    /// Both increments, each guarded so that only the one matching the chain's parity fires.
    IncAuto,
    Dec,
    /// Rebuilds a chain of length `n` as one of length `m`.
    Repl {
        n: usize,
        m: usize,
    },
}

struct Event {
    name: String,
    pre: Formula,
    set_r: bool,
}

/// Events and generator edges of one operation; `attach` is the event joined to a parent.
struct Fragment {
    events: Vec<Event>,
    edges: Vec<(&'static str, String, String)>,
    attach: String,
}

impl Fragment {
    fn add_to(self, mut b: ActionBuilder) -> ActionBuilder {
        for e in self.events {
            b = b.event(&e.name, e.pre);
            if e.set_r {
                b = b.post(&e.name, "r", Formula::True);
            }
        }
        for (a, u, v) in self.edges {
            b = b.edge(a, &u, &v);
        }
        b
    }
}

/// The `v`-variant of the increment fires only at a bottom world whose meta-world is owned by `1 - v`.
fn parity_guard(p: &str, v: u8) -> Formula {
    let pr = Formula::and(Formula::atom(p), Formula::atom("r"));
    Formula::possible(
        "2",
        Formula::conj([
            Formula::atom(p),
            Formula::not(Formula::atom("r")),
            Formula::possible(agent(1 - v as usize), pr),
        ]),
    )
}

fn fragment(op: MetaOp, p: &str, prefix: &str) -> Result<Fragment, EncodingError> {
    let name = |s: &str| format!("{prefix}{s}");
    let atom = || Formula::atom(p);
    let ev = |n: &str, pre: Formula, set_r: bool| Event {
        name: name(n),
        pre,
        set_r,
    };
    let lambda0 = path_formula(PathKind::Lambda, p, 0);
    Ok(match op {
        MetaOp::Inc(_) | MetaOp::IncAuto => {
            let variants: Vec<(u8, Formula)> = match op {
                MetaOp::Inc(i) if i > 1 => {
                    return Err(EncodingError::BadOperation(format!("inc({i})")))
                }
                MetaOp::Inc(i) => vec![(i, Formula::True)],
                _ => vec![(0, parity_guard(p, 0)), (1, parity_guard(p, 1))],
            };
            let auto = variants.len() > 1;
            let mut events = vec![ev(
                "A0",
                Formula::and(atom(), Formula::not(lambda0.clone())),
                false,
            )];
            let mut edges = Vec::new();
            for (v, guard) in variants {
                let sfx = if auto { format!("_{v}") } else { String::new() };
                let pre = Formula::conj(
                    [atom(), lambda0.clone(), guard]
                        .into_iter()
                        .filter(|f| *f != Formula::True),
                );
                let [a1, a2, a3, b1] = ["A1", "A2", "A3", "B1"].map(|e| format!("{e}{sfx}"));
                events.push(ev(&a1, pre.clone(), false));
                events.push(ev(&a2, pre.clone(), false));
                events.push(ev(&a3, pre.clone(), false));
                events.push(ev(&b1, pre, true));
                let own = agent(v as usize);
                edges.push(("2", name("A0"), name(&a1)));
                edges.push((own, name(&a1), name(&a2)));
                edges.push((own, name(&a2), name(&b1)));
                edges.push(("2", name(&a2), name(&a3)));
            }
            Fragment {
                events,
                edges,
                attach: name("A0"),
            }
        }
        MetaOp::Dec => {
            let pre = Formula::conj([
                atom(),
                Formula::not(lambda0),
                Formula::not(path_formula(PathKind::Mu, p, 0)),
                Formula::not(path_formula(PathKind::Tau, p, 0)),
            ]);
            Fragment {
                events: vec![ev("D", pre, false)],
                edges: Vec::new(),
                attach: name("D"),
            }
        }
        MetaOp::Repl { n, m } => {
            let pre = Formula::and(atom(), path_formula(PathKind::Mu, p, n));
            let mut events = Vec::new();
            let mut edges = Vec::new();
            for j in 0..=m {
                let own = agent(j % 2);
                let (t, l, b) = (format!("t{j}"), format!("l{j}"), format!("b{j}"));
                events.push(ev(&t, pre.clone(), false));
                events.push(ev(&l, pre.clone(), true));
                events.push(ev(&b, pre.clone(), false));
                edges.push((own, name(&t), name(&l)));
                edges.push(("2", name(&t), name(&b)));
                if j > 0 {
                    edges.push((own, name(&format!("b{}", j - 1)), name(&t)));
                }
            }
            Fragment {
                events,
                edges,
                attach: name("t0"),
            }
        }
    })
}

/// One operation as a standalone action, designated at its attachment event.
pub fn meta_operation(
    vocab: &Arc<Vocabulary>,
    op: MetaOp,
    p: &str,
) -> Result<Action, EncodingError> {
    check_atom(p)?;
    let name = match op {
        MetaOp::Inc(i) => format!("inc{i}_{p}"),
        MetaOp::IncAuto => format!("inc_{p}"),
        MetaOp::Dec => format!("dec_{p}"),
        MetaOp::Repl { n, m } => format!("repl{n}_{m}_{p}"),
    };
    let f = fragment(op, p, "")?;
    let attach = f.attach.clone();
    Ok(f.add_to(ActionBuilder::new(&name))
        .designated(&attach)
        .build(vocab)?)
}

/// What happens to each chain under one machine action.
enum ChainUpdate {
    Op(MetaOp),
    Copy,
}

/// The action simulating the instruction at `c.k`; it only depends on the `≈`-class of `c`.
pub fn machine_action(
    vocab: &Arc<Vocabulary>,
    machine: &TwoCounterMachine,
    c: MachineConfig,
) -> Result<Action, EncodingError> {
    let k = c.k;
    let ins = *machine
        .instructions()
        .get(k)
        .ok_or(EncodingError::BadOperation(format!("no instruction {k}")))?;
    let step_k = MetaOp::Inc(1 - (k % 2) as u8);
    let counter_atom = |i: u8| if i == 0 { "p2" } else { "p3" };
    let zero = |i: u8| Formula::possible("0", path_formula(PathKind::Mu, counter_atom(i), 0));
    let mut root = Formula::conj([
        instruction_goal(k),
        Formula::not(Formula::atom("p1")),
        Formula::not(Formula::atom("p2")),
        Formula::not(Formula::atom("p3")),
    ]);
    let mut updates = [ChainUpdate::Copy, ChainUpdate::Copy, ChainUpdate::Copy];
    let name = match ins {
        Instruction::Halt => {
            return Err(EncodingError::BadOperation(format!(
                "instruction {k} is halt"
            )))
        }
        Instruction::Inc { counter } => {
            updates[0] = ChainUpdate::Op(step_k);
            updates[1 + counter as usize] = ChainUpdate::Op(MetaOp::IncAuto);
            format!("a_k{k}")
        }
        Instruction::Jump { target } => {
            updates[0] = ChainUpdate::Op(MetaOp::Repl { n: k, m: target });
            format!("a_k{k}")
        }
        Instruction::Jzdec { counter, target } => {
            let value = if counter == 0 { c.l } else { c.m };
            if value == 0 {
                root = Formula::and(root, zero(counter));
                updates[0] = ChainUpdate::Op(MetaOp::Repl { n: k, m: target });
                format!("a_k{k}_zero")
            } else {
                root = Formula::and(root, Formula::not(zero(counter)));
                updates[0] = ChainUpdate::Op(step_k);
                updates[1 + counter as usize] = ChainUpdate::Op(MetaOp::Dec);
                format!("a_k{k}_pos")
            }
        }
    };
    let mut b = ActionBuilder::new(&name)
        .event("root", root)
        .designated("root");
    for (p, update) in ["p1", "p2", "p3"].into_iter().zip(updates) {
        let prefix = format!("{p}.");
        let attach = match update {
            ChainUpdate::Op(op) => {
                let f = fragment(op, p, &prefix)?;
                let attach = f.attach.clone();
                b = f.add_to(b);
                attach
            }
            ChainUpdate::Copy => {
                let e = format!("{prefix}copy");
                b = b.event(&e, Formula::atom(p));
                e
            }
        };
        b = b.edge("0", "root", &attach);
    }
    // Chains meet in the root's agent-0 class, which leaves 2,0,2,0 paths across fragments
    // without a 0,2,0,2 counterpart. Closing the frame only joins events whose worlds lie in
    // different chains, so products are unchanged.
    let a = b.build(vocab)?;
    let mut rels = a.model().relations().to_vec();
    if !repair(&mut rels, LogicSpec::Cb(2)) {
        return Err(EncodingError::BadOperation(format!(
            "{name}: frame closure did not converge"
        )));
    }
    Ok(a.with_relations(rels))
}

/// `F_M`: one action per instruction, two for each `jzdec` (zero and non-zero counter).
pub fn machine_actions(
    vocab: &Arc<Vocabulary>,
    machine: &TwoCounterMachine,
) -> Result<Vec<Action>, EncodingError> {
    let mut out = Vec::new();
    for (k, ins) in machine.instructions()[..machine.last()].iter().enumerate() {
        out.push(machine_action(vocab, machine, MachineConfig::new(k, 0, 0))?);
        if matches!(ins, Instruction::Jzdec { .. }) {
            out.push(machine_action(vocab, machine, MachineConfig::new(k, 1, 1))?);
        }
    }
    Ok(out)
}

/// The planning task that is solvable iff the machine halts, capped at [`MACHINE_MAX_DEPTH`].
pub fn encode_machine(machine: &TwoCounterMachine) -> Result<PlanningTask, EncodingError> {
    encode_machine_with(
        machine,
        SearchOptions::default().with_max_depth(MACHINE_MAX_DEPTH),
    )
}

pub fn encode_machine_with(
    machine: &TwoCounterMachine,
    options: SearchOptions,
) -> Result<PlanningTask, EncodingError> {
    let vocab = meta_vocabulary();
    let initial = meta_state(&vocab, MachineConfig::default())?;
    let actions = machine_actions(&vocab, machine)?;
    Ok(PlanningTask::new(
        initial,
        actions,
        instruction_goal(machine.last()),
        LogicSpec::Cb(2),
        options,
    )?)
}
