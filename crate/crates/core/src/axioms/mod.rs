//! Logic regimes and their frame conditions.

mod generate;
mod probe;

use std::fmt;

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::Action;
use crate::kripke::{EpistemicState, Frame};
use crate::names::AgentId;
use crate::relation::Relation;

pub use generate::random_state;
pub(crate) use generate::repair;
pub use probe::{probe_state, probe_theorems, Probe, ProbeCounterexample, ProbeReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("unknown logic `{0}` (expected S5, C-S5, Cb-S5 or wCl-S5)")]
    Unknown(String),
    #[error("Cb-S5 needs a parameter b >= 1")]
    MissingB,
    #[error("wCl-S5 needs a parameter l >= 2")]
    MissingL,
    #[error("wCl-S5 with l = {l} exceeds the {agents} agents of the task")]
    LTooLarge { l: u32, agents: usize },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("empty agent sequence")]
    EmptySequence,
}

/// S5 plus an optional commutativity axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicSpec {
    S5,
    /// `K_i K_j p -> K_j K_i p`.
    C,
    /// `(K_i K_j)^b p -> (K_j K_i)^b p`, with `b >= 2`.
    Cb(u32),
    /// Any permutation of `l` distinct boxes may be swapped in, with `l >= 3`.
    WCl(u32),
}

impl LogicSpec {
    /// `b = 1` is plain C.
    pub fn cb(b: u32) -> Result<Self, LogicError> {
        match b {
            0 => Err(LogicError::MissingB),
            1 => Ok(LogicSpec::C),
            b => Ok(LogicSpec::Cb(b)),
        }
    }

    /// `l = 2` is plain C.
    pub fn wcl(l: u32) -> Result<Self, LogicError> {
        match l {
            0 | 1 => Err(LogicError::MissingL),
            2 => Ok(LogicSpec::C),
            l => Ok(LogicSpec::WCl(l)),
        }
    }

    pub fn parse(name: &str, b: Option<u32>, l: Option<u32>) -> Result<Self, LogicError> {
        match name {
            "S5" => Ok(LogicSpec::S5),
            "C-S5" => Ok(LogicSpec::C),
            "Cb-S5" => LogicSpec::cb(b.ok_or(LogicError::MissingB)?),
            "wCl-S5" => LogicSpec::wcl(l.ok_or(LogicError::MissingL)?),
            other => Err(LogicError::Unknown(other.to_owned())),
        }
    }

    pub fn check_agents(&self, agents: usize) -> Result<(), LogicError> {
        match *self {
            LogicSpec::WCl(l) if l as usize > agents => Err(LogicError::LTooLarge { l, agents }),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LogicSpec::S5 => "S5",
            LogicSpec::C => "C-S5",
            LogicSpec::Cb(_) => "Cb-S5",
            LogicSpec::WCl(_) => "wCl-S5",
        }
    }

    pub fn to_description(&self) -> LogicDescription {
        let (b, l) = match *self {
            LogicSpec::Cb(b) => (Some(b), None),
            LogicSpec::WCl(l) => (None, Some(l)),
            _ => (None, None),
        };
        LogicDescription {
            logic: self.name().to_owned(),
            b,
            l,
        }
    }
}

impl fmt::Display for LogicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicSpec::Cb(b) => write!(f, "Cb-S5(b={b})"),
            LogicSpec::WCl(l) => write!(f, "wCl-S5(l={l})"),
            other => f.write_str(other.name()),
        }
    }
}

/// JSON form: `{"logic": "Cb-S5", "b": 2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicDescription {
    pub logic: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
}

impl TryFrom<&LogicDescription> for LogicSpec {
    type Error = LogicError;

    fn try_from(d: &LogicDescription) -> Result<Self, LogicError> {
        LogicSpec::parse(&d.logic, d.b, d.l)
    }
}

/// A frame condition that failed, with the first offending points in index order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameViolation {
    NotReflexive {
        agent: AgentId,
        point: String,
    },
    NotSymmetric {
        agent: AgentId,
        from: String,
        to: String,
    },
    NotTransitive {
        agent: AgentId,
        path: Vec<String>,
    },
    /// `path` follows `lhs` from its first to its last point, and no `rhs` path joins those two.
    Inclusion {
        lhs: Vec<AgentId>,
        rhs: Vec<AgentId>,
        path: Vec<String>,
    },
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameViolation::NotReflexive { agent, point } => {
                write!(f, "R_{agent} is not reflexive at {point}")
            }
            FrameViolation::NotSymmetric { agent, from, to } => {
                write!(f, "R_{agent} has ({from},{to}) but not ({to},{from})")
            }
            FrameViolation::NotTransitive { agent, path } => {
                write!(f, "R_{agent} is not transitive along {}", path.join(" -> "))
            }
            FrameViolation::Inclusion { lhs, rhs, path } => {
                write!(f, "{}", path[0])?;
                for (a, p) in lhs.iter().zip(&path[1..]) {
                    write!(f, " -{a}-> {p}")?;
                }
                write!(
                    f,
                    " but ({},{}) is not in R_{}",
                    path[0],
                    path[path.len() - 1],
                    rhs.iter().join(";R_")
                )
            }
        }
    }
}

/// Composition `R_{v1} ; ... ; R_{vk}` over agent indices.
pub(crate) fn compose(frame: &(impl Frame + ?Sized), seq: &[usize]) -> Relation {
    let n = frame.point_count();
    let mut iter = seq.iter();
    let Some(&first) = iter.next() else {
        return Relation::identity(n);
    };
    iter.fold(frame.relation(first).clone(), |acc, &a| {
        acc.then(frame.relation(a))
    })
}

/// Composition over named agents, in sequence order.
pub fn compose_relations(frame: &impl Frame, seq: &[AgentId]) -> Result<Relation, LogicError> {
    if seq.is_empty() {
        return Err(LogicError::EmptySequence);
    }
    let idx = seq
        .iter()
        .map(|a| {
            frame
                .vocabulary()
                .agent_index(a.as_str())
                .ok_or_else(|| LogicError::UnknownAgent(a.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(compose(frame, &idx))
}

/// Lexicographically least path from `u` to `w` following `seq`; assumes one exists.
fn witness_path(frame: &(impl Frame + ?Sized), seq: &[usize], u: usize, w: usize) -> Vec<usize> {
    let n = frame.point_count();
    // back[k]: points from which the suffix seq[k..] reaches w.
    let mut back = vec![FixedBitSet::with_capacity(n); seq.len() + 1];
    back[seq.len()].insert(w);
    for k in (0..seq.len()).rev() {
        let r = frame.relation(seq[k]);
        let next = back[k + 1].clone();
        back[k].extend((0..n).filter(|&x| !r.successors(x).is_disjoint(&next)));
    }
    let mut path = vec![u];
    let mut x = u;
    for (k, &a) in seq.iter().enumerate() {
        x = frame
            .relation(a)
            .successors(x)
            .intersection(&back[k + 1])
            .next()
            .expect("path exists");
        path.push(x);
    }
    path
}

fn inclusion(
    frame: &(impl Frame + ?Sized),
    lhs: &[usize],
    rhs: &[usize],
) -> Option<FrameViolation> {
    let l = compose(frame, lhs);
    let r = compose(frame, rhs);
    let (u, w) = l.first_missing(&r)?;
    let agents = frame.vocabulary().agents();
    Some(FrameViolation::Inclusion {
        lhs: lhs.iter().map(|&a| agents[a].clone()).collect(),
        rhs: rhs.iter().map(|&a| agents[a].clone()).collect(),
        path: witness_path(frame, lhs, u, w)
            .into_iter()
            .map(|p| frame.point_name(p).to_owned())
            .collect(),
    })
}

fn s5_violation(frame: &(impl Frame + ?Sized)) -> Option<FrameViolation> {
    let n = frame.point_count();
    let name = |p: usize| frame.point_name(p).to_owned();
    for (a, agent) in frame.vocabulary().agents().iter().enumerate() {
        let r = frame.relation(a);
        if let Some(p) = (0..n).find(|&p| !r.contains(p, p)) {
            return Some(FrameViolation::NotReflexive {
                agent: agent.clone(),
                point: name(p),
            });
        }
        if let Some((u, v)) = r.pairs().find(|&(u, v)| !r.contains(v, u)) {
            return Some(FrameViolation::NotSymmetric {
                agent: agent.clone(),
                from: name(u),
                to: name(v),
            });
        }
        if let Some((u, w)) = r.then(r).first_missing(r) {
            return Some(FrameViolation::NotTransitive {
                agent: agent.clone(),
                path: witness_path(frame, &[a, a], u, w)
                    .into_iter()
                    .map(name)
                    .collect(),
            });
        }
    }
    None
}

/// First violated frame condition of `spec`, or `None` when the frame qualifies.
///
/// Checks S5 first, then the commutativity condition:
/// C is `R_j;R_i ⊆ R_i;R_j`, Cb is `(R_j;R_i)^b ⊆ (R_i;R_j)^b` (both for every ordered pair `i != j`),
/// and wCl is `R_π ⊆ R_σ` for every injective sequence `σ` of length `l` and permutation `π` of it.
pub fn check_frame_property(
    frame: &(impl Frame + ?Sized),
    spec: LogicSpec,
) -> Option<FrameViolation> {
    if let Some(v) = s5_violation(frame) {
        return Some(v);
    }
    check_commutativity(frame, spec)
}

/// Inclusions `lhs ⊆ rhs` between compositions that `spec` demands, over `agents` agents.
pub(crate) fn inclusions(spec: LogicSpec, agents: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let pairs = (0..agents)
        .cartesian_product(0..agents)
        .filter(|(i, j)| i != j);
    match spec {
        LogicSpec::S5 => Vec::new(),
        LogicSpec::C => pairs.map(|(i, j)| (vec![j, i], vec![i, j])).collect(),
        LogicSpec::Cb(b) => pairs
            .map(|(i, j)| ([j, i].repeat(b as usize), [i, j].repeat(b as usize)))
            .collect(),
        LogicSpec::WCl(l) => {
            let l = l as usize;
            if l > agents {
                return Vec::new();
            }
            let mut out = Vec::new();
            for subset in (0..agents).combinations(l) {
                let perms: Vec<Vec<usize>> = subset.into_iter().permutations(l).collect();
                for sigma in &perms {
                    for pi in perms.iter().filter(|&pi| pi != sigma) {
                        out.push((pi.clone(), sigma.clone()));
                    }
                }
            }
            out
        }
    }
}

/// The commutativity part only, without the S5 conditions.
pub fn check_commutativity(
    frame: &(impl Frame + ?Sized),
    spec: LogicSpec,
) -> Option<FrameViolation> {
    let n = frame.vocabulary().agent_count();
    inclusions(spec, n)
        .into_iter()
        .find_map(|(lhs, rhs)| inclusion(frame, &lhs, &rhs))
}

pub fn is_l_state(s: &EpistemicState, spec: LogicSpec) -> bool {
    check_frame_property(s.model(), spec).is_none()
}

pub fn is_l_action(a: &Action, spec: LogicSpec) -> bool {
    check_frame_property(a.model(), spec).is_none()
}
