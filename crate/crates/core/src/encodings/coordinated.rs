//! The coordinated attack problem: two generals `a`, `b`, atoms `d` (attack at dawn) and `m_a`,
//! `m_b` (where the messenger is).

use std::sync::Arc;

use super::EncodingError;
use crate::axioms::LogicSpec;
use crate::bisim::contract;
use crate::event::{product_update, Action, ActionBuilder};
use crate::formula::Formula;
use crate::kripke::{EpistemicState, StateBuilder};
use crate::planner::{PlanningTask, SearchOptions};
use crate::vocab::Vocabulary;

#[derive(Clone, Debug)]
pub struct CoordinatedAttack {
    pub vocab: Arc<Vocabulary>,
    pub s0: EpistemicState,
    pub send_ab: Action,
    pub send_ba: Action,
}

fn send(vocab: &Arc<Vocabulary>, from: &str, to: &str) -> Result<Action, EncodingError> {
    let (m_from, m_to) = (format!("m_{from}"), format!("m_{to}"));
    let name = format!("send_{from}{to}");
    Ok(ActionBuilder::new(&name)
        .event(
            "e1",
            Formula::and(Formula::atom("d"), Formula::atom(m_from.as_str())),
        )
        .post("e1", &m_from, Formula::False)
        .post("e1", &m_to, Formula::True)
        .event("e2", Formula::True)
        .post("e2", &m_from, Formula::False)
        .post("e2", &m_to, Formula::False)
        .edge(from, "e1", "e2")
        .designated("e1")
        .build(vocab)?)
}

impl CoordinatedAttack {
    pub fn new() -> Result<Self, EncodingError> {
        let vocab = Arc::new(
            Vocabulary::new(["a", "b"], ["d", "m_a", "m_b"]).expect("fixed names are valid"),
        );
        let s0 = StateBuilder::new()
            .world("w1", &["d", "m_a"])
            .world("w2", &["m_a"])
            .edge("b", "w1", "w2")
            .designated("w1")
            .build(&vocab)?;
        Ok(CoordinatedAttack {
            send_ab: send(&vocab, "a", "b")?,
            send_ba: send(&vocab, "b", "a")?,
            vocab,
            s0,
        })
    }

    /// `C_{a,b} d`.
    pub fn goal() -> Formula {
        Formula::common(["a", "b"], Formula::atom("d"))
    }

    pub fn actions(&self) -> Vec<Action> {
        vec![self.send_ab.clone(), self.send_ba.clone()]
    }

    /// `s_k`: the contracted state after `k` delivered messages, alternating from `a`.
    pub fn state(&self, k: usize) -> EpistemicState {
        let mut s = self.s0.clone();
        for i in 0..k {
            let a = if i % 2 == 0 {
                &self.send_ab
            } else {
                &self.send_ba
            };
            s = contract(&product_update(&s, a).expect("the next message is always deliverable"));
        }
        s
    }

    pub fn task(
        &self,
        logic: LogicSpec,
        options: SearchOptions,
    ) -> Result<PlanningTask, EncodingError> {
        Ok(PlanningTask::new(
            self.s0.clone(),
            self.actions(),
            Self::goal(),
            logic,
            options,
        )?)
    }
}

/// `(K[i] K[j])^h f`.
pub fn alternation(i: &str, j: &str, h: usize, f: Formula) -> Formula {
    (0..h).fold(f, |acc, _| Formula::knows(i, Formula::knows(j, acc)))
}

/// What `s_k` is expected to know: for `k = 2h`, `(K_a K_b)^h K_a d` holds and
/// `(K_b K_a)^{h+1} d` does not; for `k = 2h + 1`, `(K_b K_a)^{h+1} d` holds and
/// `(K_a K_b)^{h+1} K_a d` does not. Returns `(holds, fails)`.
pub fn alternation_facts(k: usize) -> (Formula, Formula) {
    let d = Formula::atom("d");
    let h = k / 2;
    if k % 2 == 0 {
        (
            alternation("a", "b", h, Formula::knows("a", d.clone())),
            alternation("b", "a", h + 1, d),
        )
    } else {
        (
            alternation("b", "a", h + 1, d.clone()),
            alternation("a", "b", h + 1, Formula::knows("a", d)),
        )
    }
}
