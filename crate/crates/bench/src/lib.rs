//! Inputs shared by the benchmarks under `benches/`.

use std::sync::Arc;

use epiplan_core::axioms::random_state;
use epiplan_core::encodings::{CoordinatedAttack, Instruction, TwoCounterMachine};
use epiplan_core::{product_update, EpistemicState, LogicSpec, Vocabulary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The coordinated attack state after `k` delivered messages, without contraction between steps.
pub fn raw_attack_state(ca: &CoordinatedAttack, k: usize) -> EpistemicState {
    let mut s = ca.s0.clone();
    for i in 0..k {
        let a = if i % 2 == 0 { &ca.send_ab } else { &ca.send_ba };
        s = product_update(&s, a).expect("messages are always deliverable in turn");
    }
    s
}

/// Random contracted `spec`-states over three agents, reproducible from `seed`.
pub fn random_states(
    spec: LogicSpec,
    count: usize,
    max_worlds: usize,
    seed: u64,
) -> Vec<EpistemicState> {
    let vocab =
        Arc::new(Vocabulary::new(["a", "b", "c"], ["p", "q", "r"]).expect("fixed names are valid"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        out.extend(random_state(&vocab, spec, max_worlds, &mut rng));
    }
    out
}

/// Counts counter 1 up once, then halts after testing counter 0.
pub fn countdown_machine() -> TwoCounterMachine {
    TwoCounterMachine::new(vec![
        Instruction::Inc { counter: 1 },
        Instruction::Jzdec {
            counter: 0,
            target: 3,
        },
        Instruction::Jump { target: 0 },
        Instruction::Halt,
    ])
    .expect("well-formed program")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_what_the_benches_expect() {
        let ca = CoordinatedAttack::new().unwrap();
        assert_eq!(raw_attack_state(&ca, 4).world_count(), 6);
        assert_eq!(random_states(LogicSpec::C, 5, 8, 1).len(), 5);
        assert_eq!(countdown_machine().halting_time(20), Some(2));
    }
}
