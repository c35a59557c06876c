//! Minsky two-counter machines.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("machine has no instructions")]
    Empty,
    #[error("last instruction must be halt")]
    NoFinalHalt,
    #[error("instruction {0}: halt may only appear last")]
    EarlyHalt(usize),
    #[error("instruction {index}: counter {counter} does not exist (use 0 or 1)")]
    BadCounter { index: usize, counter: u8 },
    #[error("instruction {index}: target {target} is past the final instruction {last}")]
    BadTarget {
        index: usize,
        target: usize,
        last: usize,
    },
    #[error("configuration index {k} is past the final instruction {last}")]
    BadConfig { k: usize, last: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Instruction {
    Inc { counter: u8 },
    Jump { target: usize },
    Jzdec { counter: u8, target: usize },
    Halt,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Inc { counter } => write!(f, "inc({counter})"),
            Instruction::Jump { target } => write!(f, "jump({target})"),
            Instruction::Jzdec { counter, target } => write!(f, "jzdec({counter},{target})"),
            Instruction::Halt => f.write_str("halt"),
        }
    }
}

/// Instructions `I_0 .. I_T` with `I_T = halt`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MachineFile", into = "MachineFile")]
pub struct TwoCounterMachine {
    instructions: Vec<Instruction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    instructions: Vec<Instruction>,
}

impl TryFrom<MachineFile> for TwoCounterMachine {
    type Error = MachineError;

    fn try_from(f: MachineFile) -> Result<Self, MachineError> {
        TwoCounterMachine::new(f.instructions)
    }
}

impl From<TwoCounterMachine> for MachineFile {
    fn from(m: TwoCounterMachine) -> Self {
        MachineFile {
            instructions: m.instructions,
        }
    }
}

impl TwoCounterMachine {
    pub fn new(instructions: Vec<Instruction>) -> Result<Self, MachineError> {
        let Some(last) = instructions.len().checked_sub(1) else {
            return Err(MachineError::Empty);
        };
        if instructions[last] != Instruction::Halt {
            return Err(MachineError::NoFinalHalt);
        }
        for (index, ins) in instructions[..last].iter().enumerate() {
            match *ins {
                Instruction::Halt => return Err(MachineError::EarlyHalt(index)),
                Instruction::Inc { counter } | Instruction::Jzdec { counter, .. }
                    if counter > 1 =>
                {
                    return Err(MachineError::BadCounter { index, counter })
                }
                _ => {}
            }
            if let Instruction::Jump { target } | Instruction::Jzdec { target, .. } = *ins {
                if target > last {
                    return Err(MachineError::BadTarget {
                        index,
                        target,
                        last,
                    });
                }
            }
        }
        Ok(TwoCounterMachine { instructions })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Index `T` of the halting instruction.
    pub fn last(&self) -> usize {
        self.instructions.len() - 1
    }

    /// `f_M(0), f_M(1), ...` up to `steps` steps or the first halting configuration.
    pub fn run(&self, steps: usize) -> Vec<MachineConfig> {
        let mut c = MachineConfig::default();
        let mut out = vec![c];
        for _ in 0..steps {
            if c.k == self.last() {
                break;
            }
            c = machine_step(self, c).expect("reachable configurations are in range");
            out.push(c);
        }
        out
    }

    /// Number of steps until halting, if that happens within `limit` steps.
    pub fn halting_time(&self, limit: usize) -> Option<usize> {
        let run = self.run(limit);
        (run.last()?.k == self.last()).then(|| run.len() - 1)
    }
}

impl fmt::Display for TwoCounterMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, ins) in self.instructions.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{i}: {ins}")?;
        }
        Ok(())
    }
}

/// `(k, l, m)`: instruction index and the two counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineConfig {
    pub k: usize,
    pub l: u64,
    pub m: u64,
}

impl MachineConfig {
    pub fn new(k: usize, l: u64, m: u64) -> Self {
        MachineConfig { k, l, m }
    }
}

impl fmt::Display for MachineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k, self.l, self.m)
    }
}

/// One step of the computation function; halt is a fixpoint.
pub fn machine_step(
    machine: &TwoCounterMachine,
    c: MachineConfig,
) -> Result<MachineConfig, MachineError> {
    let ins = machine
        .instructions
        .get(c.k)
        .ok_or(MachineError::BadConfig {
            k: c.k,
            last: machine.last(),
        })?;
    let MachineConfig { k, l, m } = c;
    Ok(match *ins {
        Instruction::Halt => c,
        Instruction::Inc { counter: 0 } => MachineConfig::new(k + 1, l + 1, m),
        Instruction::Inc { .. } => MachineConfig::new(k + 1, l, m + 1),
        Instruction::Jump { target } => MachineConfig::new(target, l, m),
        Instruction::Jzdec { counter: 0, target } if l == 0 => MachineConfig::new(target, l, m),
        Instruction::Jzdec { counter: 0, .. } => MachineConfig::new(k + 1, l - 1, m),
        Instruction::Jzdec { target, .. } if m == 0 => MachineConfig::new(target, l, m),
        Instruction::Jzdec { .. } => MachineConfig::new(k + 1, l, m - 1),
    })
}
