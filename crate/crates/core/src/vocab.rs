use std::collections::HashMap;

use thiserror::Error;

use crate::names::{AgentId, Atom};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VocabularyError {
    #[error("duplicate agent `{0}`")]
    DuplicateAgent(String),
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("invalid agent name `{0}`")]
    InvalidAgent(String),
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("agent universe is empty")]
    NoAgents,
}

/// The agent and atom universes shared by every model, action and formula of a task.
///
/// Declaration order is kept; it fixes the index of each agent and atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    agents: Vec<AgentId>,
    atoms: Vec<Atom>,
    agent_index: HashMap<String, usize>,
    atom_index: HashMap<String, usize>,
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "true"
        && s != "false"
}

pub(crate) fn is_agent_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Vocabulary {
    pub fn new<A, P>(agents: A, atoms: P) -> Result<Self, VocabularyError>
    where
        A: IntoIterator,
        A::Item: Into<AgentId>,
        P: IntoIterator,
        P::Item: Into<Atom>,
    {
        let agents: Vec<AgentId> = agents.into_iter().map(Into::into).collect();
        let atoms: Vec<Atom> = atoms.into_iter().map(Into::into).collect();
        if agents.is_empty() {
            return Err(VocabularyError::NoAgents);
        }
        let mut agent_index = HashMap::new();
        for (i, a) in agents.iter().enumerate() {
            if !is_agent_token(a.as_str()) {
                return Err(VocabularyError::InvalidAgent(a.to_string()));
            }
            if agent_index.insert(a.to_string(), i).is_some() {
                return Err(VocabularyError::DuplicateAgent(a.to_string()));
            }
        }
        let mut atom_index = HashMap::new();
        for (i, p) in atoms.iter().enumerate() {
            if !is_ident(p.as_str()) {
                return Err(VocabularyError::InvalidAtom(p.to_string()));
            }
            if atom_index.insert(p.to_string(), i).is_some() {
                return Err(VocabularyError::DuplicateAtom(p.to_string()));
            }
        }
        Ok(Vocabulary {
            agents,
            atoms,
            agent_index,
            atom_index,
        })
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn agent_index(&self, agent: &str) -> Option<usize> {
        self.agent_index.get(agent).copied()
    }

    pub fn atom_index(&self, atom: &str) -> Option<usize> {
        self.atom_index.get(atom).copied()
    }
}
