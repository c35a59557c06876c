//! Task files: the JSON form of a planning task.
//!
//! ```json
//! {"agents": ["a","b"], "atoms": ["d","m_a","m_b"], "logic": {"logic": "C-S5"},
//!  "initial": {...}, "actions": [...], "goal": "C[{a,b}] d",
//!  "options": {"max_depth": 10, "contract_between_steps": true}}
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::{LogicDescription, LogicError, LogicSpec};
use crate::event::{ActionDescription, ActionError};
use crate::formula::Formula;
use crate::kripke::{EpistemicState, ModelError, StateDescription};
use crate::parse::{parse_formula, ParseError};
use crate::planner::{PlanningTask, SearchOptions, TaskError};
use crate::vocab::{Vocabulary, VocabularyError};

#[derive(Debug, Error)]
pub enum TaskFileError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed task file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("initial state: {0}")]
    Initial(#[source] ModelError),
    #[error("action `{name}`: {source}")]
    Action {
        name: String,
        #[source]
        source: ActionError,
    },
    #[error("goal: {0}")]
    Goal(#[from] ParseError),
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    pub logic: LogicDescription,
    pub initial: StateDescription,
    pub actions: Vec<ActionDescription>,
    pub goal: String,
    #[serde(default)]
    pub options: SearchOptions,
}

/// A task file with its names resolved, before the task-level checks.
#[derive(Clone, Debug)]
pub struct LoadedTask {
    pub vocab: Arc<Vocabulary>,
    pub logic: LogicSpec,
    pub initial: EpistemicState,
    pub actions: Vec<crate::event::Action>,
    pub goal: Formula,
    pub options: SearchOptions,
}

impl LoadedTask {
    pub fn into_task(self) -> Result<PlanningTask, TaskError> {
        PlanningTask::new(
            self.initial,
            self.actions,
            self.goal,
            self.logic,
            self.options,
        )
    }
}

impl TaskFile {
    pub fn from_json(text: &str) -> Result<Self, TaskFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, TaskFileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TaskFileError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("task files always serialize")
    }

    pub fn from_task(task: &PlanningTask) -> Self {
        let vocab = task.initial().vocab();
        TaskFile {
            agents: vocab.agents().iter().map(|a| a.to_string()).collect(),
            atoms: vocab.atoms().iter().map(|p| p.to_string()).collect(),
            logic: task.logic().to_description(),
            initial: task.initial().to_description(),
            actions: task.actions().iter().map(|a| a.to_description()).collect(),
            goal: task.goal().to_string(),
            options: task.options().clone(),
        }
    }

    /// Resolves names without the frame, cap and duplicate checks of [`PlanningTask::new`].
    pub fn resolve(&self) -> Result<LoadedTask, TaskFileError> {
        let vocab = Arc::new(Vocabulary::new(
            self.agents.iter().map(String::as_str),
            self.atoms.iter().map(String::as_str),
        )?);
        let logic = LogicSpec::try_from(&self.logic)?;
        let initial = self.initial.build(&vocab).map_err(TaskFileError::Initial)?;
        let actions = self
            .actions
            .iter()
            .map(|a| {
                a.build(&vocab).map_err(|source| TaskFileError::Action {
                    name: a.name.clone(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let goal = parse_formula(&self.goal, &vocab)?;
        Ok(LoadedTask {
            vocab,
            logic,
            initial,
            actions,
            goal,
            options: self.options.clone(),
        })
    }

    pub fn task(&self) -> Result<PlanningTask, TaskFileError> {
        Ok(self.resolve()?.into_task()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::bisimilar;
    use crate::encodings::CoordinatedAttack;

    #[test]
    fn round_trip() {
        let ca = CoordinatedAttack::new().unwrap();
        let task = ca
            .task(LogicSpec::C, SearchOptions::default().with_max_depth(4))
            .unwrap();
        let file = TaskFile::from_task(&task);
        let back = TaskFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let t2 = back.task().unwrap();
        assert!(bisimilar(t2.initial(), task.initial()).unwrap());
        assert_eq!(t2.goal(), task.goal());
        assert_eq!(t2.options(), task.options());
        assert_eq!(t2.actions().len(), 2);
    }

    #[test]
    fn errors_name_the_part() {
        let ca = CoordinatedAttack::new().unwrap();
        let task = ca.task(LogicSpec::C, SearchOptions::default()).unwrap();
        let mut file = TaskFile::from_task(&task);
        file.goal = "K[z] d".into();
        assert!(matches!(file.task(), Err(TaskFileError::Goal(_))));
        let mut file = TaskFile::from_task(&task);
        file.actions[0].events[0].pre = "q".into();
        assert!(matches!(file.task(), Err(TaskFileError::Action { .. })));
        assert!(matches!(
            TaskFile::from_json(r#"{"agents":[]}"#),
            Err(TaskFileError::Json(_))
        ));
    }
}
