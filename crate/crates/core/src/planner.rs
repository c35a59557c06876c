//! Planning tasks, solution checking and breadth-first plan existence.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::{check_frame_property, FrameViolation, LogicError, LogicSpec};
use crate::bisim::{canonical_key, canonical_key_contracted, contract};
use crate::eval::{check_names, eval_state, EvalError};
use crate::event::{applicability_witnesses, applicable, product_update, Action, UpdateError};
use crate::formula::Formula;
use crate::kripke::EpistemicState;
use crate::names::{EventId, WorldId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("the initial state is not a {logic}-state: {violation}")]
    InitialNotL {
        logic: LogicSpec,
        violation: FrameViolation,
    },
    #[error("action `{action}` is not a {logic}-action: {violation}")]
    ActionNotL {
        action: String,
        logic: LogicSpec,
        violation: FrameViolation,
    },
    #[error("duplicate action name `{0}`")]
    DuplicateAction(String),
    #[error("action `{0}` uses a different agent/atom universe than the initial state")]
    UniverseMismatch(String),
    #[error("goal: {0}")]
    Goal(EvalError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("plan existence under {0} is undecidable; set max_depth or max_states")]
    MissingCap(LogicSpec),
    #[error("max_depth and max_states must be positive")]
    ZeroCap,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error(transparent)]
    Update(#[from] UpdateError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_states: Option<usize>,
    pub contract_between_steps: bool,
    /// Record every generated state in the result.
    pub trace: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_depth: None,
            max_states: None,
            contract_between_steps: true,
            trace: false,
        }
    }
}

impl SearchOptions {
    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }

    pub fn with_max_states(mut self, states: usize) -> Self {
        self.max_states = Some(states);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    fn capped(&self) -> bool {
        self.max_depth.is_some() || self.max_states.is_some()
    }
}

/// A validated planning task: every state and action satisfies the declared logic.
#[derive(Clone, Debug)]
pub struct PlanningTask {
    initial: EpistemicState,
    actions: Vec<Action>,
    goal: Formula,
    logic: LogicSpec,
    options: SearchOptions,
}

/// Whether a search under `logic` with `agents` agents needs a cap to be sure to stop.
pub fn needs_cap(logic: LogicSpec, agents: usize) -> bool {
    match logic {
        LogicSpec::S5 => true,
        LogicSpec::Cb(_) => agents > 2,
        LogicSpec::C | LogicSpec::WCl(_) => false,
    }
}

impl PlanningTask {
    pub fn new(
        initial: EpistemicState,
        actions: Vec<Action>,
        goal: Formula,
        logic: LogicSpec,
        options: SearchOptions,
    ) -> Result<Self, TaskError> {
        let vocab = initial.vocab();
        logic.check_agents(vocab.agent_count())?;
        if let Some(violation) = check_frame_property(initial.model(), logic) {
            return Err(TaskError::InitialNotL { logic, violation });
        }
        let mut seen = HashSet::new();
        for a in &actions {
            if !seen.insert(a.name()) {
                return Err(TaskError::DuplicateAction(a.name().to_owned()));
            }
            if a.model().vocab() != vocab {
                return Err(TaskError::UniverseMismatch(a.name().to_owned()));
            }
            if let Some(violation) = check_frame_property(a.model(), logic) {
                return Err(TaskError::ActionNotL {
                    action: a.name().to_owned(),
                    logic,
                    violation,
                });
            }
        }
        check_names(&goal, vocab).map_err(TaskError::Goal)?;
        if options.max_depth == Some(0) || options.max_states == Some(0) {
            return Err(TaskError::ZeroCap);
        }
        if needs_cap(logic, vocab.agent_count()) && !options.capped() {
            return Err(TaskError::MissingCap(logic));
        }
        Ok(PlanningTask {
            initial,
            actions,
            goal,
            logic,
            options,
        })
    }

    pub fn initial(&self) -> &EpistemicState {
        &self.initial
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, name: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.name() == name)
    }

    pub fn goal(&self) -> &Formula {
        &self.goal
    }

    pub fn logic(&self) -> LogicSpec {
        self.logic
    }

    pub fn options(&self) -> &SearchOptions {
        &self.options
    }

    /// Replaces the search options, re-checking the cap requirement.
    pub fn with_options(mut self, options: SearchOptions) -> Result<Self, TaskError> {
        if options.max_depth == Some(0) || options.max_states == Some(0) {
            return Err(TaskError::ZeroCap);
        }
        if needs_cap(self.logic, self.initial.vocab().agent_count()) && !options.capped() {
            return Err(TaskError::MissingCap(self.logic));
        }
        self.options = options;
        Ok(self)
    }

    fn resolve(&self, plan: &[impl AsRef<str>]) -> Result<Vec<&Action>, PlanError> {
        plan.iter()
            .map(|n| {
                self.action(n.as_ref())
                    .ok_or_else(|| PlanError::UnknownAction(n.as_ref().to_owned()))
            })
            .collect()
    }

    fn start(&self) -> EpistemicState {
        if self.options.contract_between_steps {
            contract(&self.initial)
        } else {
            self.initial.clone()
        }
    }

    fn settle(&self, s: EpistemicState) -> EpistemicState {
        if self.options.contract_between_steps {
            contract(&s)
        } else {
            s
        }
    }

    fn goal_holds(&self, s: &EpistemicState) -> bool {
        eval_state(s, &self.goal).expect("goal names checked at construction")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Solvable { plan: Vec<String> },
    Unsolvable,
    Unknown { reason: String },
}

impl Verdict {
    pub fn plan(&self) -> Option<&[String]> {
        match self {
            Verdict::Solvable { plan } => Some(plan),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Solvable { .. } => "solvable",
            Verdict::Unsolvable => "unsolvable",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Solvable { plan } if plan.is_empty() => {
                f.write_str("solvable with the empty plan")
            }
            Verdict::Solvable { plan } => write!(f, "solvable: {}", plan.join(", ")),
            Verdict::Unsolvable => f.write_str("unsolvable"),
            Verdict::Unknown { reason } => write!(f, "unknown ({reason})"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub states_expanded: usize,
    /// Distinct states put on the frontier, the initial one included.
    pub states_generated: usize,
    pub dedup_hits: usize,
    pub pruned_by_axiom: usize,
    pub not_applicable: usize,
    /// Length of the longest plan reaching a kept state.
    pub max_depth: usize,
}

/// A state generated during the search.
#[derive(Clone, Debug, Serialize)]
pub struct TraceNode {
    pub depth: usize,
    pub plan: Vec<String>,
    pub key: String,
    pub worlds: usize,
    #[serde(skip)]
    pub state: EpistemicState,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanResult {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub stats: SearchStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceNode>>,
}

struct Node {
    state: EpistemicState,
    plan: Vec<usize>,
}

/// Breadth-first search over contracted states, deduplicated by canonical key.
///
/// Successors that are not states of the task's logic are dropped. The first goal state found
/// ends the search, so plans are shortest and, among those, first in action order.
pub fn plan_existence(task: &PlanningTask) -> PlanResult {
    let opts = &task.options;
    let names = |plan: &[usize]| -> Vec<String> {
        plan.iter()
            .map(|&i| task.actions[i].name().to_owned())
            .collect()
    };
    let key_of = |s: &EpistemicState| {
        if opts.contract_between_steps {
            canonical_key_contracted(s)
        } else {
            canonical_key(s)
        }
    };
    let mut stats = SearchStats::default();
    let mut trace = opts.trace.then(Vec::new);
    let record =
        |trace: &mut Option<Vec<TraceNode>>, s: &EpistemicState, plan: &[usize], key: String| {
            if let Some(t) = trace {
                t.push(TraceNode {
                    depth: plan.len(),
                    plan: names(plan),
                    key,
                    worlds: s.world_count(),
                    state: s.clone(),
                });
            }
        };
    let done = |verdict: Verdict, stats: SearchStats, trace: Option<Vec<TraceNode>>| PlanResult {
        verdict,
        stats,
        trace,
    };

    let s0 = task.start();
    let k0 = key_of(&s0);
    record(&mut trace, &s0, &[], k0.to_string());
    stats.states_generated = 1;
    if task.goal_holds(&s0) {
        return done(Verdict::Solvable { plan: Vec::new() }, stats, trace);
    }
    let mut visited = HashSet::from([k0]);
    let mut frontier = VecDeque::from([Node {
        state: s0,
        plan: Vec::new(),
    }]);
    let mut cap: Option<String> = None;

    while let Some(node) = frontier.pop_front() {
        if let Some(limit) = opts.max_depth {
            if node.plan.len() >= limit {
                cap.get_or_insert_with(|| format!("max_depth {limit} reached"));
                continue;
            }
        }
        if let Some(limit) = opts.max_states {
            if stats.states_expanded >= limit {
                cap = Some(format!("max_states {limit} reached"));
                break;
            }
        }
        stats.states_expanded += 1;
        for (i, a) in task.actions.iter().enumerate() {
            if !applicable(&node.state, a).expect("universes checked at construction") {
                stats.not_applicable += 1;
                continue;
            }
            let next = product_update(&node.state, a).expect("applicable");
            let next = task.settle(next);
            if check_frame_property(next.model(), task.logic).is_some() {
                stats.pruned_by_axiom += 1;
                continue;
            }
            let key = key_of(&next);
            let key_text = key.to_string();
            if !visited.insert(key) {
                stats.dedup_hits += 1;
                continue;
            }
            stats.states_generated += 1;
            stats.max_depth = stats.max_depth.max(node.plan.len() + 1);
            let mut plan = node.plan.clone();
            plan.push(i);
            record(&mut trace, &next, &plan, key_text);
            if task.goal_holds(&next) {
                return done(Verdict::Solvable { plan: names(&plan) }, stats, trace);
            }
            frontier.push_back(Node { state: next, plan });
        }
    }
    let verdict = match cap {
        Some(reason) => Verdict::Unknown { reason },
        None => Verdict::Unsolvable,
    };
    done(verdict, stats, trace)
}

/// Why a plan is not a solution; steps count from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum StepFailure {
    NotApplicable {
        step: usize,
        action: String,
    },
    NotLState {
        step: usize,
        action: String,
        violation: FrameViolation,
    },
    GoalNotSatisfied,
}

impl fmt::Display for StepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepFailure::NotApplicable { step, action } => {
                write!(f, "step {step}: `{action}` is not applicable")
            }
            StepFailure::NotLState {
                step,
                action,
                violation,
            } => {
                write!(
                    f,
                    "step {step}: `{action}` leads outside the logic: {violation}"
                )
            }
            StepFailure::GoalNotSatisfied => {
                f.write_str("the final state does not satisfy the goal")
            }
        }
    }
}

/// Checks a plan step by step; `Ok(None)` means it is a solution.
pub fn validate_solution(
    task: &PlanningTask,
    plan: &[impl AsRef<str>],
) -> Result<Option<StepFailure>, PlanError> {
    let actions = task.resolve(plan)?;
    let mut s = task.start();
    for (i, a) in actions.into_iter().enumerate() {
        let step = i + 1;
        if !applicable(&s, a)? {
            return Ok(Some(StepFailure::NotApplicable {
                step,
                action: a.name().to_owned(),
            }));
        }
        s = task.settle(product_update(&s, a)?);
        if let Some(violation) = check_frame_property(s.model(), task.logic) {
            return Ok(Some(StepFailure::NotLState {
                step,
                action: a.name().to_owned(),
                violation,
            }));
        }
    }
    if task.goal_holds(&s) {
        Ok(None)
    } else {
        Ok(Some(StepFailure::GoalNotSatisfied))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub step: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    /// For each designated world of the previous state, the designated event that fires there.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<(WorldId, Option<EventId>)>,
    pub applicable: bool,
    pub worlds: usize,
    pub designated: Vec<String>,
    pub key: String,
    /// Frame check on the raw product, before contraction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_violation: Option<FrameViolation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<FrameViolation>,
    pub goal: bool,
    #[serde(skip)]
    pub state: Option<EpistemicState>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub logic: String,
    pub steps: Vec<TraceStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<StepFailure>,
}

/// Step-by-step account of a plan; stops at the first failing step.
pub fn explain_trace(
    task: &PlanningTask,
    plan: &[impl AsRef<str>],
) -> Result<TraceReport, PlanError> {
    let actions = task.resolve(plan)?;
    let failure = validate_solution(task, plan)?;
    let describe = |step, action: Option<&Action>, s: &EpistemicState| TraceStep {
        step,
        action: action.map(|a| a.name().to_owned()),
        witnesses: Vec::new(),
        applicable: true,
        worlds: s.world_count(),
        designated: s
            .designated_names()
            .into_iter()
            .map(str::to_owned)
            .collect(),
        key: canonical_key(s).to_string(),
        raw_violation: None,
        violation: check_frame_property(s.model(), task.logic),
        goal: task.goal_holds(s),
        state: Some(s.clone()),
    };
    let mut s = task.start();
    let mut steps = vec![describe(0, None, &s)];
    for (i, a) in actions.into_iter().enumerate() {
        let witnesses = applicability_witnesses(&s, a)?;
        if !applicable(&s, a)? {
            steps.push(TraceStep {
                witnesses,
                applicable: false,
                worlds: 0,
                designated: Vec::new(),
                key: String::new(),
                violation: None,
                goal: false,
                state: None,
                ..describe(i + 1, Some(a), &s)
            });
            break;
        }
        let raw = product_update(&s, a)?;
        let raw_violation = check_frame_property(raw.model(), task.logic);
        s = task.settle(raw);
        let step = TraceStep {
            witnesses,
            raw_violation,
            ..describe(i + 1, Some(a), &s)
        };
        let stop = step.violation.is_some();
        steps.push(step);
        if stop {
            break;
        }
    }
    Ok(TraceReport {
        logic: task.logic.to_string(),
        steps,
        failure,
    })
}

impl fmt::Display for TraceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "logic {}", self.logic)?;
        for s in &self.steps {
            match &s.action {
                None => write!(f, "step 0: initial")?,
                Some(a) => write!(f, "step {}: {a}", s.step)?,
            }
            if !s.witnesses.is_empty() {
                let w: Vec<String> = s
                    .witnesses
                    .iter()
                    .map(|(w, e)| match e {
                        Some(e) => format!("{w}<-{e}"),
                        None => format!("{w}<-none"),
                    })
                    .collect();
                write!(f, " [{}]", w.join(" "))?;
            }
            if !s.applicable {
                writeln!(f, " not applicable")?;
                continue;
            }
            writeln!(
                f,
                " -> {} worlds, designated {{{}}}, key {}, goal {}",
                s.worlds,
                s.designated.join(","),
                s.key,
                if s.goal { "holds" } else { "fails" }
            )?;
            if let Some(v) = &s.raw_violation {
                writeln!(f, "  product: {v}")?;
            }
            if let Some(v) = &s.violation {
                writeln!(f, "  pruned: {v}")?;
            }
        }
        match &self.failure {
            None => writeln!(f, "valid solution"),
            Some(e) => writeln!(f, "invalid: {e}"),
        }
    }
}
