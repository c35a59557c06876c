use std::error::Error;
use std::fmt::Write as _;
use std::path::Path;

use epiplan_core::axioms::probe_theorems;
use epiplan_core::encodings::{
    alternation_facts, encode_machine_with, CoordinatedAttack, TwoCounterMachine,
};
use epiplan_core::planner::needs_cap;
use epiplan_core::{
    canonical_key, check_frame_property, contract, eval_state, eval_world, explain_trace,
    parse_formula, plan_existence, validate_solution, EpistemicState, LogicSpec, PlanResult,
    SearchOptions, TaskFile, Verdict,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{InputDigest, Outcome};
use crate::{Cli, Command, Demo, LogicArgs};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Plan {
            task,
            max_depth,
            max_states,
            trace,
        } => plan(task, *max_depth, *max_states, *trace),
        Command::Validate {
            task,
            plan,
            explain,
        } => validate(task, plan, *explain),
        Command::Eval {
            task,
            formula,
            world,
        } => eval(task, formula, world.as_deref()),
        Command::Contract { task } => contract_cmd(task),
        Command::CheckFrame { task, logic } => check_frame(task, logic),
        Command::Probe {
            logic,
            agents,
            trials,
            seed,
        } => probe(logic, *agents, *trials, *seed),
        Command::Demo(Demo::CoordinatedAttack { logic, max_depth }) => demo(logic, *max_depth),
        Command::EncodeMachine {
            machine,
            out,
            max_depth,
        } => encode(machine, out.as_deref(), *max_depth),
    }
}

fn read(path: &Path) -> Result<(String, InputDigest)> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let digest = InputDigest::of(&path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).map_err(|_| format!("{} is not UTF-8", path.display()))?;
    Ok((text, digest))
}

fn load(path: &Path) -> Result<(TaskFile, InputDigest)> {
    let (text, digest) = read(path)?;
    let file = TaskFile::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((file, digest))
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Solvable { .. } => 0,
        Verdict::Unsolvable => 1,
        Verdict::Unknown { .. } => 2,
    }
}

fn logic_label(logic: LogicSpec) -> String {
    logic.to_string()
}

fn stats_line(r: &PlanResult) -> String {
    let s = &r.stats;
    format!(
        "expanded {}  generated {}  duplicates {}  pruned {}  inapplicable {}  depth {}",
        s.states_expanded,
        s.states_generated,
        s.dedup_hits,
        s.pruned_by_axiom,
        s.not_applicable,
        s.max_depth
    )
}

fn plan_text(plan: &[String]) -> String {
    if plan.is_empty() {
        "(empty)".to_owned()
    } else {
        plan.join(", ")
    }
}

fn plan(
    path: &Path,
    max_depth: Option<usize>,
    max_states: Option<usize>,
    trace: bool,
) -> Result<Outcome> {
    let (mut file, digest) = load(path)?;
    if max_depth.is_some() {
        file.options.max_depth = max_depth;
    }
    if max_states.is_some() {
        file.options.max_states = max_states;
    }
    file.options.trace |= trace;
    let task = file.task()?;
    let result = plan_existence(&task);

    let mut human = String::new();
    writeln!(human, "task      {}", path.display())?;
    writeln!(human, "logic     {}", logic_label(task.logic()))?;
    writeln!(human, "goal      {}", task.goal())?;
    writeln!(human, "verdict   {}", result.verdict.label())?;
    match &result.verdict {
        Verdict::Solvable { plan } => writeln!(human, "plan      {}", plan_text(plan))?,
        Verdict::Unknown { reason } => writeln!(human, "reason    {reason}")?,
        Verdict::Unsolvable => {}
    }
    writeln!(human, "search    {}", stats_line(&result))?;
    if let Some(nodes) = &result.trace {
        writeln!(human, "trace")?;
        for n in nodes {
            writeln!(
                human,
                "  {:>3}  {:>4} worlds  {}  [{}]",
                n.depth,
                n.worlds,
                n.key,
                n.plan.join(", ")
            )?;
        }
    }

    let mut value = to_value(&result);
    value["logic"] = to_value(&task.logic().to_description());
    value["goal"] = json!(task.goal().to_string());
    let mut out = Outcome::new(verdict_code(&result.verdict), human, value);
    out.inputs.push(digest);
    Ok(out)
}

fn validate(path: &Path, plan: &[String], explain: bool) -> Result<Outcome> {
    let (file, digest) = load(path)?;
    let task = file.task()?;
    let plan: Vec<&str> = plan
        .iter()
        .map(String::as_str)
        .filter(|s| !s.is_empty())
        .collect();
    let failure = validate_solution(&task, &plan)?;
    let trace = if explain {
        Some(explain_trace(&task, &plan)?)
    } else {
        None
    };

    let mut human = String::new();
    writeln!(human, "task      {}", path.display())?;
    writeln!(human, "logic     {}", logic_label(task.logic()))?;
    writeln!(
        human,
        "plan      {}",
        plan_text(&plan.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    )?;
    match (&trace, &failure) {
        // the trace ends with the failure itself
        (Some(t), _) => write!(human, "{t}")?,
        (None, None) => writeln!(human, "result    valid")?,
        (None, Some(f)) => writeln!(human, "result    invalid: {f}")?,
    }

    let mut value = json!({
        "logic": task.logic().to_description(),
        "plan": plan,
        "valid": failure.is_none(),
    });
    if let Some(f) = &failure {
        value["failure"] = to_value(f);
    }
    if let Some(t) = &trace {
        value["trace"] = to_value(t);
    }
    let mut out = Outcome::new(u8::from(failure.is_some()), human, value);
    out.inputs.push(digest);
    Ok(out)
}

fn eval(path: &Path, formula: &str, world: Option<&str>) -> Result<Outcome> {
    let (file, digest) = load(path)?;
    let loaded = file.resolve()?;
    let f = parse_formula(formula, &loaded.vocab).map_err(|e| format!("formula: {e}"))?;
    let (value, at) = match world {
        Some(w) => (
            eval_world(loaded.initial.model(), w, &f)?,
            vec![w.to_owned()],
        ),
        None => (
            eval_state(&loaded.initial, &f)?,
            loaded
                .initial
                .designated_names()
                .into_iter()
                .map(str::to_owned)
                .collect(),
        ),
    };
    let human = format!(
        "formula   {f}\nat        {{{}}}\nvalue     {value}\n",
        at.join(", ")
    );
    let result = json!({ "formula": f.to_string(), "at": at, "value": value });
    let mut out = Outcome::new(u8::from(!value), human, result);
    out.inputs.push(digest);
    Ok(out)
}

fn contract_cmd(path: &Path) -> Result<Outcome> {
    let (file, digest) = load(path)?;
    let loaded = file.resolve()?;
    let c = contract(&loaded.initial);
    let key = canonical_key(&c).to_string();
    let human = format!(
        "worlds    {} -> {}\nkey       {key}\n{c}",
        loaded.initial.world_count(),
        c.world_count()
    );
    let result = json!({
        "worlds_before": loaded.initial.world_count(),
        "worlds_after": c.world_count(),
        "key": key,
        "state": c.to_description(),
    });
    let mut out = Outcome::new(0, human, result);
    out.inputs.push(digest);
    Ok(out)
}

fn logic_from(args: &LogicArgs) -> Result<Option<LogicSpec>> {
    match &args.logic {
        Some(name) => Ok(Some(LogicSpec::parse(name, args.b, args.l)?)),
        None if args.b.is_some() || args.l.is_some() => Err("--b and --l need --logic".into()),
        None => Ok(None),
    }
}

fn check_frame(path: &Path, args: &LogicArgs) -> Result<Outcome> {
    let (file, digest) = load(path)?;
    let loaded = file.resolve()?;
    let logic = logic_from(args)?.unwrap_or(loaded.logic);
    logic.check_agents(loaded.vocab.agent_count())?;

    let mut rows = vec![(
        "initial".to_owned(),
        check_frame_property(loaded.initial.model(), logic),
    )];
    for a in &loaded.actions {
        rows.push((
            format!("action {}", a.name()),
            check_frame_property(a.model(), logic),
        ));
    }
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let mut human = format!("logic     {}\n", logic_label(logic));
    for (name, v) in &rows {
        match v {
            None => writeln!(human, "{name:width$}  ok")?,
            Some(v) => writeln!(human, "{name:width$}  {v}")?,
        }
    }
    let failed = rows.iter().any(|(_, v)| v.is_some());
    let result = json!({
        "logic": logic.to_description(),
        "checks": rows
            .iter()
            .map(|(name, v)| json!({ "subject": name, "ok": v.is_none(), "violation": v }))
            .collect::<Vec<_>>(),
    });
    let mut out = Outcome::new(u8::from(failed), human, result);
    out.inputs.push(digest);
    Ok(out)
}

fn probe(args: &LogicArgs, agents: usize, trials: u64, seed: u64) -> Result<Outcome> {
    let logic = logic_from(args)?.unwrap_or(LogicSpec::C);
    logic.check_agents(agents)?;
    if agents == 0 {
        return Err("--agents must be positive".into());
    }
    let report = probe_theorems(logic, agents, trials, seed);

    let mut human = format!(
        "logic     {}\nagents    {agents}\ntrials    {trials} (seed {seed}), {} states, {} discarded\n",
        logic_label(logic),
        report.states,
        report.discarded
    );
    writeln!(
        human,
        "{:<18} {:>8} {:>8} {:>8}",
        "theorem", "checks", "skipped", "failed"
    )?;
    for (p, checks) in &report.checks {
        let name = to_value(p).as_str().unwrap_or_default().to_owned();
        let skipped = report.skipped.get(p).copied().unwrap_or(0);
        writeln!(
            human,
            "{name:<18} {checks:>8} {skipped:>8} {:>8}",
            report.count(*p)
        )?;
    }
    if let Some(c) = report.counterexamples.first() {
        let trial = c.trial.map(|t| format!("trial {t}, ")).unwrap_or_default();
        writeln!(
            human,
            "first counterexample: {trial}world {}, {}",
            c.world, c.formula
        )?;
    }
    let mut out = Outcome::new(u8::from(!report.is_clean()), human, to_value(&report));
    out.seed = Some(seed);
    Ok(out)
}

fn demo(args: &LogicArgs, max_depth: usize) -> Result<Outcome> {
    let ca = CoordinatedAttack::new()?;
    let logics = match logic_from(args)? {
        Some(l) => vec![l],
        None => vec![
            LogicSpec::C,
            LogicSpec::cb(2)?,
            LogicSpec::cb(3)?,
            LogicSpec::cb(4)?,
            LogicSpec::S5,
        ],
    };
    let single = logics.len() == 1;

    let mut human = String::new();
    let mut states = serde_json::Map::new();
    for k in 0..3 {
        let s = ca.state(k);
        describe_state(&mut human, &format!("s{k}"), &s)?;
        let (even, odd) = alternation_facts(k);
        writeln!(
            human,
            "  {}: {}   {}: {}",
            even,
            eval_state(&s, &even)?,
            odd,
            eval_state(&s, &odd)?
        )?;
        states.insert(format!("s{k}"), to_value(&s.to_description()));
    }

    writeln!(
        human,
        "\n{:<10} {:<11} {:<20} search",
        "logic", "verdict", "plan"
    )?;
    let mut runs = Vec::new();
    let mut code = 0;
    for logic in logics {
        let options = if needs_cap(logic, 2) {
            SearchOptions::default().with_max_depth(max_depth)
        } else {
            SearchOptions::default()
        };
        let r = plan_existence(&ca.task(logic, options)?);
        let plan = r
            .verdict
            .plan()
            .map(plan_text)
            .unwrap_or_else(|| "-".to_owned());
        writeln!(
            human,
            "{:<10} {:<11} {:<20} {}",
            logic_label(logic),
            r.verdict.label(),
            plan,
            stats_line(&r)
        )?;
        if single {
            code = verdict_code(&r.verdict);
        }
        let mut v = to_value(&r);
        v["logic"] = to_value(&logic.to_description());
        runs.push(v);
    }
    let result = json!({ "states": states, "runs": runs });
    Ok(Outcome::new(code, human, result))
}

fn describe_state(out: &mut String, label: &str, s: &EpistemicState) -> Result<()> {
    writeln!(
        out,
        "{label} ({} worlds, key {})",
        s.world_count(),
        canonical_key(s)
    )?;
    for line in s.to_string().lines() {
        writeln!(out, "  {line}")?;
    }
    Ok(())
}

fn encode(path: &Path, out_path: Option<&Path>, max_depth: usize) -> Result<Outcome> {
    let (text, digest) = read(path)?;
    let machine: TwoCounterMachine =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let task = encode_machine_with(&machine, SearchOptions::default().with_max_depth(max_depth))?;
    let file = TaskFile::from_task(&task);
    let text = file.to_json();

    let mut human = String::new();
    let mut result = json!({
        "machine": machine.to_string(),
        "actions": task.actions().len(),
        "worlds": task.initial().world_count(),
    });
    match out_path {
        Some(p) => {
            std::fs::write(p, format!("{text}\n"))
                .map_err(|e| format!("cannot write {}: {e}", p.display()))?;
            writeln!(human, "machine   {machine}")?;
            writeln!(human, "actions   {}", task.actions().len())?;
            writeln!(human, "wrote     {}", p.display())?;
            result["out"] = json!(p.display().to_string());
        }
        None => {
            writeln!(human, "{text}")?;
            result["task"] = to_value(&file);
        }
    }
    let mut out = Outcome::new(0, human, result);
    out.inputs.push(digest);
    Ok(out)
}
