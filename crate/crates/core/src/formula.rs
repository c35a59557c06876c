//! The epistemic language with common knowledge: AST, constructors and printer.

use std::collections::BTreeSet;
use std::fmt;

use crate::names::{AgentId, Atom};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Knows(AgentId, Box<Formula>),
    Possible(AgentId, Box<Formula>),
    Common(BTreeSet<AgentId>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<Atom>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn knows(agent: impl Into<AgentId>, f: Formula) -> Self {
        Formula::Knows(agent.into(), Box::new(f))
    }

    pub fn possible(agent: impl Into<AgentId>, f: Formula) -> Self {
        Formula::Possible(agent.into(), Box::new(f))
    }

    pub fn common<I, A>(group: I, f: Formula) -> Self
    where
        I: IntoIterator<Item = A>,
        A: Into<AgentId>,
    {
        Formula::Common(group.into_iter().map(Into::into).collect(), Box::new(f))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// `K[v1] ... K[vk] f`, outermost box first.
    pub fn boxes<'a, I>(agents: I, f: Formula) -> Self
    where
        I: IntoIterator<Item = &'a AgentId>,
        I::IntoIter: DoubleEndedIterator,
    {
        agents
            .into_iter()
            .rev()
            .fold(f, |acc, a| Formula::knows(a.clone(), acc))
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Knows(_, f) | Formula::Possible(_, f) | Formula::Common(_, f) => {
                1 + f.modal_depth()
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(f)
            | Formula::Knows(_, f)
            | Formula::Possible(_, f)
            | Formula::Common(_, f) => 1 + f.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            _ => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let wrap = self.precedence() < ctx;
        if wrap {
            f.write_str("(")?;
        }
        match self {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Atom(a) => write!(f, "{a}")?,
            Formula::Not(x) => {
                f.write_str("~")?;
                x.write_prec(f, 5)?;
            }
            Formula::And(a, b) => {
                a.write_prec(f, 4)?;
                f.write_str(" & ")?;
                b.write_prec(f, 5)?;
            }
            Formula::Or(a, b) => {
                a.write_prec(f, 3)?;
                f.write_str(" | ")?;
                b.write_prec(f, 4)?;
            }
            Formula::Implies(a, b) => {
                a.write_prec(f, 3)?;
                f.write_str(" -> ")?;
                b.write_prec(f, 2)?;
            }
            Formula::Iff(a, b) => {
                a.write_prec(f, 1)?;
                f.write_str(" <-> ")?;
                b.write_prec(f, 2)?;
            }
            Formula::Knows(i, x) => {
                write!(f, "K[{i}] ")?;
                x.write_prec(f, 5)?;
            }
            Formula::Possible(i, x) => {
                write!(f, "M[{i}] ")?;
                x.write_prec(f, 5)?;
            }
            Formula::Common(g, x) => {
                f.write_str("C[{")?;
                for (n, a) in g.iter().enumerate() {
                    if n > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("}] ")?;
                x.write_prec(f, 5)?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
