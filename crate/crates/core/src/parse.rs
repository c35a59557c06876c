//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! phi   ::= iff
//! iff   ::= imp ("<->" imp)*
//! imp   ::= or ("->" imp)?
//! or    ::= and ("|" and)*
//! and   ::= unary ("&" unary)*
//! unary ::= "~" unary | "K[" agent "]" unary | "M[" agent "]" unary
//!         | "C[{" agent ("," agent)* "}]" unary | "true" | "false" | ident | "(" phi ")"
//! ```

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::Formula;
use crate::names::{AgentId, Atom};
use crate::vocab::Vocabulary;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown agent `{name}` at {pos}")]
    UnknownAgent { name: String, pos: usize },
    #[error("unknown atom `{name}` at {pos}")]
    UnknownAtom { name: String, pos: usize },
}

pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vocab,
    };
    let f = p.iff()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vocab: &'a Vocabulary,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            message: message.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{token}`")))
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while self.eat("<->") {
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat("->") {
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat("|") {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat("&") {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.eat("~") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("K[") {
            let agent = self.agent()?;
            self.expect("]")?;
            return Ok(Formula::Knows(agent, Box::new(self.unary()?)));
        }
        if self.eat("M[") {
            let agent = self.agent()?;
            self.expect("]")?;
            return Ok(Formula::Possible(agent, Box::new(self.unary()?)));
        }
        if self.eat("C[{") {
            let mut group = BTreeSet::new();
            group.insert(self.agent()?);
            while self.eat(",") {
                group.insert(self.agent()?);
            }
            self.expect("}]")?;
            return Ok(Formula::Common(group, Box::new(self.unary()?)));
        }
        if self.eat("(") {
            let f = self.iff()?;
            self.expect(")")?;
            return Ok(f);
        }
        let start = self.pos;
        let word = self.word(|c, first| {
            c.is_ascii_alphabetic() || c == b'_' || (!first && c.is_ascii_digit())
        });
        match word {
            "" => Err(self.error("expected a formula")),
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            name => {
                if self.vocab.atom_index(name).is_none() {
                    return Err(ParseError::UnknownAtom {
                        name: name.to_owned(),
                        pos: start,
                    });
                }
                Ok(Formula::Atom(Atom::new(name)))
            }
        }
    }

    fn agent(&mut self) -> Result<AgentId, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let name = self.word(|c, _| c.is_ascii_alphanumeric() || c == b'_');
        if name.is_empty() {
            return Err(self.error("expected an agent name"));
        }
        if self.vocab.agent_index(name).is_none() {
            return Err(ParseError::UnknownAgent {
                name: name.to_owned(),
                pos: start,
            });
        }
        Ok(AgentId::new(name))
    }

    fn word(&mut self, accept: impl Fn(u8, bool) -> bool) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && accept(self.src[self.pos], self.pos == start) {
            self.pos += 1;
        }
        // Only ASCII bytes are accepted, so the slice is valid UTF-8.
        let src: &'a [u8] = self.src;
        std::str::from_utf8(&src[start..self.pos]).unwrap_or_default()
    }
}
