//! UFNIA encoding of constraint systems and an SMT-LIB 2 solver client.

pub mod sexp;
mod solver;
mod translate;

use std::fmt::Write;

pub use solver::{Solver, SolverError, Status, Verdict};
pub use translate::{conj, hole_symbols, shape_dims, shape_rank, ShapeTerm, TranslateConfig, Translator};

/// Quote `name` as an SMT-LIB symbol when it is not a simple symbol.
pub fn sym(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name.replace('|', "_"))
    }
}

/// What an assertion stands for, so that unsat cores can be mapped back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tag {
    /// Index into the caller's constraint list.
    Constraint(usize),
    PathCondition,
    /// Definition of an auxiliary symbol or a declaration axiom.
    Definition,
    /// Clause added while searching for hole values.
    Search,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedAssertion {
    pub name: String,
    pub formula: String,
    pub tag: Tag,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SmtScript {
    pub decls: Vec<String>,
    pub assertions: Vec<NamedAssertion>,
}

impl SmtScript {
    /// Collect the translator's declarations and definitions followed by
    /// the given tagged formulas, naming assertions `a0`, `a1`, ...
    pub fn build(tr: &Translator, items: Vec<(Tag, String)>) -> SmtScript {
        let mut script = SmtScript { decls: tr.decls.values().cloned().collect(), assertions: vec![] };
        for d in &tr.definitions {
            script.push(Tag::Definition, d.clone());
        }
        for (tag, f) in items {
            script.push(tag, f);
        }
        script
    }

    pub fn push(&mut self, tag: Tag, formula: String) -> String {
        let name = format!("a{}", self.assertions.len());
        self.assertions.push(NamedAssertion { name: name.clone(), formula, tag });
        name
    }

    pub fn tag_of(&self, name: &str) -> Option<&Tag> {
        self.assertions.iter().find(|a| a.name == name).map(|a| &a.tag)
    }

    /// The script without any commands after the assertions.
    pub fn to_smtlib(&self) -> String {
        let mut out = String::new();
        out.push_str("(set-option :produce-unsat-cores true)\n(set-option :produce-models true)\n(set-logic UFNIA)\n");
        for d in &self.decls {
            writeln!(out, "{d}").unwrap();
        }
        for a in &self.assertions {
            writeln!(out, "(assert (! {} :named {}))", a.formula, a.name).unwrap();
        }
        out
    }

    /// Check that every `dims` application sits in an assertion that also
    /// mentions the matching rank, i.e. is guarded by an index bound.
    pub fn lint(&self) -> Result<(), String> {
        for a in &self.assertions {
            let mut rest = a.formula.as_str();
            while let Some(i) = rest.find("_dims") {
                let head = &rest[..i];
                let start = head.rfind(['(', ' ', '|']).map_or(0, |p| p + 1);
                let base = &head[start..];
                let rank = format!("{base}_rank");
                if !a.formula.contains(&rank) {
                    return Err(format!("assertion {} applies {base}_dims without a bound on {rank}", a.name));
                }
                rest = &rest[i + 5..];
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
