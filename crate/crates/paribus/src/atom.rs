//! Atomic propositions and agent identifiers.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prefix of auxiliary atoms introduced by the structural S5 translation.
pub const AUX_PREFIX: &str = "aux_";
/// Prefix of action-digit atoms introduced by the STIT-to-PECP translation.
pub const REP_PREFIX: &str = "rep_";

/// A propositional atom: `[a-z][a-zA-Z0-9_]*`.
///
/// Names starting with `rep_` or `aux_` are reserved for atoms minted by the
/// translation layer; parsing accepts them (translation output must re-parse),
/// but translations reject inputs that already use them.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Atom(String);

/// Error raised for ill-formed atom names.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid atom name {0:?}: expected [a-z][a-zA-Z0-9_]*")]
pub struct BadAtomName(pub String);

impl Atom {
    /// Validates and wraps an atom name.
    pub fn new(name: &str) -> Result<Atom, BadAtomName> {
        if Self::is_valid_name(name) {
            Ok(Atom(name.to_string()))
        } else {
            Err(BadAtomName(name.to_string()))
        }
    }

    /// True when `name` matches `[a-z][a-zA-Z0-9_]*`.
    pub fn is_valid_name(name: &str) -> bool {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    /// The atom's name.
    pub fn name(&self) -> &str {
        &self.0
    }

    /// True when the name uses a prefix reserved for translation-minted atoms.
    pub fn is_reserved(&self) -> bool {
        self.0.starts_with(AUX_PREFIX) || self.0.starts_with(REP_PREFIX)
    }

    /// The `k`-th auxiliary atom (`aux_k`).
    pub fn aux(k: usize) -> Atom {
        Atom(format!("{AUX_PREFIX}{k}"))
    }

    /// Action-digit atom `rep_<agent>_<digit>` (digits are 1-based).
    pub fn rep(agent: AgentId, digit: usize) -> Atom {
        Atom(format!("{REP_PREFIX}{}_{digit}", agent.0))
    }
}

impl TryFrom<String> for Atom {
    type Error = BadAtomName;
    fn try_from(s: String) -> Result<Atom, BadAtomName> {
        Atom::new(&s)
    }
}

impl From<Atom> for String {
    fn from(a: Atom) -> String {
        a.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Atom({})", self.0)
    }
}

/// Agent identifier: a positive integer (agents are numbered `1..=n`).
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
pub struct AgentId(pub u32);

impl AgentId {
    /// Numeric value.
    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
