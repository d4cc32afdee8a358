use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a token in its [`Alphabet`].
pub type Symbol = u16;

/// Ordered finite list of distinct whitespace-free tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<String>,
    index: HashMap<String, Symbol>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        if tokens.len() > Symbol::MAX as usize {
            return Err(Error::InvalidArgument("alphabet too large".into()));
        }
        let mut index = HashMap::new();
        let mut owned = Vec::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            let t = t.as_ref();
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("bad token {t:?}")));
            }
            if index.insert(t.to_string(), i as Symbol).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate token {t:?}")));
            }
            owned.push(t.to_string());
        }
        Ok(Alphabet { tokens: owned, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.tokens.len() as Symbol
    }

    pub fn token(&self, s: Symbol) -> &str {
        &self.tokens[s as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn symbol(&self, token: &str) -> Result<Symbol> {
        self.index.get(token).copied().ok_or_else(|| Error::UnknownSymbol(token.to_string()))
    }

    /// Parses a whitespace-separated word; the empty string is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.split_whitespace().map(|t| self.symbol(t)).collect::<Result<Vec<_>>>().map(Word)
    }

    pub fn render(&self, w: &Word) -> String {
        w.0.iter().map(|&s| self.token(s)).collect::<Vec<_>>().join(" ")
    }
}

/// Finite sequence of symbols.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }

    /// Cyclic rotation: `rotate(k)` starts at position `k mod len`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Symbol at position `i` of the periodic extension `self^∞`.
    pub fn periodic_at(&self, i: usize) -> Symbol {
        self.0[i % self.0.len()]
    }

    /// Window of length `n` starting at `start` in `self^∞`.
    pub fn periodic_window(&self, start: usize, n: usize) -> Word {
        Word((start..start + n).map(|i| self.periodic_at(i)).collect())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}
