use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of symbols a single table may hold.
pub const MAX_VARS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolClass {
    Dynamical,
    Time,
    Parameter,
    /// Coordinates of charts and target variables of coordinate changes.
    Auxiliary,
}

/// Index of a symbol inside its [`VarTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub(crate) u8);

impl Sym {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered, immutable list of named symbols.
#[derive(Debug, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    classes: Vec<SymbolClass>,
}

impl VarTable {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, SymbolClass)>) -> Result<Arc<VarTable>> {
        let mut names = Vec::new();
        let mut classes = Vec::new();
        for (name, class) in entries {
            let name = name.into();
            if names.contains(&name) {
                return Err(Error::DuplicateSymbol(name));
            }
            names.push(name);
            classes.push(class);
        }
        if names.len() > MAX_VARS {
            return Err(Error::TooManySymbols { max: MAX_VARS, got: names.len() });
        }
        Ok(Arc::new(VarTable { names, classes }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.names.iter().position(|n| n == name).map(|i| Sym(i as u8))
    }

    pub fn sym(&self, name: &str) -> Result<Sym> {
        self.lookup(name).ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s.index()]
    }

    pub fn class(&self, s: Sym) -> SymbolClass {
        self.classes[s.index()]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + '_ {
        (0..self.names.len()).map(|i| Sym(i as u8))
    }

    pub fn of_class(&self, class: SymbolClass) -> Vec<Sym> {
        self.symbols().filter(|&s| self.class(s) == class).collect()
    }

    pub fn contains(&self, s: Sym) -> bool {
        s.index() < self.names.len()
    }
}

impl fmt::Display for VarTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.names.join(", "))
    }
}

pub(crate) fn same_table(a: &Arc<VarTable>, b: &Arc<VarTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
