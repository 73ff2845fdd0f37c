use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// What a registry symbol stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Coordinate,
    Momentum,
    Time,
    Parameter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub role: Role,
    /// Index of the canonical pair this symbol belongs to (coordinates and momenta only).
    pub pair: Option<usize>,
}

/// An immutable, ordered list of symbols. The order fixes the monomial order
/// and the layout of every exponent vector built over the registry.
#[derive(Debug, PartialEq, Eq)]
pub struct VarRegistry {
    symbols: Vec<Symbol>,
    index: HashMap<String, usize>,
    pairs: Vec<(usize, usize)>,
}

impl VarRegistry {
    pub fn builder() -> RegistryBuilder {
        RegistryBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, idx: usize) -> &Symbol {
        &self.symbols[idx]
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.symbols[idx].name
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Canonical pairs as (coordinate index, momentum index), in pair order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Coordinates and momenta in registry order.
    pub fn dynamical(&self) -> Vec<usize> {
        self.indices_with(|r| matches!(r, Role::Coordinate | Role::Momentum))
    }

    pub fn params(&self) -> Vec<usize> {
        self.indices_with(|r| r == Role::Parameter)
    }

    pub fn time(&self) -> Option<usize> {
        self.symbols.iter().position(|s| s.role == Role::Time)
    }

    fn indices_with(&self, f: impl Fn(Role) -> bool) -> Vec<usize> {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| f(s.role))
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for VarRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.symbols.iter().map(|s| s.name.as_str()).collect();
        write!(f, "[{}]", names.join(", "))
    }
}

#[derive(Debug, Default)]
pub struct RegistryBuilder {
    symbols: Vec<Symbol>,
    pairs: Vec<(String, String)>,
}

impl RegistryBuilder {
    /// Adds a canonical pair; the coordinate is listed before its momentum.
    pub fn pair(mut self, coordinate: &str, momentum: &str) -> Self {
        let k = self.pairs.len();
        self.symbols.push(Symbol {
            name: coordinate.to_string(),
            role: Role::Coordinate,
            pair: Some(k),
        });
        self.symbols.push(Symbol {
            name: momentum.to_string(),
            role: Role::Momentum,
            pair: Some(k),
        });
        self.pairs
            .push((coordinate.to_string(), momentum.to_string()));
        self
    }

    pub fn time(mut self, name: &str) -> Self {
        self.symbols.push(Symbol {
            name: name.to_string(),
            role: Role::Time,
            pair: None,
        });
        self
    }

    pub fn param(mut self, name: &str) -> Self {
        self.symbols.push(Symbol {
            name: name.to_string(),
            role: Role::Parameter,
            pair: None,
        });
        self
    }

    pub fn params<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        for n in names {
            self = self.param(n);
        }
        self
    }

    pub fn build(self) -> Result<Arc<VarRegistry>> {
        let mut index = HashMap::new();
        for (i, s) in self.symbols.iter().enumerate() {
            if index.insert(s.name.clone(), i).is_some() {
                return Err(Error::DuplicateSymbol(s.name.clone()));
            }
        }
        if self.symbols.iter().filter(|s| s.role == Role::Time).count() > 1 {
            return Err(Error::InvalidInput("more than one time symbol".into()));
        }
        let pairs = self
            .pairs
            .iter()
            .map(|(q, p)| (index[q], index[p]))
            .collect();
        Ok(Arc::new(VarRegistry {
            symbols: self.symbols,
            index,
            pairs,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_and_roles() {
        let reg = VarRegistry::builder()
            .pair("q1", "p1")
            .pair("q2", "p2")
            .time("t")
            .params(["alpha0", "alpha1"])
            .build()
            .unwrap();
        assert_eq!(reg.len(), 7);
        assert_eq!(reg.pairs(), &[(0, 1), (2, 3)]);
        assert_eq!(reg.dynamical(), vec![0, 1, 2, 3]);
        assert_eq!(reg.time(), Some(4));
        assert_eq!(reg.params(), vec![5, 6]);
        assert!(matches!(reg.index_of("q9"), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn duplicate_rejected() {
        let err = VarRegistry::builder().pair("q1", "p1").param("q1").build();
        assert!(matches!(err, Err(Error::DuplicateSymbol(_))));
    }
}
