use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::KernelError;

/// An ordered, immutable set of distinct atoms.
///
/// Clones share the same storage, so passing universes around is cheap.
#[derive(Clone)]
pub struct Universe {
    inner: Arc<UniverseInner>,
}

struct UniverseInner {
    atoms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new<I, S>(atoms: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names = Vec::new();
        let mut index = HashMap::new();
        for atom in atoms {
            let atom = atom.into();
            if index.contains_key(&atom) {
                return Err(KernelError::DuplicateAtom(atom));
            }
            index.insert(atom.clone(), names.len());
            names.push(atom);
        }
        if names.is_empty() {
            return Err(KernelError::EmptyUniverse);
        }
        Ok(Universe {
            inner: Arc::new(UniverseInner { atoms: names, index }),
        })
    }

    pub fn size(&self) -> usize {
        self.inner.atoms.len()
    }

    pub fn atom(&self, ordinal: usize) -> &str {
        &self.inner.atoms[ordinal]
    }

    pub fn atoms(&self) -> &[String] {
        &self.inner.atoms
    }

    pub fn index_of(&self, atom: &str) -> Option<usize> {
        self.inner.index.get(atom).copied()
    }

    pub fn contains(&self, atom: &str) -> bool {
        self.inner.index.contains_key(atom)
    }

    pub fn ordinal(&self, atom: &str) -> Result<usize, KernelError> {
        self.index_of(atom)
            .ok_or_else(|| KernelError::UnknownAtom(atom.to_string()))
    }
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.atoms == other.inner.atoms
    }
}

impl Eq for Universe {}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.atoms()).finish()
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.atoms().join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton() {
        let u = Universe::new(["a"]).unwrap();
        assert_eq!(u.size(), 1);
        assert_eq!(u.index_of("a"), Some(0));
    }

    #[test]
    fn duplicate_atom() {
        let err = Universe::new(["a", "b", "a"]).unwrap_err();
        assert_eq!(err, KernelError::DuplicateAtom("a".into()));
    }

    #[test]
    fn empty() {
        let err = Universe::new(Vec::<String>::new()).unwrap_err();
        assert_eq!(err, KernelError::EmptyUniverse);
    }

    #[test]
    fn preserves_order() {
        let u = Universe::new(["z", "y", "x"]).unwrap();
        assert_eq!(u.atoms(), ["z", "y", "x"]);
        assert_eq!(u.index_of("x"), Some(2));
    }
}
