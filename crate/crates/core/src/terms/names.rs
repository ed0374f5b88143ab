use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

// Identifiers come from one process-wide counter, so terms built in different
// sessions can never collide. Sessions only own display naming.
static NEXT_ID: AtomicU64 = AtomicU64::new(0);

fn next_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// A variable. Equality, ordering and hashing use the identifier only; the
/// name is for display.
#[derive(Clone)]
pub struct VarId {
    id: u64,
    name: Arc<str>,
    root: Arc<str>,
}

impl VarId {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The spelling this variable was originally derived from.
    pub fn root(&self) -> &str {
        &self.root
    }
}

impl PartialEq for VarId {
    fn eq(&self, other: &VarId) -> bool {
        self.id == other.id
    }
}

impl Eq for VarId {}

impl Hash for VarId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for VarId {
    fn partial_cmp(&self, other: &VarId) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VarId {
    fn cmp(&self, other: &VarId) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.id)
    }
}

/// The fresh-name supply of one evaluation session.
///
/// Free names are interned per spelling. Renamed copies get the root spelling
/// plus primes (`x'`, `x''`, `x'''`), then a numeric suffix.
#[derive(Default)]
pub struct Names {
    free: HashMap<Arc<str>, VarId>,
    copies: HashMap<Arc<str>, u32>,
}

impl Names {
    pub fn new() -> Names {
        Names::default()
    }

    /// The free variable spelled `name`; the same spelling always yields the
    /// same identifier within a session.
    pub fn free(&mut self, name: &str) -> VarId {
        if let Some(v) = self.free.get(name) {
            return v.clone();
        }
        let v = Self::make(name.into(), name.into());
        self.free.insert(v.name.clone(), v.clone());
        v
    }

    pub fn is_free(&self, v: &VarId) -> bool {
        self.free.get(v.name()).is_some_and(|f| f == v)
    }

    /// A brand new variable displayed as `name`.
    pub fn binder(&mut self, name: &str) -> VarId {
        Self::make(name.into(), name.into())
    }

    /// A fresh identifier that keeps the display name of `v`.
    pub fn fresh_like(&mut self, v: &VarId) -> VarId {
        Self::make(v.name.clone(), v.root.clone())
    }

    /// A fresh identifier displayed as the next primed copy of `v`'s root.
    pub fn copy_of(&mut self, v: &VarId) -> VarId {
        let k = self.copies.entry(v.root.clone()).or_insert(0);
        *k += 1;
        let name: Arc<str> = if *k <= 3 {
            format!("{}{}", v.root, "'".repeat(*k as usize)).into()
        } else {
            format!("{}{}", v.root, k).into()
        };
        Self::make(name, v.root.clone())
    }

    fn make(name: Arc<str>, root: Arc<str>) -> VarId {
        VarId {
            id: next_id(),
            name,
            root,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_names_are_interned() {
        let mut n = Names::new();
        let a = n.free("y");
        let b = n.free("y");
        let c = n.free("z");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(n.is_free(&a));
    }

    #[test]
    fn binders_are_always_fresh() {
        let mut n = Names::new();
        let a = n.binder("x");
        let b = n.binder("x");
        assert_ne!(a, b);
        assert_eq!(a.name(), b.name());
        assert!(!n.is_free(&a));
    }

    #[test]
    fn copies_are_primed() {
        let mut n = Names::new();
        let x = n.binder("x");
        let names: Vec<String> = (0..5).map(|_| n.copy_of(&x).name().to_string()).collect();
        assert_eq!(names, ["x'", "x''", "x'''", "x4", "x5"]);
        let first = n.copy_of(&x);
        let again = n.copy_of(&first);
        assert_eq!(again.root(), "x");
    }
}
