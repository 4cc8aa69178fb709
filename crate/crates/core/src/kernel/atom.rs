//! Process-wide atom interner.
//!
//! Atoms are compared by id only. Global atoms live in scope 0; tilde-scoped
//! atoms carry the id of the rule scope that introduced them.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

pub type ScopeId = u32;

pub const GLOBAL_SCOPE: ScopeId = 0;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(u32);

struct Entry {
    name: Arc<str>,
    scope: ScopeId,
}

#[derive(Default)]
struct Interner {
    ids: HashMap<(ScopeId, Arc<str>), u32>,
    entries: Vec<Entry>,
}

// Order matters: the constants below index into this list.
const WELL_KNOWN: [&str; 6] = ["S", "Z", "Cons", "Nil", "Garbage", "Dup"];

pub const S: Atom = Atom(0);
pub const Z: Atom = Atom(1);
pub const CONS: Atom = Atom(2);
pub const NIL: Atom = Atom(3);
pub const GARBAGE: Atom = Atom(4);
pub const DUP: Atom = Atom(5);

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        let mut i = Interner::default();
        for name in WELL_KNOWN {
            i.intern(GLOBAL_SCOPE, name);
        }
        RwLock::new(i)
    })
}

impl Interner {
    fn intern(&mut self, scope: ScopeId, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(&(scope, Arc::from(name))) {
            return id;
        }
        let id = self.entries.len() as u32;
        let name: Arc<str> = Arc::from(name);
        self.entries.push(Entry { name: name.clone(), scope });
        self.ids.insert((scope, name), id);
        id
    }
}

impl Atom {
    pub fn global(name: &str) -> Atom {
        Atom::scoped(GLOBAL_SCOPE, name)
    }

    pub fn scoped(scope: ScopeId, name: &str) -> Atom {
        {
            let guard = interner().read().unwrap();
            if let Some(&id) = guard.ids.get(&(scope, Arc::from(name))) {
                return Atom(id);
            }
        }
        Atom(interner().write().unwrap().intern(scope, name))
    }

    /// The character atom `'c`.
    pub fn char(c: char) -> Atom {
        let mut s = String::with_capacity(5);
        s.push('\'');
        s.push(c);
        Atom::global(&s)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn name(self) -> Arc<str> {
        interner().read().unwrap().entries[self.0 as usize].name.clone()
    }

    pub fn scope(self) -> ScopeId {
        interner().read().unwrap().entries[self.0 as usize].scope
    }

    pub fn is_local(self) -> bool {
        self.scope() != GLOBAL_SCOPE
    }

    /// The character denoted by a character atom, if this is one.
    pub fn as_char(self) -> Option<char> {
        if self.is_local() {
            return None;
        }
        let name = self.name();
        let mut chars = name.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some('\''), Some(c), None) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_local() {
            write!(f, "~{}@{}", self.name(), self.scope())
        } else {
            write!(f, "{}", self.name())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_known_ids_are_stable() {
        assert_eq!(Atom::global("S"), S);
        assert_eq!(Atom::global("Garbage"), GARBAGE);
        assert_eq!(&*DUP.name(), "Dup");
    }

    #[test]
    fn scopes_separate_atoms() {
        let a = Atom::scoped(7001, "Go");
        let b = Atom::scoped(7002, "Go");
        assert_ne!(a, b);
        assert_eq!(a, Atom::scoped(7001, "Go"));
        assert!(a.is_local());
    }

    #[test]
    fn char_atoms() {
        assert_eq!(Atom::char('x').as_char(), Some('x'));
        assert_eq!(Atom::global("Cons").as_char(), None);
    }
}
