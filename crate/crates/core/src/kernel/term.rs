use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::atom::{self, Atom};

/// A ground term. Composites share structure, so cloning is O(1); unary
/// numerals tens of thousands deep are routine, which is why equality,
/// hashing and drop below never recurse.
#[derive(Clone)]
pub enum Term {
    Atom(Atom),
    Comp(Arc<Node>),
}

pub struct Node(Vec<Term>);

impl Drop for Node {
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.0);
        while let Some(t) = stack.pop() {
            if let Term::Comp(arc) = t {
                if let Some(mut node) = Arc::into_inner(arc) {
                    stack.append(&mut node.0);
                }
            }
        }
    }
}

impl Term {
    pub fn unit() -> Term {
        Term::comp(Vec::new())
    }

    pub fn comp(items: Vec<Term>) -> Term {
        Term::Comp(Arc::new(Node(items)))
    }

    pub fn nat(n: u64) -> Term {
        let mut t = Term::Atom(atom::Z);
        for _ in 0..n {
            t = Term::comp(vec![Term::Atom(atom::S), t]);
        }
        t
    }

    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Term {
        let mut t = tail.unwrap_or(Term::Atom(atom::NIL));
        for item in items.into_iter().rev() {
            t = Term::comp(vec![Term::Atom(atom::CONS), item, t]);
        }
        t
    }

    pub fn as_atom(&self) -> Option<Atom> {
        match self {
            Term::Atom(a) => Some(*a),
            Term::Comp(_) => None,
        }
    }

    pub fn items(&self) -> Option<&[Term]> {
        match self {
            Term::Atom(_) => None,
            Term::Comp(node) => Some(&node.0),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.items(), Some([]))
    }

    /// Decodes an `S`/`Z` chain.
    pub fn as_nat(&self) -> Option<u64> {
        let mut n = 0u64;
        let mut t = self;
        loop {
            match t {
                Term::Atom(a) if *a == atom::Z => return Some(n),
                Term::Comp(node) => match node.0.as_slice() {
                    [Term::Atom(s), inner] if *s == atom::S => {
                        n += 1;
                        t = inner;
                    }
                    _ => return None,
                },
                _ => return None,
            }
        }
    }

    /// Splits a `Cons` spine into its elements and the final tail.
    pub fn as_list(&self) -> Option<(Vec<&Term>, &Term)> {
        let mut items = Vec::new();
        let mut t = self;
        while let Some([Term::Atom(c), head, tail]) = t.items() {
            if *c != atom::CONS {
                break;
            }
            items.push(head);
            t = tail;
        }
        if items.is_empty() && t.as_atom() != Some(atom::NIL) {
            return None;
        }
        Some((items, t))
    }

    pub fn is_garbage(&self) -> bool {
        matches!(self.items(), Some([Term::Atom(a), ..]) if *a == atom::GARBAGE)
    }

    /// Number of nodes; iterative.
    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            n += 1;
            if let Term::Comp(node) = t {
                stack.extend(node.0.iter());
            }
        }
        n
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            match (a, b) {
                (Term::Atom(x), Term::Atom(y)) => {
                    if x != y {
                        return false;
                    }
                }
                (Term::Comp(x), Term::Comp(y)) => {
                    if Arc::ptr_eq(x, y) {
                        continue;
                    }
                    if x.0.len() != y.0.len() {
                        return false;
                    }
                    stack.extend(x.0.iter().zip(y.0.iter()));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Atom(a) => {
                    state.write_u8(0);
                    a.hash(state);
                }
                Term::Comp(node) => {
                    state.write_u8(1);
                    state.write_usize(node.0.len());
                    stack.extend(node.0.iter().rev());
                }
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_nat() {
            return write!(f, "{n}");
        }
        match self {
            Term::Atom(a) => write!(f, "{a:?}"),
            Term::Comp(node) => {
                write!(f, "(")?;
                for (i, t) in node.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{t:?}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub type Var = Arc<str>;

/// A term that may contain variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Atom(Atom),
    Var(Var),
    Comp(Arc<[Pattern]>),
}

impl Pattern {
    pub fn comp(items: Vec<Pattern>) -> Pattern {
        Pattern::Comp(items.into())
    }

    pub fn var(name: &str) -> Pattern {
        Pattern::Var(Arc::from(name))
    }

    pub fn unit() -> Pattern {
        Pattern::comp(Vec::new())
    }

    pub fn items(&self) -> Option<&[Pattern]> {
        match self {
            Pattern::Comp(items) => Some(items),
            _ => None,
        }
    }

    /// Variables in order of first appearance.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Pattern::Atom(_) => {}
            Pattern::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Pattern::Comp(items) => {
                for p in items.iter() {
                    p.collect_vars(out);
                }
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Pattern::Atom(_) => true,
            Pattern::Var(_) => false,
            Pattern::Comp(items) => items.iter().all(Pattern::is_ground),
        }
    }

    pub fn to_term(&self) -> Option<Term> {
        match self {
            Pattern::Atom(a) => Some(Term::Atom(*a)),
            Pattern::Var(_) => None,
            Pattern::Comp(items) => items
                .iter()
                .map(Pattern::to_term)
                .collect::<Option<Vec<_>>>()
                .map(Term::comp),
        }
    }

    pub fn from_term(term: &Term) -> Pattern {
        match term {
            Term::Atom(a) => Pattern::Atom(*a),
            Term::Comp(node) => Pattern::comp(node.0.iter().map(Pattern::from_term).collect()),
        }
    }

    pub fn rename_vars(&self, f: &mut impl FnMut(&Var) -> Var) -> Pattern {
        match self {
            Pattern::Atom(a) => Pattern::Atom(*a),
            Pattern::Var(v) => Pattern::Var(f(v)),
            Pattern::Comp(items) => Pattern::comp(items.iter().map(|p| p.rename_vars(f)).collect()),
        }
    }

    /// Replaces every variable by a canonical placeholder, so that patterns
    /// differing only in variable names compare equal.
    pub fn shape(&self) -> Pattern {
        let wild: Var = Arc::from("_");
        self.rename_vars(&mut |_| wild.clone())
    }

    /// Structural equality up to a consistent renaming of variables.
    pub fn alpha_eq(&self, other: &Pattern) -> bool {
        fn go(a: &Pattern, b: &Pattern, map: &mut Vec<(Var, Var)>) -> bool {
            match (a, b) {
                (Pattern::Atom(x), Pattern::Atom(y)) => x == y,
                (Pattern::Var(x), Pattern::Var(y)) => {
                    match map.iter().find(|(l, r)| l == x || r == y) {
                        Some((l, r)) => l == x && r == y,
                        None => {
                            map.push((x.clone(), y.clone()));
                            true
                        }
                    }
                }
                (Pattern::Comp(xs), Pattern::Comp(ys)) => {
                    xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| go(x, y, map))
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Atom(a) => write!(f, "{a:?}"),
            Pattern::Var(v) => write!(f, "{v}"),
            Pattern::Comp(items) => {
                write!(f, "(")?;
                for (i, p) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{p:?}")?;
                }
                write!(f, ")")
            }
        }
    }
}
