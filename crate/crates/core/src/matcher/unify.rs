use thiserror::Error;

use crate::kernel::{Pattern, Term, Var};

/// Variable assignments produced by matching. Rules bind a handful of
/// variables, so a flat vector beats a map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    vars: Vec<(Var, Term)>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.vars.iter().find(|(v, _)| &**v == name).map(|(_, t)| t)
    }

    /// Binds `var`, or checks the existing binding agrees.
    pub fn bind(&mut self, var: &Var, term: &Term) -> bool {
        match self.get(var) {
            Some(existing) => existing == term,
            None => {
                self.vars.push((var.clone(), term.clone()));
                true
            }
        }
    }

    /// Removes a binding, returning it. Used when knowledge is consumed.
    pub fn take(&mut self, name: &str) -> Option<Term> {
        let i = self.vars.iter().position(|(v, _)| &**v == name)?;
        Some(self.vars.swap_remove(i).1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.vars.iter().map(|(v, t)| (v, t))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        self.vars.truncate(len);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("variable `{0}` is not bound")]
pub struct Unbound(pub Var);

/// Extends `b` so that `p` instantiated by it equals `t`. On failure `b` is
/// left as it was.
pub fn unify(p: &Pattern, t: &Term, b: &mut Bindings) -> bool {
    let mark = b.len();
    let ok = go(p, t, b);
    if !ok {
        b.truncate(mark);
    }
    ok
}

fn go(p: &Pattern, t: &Term, b: &mut Bindings) -> bool {
    match p {
        Pattern::Var(v) => b.bind(v, t),
        Pattern::Atom(a) => t.as_atom() == Some(*a),
        Pattern::Comp(ps) => match t.items() {
            Some(ts) => ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| go(p, t, b)),
            None => false,
        },
    }
}

/// Matches `p` against `t` from scratch.
pub fn matches(p: &Pattern, t: &Term) -> Option<Bindings> {
    let mut b = Bindings::new();
    unify(p, t, &mut b).then_some(b)
}

/// Instantiates `p`. Every variable must be bound.
pub fn substitute(p: &Pattern, b: &Bindings) -> Result<Term, Unbound> {
    match p {
        Pattern::Atom(a) => Ok(Term::Atom(*a)),
        Pattern::Var(v) => b.get(v).cloned().ok_or_else(|| Unbound(v.clone())),
        Pattern::Comp(ps) => ps.iter().map(|p| substitute(p, b)).collect::<Result<Vec<_>, _>>().map(Term::comp),
    }
}
