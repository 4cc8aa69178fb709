//! Copying without copying.
//!
//! Terms are immutable and share structure, so a `Dup` relation of the shape
//! derived for `data` declarations does nothing but rebuild its argument.
//! When every node of the argument would be handled by such a rule, the
//! engine hands back the argument itself and charges the rule applications
//! the derivation would have performed. Anything else (a node no copy rule
//! covers, a rule that would not halt, mismatched copies going backwards)
//! falls back to ordinary evaluation, which then reports the problem.

use std::collections::HashMap;
use std::sync::Arc;

use crate::kernel::{atom, Pattern, Rule, Term, Var};
use crate::Direction;

use super::{Decision, Machine};

/// Whether `rule` is `` `Dup P` P' `` with one `` `Dup v` v' `` sub-rule per
/// variable of the linear pattern `P`, `P'` being `P` with fresh names.
pub(super) fn is_copy_rule(rule: &Rule) -> bool {
    if rule.concurrent || !rule.loose_parties.is_empty() {
        return false;
    }
    let (Some(fwd), Some(bwd)) = (rule.body(Direction::Forward), rule.body(Direction::Backward)) else {
        return false;
    };
    let (Some([query, unit]), Some([unit2, copy, query2])) = (fwd.items(), bwd.items()) else {
        return false;
    };
    if !is_unit(unit) || !is_unit(unit2) || query != query2 {
        return false;
    }
    let Some(original) = dup_argument(query) else { return false };
    let vars = original.vars();
    if occurrences(original) != vars.len() || !original.alpha_eq(copy) {
        return false;
    }
    let primed = copy.vars();
    if primed.iter().any(|v| vars.contains(v)) || rule.sub_rules.len() != vars.len() {
        return false;
    }
    // alpha_eq on linear patterns pairs variables in order of appearance.
    vars.iter().zip(&primed).all(|(v, p)| {
        rule.sub_rules.iter().any(|s| {
            let lhs = Pattern::comp(vec![dup_of(Pattern::Var(v.clone())), Pattern::unit()]);
            let rhs = Pattern::comp(vec![Pattern::unit(), Pattern::Var(p.clone()), dup_of(Pattern::Var(v.clone()))]);
            s.lhs == lhs && s.rhs == rhs
        })
    })
}

fn is_unit(p: &Pattern) -> bool {
    p.items().is_some_and(<[Pattern]>::is_empty)
}

fn dup_of(p: Pattern) -> Pattern {
    Pattern::comp(vec![Pattern::Atom(atom::DUP), p])
}

fn dup_argument(p: &Pattern) -> Option<&Pattern> {
    match p.items()? {
        [Pattern::Atom(a), arg] if *a == atom::DUP => Some(arg),
        _ => None,
    }
}

fn occurrences(p: &Pattern) -> usize {
    match p {
        Pattern::Atom(_) => 0,
        Pattern::Var(_) => 1,
        Pattern::Comp(items) => items.iter().map(occurrences).sum(),
    }
}

fn term_dup_argument(t: &Term) -> Option<&Term> {
    match t.items()? {
        [Term::Atom(a), arg] if *a == atom::DUP => Some(arg),
        _ => None,
    }
}

/// Copy costs already established during one evaluation, keyed by node
/// address. Holding the term keeps the address from being reused.
#[derive(Default)]
pub(super) struct CopyMemo {
    known: HashMap<(usize, Direction), (Term, u64)>,
}

const MEMO_CAPACITY: usize = 1 << 20;

impl CopyMemo {
    fn key(t: &Term, dir: Direction) -> Option<(usize, Direction)> {
        match t {
            Term::Comp(node) => Some((Arc::as_ptr(node) as usize, dir)),
            Term::Atom(_) => None,
        }
    }

    fn get(&self, t: &Term, dir: Direction) -> Option<u64> {
        self.known.get(&Self::key(t, dir)?).map(|(_, c)| *c)
    }

    fn insert(&mut self, t: &Term, dir: Direction, cost: u64) {
        if let Some(k) = Self::key(t, dir) {
            if self.known.len() >= MEMO_CAPACITY {
                self.known.clear();
            }
            self.known.insert(k, (t.clone(), cost));
        }
    }
}

enum Job {
    Visit(Term),
    Finish(Term, usize),
}

impl Machine {
    /// Evaluates `(Dup t) ()` or `() t (Dup t)` by sharing, if copy rules
    /// alone would do it within `budget` applications. Returns the halted
    /// result and the number of applications charged.
    pub(super) fn shortcut_copy(&self, child: &Term, budget: u64, memo: &mut CopyMemo) -> Option<(Term, u64)> {
        match child.items()? {
            [query, unit] if unit.is_unit() => {
                let t = term_dup_argument(query)?;
                let cost = self.copy_cost(t, Direction::Forward, budget, memo)?;
                Some((Term::comp(vec![Term::unit(), t.clone(), query.clone()]), cost))
            }
            [unit, copy, query] if unit.is_unit() => {
                let t = term_dup_argument(query)?;
                if copy != t {
                    return None;
                }
                let cost = self.copy_cost(t, Direction::Backward, budget, memo)?;
                Some((Term::comp(vec![query.clone(), Term::unit()]), cost))
            }
            _ => None,
        }
    }

    fn copy_cost(&self, t: &Term, dir: Direction, budget: u64, memo: &mut CopyMemo) -> Option<u64> {
        let mut jobs = vec![Job::Visit(t.clone())];
        let mut costs: Vec<u64> = Vec::new();
        while let Some(job) = jobs.pop() {
            match job {
                Job::Visit(t) => {
                    if let Some(c) = memo.get(&t, dir) {
                        costs.push(c);
                        continue;
                    }
                    let parts = self.copy_step(&t, dir)?;
                    jobs.push(Job::Finish(t, parts.len()));
                    jobs.extend(parts.into_iter().map(Job::Visit));
                }
                Job::Finish(t, n) => {
                    let cost = 1 + costs.drain(costs.len() - n..).sum::<u64>();
                    if cost > budget {
                        return None;
                    }
                    memo.insert(&t, dir, cost);
                    costs.push(cost);
                }
            }
        }
        costs.pop()
    }

    /// Checks that one copy rule takes `t` to a halting copy, and returns
    /// the parts it copies by recursion.
    fn copy_step(&self, t: &Term, dir: Direction) -> Option<Vec<Term>> {
        let query = Term::comp(vec![Term::Atom(atom::DUP), t.clone()]);
        let start = Term::comp(vec![query.clone(), Term::unit()]);
        let Ok(Decision::Apply(def, Direction::Forward, bindings)) = self.decide(&start, None) else {
            return None;
        };
        if !self.copy_rules[def] {
            return None;
        }
        let end = match dir {
            Direction::Forward => Term::comp(vec![Term::unit(), t.clone(), query]),
            Direction::Backward => start,
        };
        if !matches!(self.decide(&end, Some((def, dir))), Ok(Decision::Halt)) {
            return None;
        }
        let rule = self.program.definitions[def].as_rule()?;
        let vars: Vec<Var> = dup_argument(rule.body(Direction::Forward)?.items()?.first()?)?.vars();
        vars.iter().map(|v| bindings.get(v).cloned()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::desugar_source;

    #[test]
    fn derived_dup_rules_are_copy_rules() {
        let p = desugar_source("data Z; data S n; data Pair a b;").unwrap();
        let copies: Vec<bool> = p.rules().map(|(_, r)| is_copy_rule(r)).collect();
        assert_eq!(copies, [true, true, true]);
    }

    #[test]
    fn other_dup_rules_are_not() {
        let p = desugar_source("data Z;\n`Dup (S n)` (S n);\n`Dup (T n)` (T n'): `Dup n` n'. `Dup n'` n''.\n").unwrap();
        let copies: Vec<bool> = p.rules().map(|(_, r)| is_copy_rule(r)).collect();
        assert_eq!(copies, [true, false, false]);
    }
}
