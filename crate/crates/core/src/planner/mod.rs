//! Serialisation of sub-rules into execution plans.
//!
//! A rule's sub-rules relate sets of variables. Starting from the variables
//! bound by the side being matched, a plan is a sequence of sub-rule
//! applications, each in a chosen direction, that ends knowing exactly the
//! variables of the other side. Applying a sub-rule consumes the variables
//! of its source pattern and learns those of its target pattern.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt::Write;

use thiserror::Error;

use crate::kernel::{DefId, Pattern, Program, Rule, Var};
use crate::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanStep {
    pub sub_rule: usize,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub cost: u32,
}

impl Plan {
    /// The same route walked the other way round.
    pub fn reversed(&self) -> Plan {
        Plan {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| PlanStep { sub_rule: s.sub_rule, direction: s.direction.flip() })
                .collect(),
            cost: self.cost,
        }
    }

    /// Compact route notation, 1-based: `→2→1←3`.
    pub fn route(&self) -> String {
        self.steps.iter().map(|s| format!("{}{}", s.direction.arrow(), s.sub_rule + 1)).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("cannot derive {} from the sub-rules", show_vars(.missing))]
    Unreachable { missing: Vec<Var> },
    #[error("no sequence of sub-rules ends knowing exactly {}", show_vars(.goal))]
    Inexact { goal: Vec<Var> },
    #[error("rule has too many {0} to plan")]
    TooLarge(&'static str),
}

fn show_vars(vs: &[Var]) -> String {
    let names: Vec<&str> = vs.iter().map(|v| &**v).collect();
    format!("{{{}}}", names.join(", "))
}

type Known = u128;

/// Variables of a rule numbered for bitset use.
struct Universe {
    vars: Vec<Var>,
}

impl Universe {
    fn of(rule: &Rule) -> Universe {
        let mut vars: Vec<Var> = Vec::new();
        let mut add = |p: &Pattern| {
            for v in p.vars() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        };
        for party in rule.lhs.iter().chain(&rule.rhs) {
            add(&party.body);
        }
        for s in &rule.sub_rules {
            add(&s.lhs);
            add(&s.rhs);
        }
        Universe { vars }
    }

    fn set(&self, p: &Pattern) -> Known {
        p.vars().iter().fold(0, |acc, v| acc | 1 << self.vars.iter().position(|w| w == v).unwrap())
    }

    fn side(&self, rule: &Rule, dir: Direction) -> Known {
        rule.side(dir).iter().fold(0, |acc, p| acc | self.set(&p.body))
    }

    fn names(&self, k: Known) -> Vec<Var> {
        (0..self.vars.len()).filter(|i| k & (1 << i) != 0).map(|i| self.vars[i].clone()).collect()
    }
}

/// (source vars, target vars) for each sub-rule in each direction.
fn edges(u: &Universe, rule: &Rule) -> Vec<[(Known, Known); 2]> {
    rule.sub_rules
        .iter()
        .map(|s| {
            let (l, r) = (u.set(&s.lhs), u.set(&s.rhs));
            [(l, r), (r, l)]
        })
        .collect()
}

fn dir_index(d: Direction) -> usize {
    match d {
        Direction::Forward => 0,
        Direction::Backward => 1,
    }
}

const DIRS: [Direction; 2] = [Direction::Forward, Direction::Backward];

/// Orders steps for tie-breaking: forward before backward, forward steps
/// ascending and backward steps descending by sub-rule index.
fn step_key(sub_rule: usize, d: Direction) -> u32 {
    match d {
        Direction::Forward => sub_rule as u32,
        Direction::Backward => (1 << 16) | (0xffff - sub_rule as u32),
    }
}

fn step_of_key(key: u32) -> PlanStep {
    if key < 1 << 16 {
        PlanStep { sub_rule: key as usize, direction: Direction::Forward }
    } else {
        PlanStep { sub_rule: (0xffff - (key & 0xffff)) as usize, direction: Direction::Backward }
    }
}

/// Finds the cheapest plan for running `rule` in direction `dir`. Ties go to
/// fewer steps, then to the route holding fewer variables summed over its
/// states (forgetting early), then to the route that, step by step, prefers
/// computing to uncomputing, computes in declaration order and uncomputes in
/// reverse declaration order.
pub fn plan_rule(rule: &Rule, dir: Direction) -> Result<Plan, PlanError> {
    let u = Universe::of(rule);
    if u.vars.len() > 128 {
        return Err(PlanError::TooLarge("variables"));
    }
    if rule.sub_rules.len() > 64 {
        return Err(PlanError::TooLarge("sub-rules"));
    }
    let start = u.side(rule, dir);
    let goal = u.side(rule, dir.flip());
    let edges = edges(&u, rule);

    // Each sub-rule may be used at most once per direction.
    type Used = u128;
    let mut heap = BinaryHeap::new();
    let mut settled: HashSet<(Known, Used)> = HashSet::new();
    let mut reached: Known = start;
    heap.push(Reverse((0u32, 0usize, 0u32, Vec::<u32>::new(), start, 0 as Used)));
    while let Some(Reverse((cost, len, held, path, known, used))) = heap.pop() {
        if !settled.insert((known, used)) {
            continue;
        }
        if known == goal {
            return Ok(Plan { steps: path.into_iter().map(step_of_key).collect(), cost });
        }
        for (i, e) in edges.iter().enumerate() {
            for d in DIRS {
                let bit = 1u128 << (2 * i + dir_index(d));
                let (src, dst) = e[dir_index(d)];
                if used & bit != 0 || src & !known != 0 {
                    continue;
                }
                let next = (known & !src) | dst;
                reached |= next;
                let mut p = path.clone();
                p.push(step_key(i, d));
                heap.push(Reverse((cost + rule.sub_rules[i].cost, len + 1, held + next.count_ones(), p, next, used | bit)));
            }
        }
    }
    let missing = goal & !reached;
    if missing != 0 {
        Err(PlanError::Unreachable { missing: u.names(missing) })
    } else {
        Err(PlanError::Inexact { goal: u.names(goal) })
    }
}

/// The restricted transition graph: every knowledge state reachable from the
/// input by single sub-rule applications, without usage limits.
#[derive(Clone, Debug, Default)]
pub struct TransitionGraph {
    pub states: Vec<BTreeSet<Var>>,
    /// (from, to, step)
    pub edges: Vec<(usize, usize, PlanStep)>,
}

impl TransitionGraph {
    pub fn state(&self, vars: &[&str]) -> Option<usize> {
        let want: BTreeSet<Var> = vars.iter().map(|v| Var::from(*v)).collect();
        self.states.iter().position(|s| *s == want)
    }

    pub fn has_edge(&self, from: usize, to: usize, step: PlanStep) -> bool {
        self.edges.contains(&(from, to, step))
    }
}

pub fn transition_graph(rule: &Rule, dir: Direction) -> TransitionGraph {
    let u = Universe::of(rule);
    let edges = edges(&u, rule);
    let start = u.side(rule, dir);
    let mut index: HashMap<Known, usize> = HashMap::from([(start, 0)]);
    let mut order = vec![start];
    let mut g = TransitionGraph::default();
    let mut at = 0;
    while at < order.len() {
        let known = order[at];
        for (i, e) in edges.iter().enumerate() {
            for d in DIRS {
                let (src, dst) = e[dir_index(d)];
                if src & !known != 0 {
                    continue;
                }
                let next = (known & !src) | dst;
                let to = *index.entry(next).or_insert_with(|| {
                    order.push(next);
                    order.len() - 1
                });
                g.edges.push((at, to, PlanStep { sub_rule: i, direction: d }));
            }
        }
        at += 1;
    }
    g.states = order.iter().map(|&k| u.names(k).into_iter().collect()).collect();
    g
}

/// Plans for both directions of every rule in a program.
#[derive(Clone, Debug, Default)]
pub struct PlanTable {
    plans: HashMap<DefId, [Result<Plan, PlanError>; 2]>,
}

impl PlanTable {
    pub fn build(program: &Program) -> PlanTable {
        let plans = program
            .rules()
            .map(|(id, r)| (id, [plan_rule(r, Direction::Forward), plan_rule(r, Direction::Backward)]))
            .collect();
        PlanTable { plans }
    }

    pub fn get(&self, def: DefId, dir: Direction) -> Option<&Result<Plan, PlanError>> {
        self.plans.get(&def).map(|p| &p[dir_index(dir)])
    }

    /// Planning failures, in definition order.
    pub fn errors(&self) -> Vec<(DefId, Direction, &PlanError)> {
        let mut out: Vec<_> = self
            .plans
            .iter()
            .flat_map(|(&id, ps)| DIRS.iter().zip(ps).filter_map(move |(&d, p)| p.as_ref().err().map(|e| (id, d, e))))
            .collect();
        out.sort_by_key(|(id, d, _)| (*id, *d));
        out
    }
}

/// Human-readable listing of a plan, one line per step.
pub fn render_plan(plan: &Plan, rule: &Rule) -> String {
    let mut out = String::new();
    for s in &plan.steps {
        let sub = &rule.sub_rules[s.sub_rule];
        let _ = writeln!(out, "  {} {}. {}  [cost {}]", s.direction.arrow(), s.sub_rule + 1, sub.label, sub.cost);
    }
    let unused: Vec<String> = (0..rule.sub_rules.len())
        .filter(|i| !plan.steps.iter().any(|s| s.sub_rule == *i))
        .map(|i| (i + 1).to_string())
        .collect();
    if !unused.is_empty() {
        let _ = writeln!(out, "  (unused: {})", unused.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::desugar_source;

    fn single_rule(src: &str) -> Rule {
        let p = desugar_source(src).unwrap();
        let (_, r) = p.rules().last().unwrap();
        r.clone()
    }

    #[test]
    fn add_step_is_one_forward_step() {
        let r = single_rule("+ (S a) b () = () (S a) (S b') +:\n  + a b () = () a b' +.\n");
        let p = plan_rule(&r, Direction::Forward).unwrap();
        assert_eq!(p.route(), "→1");
        assert_eq!(plan_rule(&r, Direction::Backward).unwrap().route(), "←1");
        assert_eq!(render_plan(&p, &r).lines().count(), 1);
    }

    #[test]
    fn no_sub_rules() {
        let r = single_rule("+ Z b () = () Z b +;");
        assert!(plan_rule(&r, Direction::Forward).unwrap().steps.is_empty());
    }

    #[test]
    fn unreachable_variable_is_named() {
        let r = single_rule("F x = G y z:\n  x `H` y.\n");
        let err = plan_rule(&r, Direction::Forward).unwrap_err();
        assert_eq!(err, PlanError::Unreachable { missing: vec!["z".into()] });
        assert!(err.to_string().contains('z'));
    }

    #[test]
    fn knowledge_is_consumed() {
        // x is used up by the first sub-rule, so it has to be duplicated
        let r = single_rule("F x = G y z:\n  x `H` y.\n  x `K` z.\n");
        assert!(plan_rule(&r, Direction::Forward).is_err());
        let r = single_rule("F x = G y z:\n  x `Dup x` x'.\n  x `H` y.\n  x' `K` z.\n");
        assert_eq!(plan_rule(&r, Direction::Forward).unwrap().route(), "→1→2→3");
    }
}
