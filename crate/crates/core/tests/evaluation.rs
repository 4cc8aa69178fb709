//! Evaluation properties over the shipped programs.

use std::sync::OnceLock;

use alethe::checker::check_program;
use alethe::corpus::{corpus_contents, default_root};
use alethe::engine::{EvalOptions, Evaluation, Machine, NoTrace, Outcome, TraceEvent};
use alethe::kernel::{load_program, render_term_body, Term};
use alethe::shell::{parse_term, Session, SessionOptions, Status};
use proptest::prelude::*;

fn load(file: &str) -> Machine {
    let root = default_root();
    Machine::new(load_program(&[root.join(file)], &[root.join("stdlib")]).unwrap())
}

fn std_machine() -> &'static Machine {
    static M: OnceLock<Machine> = OnceLock::new();
    M.get_or_init(|| load("stdlib/std.ale"))
}

fn machines() -> &'static [Machine; 4] {
    static M: OnceLock<[Machine; 4]> = OnceLock::new();
    M.get_or_init(|| {
        [load("stdlib/std.ale"), load("corpus/ex_sort.ale"), load("corpus/rtm_increment.ale"), load("corpus/polish.ale")]
    })
}

fn eval(m: &Machine, t: &Term, share_copies: bool) -> Evaluation {
    let opts = EvalOptions { share_copies, ..EvalOptions::default() };
    m.evaluate(t, &opts, &mut NoTrace).unwrap_or_else(|e| panic!("`{}`: {e}", render_term_body(t)))
}

fn term(src: &str) -> Term {
    parse_term(src).unwrap_or_else(|e| panic!("`{src}`: {e}"))
}

fn nat_list(xs: &[u64]) -> String {
    format!("[{}]", xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))
}

fn tree(depth: u32) -> impl Strategy<Value = String> {
    let leaf = (0u64..4).prop_map(|n| format!("(Tree {n} [])"));
    leaf.prop_recursive(depth, 12, 3, |inner| {
        ((0u64..4), prop::collection::vec(inner, 0..3)).prop_map(|(n, kids)| format!("(Tree {n} [{}])", kids.join(" ")))
    })
}

/// A start term for one of the shipped programs, and which machine runs it.
fn start_term() -> impl Strategy<Value = (usize, String)> {
    let small = prop::collection::vec(0u64..12, 0..6);
    prop_oneof![
        (0u64..30, 0u64..30).prop_map(|(a, b)| (0, format!("+ {a} {b} ()"))),
        (0u64..30, 0u64..30).prop_map(|(a, b)| (0, format!("() {a} {b} +"))),
        (0u64..10).prop_map(|n| (0, format!("□ {n} ()"))),
        (0u64..60).prop_map(|n| (0, format!("() {n} □"))),
        (1u64..5, 0u64..6).prop_map(|(a, b)| (0, format!("(× {a}) {b} ()"))),
        small.clone().prop_map(|xs| (0, format!("(InsertionSort <) {} ()", nat_list(&xs)))),
        small.clone().prop_map(|xs| (0, format!("Reverse {} ()", nat_list(&xs)))),
        small.clone().prop_map(|xs| (0, format!("(Map (+ 1)) {} ()", nat_list(&xs)))),
        prop::collection::vec(prop::collection::vec(0u64..5, 0..3), 0..4).prop_map(|xss| {
            let inner: Vec<String> = xss.iter().map(|xs| nat_list(xs)).collect();
            (0, format!("(Bennett Concat) [{}] ()", inner.join(" ")))
        }),
        (0u64..4).prop_map(|n| (0, format!("(Fact {n}) ()"))),
        (0u64..3, 0u64..3).prop_map(|(a, b)| (0, format!("(Mu Add) [{a} {b}] ()"))),
        (prop::sample::select(vec!["<", "≥"]), small).prop_map(|(c, xs)| (1, format!("(InsertionSort {c}) {} ()", nat_list(&xs)))),
        (0usize..5, prop::bool::ANY).prop_map(|(n, start)| {
            let ones = vec!["(Sym One)"; n].join(" ");
            (2, format!("{} (Tape [] Blank [{ones}])", if start { "Start" } else { "Stop" }))
        }),
        tree(3).prop_map(|t| (3, format!("Polish {t} ()"))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// Whatever halts runs back to where it started, in as many steps.
    #[test]
    fn evaluation_reverses((which, src) in start_term()) {
        let m = &machines()[which];
        let start = term(&src);
        let fwd = eval(m, &start, true);
        if let Outcome::Halted(end) = &fwd.outcome {
            let back = eval(m, end, true);
            prop_assert_eq!(back.halted(), Some(&start), "{}", src);
            prop_assert_eq!(back.steps, fwd.steps);
        } else {
            prop_assert!(matches!(fwd.outcome, Outcome::Stalled(_)), "{}: {:?}", src, fwd.outcome);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Sharing copies is invisible: same outcome, same counts.
    #[test]
    fn copy_sharing_is_unobservable((which, src) in start_term()) {
        let m = &machines()[which];
        let t = term(&src);
        prop_assert_eq!(eval(m, &t, true), eval(m, &t, false), "{}", src);
    }

    #[test]
    fn square_chain_runs_backwards_through_the_same_terms(n in 0u64..9) {
        let m = std_machine();
        let chain = |t: &Term| {
            let mut trace = Vec::new();
            m.evaluate(t, &EvalOptions::default(), &mut trace).unwrap();
            let mut seen = vec![t.clone()];
            seen.extend(trace.into_iter().filter_map(|e| match e {
                TraceEvent::Step { depth: 0, term, .. } => Some(term),
                _ => None,
            }));
            seen
        };
        let fwd = chain(&term(&format!("□ {n} ()")));
        let mut back = chain(fwd.last().unwrap());
        back.reverse();
        prop_assert_eq!(fwd, back);
    }

    /// The derived `Dup` rules copy every inhabitant of the declared data,
    /// also when run node by node.
    #[test]
    fn dup_copies_inhabitants(t in prop_oneof![
        (0u64..20).prop_map(|n| n.to_string()),
        prop::collection::vec(0u64..6, 0..5).prop_map(|xs| nat_list(&xs)),
        tree(3),
        (0u64..5, tree(2)).prop_map(|(n, t)| format!("(, {n} {t})")),
    ]) {
        let m = &machines()[3];
        let value = term(&t).items().unwrap()[0].clone();
        let start = term(&format!("(Dup {t}) ()"));
        let want = term(&format!("() {t} (Dup {t})"));
        for share in [false, true] {
            let e = eval(m, &start, share);
            prop_assert_eq!(e.halted(), Some(&want), "{}", t);
            prop_assert_eq!(&want.items().unwrap()[1], &value);
        }
    }

    #[test]
    fn addition_round_trip(a in 0u64..=30, b in 0u64..=30) {
        let m = std_machine();
        let sum = eval(m, &term(&format!("+ {a} {b} ()")), true);
        let out = sum.halted().unwrap();
        prop_assert_eq!(render_term_body(out), format!("() {} {} +", render_nat(a), render_nat(a + b)));
        let back = eval(m, out, true);
        prop_assert_eq!(back.halted(), Some(&term(&format!("+ {a} {b} ()"))));
    }

    /// Sorting yields a sorted permutation, and the garbage says where each
    /// input element went.
    #[test]
    fn insertion_sort_permutes(xs in prop::collection::vec(0u64..=20, 0..=8)) {
        let m = std_machine();
        let e = eval(m, &term(&format!("(InsertionSort <) {} ()", nat_list(&xs))), true);
        let out = e.halted().unwrap().items().unwrap();
        let perm = nats(&out[1]);
        let ys = nats(&out[2]);
        prop_assert!(ys.windows(2).all(|w| w[0] <= w[1]));
        let mut sorted = xs.clone();
        sorted.sort_unstable();
        prop_assert_eq!(&ys, &sorted);
        prop_assert_eq!(perm.len(), xs.len());
        for (i, &p) in perm.iter().enumerate() {
            prop_assert_eq!(ys[p as usize], xs[i]);
        }
        let mut seen = perm.clone();
        seen.sort_unstable();
        prop_assert!(seen.iter().copied().eq(0..xs.len() as u64));
    }
}

fn render_nat(n: u64) -> String {
    if n == 0 { "Z".into() } else { n.to_string() }
}

fn nats(t: &Term) -> Vec<u64> {
    let (items, _) = t.as_list().unwrap();
    items.iter().map(|x| x.as_nat().unwrap()).collect()
}

#[test]
fn catalog_programs_load_check_and_plan() {
    let root = default_root();
    for entry in corpus_contents() {
        let p = load_program(&[root.join(entry.path)], &[root.join("stdlib")]).unwrap();
        let (_, report) = check_program(&p);
        assert_eq!(report.is_ambiguous(), !entry.loads, "{}", entry.path);
        let m = Machine::new(p);
        if entry.evaluable {
            assert!(m.plans.errors().is_empty(), "{}: {:?}", entry.path, m.plans.errors());
        }
        for name in entry.provides {
            let defined = m.program.rules().any(|(d, _)| m.program.definitions[d].origin.label.contains(name));
            assert!(defined, "{} does not define {name}", entry.path);
        }
    }
}

#[test]
fn reload_is_idempotent() {
    let root = default_root();
    let mut s = Session::new(SessionOptions { search: vec![root.join("stdlib")], ..SessionOptions::default() });
    assert_eq!(s.load(&[root.join("stdlib/std.ale")]).status, Status::Ok);
    assert_eq!(s.execute("> 4 `+ 3` y").text, "y = 7\n");
    assert_eq!(s.reload().status, Status::Ok);
    let once = (s.listing(), s.variables.clone());
    assert_eq!(s.reload().status, Status::Ok);
    assert_eq!((s.listing(), s.variables.clone()), once);
    assert_eq!(s.execute(":v").text, "y = 7\n");
}
