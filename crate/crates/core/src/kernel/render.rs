//! Human-readable rendering of terms and patterns, re-sugaring numerals,
//! lists and strings.

use super::atom::{self, Atom};
use super::term::{Pattern, Term};
use crate::reader::lexer::is_reserved;
use crate::reader::print::{escape_char, string};

/// What the renderer needs to know about a node.
enum Shape<'a, T> {
    Atom(Atom),
    Var(&'a str),
    Comp(&'a [T]),
}

trait Node: Sized {
    fn shape(&self) -> Shape<'_, Self>;
}

impl Node for Term {
    fn shape(&self) -> Shape<'_, Term> {
        match self {
            Term::Atom(a) => Shape::Atom(*a),
            Term::Comp(_) => Shape::Comp(self.items().unwrap()),
        }
    }
}

impl Node for Pattern {
    fn shape(&self) -> Shape<'_, Pattern> {
        match self {
            Pattern::Atom(a) => Shape::Atom(*a),
            Pattern::Var(v) => Shape::Var(v),
            Pattern::Comp(items) => Shape::Comp(items),
        }
    }
}

fn is_atom<T: Node>(t: &T, a: Atom) -> bool {
    matches!(t.shape(), Shape::Atom(b) if b == a)
}

/// Peels `S` wrappers iteratively; returns the count and the innermost node.
fn peel_succ<T: Node>(mut t: &T) -> (u64, &T) {
    let mut n = 0;
    while let Shape::Comp([s, inner]) = t.shape() {
        if !is_atom(s, atom::S) {
            break;
        }
        n += 1;
        t = inner;
    }
    (n, t)
}

fn peel_list<T: Node>(mut t: &T) -> (Vec<&T>, &T) {
    let mut items = Vec::new();
    while let Shape::Comp([c, x, rest]) = t.shape() {
        if !is_atom(c, atom::CONS) {
            break;
        }
        items.push(x);
        t = rest;
    }
    (items, t)
}

/// Which sugar the renderer applies. With everything off the output is core
/// syntax that reads back as the same term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderOptions {
    pub sugar_numerals: bool,
    pub sugar_lists: bool,
    pub sugar_strings: bool,
    pub hide_garbage: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { sugar_numerals: true, sugar_lists: true, sugar_strings: true, hide_garbage: true }
    }
}

impl RenderOptions {
    pub const RAW: RenderOptions =
        RenderOptions { sugar_numerals: false, sugar_lists: false, sugar_strings: false, hide_garbage: false };
}

/// Whether an atom name cannot be written as a bare word.
fn needs_hash(name: &str) -> bool {
    let Some(first) = name.chars().next() else { return true };
    first.is_lowercase()
        || matches!(first, '\'' | '#' | '~')
        || name == "_"
        || name == "="
        || name == "!"
        || name.starts_with("--")
        || name.bytes().all(|b| b.is_ascii_digit())
        || name.chars().any(is_reserved)
}

fn write_atom(a: Atom, out: &mut String) {
    if let Some(c) = a.as_char() {
        out.push('\'');
        escape_char(c, '\'', out);
        return;
    }
    let name = a.name();
    if a.is_local() {
        out.push('~');
        out.push_str(&name);
    } else if !needs_hash(&name) {
        out.push_str(&name);
    } else if name.is_empty() || name.chars().any(is_reserved) {
        out.push('#');
        string(&name, out);
    } else {
        out.push('#');
        out.push_str(&name);
    }
}

fn write<T: Node>(t: &T, o: &RenderOptions, out: &mut String) {
    let (n, inner) = if o.sugar_numerals { peel_succ(t) } else { (0, t) };
    if n > 0 || o.sugar_numerals && is_atom(inner, atom::Z) {
        if is_atom(inner, atom::Z) {
            // Zero on its own stays `Z`; list elements below print it as `0`.
            if n == 0 {
                out.push('Z');
            } else {
                out.push_str(&n.to_string());
            }
            return;
        }
        // Partially known numeral such as `(S (S n))`.
        for _ in 0..n {
            out.push_str("(S ");
        }
        write(inner, o, out);
        for _ in 0..n {
            out.push(')');
        }
        return;
    }
    match t.shape() {
        Shape::Atom(a) if a == atom::NIL && o.sugar_lists => out.push_str("[]"),
        Shape::Atom(a) => write_atom(a, out),
        Shape::Var(v) if v.starts_with('_') => out.push('_'),
        Shape::Var(v) => out.push_str(v),
        Shape::Comp([g, ..]) if o.hide_garbage && is_atom(g, atom::GARBAGE) => out.push_str("{~GARBAGE~}"),
        Shape::Comp(items) => {
            let (elems, tail) = if o.sugar_lists || o.sugar_strings { peel_list(t) } else { (Vec::new(), t) };
            if !elems.is_empty() {
                let chars: Option<String> = elems
                    .iter()
                    .map(|e| match e.shape() {
                        Shape::Atom(a) => a.as_char(),
                        _ => None,
                    })
                    .collect();
                match chars {
                    Some(s) if o.sugar_strings && is_atom(tail, atom::NIL) => string(&s, out),
                    _ if !o.sugar_lists => {
                        out.push('(');
                        write_seq(items, o, out);
                        out.push(')');
                    }
                    _ => {
                        out.push('[');
                        for (i, e) in elems.iter().enumerate() {
                            if i > 0 {
                                out.push(' ');
                            }
                            if o.sugar_numerals && is_atom(*e, atom::Z) {
                                out.push('0');
                            } else {
                                write(*e, o, out);
                            }
                        }
                        if !is_atom(tail, atom::NIL) {
                            out.push_str(" . ");
                            write(tail, o, out);
                        }
                        out.push(']');
                    }
                }
                return;
            }
            out.push('(');
            write_seq(items, o, out);
            out.push(')');
        }
    }
}

fn write_seq<T: Node>(items: &[T], o: &RenderOptions, out: &mut String) {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write(x, o, out);
    }
}

pub fn render_term(t: &Term) -> String {
    render_term_with(t, &RenderOptions::default())
}

pub fn render_term_with(t: &Term, o: &RenderOptions) -> String {
    let mut out = String::new();
    write(t, o, &mut out);
    out
}

pub fn render_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    write(p, &RenderOptions::default(), &mut out);
    out
}

/// Renders a top-level term sequence (held as one composite) without its
/// outer parentheses.
pub fn render_term_body(t: &Term) -> String {
    render_body(t, &RenderOptions::default())
}

pub fn render_term_body_with(t: &Term, o: &RenderOptions) -> String {
    render_body(t, o)
}

pub fn render_pattern_body(p: &Pattern) -> String {
    render_body(p, &RenderOptions::default())
}

fn render_body<T: Node>(t: &T, o: &RenderOptions) -> String {
    let mut out = String::new();
    write(t, o, &mut out);
    match t.shape() {
        // Drop the outer parentheses unless the sequence printed as sugar.
        Shape::Comp(items) if !items.is_empty() && out.starts_with('(') => {
            out.clear();
            write_seq(items, o, &mut out);
        }
        _ => {}
    }
    out
}
