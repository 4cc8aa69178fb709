//! Discrimination trie over patterns.
//!
//! A pattern is flattened in pre-order into keys: an atom, the opening of a
//! composite of known arity, or a wildcard for a variable. Looking up a term
//! walks the trie against the term's own pre-order, following the exact
//! branch and the wildcard branch; a wildcard consumes a whole subterm in one
//! step.

use std::collections::HashMap;

use crate::kernel::{Atom, Pattern, Term};

#[derive(Debug, Default, Clone)]
struct Node {
    atoms: HashMap<Atom, u32>,
    opens: HashMap<u32, u32>,
    wild: Option<u32>,
    leaves: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct PatternTrie<V> {
    nodes: Vec<Node>,
    values: Vec<V>,
}

impl<V> Default for PatternTrie<V> {
    fn default() -> Self {
        PatternTrie { nodes: vec![Node::default()], values: Vec::new() }
    }
}

enum Key {
    Atom(Atom),
    Open(u32),
    Wild,
}

impl<V> PatternTrie<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn insert(&mut self, pattern: &Pattern, value: V) {
        let mut keys = Vec::new();
        flatten(pattern, &mut keys);
        let mut at = 0usize;
        for k in keys {
            let next = self.nodes.len() as u32;
            let node = &mut self.nodes[at];
            let slot = match k {
                Key::Atom(a) => node.atoms.entry(a).or_insert(next),
                Key::Open(n) => node.opens.entry(n).or_insert(next),
                Key::Wild => node.wild.get_or_insert(next),
            };
            let child = *slot;
            if child == next {
                self.nodes.push(Node::default());
            }
            at = child as usize;
        }
        self.nodes[at].leaves.push(self.values.len() as u32);
        self.values.push(value);
    }

    /// Every value whose pattern has the shape of `term`, ignoring whether
    /// repeated variables agree. Results are in insertion order.
    pub fn candidates(&self, term: &Term) -> Vec<&V> {
        let mut hits = Vec::new();
        let mut pending = vec![term];
        self.walk(0, &mut pending, &mut hits);
        hits.sort_unstable();
        hits.into_iter().map(|i| &self.values[i as usize]).collect()
    }

    fn walk(&self, at: usize, pending: &mut Vec<&Term>, hits: &mut Vec<u32>) {
        let node = &self.nodes[at];
        let Some(t) = pending.pop() else {
            hits.extend(&node.leaves);
            return;
        };
        if let Some(w) = node.wild {
            self.walk(w as usize, pending, hits);
        }
        match t {
            Term::Atom(a) => {
                if let Some(&c) = node.atoms.get(a) {
                    self.walk(c as usize, pending, hits);
                }
            }
            Term::Comp(_) => {
                let items = t.items().unwrap();
                if let Some(&c) = node.opens.get(&(items.len() as u32)) {
                    let mark = pending.len();
                    pending.extend(items.iter().rev());
                    self.walk(c as usize, pending, hits);
                    pending.truncate(mark);
                }
            }
        }
        pending.push(t);
    }
}

fn flatten(p: &Pattern, out: &mut Vec<Key>) {
    match p {
        Pattern::Atom(a) => out.push(Key::Atom(*a)),
        Pattern::Var(_) => out.push(Key::Wild),
        Pattern::Comp(items) => {
            out.push(Key::Open(items.len() as u32));
            for i in items.iter() {
                flatten(i, out);
            }
        }
    }
}
