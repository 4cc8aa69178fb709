//! Static ambiguity analysis.
//!
//! Every computational pattern (white) and halting pattern (black) becomes a
//! node of a compatibility graph; two nodes are joined when some ground term
//! could match both. A term matching three definitions at once shows up as a
//! triangle, and any triangle with at least two white corners means the
//! evaluator might face a choice.

use std::fmt::Write;

use crate::kernel::{render_pattern_body, DefId, DefKind, Pattern, Program};
use crate::matcher::Side;

/// Whether some ground term is an instance of both patterns. Variables are
/// treated independently, so this is exact for linear patterns and an
/// over-approximation otherwise.
pub fn compatible(p: &Pattern, q: &Pattern) -> bool {
    match (p, q) {
        (Pattern::Var(_), _) | (_, Pattern::Var(_)) => true,
        (Pattern::Atom(a), Pattern::Atom(b)) => a == b,
        (Pattern::Comp(xs), Pattern::Comp(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| compatible(x, y))
        }
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

#[derive(Clone, Debug)]
pub struct GraphNode {
    pub pattern: Pattern,
    pub color: Color,
    pub def: DefId,
    pub side: Side,
    pub party: usize,
}

/// Compatibility graph with bitset adjacency.
#[derive(Clone, Debug, Default)]
pub struct AmbiguityGraph {
    pub nodes: Vec<GraphNode>,
    adj: Vec<Vec<u64>>,
}

impl AmbiguityGraph {
    pub fn from_nodes(nodes: Vec<GraphNode>) -> AmbiguityGraph {
        let n = nodes.len();
        let words = n.div_ceil(64);
        let mut adj = vec![vec![0u64; words]; n];
        for i in 0..n {
            for j in i + 1..n {
                if compatible(&nodes[i].pattern, &nodes[j].pattern) {
                    adj[i][j / 64] |= 1 << (j % 64);
                    adj[j][i / 64] |= 1 << (i % 64);
                }
            }
        }
        AmbiguityGraph { nodes, adj }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i][j / 64] & (1 << (j % 64)) != 0
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().flatten().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    fn common(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().zip(&self.adj[j]).enumerate().flat_map(|(w, (a, b))| {
            let mut bits = a & b;
            std::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let k = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    w * 64 + k
                })
            })
        })
    }

    /// All triangles with two or more white corners, each as sorted node
    /// indices.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for u in 0..self.nodes.len() {
            if self.nodes[u].color != Color::White {
                continue;
            }
            for v in u + 1..self.nodes.len() {
                if self.nodes[v].color != Color::White || !self.has_edge(u, v) {
                    continue;
                }
                for w in self.common(u, v) {
                    // all-white triangles are found once, from their two
                    // smallest corners
                    if self.nodes[w].color == Color::Black || w > v {
                        let mut t = [u, v, w];
                        t.sort_unstable();
                        out.push(t);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Builds the graph for a program: one white node per party body of every
/// rule, one black node per (already deduplicated) halting pattern.
pub fn build_ambiguity_graph(program: &Program) -> AmbiguityGraph {
    let mut nodes = Vec::new();
    for (def, d) in program.definitions.iter().enumerate() {
        match &d.kind {
            DefKind::Halting(p) => {
                nodes.push(GraphNode { pattern: p.clone(), color: Color::Black, def, side: Side::Halting, party: 0 })
            }
            DefKind::Rule(r) => {
                for (side, parties) in [(Side::Forward, &r.lhs), (Side::Backward, &r.rhs)] {
                    for (party, p) in parties.iter().enumerate() {
                        nodes.push(GraphNode { pattern: p.body.clone(), color: Color::White, def, side, party });
                    }
                }
            }
        }
    }
    AmbiguityGraph::from_nodes(nodes)
}

/// Two white nodes plus a third corner. Halting corners are coalesced: the
/// pair is reported once, naming the first halting pattern involved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub nodes: [usize; 3],
}

#[derive(Clone, Debug, Default)]
pub struct AmbiguityReport {
    pub triangles: Vec<Triangle>,
    /// Triangles dropped because a definition is marked `@ambiguous`.
    pub suppressed: usize,
}

impl AmbiguityReport {
    pub fn is_ambiguous(&self) -> bool {
        !self.triangles.is_empty()
    }
}

pub fn find_ambiguities(graph: &AmbiguityGraph, program: &Program) -> AmbiguityReport {
    let mut report = AmbiguityReport::default();
    let mut seen_pairs = std::collections::HashSet::new();
    for t in graph.triangles() {
        if t.iter().any(|&n| program.definitions[graph.nodes[n].def].allow_ambiguous) {
            report.suppressed += 1;
            continue;
        }
        let whites: Vec<usize> = t.iter().copied().filter(|&n| graph.nodes[n].color == Color::White).collect();
        if whites.len() == 2 {
            // coalesce all halting corners for this pair of whites
            if !seen_pairs.insert((whites[0], whites[1])) {
                continue;
            }
        }
        report.triangles.push(Triangle { nodes: t });
    }
    report
}

/// Convenience: build the graph and search it.
pub fn check_program(program: &Program) -> (AmbiguityGraph, AmbiguityReport) {
    let g = build_ambiguity_graph(program);
    let r = find_ambiguities(&g, program);
    (g, r)
}

pub fn render_report(report: &AmbiguityReport, graph: &AmbiguityGraph, program: &Program) -> String {
    let mut out = String::new();
    for t in &report.triangles {
        let _ = writeln!(out, "ambiguity: one term can match all of");
        for &n in &t.nodes {
            let node = &graph.nodes[n];
            let def = &program.definitions[node.def];
            let role = match (node.color, node.side) {
                (Color::Black, _) => "halting".to_string(),
                (_, Side::Forward) => format!("left side of: {}", def.origin.label),
                (_, _) => format!("right side of: {}", def.origin.label),
            };
            let _ = writeln!(out, "  {}: {} ({})", def.origin, render_pattern_body(&node.pattern), role);
        }
    }
    if report.suppressed > 0 {
        let _ = writeln!(out, "note: {} triangle(s) suppressed by @ambiguous", report.suppressed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::desugar_source;

    fn pats(src: &str) -> Vec<Pattern> {
        let p = desugar_source(&format!("! {src};")).unwrap();
        p.halting().map(|(_, h)| h.clone()).collect()
    }

    #[test]
    fn compatibility_examples() {
        let a = pats("□ (S n) m □")[0].clone();
        let b = pats("□ n (S m'') □")[0].clone();
        assert!(compatible(&a, &b));
        assert!(!compatible(&pats("Z")[0], &pats("(S a)")[0]));
        assert!(!compatible(&pats("+ Z b ()")[0], &pats("+ (S a) b ()")[0]));
    }

    #[test]
    fn addition_graph() {
        let p = desugar_source("! + _ _ (); ! () _ _ +;\n+ Z b () = () Z b +;\n+ (S a) b () = () (S a) (S b') +:\n  + a b () = () a b' +.\n").unwrap();
        let (g, r) = check_program(&p);
        assert_eq!(g.nodes.len(), 6);
        assert_eq!(g.nodes.iter().filter(|n| n.color == Color::White).count(), 4);
        for i in 0..6 {
            for j in 0..6 {
                if i != j && g.nodes[i].color == Color::White && g.nodes[j].color == Color::White {
                    assert!(!g.has_edge(i, j));
                }
            }
        }
        assert_eq!(g.edge_count(), 4);
        assert!(!r.is_ambiguous());
    }

    #[test]
    fn coin_is_ambiguous_once() {
        let p = desugar_source("`Coin` Tails;\n`Coin` Heads;\n").unwrap();
        let (g, r) = check_program(&p);
        assert_eq!(r.triangles.len(), 1);
        let text = render_report(&r, &g, &p);
        assert!(text.contains("`Coin` Tails") && text.contains("`Coin` Heads"), "{text}");

        let p = desugar_source("-- @ambiguous\n`Coin` Tails;\n`Coin` Heads;\n").unwrap();
        let (_, r) = check_program(&p);
        assert!(!r.is_ambiguous());
        assert_eq!(r.suppressed, 1);
    }

    #[test]
    fn white_triangles_count_once() {
        let p = desugar_source("A x = B;\nA y z = C;\n").unwrap();
        let (_, r) = check_program(&p);
        assert!(!r.is_ambiguous());
        let p = desugar_source("F x = P;\nF Z = Q;\nF (S n) = R;\nF y = T;\n").unwrap();
        let (g, _) = check_program(&p);
        // whites F x, F Z and F y form a triangle, and so do F x, F (S n), F y
        let tri = g.triangles();
        assert_eq!(tri.len(), 2);
    }
}
