use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::IrError;

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    /// Builds a graph from 0-indexed edges; loops and repeated edges are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, IrError> {
        let mut g = Graph::empty(n);
        for (i, &(u, v)) in edges.iter().enumerate() {
            g.add_edge(i + 1, u, v)?;
        }
        Ok(g)
    }

    fn add_edge(&mut self, line: usize, u: usize, v: usize) -> Result<(), IrError> {
        let n = self.adj.len();
        for x in [u, v] {
            if x >= n {
                return Err(IrError::VertexOutOfRange {
                    line,
                    vertex: x + 1,
                    n,
                });
            }
        }
        if u == v {
            return Err(IrError::SelfLoop {
                line,
                vertex: u + 1,
            });
        }
        if !self.adj[u].insert(v) {
            return Err(IrError::DuplicateEdge {
                line,
                u: u + 1,
                v: v + 1,
            });
        }
        self.adj[v].insert(u);
        Ok(())
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Graph::from_edges(n, &edges).expect("valid")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &edges).expect("valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Graph::from_edges(n, &edges).expect("valid")
    }

    /// Center 0 joined to `leaves` further vertices.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Graph::from_edges(leaves + 1, &edges).expect("valid")
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n();
        let mut g = Graph::empty(off + other.n());
        for (u, v) in self
            .edges()
            .into_iter()
            .chain(other.edges().into_iter().map(|(u, v)| (u + off, v + off)))
        {
            g.add_edge(0, u, v).expect("disjoint edges");
        }
        g
    }

    /// The graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n());
        let mut g = Graph::empty(self.n());
        for (u, v) in self.edges() {
            g.add_edge(0, perm[u], perm[v]).expect("permutation");
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|u| self.adj[u].range(u + 1..).map(move |&v| (u, v)))
            .collect()
    }

    /// The text format read by [`parse_graph`].
    pub fn to_text(&self) -> String {
        let edges = self.edges();
        let mut out = format!("p edge {} {}\n", self.n(), edges.len());
        for (u, v) in edges {
            writeln!(out, "e {} {}", u + 1, v + 1).expect("write to string");
        }
        out
    }
}

/// Parses `p edge <n> <m>` followed by `e <u> <v>` lines (1-indexed);
/// lines starting with `c` are comments.
pub fn parse_graph(text: &str) -> Result<Graph, IrError> {
    let mut graph: Option<(Graph, usize)> = None;
    let mut edges = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let err = |msg: &str| IrError::Parse {
            line,
            msg: msg.to_string(),
        };
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(&format!("bad number {s:?}")))
        };
        match fields.as_slice() {
            [] => {}
            ["c", ..] => {}
            ["p", "edge", n, m] => {
                if graph.is_some() {
                    return Err(err("second header"));
                }
                graph = Some((Graph::empty(num(n)?), num(m)?));
            }
            ["p", ..] => return Err(err("expected `p edge <n> <m>`")),
            ["e", u, v] => {
                let (u, v) = (num(u)?, num(v)?);
                if u == v {
                    return Err(IrError::SelfLoop { line, vertex: u });
                }
                let Some((g, _)) = graph.as_mut() else {
                    return Err(err("edge before header"));
                };
                let n = g.n();
                for x in [u, v] {
                    if x == 0 || x > n {
                        return Err(IrError::VertexOutOfRange { line, vertex: x, n });
                    }
                }
                g.add_edge(line, u - 1, v - 1)?;
                edges += 1;
            }
            _ => return Err(err("unrecognized line")),
        }
    }
    let (g, m) = graph.ok_or(IrError::Parse {
        line: 0,
        msg: "missing `p edge` header".to_string(),
    })?;
    if m != edges {
        return Err(IrError::Parse {
            line: 0,
            msg: format!("header announces {m} edges, found {edges}"),
        });
    }
    Ok(g)
}

/// Number of automorphisms, by backtracking over vertex images with an
/// adjacency check against every vertex mapped so far.
pub fn graph_aut_order(g: &Graph) -> Result<u64, IrError> {
    const CAP: usize = 10;
    if g.n() > CAP {
        return Err(IrError::TooLarge { n: g.n(), cap: CAP });
    }
    fn extend(g: &Graph, image: &mut Vec<usize>, used: &mut [bool]) -> u64 {
        let v = image.len();
        if v == g.n() {
            return 1;
        }
        let mut count = 0;
        for w in 0..g.n() {
            if used[w] || g.degree(w) != g.degree(v) {
                continue;
            }
            if (0..v).all(|u| g.has_edge(u, v) == g.has_edge(image[u], w)) {
                used[w] = true;
                image.push(w);
                count += extend(g, image, used);
                image.pop();
                used[w] = false;
            }
        }
        count
    }
    Ok(extend(g, &mut Vec::new(), &mut vec![false; g.n()]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_k2_and_c4() {
        let k2 = parse_graph("p edge 2 1\ne 1 2\n").unwrap();
        assert_eq!(k2, Graph::complete(2));
        let c4 = parse_graph("c square\np edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n").unwrap();
        assert_eq!(c4, Graph::cycle(4));
        assert_eq!(parse_graph(&c4.to_text()).unwrap(), c4);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_graph("e 1 1"),
            Err(IrError::SelfLoop { vertex: 1, .. })
        ));
        assert!(matches!(
            parse_graph("p edge 3 2\ne 1 2\ne 2 1\n"),
            Err(IrError::DuplicateEdge { line: 3, .. })
        ));
        assert!(matches!(
            parse_graph("p edge 3 1\ne 1 4\n"),
            Err(IrError::VertexOutOfRange { vertex: 4, .. })
        ));
        assert!(matches!(
            parse_graph("p edge 3 2\ne 1 2\n"),
            Err(IrError::Parse { .. })
        ));
        assert!(matches!(
            parse_graph("q 1 2\n"),
            Err(IrError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn automorphism_counts() {
        let cases = [
            (Graph::complete(2), 2),
            (Graph::complete(3), 6),
            (Graph::path(4), 2),
            (Graph::cycle(4), 8),
            (Graph::cycle(5), 10),
            (Graph::cycle(6), 12),
            (Graph::star(3), 6),
            (Graph::complete(3).disjoint_union(&Graph::complete(3)), 72),
            (Graph::empty(4), 24),
        ];
        for (g, want) in cases {
            assert_eq!(graph_aut_order(&g).unwrap(), want, "{g:?}");
        }
    }

    #[test]
    fn relabeling_keeps_the_count() {
        let g = Graph::path(5).disjoint_union(&Graph::cycle(3));
        let perm = [7, 2, 5, 0, 3, 6, 1, 4];
        let h = g.relabel(&perm);
        assert_eq!(h.edges().len(), g.edges().len());
        assert_eq!(graph_aut_order(&h).unwrap(), graph_aut_order(&g).unwrap());
    }
}
