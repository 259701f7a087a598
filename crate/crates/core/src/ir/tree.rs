use std::cell::RefCell;
use std::sync::{Arc, Mutex};

use rustc_hash::FxHashMap;

use super::refine::{color_refine, individualize, Coloring};
use super::{Graph, IrError};
use crate::tree::{BlackBoxTree, ColorId, NodeId};

/// Largest graph accepted by [`IrTree::new`].
pub const IR_VERTEX_CAP: usize = 10;

/// Interns leaf certificates as dense color ids. Two trees sharing one
/// table get equal leaf colors exactly when their leaf certificates are
/// equal.
#[derive(Debug, Clone, Default)]
pub struct CertificateTable(Arc<Mutex<FxHashMap<Vec<u8>, u64>>>);

impl CertificateTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&self, cert: Vec<u8>) -> ColorId {
        let mut map = self.0.lock().expect("certificate table poisoned");
        let next = map.len() as u64;
        ColorId(*map.entry(cert).or_insert(next))
    }

    pub fn len(&self) -> usize {
        self.0.lock().expect("certificate table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug)]
struct IrNode {
    coloring: Coloring,
    /// Individualized vertices from the root down.
    seq: Vec<usize>,
    target: Vec<usize>,
    children: Vec<Option<NodeId>>,
    color: Option<ColorId>,
}

/// Individualization-refinement tree of a graph, built on demand as the
/// session asks for children. Not `Sync`: each trial owns its trees.
#[derive(Debug)]
pub struct IrTree {
    graph: Graph,
    table: CertificateTable,
    nodes: RefCell<Vec<IrNode>>,
}

impl IrTree {
    pub fn new(graph: Graph, table: CertificateTable) -> Result<Self, IrError> {
        if graph.n() > IR_VERTEX_CAP {
            return Err(IrError::TooLarge {
                n: graph.n(),
                cap: IR_VERTEX_CAP,
            });
        }
        let coloring = color_refine(&graph, &Coloring::uniform(graph.n()));
        let tree = IrTree {
            graph,
            table,
            nodes: RefCell::new(Vec::new()),
        };
        let root = tree.make_node(coloring, Vec::new());
        tree.nodes.borrow_mut().push(root);
        Ok(tree)
    }

    /// A tree with its own certificate table.
    pub fn standalone(graph: Graph) -> Result<Self, IrError> {
        Self::new(graph, CertificateTable::new())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Nodes materialized so far.
    pub fn materialized(&self) -> usize {
        self.nodes.borrow().len()
    }

    /// Individualization sequence leading to `v`.
    pub fn sequence(&self, v: NodeId) -> Vec<usize> {
        self.nodes.borrow()[v.index()].seq.clone()
    }

    pub fn coloring(&self, v: NodeId) -> Coloring {
        self.nodes.borrow()[v.index()].coloring.clone()
    }

    fn make_node(&self, coloring: Coloring, seq: Vec<usize>) -> IrNode {
        let (target, color) = match coloring.target_cell() {
            Some(cell) => (cell, None),
            None => (
                Vec::new(),
                Some(self.table.intern(self.certificate(&coloring))),
            ),
        };
        IrNode {
            coloring,
            seq,
            children: vec![None; target.len()],
            target,
            color,
        }
    }

    /// The graph renamed by a discrete coloring: n, degree sequence, then
    /// the upper triangle of the adjacency matrix, all in color order.
    fn certificate(&self, coloring: &Coloring) -> Vec<u8> {
        let n = self.graph.n();
        let mut by_color = vec![0; n];
        for v in 0..n {
            by_color[coloring.color(v) as usize] = v;
        }
        let mut cert = Vec::with_capacity(1 + n + n * n / 2);
        cert.push(n as u8);
        cert.extend(by_color.iter().map(|&v| self.graph.degree(v) as u8));
        for i in 0..n {
            for j in i + 1..n {
                cert.push(self.graph.has_edge(by_color[i], by_color[j]) as u8);
            }
        }
        cert
    }
}

impl BlackBoxTree for IrTree {
    fn root(&self) -> NodeId {
        NodeId(0)
    }

    fn degree(&self, v: NodeId) -> usize {
        self.nodes.borrow()[v.index()].target.len()
    }

    fn child(&self, v: NodeId, index: usize) -> NodeId {
        let (coloring, mut seq, x) = {
            let nodes = self.nodes.borrow();
            let node = &nodes[v.index()];
            if let Some(c) = node.children[index] {
                return c;
            }
            (node.coloring.clone(), node.seq.clone(), node.target[index])
        };
        let refined = individualize(&self.graph, &coloring, x);
        seq.push(x);
        let child = self.make_node(refined, seq);
        let mut nodes = self.nodes.borrow_mut();
        let id = NodeId(nodes.len() as u32);
        nodes.push(child);
        nodes[v.index()].children[index] = Some(id);
        id
    }

    fn color(&self, v: NodeId) -> Option<ColorId> {
        self.nodes.borrow()[v.index()].color
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::graph_aut_order;
    use crate::tree::SearchTree;

    fn leaf_colors(t: &SearchTree) -> Vec<ColorId> {
        let mut c: Vec<_> = t
            .leaves()
            .into_iter()
            .map(|l| t.color(l).unwrap())
            .collect();
        c.sort();
        c
    }

    fn full(g: Graph, table: &CertificateTable) -> SearchTree {
        let t = IrTree::new(g, table.clone()).unwrap();
        SearchTree::materialize(&t, 1 << 20).unwrap()
    }

    #[test]
    fn k2_has_two_equal_leaves() {
        let t = full(Graph::complete(2), &CertificateTable::new());
        assert_eq!(t.children(t.root()).len(), 2);
        let c = leaf_colors(&t);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], c[1]);
    }

    #[test]
    fn c4_has_eight_leaves_of_one_color() {
        let t = full(Graph::cycle(4), &CertificateTable::new());
        assert_eq!(t.children(t.root()).len(), 4);
        let c = leaf_colors(&t);
        assert_eq!(c.len(), 8);
        assert!(c.iter().all(|&x| x == c[0]));
    }

    #[test]
    fn rigid_graph_is_a_single_leaf() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (5, 1), (5, 2)]).unwrap();
        let t = IrTree::standalone(g).unwrap();
        assert_eq!(t.degree(t.root()), 0);
        assert!(t.color(t.root()).is_some());
    }

    #[test]
    fn oversized_graph_is_rejected() {
        assert!(matches!(
            IrTree::standalone(Graph::empty(11)),
            Err(IrError::TooLarge { n: 11, .. })
        ));
    }

    #[test]
    fn leaf_multiplicity_is_the_automorphism_count() {
        let graphs = [
            Graph::complete(3),
            Graph::path(4),
            Graph::path(5),
            Graph::cycle(5),
            Graph::cycle(6),
            Graph::star(3),
            Graph::complete(3).disjoint_union(&Graph::complete(3)),
        ];
        for g in graphs {
            let aut = graph_aut_order(&g).unwrap() as usize;
            let t = full(g.clone(), &CertificateTable::new());
            let c = leaf_colors(&t);
            for color in &c {
                assert_eq!(c.iter().filter(|&x| x == color).count(), aut, "{g:?}");
            }
        }
    }

    #[test]
    fn children_are_built_lazily() {
        let t = IrTree::standalone(Graph::cycle(6)).unwrap();
        assert_eq!(t.materialized(), 1);
        let c = t.child(t.root(), 2);
        assert_eq!(t.materialized(), 2);
        assert_eq!(t.child(t.root(), 2), c);
        assert_eq!(t.sequence(c), vec![2]);
        assert_eq!(t.materialized(), 2);
    }

    #[test]
    fn c6_and_two_triangles_share_no_leaf_color() {
        let table = CertificateTable::new();
        let a = full(Graph::cycle(6), &table);
        let b = full(
            Graph::complete(3).disjoint_union(&Graph::complete(3)),
            &table,
        );
        let ca = leaf_colors(&a);
        assert!(leaf_colors(&b).iter().all(|c| !ca.contains(c)));
    }
}
