//! Line-based tree format.
//!
//! ```text
//! # comment
//! tree 3
//! 0 - -
//! 1 0 4
//! 2 0 9
//! ```
//!
//! One line per node: `<id> <parent|-> <color|->`. Children of a node are the
//! lines naming it as parent, in file order.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;

use super::{ColorId, NodeId, SearchTree, TreeError};

fn malformed(line: usize, msg: impl Into<String>) -> TreeError {
    TreeError::Malformed {
        line,
        msg: msg.into(),
    }
}

fn parse_opt(tok: &str, line: usize, what: &str) -> Result<Option<u64>, TreeError> {
    if tok == "-" {
        return Ok(None);
    }
    tok.parse::<u64>()
        .map(Some)
        .map_err(|_| malformed(line, format!("bad {what} `{tok}`")))
}

/// Parses a tree document and validates every model invariant.
pub fn load_tree(text: &str) -> Result<SearchTree, TreeError> {
    let mut declared: Option<usize> = None;
    // (line number, id, parent id, color)
    let mut rows: Vec<(usize, u64, Option<u64>, Option<u64>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if declared.is_none() {
            match toks.as_slice() {
                ["tree", n] => {
                    let n = n
                        .parse::<usize>()
                        .map_err(|_| malformed(lineno, format!("bad node count `{n}`")))?;
                    if n as u64 > SearchTree::MAX_NODES {
                        return Err(TreeError::TooLarge {
                            requested: n as u64,
                            cap: SearchTree::MAX_NODES,
                        });
                    }
                    declared = Some(n);
                    continue;
                }
                _ => return Err(malformed(lineno, "expected header `tree <node-count>`")),
            }
        }
        let [id, parent, color] = toks.as_slice() else {
            return Err(malformed(lineno, "expected `<id> <parent|-> <color|->`"));
        };
        let id = id
            .parse::<u64>()
            .map_err(|_| malformed(lineno, format!("bad node id `{id}`")))?;
        let parent = parse_opt(parent, lineno, "parent id")?;
        let color = parse_opt(color, lineno, "color")?;
        rows.push((lineno, id, parent, color));
    }

    let declared = declared.ok_or_else(|| malformed(0, "missing header"))?;
    if rows.len() != declared {
        return Err(malformed(
            0,
            format!("header declares {declared} nodes, found {}", rows.len()),
        ));
    }

    let mut index: FxHashMap<u64, u32> = FxHashMap::default();
    for (k, &(lineno, id, _, _)) in rows.iter().enumerate() {
        if index.insert(id, k as u32).is_some() {
            return Err(malformed(lineno, format!("duplicate node id {id}")));
        }
    }

    let mut entries = Vec::with_capacity(rows.len());
    for &(lineno, _, parent, color) in &rows {
        let parent = match parent {
            None => None,
            Some(p) => Some(
                *index
                    .get(&p)
                    .ok_or_else(|| malformed(lineno, format!("unknown parent {p}")))?,
            ),
        };
        entries.push((parent, color));
    }

    let ids: Vec<u64> = rows.iter().map(|r| r.1).collect();
    let n = entries.len();
    let mut nodes: Vec<super::NodeRecord> = entries
        .iter()
        .map(|&(p, c)| super::NodeRecord {
            parent: p.map(NodeId),
            children: Vec::new(),
            color: c.map(ColorId),
        })
        .collect();
    let mut roots = Vec::new();
    for (i, &(p, _)) in entries.iter().enumerate() {
        match p {
            None => roots.push(i),
            Some(p) if p as usize == i => return Err(TreeError::Cycle(ids[i])),
            Some(p) => nodes[p as usize].children.push(NodeId(i as u32)),
        }
    }
    if roots.len() != 1 {
        return Err(TreeError::RootCount(roots.len()));
    }
    debug_assert_eq!(nodes.len(), n);
    let tree = SearchTree {
        nodes,
        root: NodeId(roots[0] as u32),
    };
    tree.validate(|i| ids[i])?;
    Ok(tree)
}

/// Serializes a tree. Nodes are renumbered in breadth-first order, which keeps
/// every child list in its stored order.
pub fn save_tree(tree: &SearchTree) -> String {
    let order = tree.bfs_order();
    let mut new_id = vec![0u32; tree.len()];
    for (k, v) in order.iter().enumerate() {
        new_id[v.index()] = k as u32;
    }
    let mut out = String::with_capacity(tree.len() * 12);
    let _ = writeln!(out, "tree {}", tree.len());
    for v in order {
        let parent = tree
            .parent(v)
            .map_or_else(|| "-".to_string(), |p| new_id[p.index()].to_string());
        let color = tree
            .color(v)
            .map_or_else(|| "-".to_string(), |c| c.0.to_string());
        let _ = writeln!(out, "{} {} {}", new_id[v.index()], parent, color);
    }
    out
}
