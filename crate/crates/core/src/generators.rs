//! Instance families. Every generator is a pure function of its parameters
//! and seed, and every output satisfies the invariance axiom by construction.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::tree::{ColorId, NodeId, SearchTree, TreeError};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Largest height accepted by [`gen_mh`]; 𝓜₂₄ already has 33M nodes.
pub const MAX_MH_HEIGHT: usize = 24;

/// Complete binary tree of height `h` whose `2^h` leaves carry the distinct
/// colors `0..2^h`, left to right.
pub fn gen_mh(h: usize) -> Result<SearchTree, GenError> {
    if h > MAX_MH_HEIGHT {
        return Err(TreeError::TooLarge {
            requested: (1u64 << (h.min(62) + 1)) - 1,
            cap: (1u64 << (MAX_MH_HEIGHT + 1)) - 1,
        }
        .into());
    }
    let n = (1usize << (h + 1)) - 1;
    let internal = (1usize << h) - 1;
    let mut children = Vec::with_capacity(n);
    let mut colors = Vec::with_capacity(n);
    for i in 0..n {
        if i < internal {
            children.push(vec![NodeId(2 * i as u32 + 1), NodeId(2 * i as u32 + 2)]);
            colors.push(None);
        } else {
            children.push(Vec::new());
            colors.push(Some(ColorId((i - internal) as u64)));
        }
    }
    Ok(SearchTree::from_children(NodeId(0), children, colors)?)
}

/// Same abstract colored tree with every child list independently shuffled
/// and node ids renumbered in the new breadth-first order.
pub fn iso_shuffle(tree: &SearchTree, seed: u64) -> SearchTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut old_order = vec![tree.root()];
    let mut children: Vec<Vec<NodeId>> = Vec::with_capacity(tree.len());
    let mut colors = Vec::with_capacity(tree.len());
    let mut head = 0;
    while head < old_order.len() {
        let v = old_order[head];
        head += 1;
        let mut kids = tree.children(v).to_vec();
        kids.shuffle(&mut rng);
        let first = old_order.len() as u32;
        children.push((first..first + kids.len() as u32).map(NodeId).collect());
        colors.push(tree.color(v));
        old_order.extend(kids);
    }
    SearchTree::from_children(NodeId(0), children, colors).expect("shuffle preserves validity")
}

/// Parameters for random trees whose symmetries come from duplicated
/// sibling subtrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitTreeSpec {
    /// Approximate node count; duplication makes the final size drift.
    pub target_size: usize,
    pub max_degree: usize,
    /// Probability that a non-first child is an exact copy of an earlier sibling.
    pub duplication_prob: f64,
    pub height_cap: usize,
}

impl OrbitTreeSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.max_degree < 2 {
            return Err(GenError::InvalidParam(
                "max_degree must be at least 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.duplication_prob) {
            return Err(GenError::InvalidParam(
                "duplication_prob must lie in [0, 1]".into(),
            ));
        }
        if self.target_size == 0 || self.target_size as u64 > SearchTree::MAX_NODES {
            return Err(GenError::InvalidParam("target_size out of range".into()));
        }
        Ok(())
    }
}

impl Default for OrbitTreeSpec {
    fn default() -> Self {
        OrbitTreeSpec {
            target_size: 200,
            max_degree: 3,
            duplication_prob: 0.5,
            height_cap: 32,
        }
    }
}

struct Arena {
    children: Vec<Vec<usize>>,
    base_color: Vec<u64>,
    next_base: u64,
}

impl Arena {
    fn leaf(&mut self) -> usize {
        self.children.push(Vec::new());
        self.base_color.push(self.next_base);
        self.next_base += 1;
        self.children.len() - 1
    }

    fn copy(&mut self, v: usize) -> usize {
        let id = self.children.len();
        self.children.push(Vec::new());
        self.base_color.push(self.base_color[v]);
        let kids = self.children[v].clone();
        let copies: Vec<usize> = kids.into_iter().map(|c| self.copy(c)).collect();
        self.children[id] = copies;
        id
    }

    fn grow(
        &mut self,
        budget: usize,
        depth: usize,
        spec: &OrbitTreeSpec,
        rng: &mut ChaCha8Rng,
    ) -> usize {
        if budget < 3 || depth >= spec.height_cap {
            return self.leaf();
        }
        let remaining = budget - 1;
        let k = rng.gen_range(2..=spec.max_degree.min(remaining));
        // Random composition of `remaining` into k positive parts.
        let mut cuts: Vec<usize> = index::sample(rng, remaining - 1, k - 1)
            .into_iter()
            .map(|c| c + 1)
            .collect();
        cuts.sort_unstable();
        cuts.push(remaining);
        let id = self.children.len();
        self.children.push(Vec::new());
        self.base_color.push(u64::MAX);
        let mut kids: Vec<usize> = Vec::with_capacity(k);
        let mut prev = 0;
        for (i, &cut) in cuts.iter().enumerate() {
            let share = cut - prev;
            prev = cut;
            let child = if i > 0 && rng.gen_bool(spec.duplication_prob) {
                let src = kids[rng.gen_range(0..kids.len())];
                self.copy(src)
            } else {
                self.grow(share, depth + 1, spec, rng)
            };
            kids.push(child);
        }
        self.children[id] = kids;
        id
    }
}

/// Random tree in which identical sibling subtrees arise only by explicit
/// duplication, with every leaf colored by its orbit under the automorphisms
/// that permute identical siblings.
pub fn gen_orbit_tree(spec: &OrbitTreeSpec, seed: u64) -> Result<SearchTree, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arena = Arena {
        children: Vec::new(),
        base_color: Vec::new(),
        next_base: 0,
    };
    let root = arena.grow(spec.target_size, 0, spec, &mut rng);
    let n = arena.children.len();
    if n as u64 > SearchTree::MAX_NODES {
        return Err(TreeError::TooLarge {
            requested: n as u64,
            cap: SearchTree::MAX_NODES,
        }
        .into());
    }

    // Breadth-first order over the arena; renumber so the root is 0.
    let mut order = vec![root];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        order.extend(arena.children[v].iter().copied());
    }

    // Structural identity of each subtree, bottom-up.
    let mut code = vec![0u32; n];
    let mut codes: FxHashMap<(Option<u64>, Vec<u32>), u32> = FxHashMap::default();
    for &v in order.iter().rev() {
        let key = if arena.children[v].is_empty() {
            (Some(arena.base_color[v]), Vec::new())
        } else {
            let mut kids: Vec<u32> = arena.children[v].iter().map(|&c| code[c]).collect();
            kids.sort_unstable();
            (None, kids)
        };
        let next = codes.len() as u32;
        code[v] = *codes.entry(key).or_insert(next);
    }

    // Two leaves share an orbit iff the identities along their root paths agree.
    let mut orbit = vec![0u32; n];
    let mut orbits: FxHashMap<(u32, u32), u32> = FxHashMap::default();
    let mut leaf_color: FxHashMap<u32, u64> = FxHashMap::default();
    let mut new_id = vec![0u32; n];
    for (k, &v) in order.iter().enumerate() {
        new_id[v] = k as u32;
    }
    let mut children = vec![Vec::new(); n];
    let mut colors = vec![None; n];
    orbit[root] = 0;
    for &v in &order {
        for &c in &arena.children[v] {
            let next = orbits.len() as u32 + 1;
            orbit[c] = *orbits.entry((orbit[v], code[c])).or_insert(next);
        }
        if arena.children[v].is_empty() {
            let next = leaf_color.len() as u64;
            let color = *leaf_color.entry(orbit[v]).or_insert(next);
            colors[new_id[v] as usize] = Some(ColorId(color));
        }
        children[new_id[v] as usize] = arena.children[v]
            .iter()
            .map(|&c| NodeId(new_id[c]))
            .collect();
    }
    Ok(SearchTree::from_children(NodeId(0), children, colors)?)
}

/// Two 𝓜ₕ-shaped trees with disjoint color sets: the first uses `0..2^h`,
/// the second (shuffled) uses `2^h..2^(h+1)`.
pub fn gen_noniso_pair(h: usize, seed: u64) -> Result<(SearchTree, SearchTree), GenError> {
    let base = gen_mh(h)?;
    let other = iso_shuffle(&base.with_color_offset(1u64 << h), seed);
    Ok((base, other))
}

/// Prunes a copy of 𝓜₂ₕ: internal nodes at depth ≥ h are visited deepest
/// first, and each is replaced (with its whole subtree) by a fresh leaf with
/// probability `prune_prob`. Returns the surviving structure as child lists
/// plus the number of leaves.
fn pruned_mh2(h: usize, prune_prob: f64, rng: &mut ChaCha8Rng) -> (Vec<Vec<usize>>, usize) {
    let height = 2 * h;
    let n = (1usize << (height + 1)) - 1;
    let internal = (1usize << height) - 1;
    let first_candidate = (1usize << h) - 1;
    let mut pruned = vec![false; n];
    for v in (first_candidate..internal).rev() {
        if rng.gen_bool(prune_prob) {
            pruned[v] = true;
        }
    }
    let mut children = vec![Vec::new(); n];
    let mut stack = vec![0usize];
    let mut leaves = 0;
    while let Some(v) = stack.pop() {
        if v < internal && !pruned[v] {
            children[v] = vec![2 * v + 1, 2 * v + 2];
            stack.extend([2 * v + 1, 2 * v + 2]);
        } else {
            leaves += 1;
        }
    }
    (children, leaves)
}

fn compact(children: &[Vec<usize>], first_color: u64) -> SearchTree {
    let mut order = vec![0usize];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        order.extend(children[v].iter().copied());
    }
    let mut new_id = FxHashMap::default();
    for (k, &v) in order.iter().enumerate() {
        new_id.insert(v, k as u32);
    }
    let mut out_children = Vec::with_capacity(order.len());
    let mut colors = Vec::with_capacity(order.len());
    let mut next_color = first_color;
    for &v in &order {
        out_children.push(children[v].iter().map(|c| NodeId(new_id[c])).collect());
        if children[v].is_empty() {
            colors.push(Some(ColorId(next_color)));
            next_color += 1;
        } else {
            colors.push(None);
        }
    }
    SearchTree::from_children(NodeId(0), out_children, colors).expect("pruned tree is valid")
}

/// Pair of independently pruned subtrees of 𝓜₂ₕ with leaves on several
/// levels. All leaf colors are distinct within and across the two trees, so
/// the pair is a NO-instance. With `planted`, the second tree is instead an
/// iso-shuffled copy of the first, giving a YES-instance of the same family.
pub fn gen_pruned_pair(
    h: usize,
    prune_prob: f64,
    seed: u64,
    planted: bool,
) -> Result<(SearchTree, SearchTree), GenError> {
    if h == 0 {
        return Err(GenError::InvalidParam("h must be at least 1".into()));
    }
    if 2 * h > MAX_MH_HEIGHT {
        return Err(GenError::InvalidParam(format!(
            "h={h} exceeds the size cap"
        )));
    }
    if !(0.0..1.0).contains(&prune_prob) {
        return Err(GenError::InvalidParam(
            "prune_prob must lie in [0, 1)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c1, leaves1) = pruned_mh2(h, prune_prob, &mut rng);
    let t1 = compact(&c1, 0);
    if planted {
        let shuffle_seed = rng.gen();
        return Ok((t1.clone(), iso_shuffle(&t1, shuffle_seed)));
    }
    let (c2, _) = pruned_mh2(h, prune_prob, &mut rng);
    let t2 = compact(&c2, leaves1 as u64);
    Ok((t1, t2))
}
