use super::Graph;

/// Vertex coloring with dense colors `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring(pub Vec<u32>);

impl Coloring {
    pub fn uniform(n: usize) -> Self {
        Coloring(vec![0; n])
    }

    pub fn color(&self, v: usize) -> u32 {
        self.0[v]
    }

    pub fn class_count(&self) -> usize {
        self.0.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn is_discrete(&self) -> bool {
        self.class_count() == self.0.len()
    }

    /// Vertices of color `c`, increasing.
    pub fn cell(&self, c: u32) -> Vec<usize> {
        (0..self.0.len()).filter(|&v| self.0[v] == c).collect()
    }

    /// The non-singleton class of smallest color, if any.
    pub fn target_cell(&self) -> Option<Vec<usize>> {
        let mut sizes = vec![0usize; self.class_count()];
        for &c in &self.0 {
            sizes[c as usize] += 1;
        }
        let c = sizes.iter().position(|&s| s >= 2)?;
        Some(self.cell(c as u32))
    }
}

/// Replaces each key by its rank among the distinct keys.
fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut sorted = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("present") as u32)
        .collect()
}

/// Color refinement to the coarsest stable coloring finer than `start`.
/// Each round recolors every vertex by the rank of (own color, sorted
/// neighbor colors); colors never depend on vertex names.
pub fn color_refine(g: &Graph, start: &Coloring) -> Coloring {
    let mut colors = rank(&start.0);
    loop {
        let sigs: Vec<(u32, Vec<u32>)> = (0..g.n())
            .map(|v| {
                let mut nb: Vec<u32> = g.neighbors(v).map(|u| colors[u]).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = rank(&sigs);
        let stable = next.iter().max() == colors.iter().max();
        colors = next;
        if stable {
            return Coloring(colors);
        }
    }
}

/// Gives `v` a color of its own, just below the rest of its class, then
/// refines.
pub fn individualize(g: &Graph, coloring: &Coloring, v: usize) -> Coloring {
    let mut split: Vec<u32> = coloring.0.iter().map(|&c| 2 * c + 1).collect();
    split[v] -= 1;
    color_refine(g, &Coloring(split))
}
