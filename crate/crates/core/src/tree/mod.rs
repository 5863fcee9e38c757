//! Rooted, depth-truncated trees.
//!
//! Vertex ids are dense and assigned in breadth-first order with the root at
//! 0. A consequence used throughout the crate: the children of `v` occupy a
//! contiguous id range, every parent id is smaller than its children's ids,
//! and iterating ids in reverse visits children before parents.
//!
//! An edge `(v⁻¹, v)` is identified by its lower endpoint `v`.

mod cutset;
mod io;
mod profile;

pub use cutset::{enumerate_cutsets, min_cutset_sum, Cutset, EdgeWeighting, MAX_ENUMERATION_EDGES};
pub use io::{read_tree, write_tree};
pub use profile::{
    branching_ruin_estimate, min_cutset_sum_profile, polynomial_level_exponent, BranchingRuinEstimate, CutsetRow,
    LevelProfile, StandardFamily, TreeFamily,
};
pub(crate) use profile::{check_grid, summarize};

use std::collections::{HashMap, VecDeque};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest number of vertices a generator will allocate.
pub const DEFAULT_MAX_VERTICES: usize = 1 << 25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("truncation depth must be at least 1")]
    ZeroDepth,
    #[error("regular tree needs d >= 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("polynomial exponent must be positive and finite, got {0}")]
    BadExponent(f64),
    #[error("tree would have more than {limit} vertices")]
    TooLarge { limit: usize },
    #[error("edge list is empty")]
    Empty,
    #[error("vertex 0 does not appear as a parent")]
    MissingRoot,
    #[error("edge list contains a cycle through vertex {0}")]
    Cycle(usize),
    #[error("vertex {0} is not connected to the root")]
    Disconnected(usize),
    #[error("vertex {0} is listed as a child more than once")]
    DuplicateChild(usize),
    #[error("tree has no edges")]
    EmptyTree,
    #[error("{what} has {edges} edges, above the enumeration limit of {limit}")]
    EnumerationGuard { what: &'static str, edges: usize, limit: usize },
    #[error("gamma grid is empty")]
    EmptyGrid,
    #[error("depth list is empty")]
    EmptyDepths,
    #[error("invalid weight {value} on edge into vertex {vertex}")]
    BadWeight { vertex: usize, value: f64 },
    #[error("weighting has {got} entries, tree has {expected} vertices")]
    WeightLength { expected: usize, got: usize },
    #[error("cannot parse tree file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {0} is not in the tree")]
    NoSuchVertex(usize),
}

/// An oriented edge `(parent, child)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Edge {
    pub parent: usize,
    pub child: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<u32>,
    depth: Vec<u32>,
    // children of v are first_child[v]..first_child[v + 1]
    first_child: Vec<u32>,
    truncation_depth: usize,
}

const NO_PARENT: u32 = u32::MAX;

impl Tree {
    /// Builds a tree from per-vertex child counts listed in breadth-first order.
    pub fn from_child_counts(counts: &[usize]) -> Result<Tree, TreeError> {
        let n = counts.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if n >= NO_PARENT as usize {
            return Err(TreeError::TooLarge { limit: NO_PARENT as usize - 1 });
        }
        let total: usize = counts.iter().sum();
        if total != n - 1 {
            return Err(TreeError::Parse { line: 0, msg: format!("child counts sum to {total}, expected {}", n - 1) });
        }
        let mut parent = vec![NO_PARENT; n];
        let mut depth = vec![0u32; n];
        let mut first_child = Vec::with_capacity(n + 1);
        let mut next = 1usize;
        for v in 0..n {
            if v > 0 && v >= next {
                return Err(TreeError::Disconnected(v));
            }
            first_child.push(next as u32);
            for c in next..next + counts[v] {
                parent[c] = v as u32;
                depth[c] = depth[v] + 1;
            }
            next += counts[v];
        }
        first_child.push(next as u32);
        let truncation_depth = *depth.last().unwrap() as usize;
        Ok(Tree { parent, depth, first_child, truncation_depth })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.len() - 1
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    pub fn children(&self, v: usize) -> Range<usize> {
        self.first_child[v] as usize..self.first_child[v + 1] as usize
    }

    pub fn num_children(&self, v: usize) -> usize {
        (self.first_child[v + 1] - self.first_child[v]) as usize
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    pub fn degree(&self, v: usize) -> usize {
        self.num_children(v) + usize::from(v != 0)
    }

    pub fn truncation_depth(&self) -> usize {
        self.truncation_depth
    }

    /// Vertex at the truncation depth; such leaves stand for an infinite continuation.
    pub fn is_truncation_leaf(&self, v: usize) -> bool {
        self.depth(v) == self.truncation_depth
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.num_children(v) == 0
    }

    /// Neighbours of `v` in increasing id order: parent first, then children.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.parent(v).into_iter().chain(self.children(v))
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.parent(a) == Some(b) || self.parent(b) == Some(a)
    }

    pub fn edge(&self, child: usize) -> Edge {
        Edge { parent: self.parent(child).expect("root has no parent edge"), child }
    }

    /// All edges in breadth-first order of their lower endpoint.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (1..self.len()).map(|v| self.edge(v))
    }

    /// Vertices `ρ = p_0, p_1, …, p_k = v` along the root path.
    pub fn path_from_root(&self, v: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.depth(v) + 1);
        let mut x = Some(v);
        while let Some(y) = x {
            path.push(y);
            x = self.parent(y);
        }
        path.reverse();
        path
    }

    /// Whether `a` lies on the root path of `b` (a vertex is its own ancestor).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut x = b;
        while self.depth(x) > self.depth(a) {
            x = self.parent[x] as usize;
        }
        x == a
    }

    /// Deepest common vertex of the root paths of `a` and `b`.
    pub fn common_ancestor(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth(a) > self.depth(b) {
            a = self.parent[a] as usize;
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent[b] as usize;
        }
        while a != b {
            a = self.parent[a] as usize;
            b = self.parent[b] as usize;
        }
        a
    }

    /// Id range of the vertices at depth `d` (empty past the truncation depth).
    pub fn level(&self, d: usize) -> Range<usize> {
        let start = self.depth.partition_point(|&x| (x as usize) < d);
        let end = self.depth.partition_point(|&x| (x as usize) <= d);
        start..end
    }

    /// Lowest-id vertex at depth `d`.
    pub fn leftmost_at_depth(&self, d: usize) -> Option<usize> {
        let r = self.level(d);
        (!r.is_empty()).then_some(r.start)
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.truncation_depth + 1];
        for &d in &self.depth {
            sizes[d as usize] += 1;
        }
        sizes
    }

    /// Restriction to the vertices at depth at most `depth`.
    pub fn truncate(&self, depth: usize) -> Result<Tree, TreeError> {
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        let keep = self.level(depth.min(self.truncation_depth)).end;
        let counts: Vec<usize> =
            (0..keep).map(|v| if self.depth(v) < depth { self.num_children(v) } else { 0 }).collect();
        Tree::from_child_counts(&counts)
    }
}

fn check_size(n: usize, limit: usize) -> Result<(), TreeError> {
    if n > limit {
        Err(TreeError::TooLarge { limit })
    } else {
        Ok(())
    }
}

/// The path `ρ – v₁ – … – v_L`.
pub fn build_path(depth: usize) -> Result<Tree, TreeError> {
    if depth == 0 {
        return Err(TreeError::ZeroDepth);
    }
    check_size(depth + 1, DEFAULT_MAX_VERTICES)?;
    let mut counts = vec![1usize; depth + 1];
    counts[depth] = 0;
    Tree::from_child_counts(&counts)
}

/// Root of degree `d`, every other internal vertex of degree `d` as well.
pub fn build_regular(d: usize, depth: usize) -> Result<Tree, TreeError> {
    if d < 2 {
        return Err(TreeError::DegreeTooSmall(d));
    }
    if depth == 0 {
        return Err(TreeError::ZeroDepth);
    }
    let mut level = vec![1usize, d];
    let mut total = 1 + d;
    for _ in 1..depth {
        let next = level.last().unwrap().checked_mul(d - 1);
        match next {
            Some(s) if total + s <= DEFAULT_MAX_VERTICES => {
                total += s;
                level.push(s);
            }
            _ => return Err(TreeError::TooLarge { limit: DEFAULT_MAX_VERTICES }),
        }
    }
    let mut counts = Vec::with_capacity(total);
    counts.push(d);
    for (n, &s) in level.iter().enumerate().skip(1) {
        let c = if n < depth { d - 1 } else { 0 };
        counts.extend(std::iter::repeat_n(c, s));
    }
    Tree::from_child_counts(&counts)
}

/// Spherically symmetric tree with level sizes `s(n) = 2^⌊b·log₂ n⌋` for `n ≥ 1`.
///
/// A vertex at depth `n ≥ 1` has `2^(⌊b·log₂(n+1)⌋ − ⌊b·log₂ n⌋)` children and
/// the root has one child. For `b ≤ 1` this is the "two children when the floor
/// increments, one otherwise" rule.
pub fn build_polynomial(b: f64, depth: usize) -> Result<Tree, TreeError> {
    build_polynomial_with_limit(b, depth, DEFAULT_MAX_VERTICES)
}

pub fn build_polynomial_with_limit(b: f64, depth: usize, limit: usize) -> Result<Tree, TreeError> {
    let profile = LevelProfile::polynomial(b, depth as u64)?;
    let sizes = profile.exact_sizes(limit)?;
    spherical_from_sizes(&sizes)
}

/// Spherically symmetric tree with the given level sizes (`sizes[0] = 1`).
pub fn spherical_from_sizes(sizes: &[usize]) -> Result<Tree, TreeError> {
    if sizes.len() < 2 {
        return Err(TreeError::ZeroDepth);
    }
    let total: usize = sizes.iter().sum();
    let mut counts = Vec::with_capacity(total);
    for n in 0..sizes.len() {
        if n + 1 == sizes.len() {
            counts.extend(std::iter::repeat_n(0, sizes[n]));
        } else {
            let ratio = sizes[n + 1] / sizes[n];
            debug_assert_eq!(ratio * sizes[n], sizes[n + 1]);
            counts.extend(std::iter::repeat_n(ratio, sizes[n]));
        }
    }
    Tree::from_child_counts(&counts)
}

/// Galton–Watson tree with offspring uniform on `min_children..=max_children`,
/// grown to depth `depth`. The root always has at least one child.
pub fn build_random(max_children: usize, min_children: usize, depth: usize, seed: u64) -> Result<Tree, TreeError> {
    if depth == 0 {
        return Err(TreeError::ZeroDepth);
    }
    if max_children == 0 || min_children > max_children {
        return Err(TreeError::DegreeTooSmall(max_children));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::new();
    let mut frontier = 1usize;
    for n in 0..=depth {
        let mut next = 0usize;
        for i in 0..frontier {
            let c = if n == depth {
                0
            } else {
                let lo = if n == 0 && i == 0 { min_children.max(1) } else { min_children };
                rng.random_range(lo..=max_children)
            };
            next += c;
            counts.push(c);
        }
        check_size(counts.len() + next, DEFAULT_MAX_VERTICES)?;
        frontier = next;
        if frontier == 0 {
            break;
        }
    }
    Tree::from_child_counts(&counts)
}

/// Builds a tree from `(parent, child)` pairs.
///
/// Ids are relabelled into breadth-first order; children keep their order of
/// appearance in the list.
pub fn build_from_edge_list(edges: &[(usize, usize)]) -> Result<Tree, TreeError> {
    if edges.is_empty() {
        return Err(TreeError::Empty);
    }
    let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut parent_of: HashMap<usize, usize> = HashMap::new();
    for &(p, c) in edges {
        if p == c {
            return Err(TreeError::Cycle(p));
        }
        if parent_of.insert(c, p).is_some() {
            return Err(TreeError::DuplicateChild(c));
        }
        children.entry(p).or_default().push(c);
    }
    if !children.contains_key(&0) {
        return Err(TreeError::MissingRoot);
    }
    let mut order = vec![0usize];
    let mut counts = Vec::new();
    let mut seen = std::collections::HashSet::from([0usize]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let kids = children.get(&v).map(Vec::as_slice).unwrap_or(&[]);
        counts.push(kids.len());
        for &c in kids {
            if !seen.insert(c) {
                return Err(TreeError::Cycle(c));
            }
            order.push(c);
            queue.push_back(c);
        }
    }
    if let Some(&p) = parent_of.get(&0) {
        // the root has a parent: either that parent hangs below the root (cycle)
        // or the root is not the top of its component
        return Err(if seen.contains(&p) { TreeError::Cycle(0) } else { TreeError::Disconnected(p) });
    }
    let mut stray: Vec<usize> =
        parent_of.keys().chain(children.keys()).copied().filter(|v| !seen.contains(v)).collect();
    stray.sort_unstable();
    if let Some(&v) = stray.first() {
        // follow parents: a component without a parentless vertex contains a cycle
        let mut x = v;
        for _ in 0..=parent_of.len() {
            match parent_of.get(&x) {
                Some(&p) => x = p,
                None => return Err(TreeError::Disconnected(v)),
            }
        }
        return Err(TreeError::Cycle(x));
    }
    Tree::from_child_counts(&counts)
}
