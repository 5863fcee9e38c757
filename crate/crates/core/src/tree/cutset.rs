use super::{Tree, TreeError};

/// Largest tree `enumerate_cutsets` accepts.
pub const MAX_ENUMERATION_EDGES: usize = 20;

/// A set of edges, stored as sorted lower endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cutset {
    edges: Vec<usize>,
}

impl Cutset {
    pub fn new(mut edges: Vec<usize>) -> Cutset {
        edges.sort_unstable();
        edges.dedup();
        Cutset { edges }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.edges.binary_search(&v).is_ok()
    }

    pub fn weight(&self, w: &EdgeWeighting) -> f64 {
        self.edges.iter().map(|&v| w.get(v)).sum()
    }

    /// Every root-to-truncation-leaf path crosses exactly one edge, and every
    /// edge lies on such a path.
    pub fn is_valid(&self, tree: &Tree) -> bool {
        if self.edges.iter().any(|&v| v == 0 || !tree.contains(v)) {
            return false;
        }
        let live = live_subtrees(tree);
        if self.edges.iter().any(|&v| !live[v]) {
            return false;
        }
        let mut crossed = vec![0u32; tree.len()];
        for v in 1..tree.len() {
            let p = tree.parent(v).unwrap();
            crossed[v] = crossed[p] + u32::from(self.contains(v));
        }
        tree.level(tree.truncation_depth()).all(|leaf| crossed[leaf] == 1)
    }
}

/// Nonnegative finite weight on each edge, indexed by lower endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeighting {
    w: Vec<f64>,
}

impl EdgeWeighting {
    /// `values[v]` is the weight of the edge into `v`; `values[0]` is ignored.
    pub fn from_vec(tree: &Tree, mut values: Vec<f64>) -> Result<EdgeWeighting, TreeError> {
        if values.len() != tree.len() {
            return Err(TreeError::WeightLength { expected: tree.len(), got: values.len() });
        }
        values[0] = 0.0;
        for (v, &x) in values.iter().enumerate() {
            if !(x.is_finite() && x >= 0.0) {
                return Err(TreeError::BadWeight { vertex: v, value: x });
            }
        }
        Ok(EdgeWeighting { w: values })
    }

    pub fn from_fn(tree: &Tree, mut f: impl FnMut(usize) -> f64) -> Result<EdgeWeighting, TreeError> {
        let values = std::iter::once(0.0).chain((1..tree.len()).map(&mut f)).collect();
        Self::from_vec(tree, values)
    }

    /// `w(e) = |e|^(-γ)`.
    pub fn depth_power(tree: &Tree, gamma: f64) -> EdgeWeighting {
        let values = (0..tree.len()).map(|v| if v == 0 { 0.0 } else { (tree.depth(v) as f64).powf(-gamma) }).collect();
        EdgeWeighting { w: values }
    }

    pub fn get(&self, v: usize) -> f64 {
        self.w[v]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// `live[v]` iff the subtree of `v` reaches the truncation depth.
pub(crate) fn live_subtrees(tree: &Tree) -> Vec<bool> {
    let mut live = vec![false; tree.len()];
    for v in (0..tree.len()).rev() {
        live[v] = tree.is_truncation_leaf(v) || tree.children(v).any(|c| live[c]);
    }
    live
}

/// Minimum of `Σ_{e∈π} w(e)` over cutsets `π` of the truncated tree, with a
/// minimizing cutset. Ties prefer the shallower cut.
pub fn min_cutset_sum(tree: &Tree, w: &EdgeWeighting) -> Result<(f64, Cutset), TreeError> {
    if tree.num_edges() == 0 {
        return Err(TreeError::EmptyTree);
    }
    if w.w.len() != tree.len() {
        return Err(TreeError::WeightLength { expected: tree.len(), got: w.w.len() });
    }
    let n = tree.len();
    let live = live_subtrees(tree);
    let mut f = vec![0.0f64; n];
    let mut cut = vec![false; n];
    for v in (1..n).rev() {
        if !live[v] {
            continue;
        }
        if tree.is_truncation_leaf(v) {
            f[v] = w.get(v);
            cut[v] = true;
            continue;
        }
        let below: f64 = tree.children(v).filter(|&c| live[c]).map(|c| f[c]).sum();
        if w.get(v) <= below {
            f[v] = w.get(v);
            cut[v] = true;
        } else {
            f[v] = below;
        }
    }
    let value = tree.children(0).filter(|&c| live[c]).map(|c| f[c]).sum();
    let mut edges = Vec::new();
    let mut stack: Vec<usize> = tree.children(0).rev().collect();
    while let Some(v) = stack.pop() {
        if !live[v] {
            continue;
        }
        if cut[v] {
            edges.push(v);
        } else {
            stack.extend(tree.children(v).rev());
        }
    }
    Ok((value, Cutset::new(edges)))
}

/// All cutsets of a tree with at most [`MAX_ENUMERATION_EDGES`] edges.
pub fn enumerate_cutsets(tree: &Tree) -> Result<Vec<Cutset>, TreeError> {
    if tree.num_edges() > MAX_ENUMERATION_EDGES {
        return Err(TreeError::EnumerationGuard {
            what: "tree",
            edges: tree.num_edges(),
            limit: MAX_ENUMERATION_EDGES,
        });
    }
    if tree.num_edges() == 0 {
        return Err(TreeError::EmptyTree);
    }
    let live = live_subtrees(tree);
    let roots: Vec<usize> = tree.children(0).filter(|&c| live[c]).collect();
    let mut out: Vec<Cutset> = product(tree, &live, &roots).into_iter().map(Cutset::new).collect();
    out.sort_by(|a, b| a.edges.cmp(&b.edges));
    Ok(out)
}

fn below(tree: &Tree, live: &[bool], v: usize) -> Vec<Vec<usize>> {
    let mut options = vec![vec![v]];
    if !tree.is_truncation_leaf(v) {
        let kids: Vec<usize> = tree.children(v).filter(|&c| live[c]).collect();
        options.extend(product(tree, live, &kids));
    }
    options
}

fn product(tree: &Tree, live: &[bool], vs: &[usize]) -> Vec<Vec<usize>> {
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for &v in vs {
        let options = below(tree, live, v);
        acc = acc
            .iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.extend_from_slice(o);
                    p
                })
            })
            .collect();
    }
    acc
}
