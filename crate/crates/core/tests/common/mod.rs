//! Oracles shared by the integration tests. Nothing here calls the code under
//! test except for building `Tree` values.
#![allow(dead_code)]

use goerw::tree::Tree;
use rand::Rng;

/// All unordered rooted trees with at most `max_nodes` vertices, one per
/// isomorphism class, as BFS child-count vectors.
pub fn rooted_trees(max_nodes: usize) -> Vec<Tree> {
    // by_size[n][i] lists the child keys (size, index) of tree i with n nodes,
    // in non-increasing key order, which makes the representation canonical
    let mut by_size: Vec<Vec<Vec<(usize, usize)>>> = vec![Vec::new(), vec![Vec::new()]];
    for n in 2..=max_nodes {
        let mut out = Vec::new();
        forests(n - 1, (n - 1, usize::MAX), &by_size, &mut Vec::new(), &mut out);
        by_size.push(out);
    }
    let mut trees = Vec::new();
    for n in 1..=max_nodes {
        for i in 0..by_size[n].len() {
            trees.push(to_tree(&by_size, (n, i)));
        }
    }
    trees
}

fn forests(
    rem: usize,
    max_key: (usize, usize),
    by_size: &[Vec<Vec<(usize, usize)>>],
    cur: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if rem == 0 {
        out.push(cur.clone());
        return;
    }
    for size in (1..=rem.min(max_key.0)).rev() {
        for idx in 0..by_size[size].len() {
            if (size, idx) > max_key {
                break;
            }
            cur.push((size, idx));
            forests(rem - size, (size, idx), by_size, cur, out);
            cur.pop();
        }
    }
}

fn to_tree(by_size: &[Vec<Vec<(usize, usize)>>], root: (usize, usize)) -> Tree {
    let mut counts = Vec::new();
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some((s, i)) = queue.pop_front() {
        let kids = &by_size[s][i];
        counts.push(kids.len());
        queue.extend(kids.iter().copied());
    }
    Tree::from_child_counts(&counts).unwrap()
}

/// Random recursive tree: vertex `k` attaches to a uniform earlier vertex.
pub fn random_recursive_tree<R: Rng>(edges: usize, rng: &mut R) -> Tree {
    let list: Vec<(usize, usize)> = (1..=edges).map(|k| (rng.random_range(0..k), k)).collect();
    goerw::tree::build_from_edge_list(&list).unwrap()
}

/// Weights `k/8`, `k ∈ 1..=64`, indexed by lower endpoint (index 0 unused).
/// Sums of up to a few thousand such values are exact in `f64`.
pub fn dyadic_weights<R: Rng>(tree: &Tree, rng: &mut R) -> Vec<f64> {
    let mut w = vec![0.0; tree.len()];
    for v in w.iter_mut().skip(1) {
        *v = rng.random_range(1..=64) as f64 / 8.0;
    }
    w
}

fn live(tree: &Tree) -> Vec<bool> {
    let l = tree.truncation_depth();
    let mut live = vec![false; tree.len()];
    for v in (0..tree.len()).rev() {
        live[v] = tree.depth(v) == l || tree.children(v).any(|c| live[c]);
    }
    live
}

/// Every cutset weight, by explicit expansion: below each live vertex, every
/// live child edge is either cut or expanded further.
pub fn all_cutset_weights(tree: &Tree, w: &[f64]) -> Vec<f64> {
    let live = live(tree);
    fn expand(tree: &Tree, live: &[bool], w: &[f64], v: usize) -> Vec<f64> {
        let mut acc = vec![0.0];
        for c in tree.children(v).filter(|&c| live[c]) {
            let mut opts = vec![w[c]];
            if tree.num_children(c) > 0 {
                opts.extend(expand(tree, live, w, c));
            }
            acc = acc.iter().flat_map(|a| opts.iter().map(move |o| a + o)).collect();
        }
        acc
    }
    if tree.truncation_depth() == 0 {
        return Vec::new();
    }
    expand(tree, &live, w, 0)
}

pub fn brute_force_min(tree: &Tree, w: &[f64]) -> f64 {
    all_cutset_weights(tree, w).into_iter().fold(f64::INFINITY, f64::min)
}

/// Number of edge subsets (bitmask over lower endpoints `1..len`) that
/// separate the root from every vertex at the truncation depth and are
/// minimal with that property.
pub fn count_cutsets_by_definition(tree: &Tree) -> usize {
    let n = tree.len();
    let l = tree.truncation_depth();
    let deep: Vec<usize> = (0..n).filter(|&v| tree.depth(v) == l).collect();
    let separates = |mask: u64| {
        deep.iter().all(|&x| {
            let mut v = x;
            while v != 0 {
                if mask >> v & 1 == 1 {
                    return true;
                }
                v = tree.parent(v).unwrap();
            }
            false
        })
    };
    (1u64..1 << n)
        .filter(|m| m & 1 == 0)
        .filter(|&m| separates(m) && (1..n).filter(|v| m >> v & 1 == 1).all(|v| !separates(m & !(1 << v))))
        .count()
}

/// `ψ(u⁻¹, u)` through the rearranged form
/// `(1 + λφ(u⁻²)/φ(u) + (deg−2)φ(u⁻¹)/φ(u)) / (λ + deg − 1)`, with `φ`
/// recomputed from scratch.
pub fn psi_rearranged(tree: &Tree, lambda: &[f64], mu: &[f64], u: usize) -> f64 {
    let phi = |x: usize| -> f64 {
        let path = tree.path_from_root(x);
        let mut total = 0.0;
        let mut r = 1.0;
        for w in path.windows(2) {
            if w[0] != 0 {
                r *= mu[w[0]];
            }
            total += r;
        }
        total
    };
    let p = tree.parent(u).unwrap();
    if p == 0 {
        return 1.0;
    }
    let g = tree.parent(p).unwrap();
    let deg = tree.degree(p) as f64;
    (1.0 + lambda[p] * phi(g) / phi(u) + (deg - 2.0) * phi(p) / phi(u)) / (lambda[p] + deg - 1.0)
}
