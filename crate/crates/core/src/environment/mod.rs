//! Bias environments and the potential-theory quantities built on them.

mod io;
mod potentials;

pub use io::{read_environment, write_environment};
pub use potentials::{rt_estimate, rt_hypothesis_sup, Potentials};

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::seed::{mix, unit_closed_open};
use crate::tree::{Tree, TreeError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("{which} at vertex {vertex} must be positive and finite, got {value}")]
    NonPositive { vertex: usize, which: &'static str, value: f64 },
    #[error("invalid alpha distribution: {0}")]
    BadDistribution(String),
    #[error("environment has {got} vertices, tree has {expected}")]
    Length { expected: usize, got: usize },
    #[error("resistance overflows at vertex {0}")]
    Overflow(usize),
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("cannot parse environment line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Law of the i.i.d. excitation parameters `α_v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AlphaDistribution {
    Point(f64),
    /// `α = a1` with probability `p`, else `a2`.
    TwoPoint {
        a1: f64,
        a2: f64,
        p: f64,
    },
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl AlphaDistribution {
    pub fn validate(&self) -> Result<(), EnvError> {
        let (values, probs) = self.support();
        let bad = |msg: String| Err(EnvError::BadDistribution(msg));
        if values.is_empty() || values.len() != probs.len() {
            return bad("values and probabilities must be nonempty and of equal length".into());
        }
        if let Some(a) = values.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return bad(format!("value {a} is not a nonnegative real"));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p))) {
            return bad(format!("probability {p} is outside [0, 1]"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("probabilities sum to {total}"));
        }
        Ok(())
    }

    /// Support points and their probabilities.
    pub fn support(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            AlphaDistribution::Point(a) => (vec![*a], vec![1.0]),
            AlphaDistribution::TwoPoint { a1, a2, p } => (vec![*a1, *a2], vec![*p, 1.0 - p]),
            AlphaDistribution::Discrete { values, probs } => (values.clone(), probs.clone()),
        }
    }

    /// `m = E[1/(α+1)]`, exactly from the support.
    pub fn mean_inverse(&self) -> f64 {
        let (values, probs) = self.support();
        values.iter().zip(&probs).map(|(a, p)| p / (a + 1.0)).sum()
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            AlphaDistribution::Point(a) => *a,
            AlphaDistribution::TwoPoint { a1, a2, p } => {
                if u < *p {
                    *a1
                } else {
                    *a2
                }
            }
            AlphaDistribution::Discrete { values, probs } => {
                let mut acc = 0.0;
                for (a, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *a;
                    }
                }
                *values.last().unwrap()
            }
        }
    }
}

impl fmt::Display for AlphaDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|");
        match self {
            AlphaDistribution::Point(a) => write!(f, "alpha:point={a}"),
            AlphaDistribution::TwoPoint { a1, a2, p } => write!(f, "alpha:a1={a1},a2={a2},p={p}"),
            AlphaDistribution::Discrete { values, probs } => {
                write!(f, "alpha:values={},probs={}", join(values), join(probs))
            }
        }
    }
}

impl FromStr for AlphaDistribution {
    type Err = EnvError;

    /// Parses `alpha:point=a`, `alpha:a1=x,a2=y,p=q` or
    /// `alpha:values=x|y|…,probs=p|q|…` (the `alpha:` prefix is optional).
    fn from_str(s: &str) -> Result<Self, EnvError> {
        let bad = |msg: String| EnvError::BadDistribution(msg);
        let body = s.trim().strip_prefix("alpha:").unwrap_or(s.trim());
        let mut kv = std::collections::BTreeMap::new();
        for part in body.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            if kv.insert(k.trim(), v.trim()).is_some() {
                return Err(bad(format!("key {k:?} given twice")));
            }
        }
        let num = |x: &str| x.parse::<f64>().map_err(|e| bad(format!("bad number {x:?}: {e}")));
        let list = |x: &str| x.split('|').map(num).collect::<Result<Vec<_>, _>>();
        let keys: Vec<&str> = kv.keys().copied().collect();
        let dist = match keys.as_slice() {
            ["point"] => AlphaDistribution::Point(num(kv["point"])?),
            ["a1", "a2", "p"] => {
                AlphaDistribution::TwoPoint { a1: num(kv["a1"])?, a2: num(kv["a2"])?, p: num(kv["p"])? }
            }
            ["probs", "values"] => {
                AlphaDistribution::Discrete { values: list(kv["values"])?, probs: list(kv["probs"])? }
            }
            _ => return Err(bad(format!("unrecognised keys {keys:?}"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Per-vertex biases `(λ_v, μ_v)` on a fixed tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    alpha: Option<Vec<f64>>,
    dist: Option<AlphaDistribution>,
    seed: Option<u64>,
}

impl Environment {
    /// Builds an environment from explicit vectors; the root entries are reset to 1.
    pub fn from_vecs(tree: &Tree, mut lambda: Vec<f64>, mut mu: Vec<f64>) -> Result<Environment, EnvError> {
        for v in [&lambda, &mu] {
            if v.len() != tree.len() {
                return Err(EnvError::Length { expected: tree.len(), got: v.len() });
            }
        }
        lambda[0] = 1.0;
        mu[0] = 1.0;
        for (which, xs) in [("lambda", &lambda), ("mu", &mu)] {
            if let Some((v, &x)) = xs.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
                return Err(EnvError::NonPositive { vertex: v, which, value: x });
            }
        }
        Ok(Environment { lambda, mu, alpha: None, dist: None, seed: None })
    }

    /// `λ ≡ μ ≡ 1`: the simple random walk.
    pub fn simple(tree: &Tree) -> Environment {
        Environment { lambda: vec![1.0; tree.len()], mu: vec![1.0; tree.len()], alpha: None, dist: None, seed: None }
    }

    /// Constant biases off the root.
    pub fn constant(tree: &Tree, lambda: f64, mu: f64) -> Result<Environment, EnvError> {
        assign_deterministic(tree, |_| lambda, |_| mu)
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambda(&self, v: usize) -> f64 {
        self.lambda[v]
    }

    pub fn mu(&self, v: usize) -> f64 {
        self.mu[v]
    }

    pub fn alpha(&self, v: usize) -> Option<f64> {
        self.alpha.as_ref().map(|a| a[v])
    }

    pub fn alphas(&self) -> Option<&[f64]> {
        self.alpha.as_deref()
    }

    /// `m = E[1/(α+1)]` of the generating distribution, if random.
    pub fn m(&self) -> Option<f64> {
        self.dist.as_ref().map(AlphaDistribution::mean_inverse)
    }

    pub fn distribution(&self) -> Option<&AlphaDistribution> {
        self.dist.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `κ = 1 + max_{v∼ρ} α_v`.
    pub fn kappa(&self, tree: &Tree) -> Option<f64> {
        let alpha = self.alpha.as_ref()?;
        Some(1.0 + tree.children(0).map(|v| alpha[v]).fold(0.0, f64::max))
    }

    pub fn check_tree(&self, tree: &Tree) -> Result<(), EnvError> {
        if self.len() != tree.len() {
            return Err(EnvError::Length { expected: tree.len(), got: self.len() });
        }
        Ok(())
    }

    /// Relative rates `(r_λ, r_μ)` on the oriented edge `(v, u)`.
    ///
    /// Both are normalised so that a step to a child has rate 1; a step to the
    /// parent then has rate `λ_v` (resp. `μ_v`). The absolute rates differ from
    /// these by a factor common to all neighbours of `v`, which leaves every
    /// clock argmin unchanged.
    pub fn rates(&self, tree: &Tree, v: usize, u: usize) -> Result<(f64, f64), EnvError> {
        if tree.parent(v) == Some(u) {
            Ok((self.lambda[v], self.mu[v]))
        } else if tree.parent(u) == Some(v) {
            Ok((1.0, 1.0))
        } else {
            Err(EnvError::NotAdjacent(v, u))
        }
    }

    /// Absolute rates `r_λ(v,u) = ∏_{w∈P_x} λ_w⁻¹` with `x = u` when `u` is the
    /// parent of `v` and `x = v` otherwise (likewise for μ).
    pub fn absolute_rates(&self, tree: &Tree, v: usize, u: usize) -> Result<(f64, f64), EnvError> {
        let x = if tree.parent(v) == Some(u) {
            u
        } else if tree.parent(u) == Some(v) {
            v
        } else {
            return Err(EnvError::NotAdjacent(v, u));
        };
        let path = tree.path_from_root(x);
        let rl = path.iter().map(|&w| 1.0 / self.lambda[w]).product();
        let rm = path.iter().map(|&w| 1.0 / self.mu[w]).product();
        Ok((rl, rm))
    }
}

/// Environment from vertex rules; the root is forced to `λ_ρ = μ_ρ = 1`.
pub fn assign_deterministic(
    tree: &Tree,
    lambda_rule: impl Fn(usize) -> f64,
    mu_rule: impl Fn(usize) -> f64,
) -> Result<Environment, EnvError> {
    let lambda = (0..tree.len()).map(|v| if v == 0 { 1.0 } else { lambda_rule(v) }).collect();
    let mu = (0..tree.len()).map(|v| if v == 0 { 1.0 } else { mu_rule(v) }).collect();
    Environment::from_vecs(tree, lambda, mu)
}

/// `α_v` for one vertex; a pure function of `(seed, v)`, so truncations of
/// the same tree at different depths see the same values.
pub fn sample_alpha(dist: &AlphaDistribution, seed: u64, v: usize) -> f64 {
    dist.quantile(unit_closed_open(mix(seed, &[0x616c_7068_6100_0000, v as u64])))
}

/// `α_v` i.i.d. from `dist`, `λ_v = 1 + α_v·deg(v)`, `μ_v = 1`.
pub fn sample_random_environment(tree: &Tree, dist: &AlphaDistribution, seed: u64) -> Result<Environment, EnvError> {
    dist.validate()?;
    let alpha: Vec<f64> = (0..tree.len()).map(|v| if v == 0 { 0.0 } else { sample_alpha(dist, seed, v) }).collect();
    let lambda = (0..tree.len()).map(|v| if v == 0 { 1.0 } else { 1.0 + alpha[v] * tree.degree(v) as f64 }).collect();
    Ok(Environment {
        lambda,
        mu: vec![1.0; tree.len()],
        alpha: Some(alpha),
        dist: Some(dist.clone()),
        seed: Some(seed),
    })
}
