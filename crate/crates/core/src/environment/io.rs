//! Plain-text environment files.
//!
//! ```text
//! # goerw-env v1 seed=<s> dist=<spec> m=<value>
//! <vertex> <lambda> <mu> [<alpha>]
//! ```
//! Missing header values are written as `none`.

use std::io::{BufRead, Write};

use super::{sample_random_environment, AlphaDistribution, EnvError, Environment};
use crate::tree::Tree;

pub fn write_environment<W: Write>(env: &Environment, mut out: W) -> std::io::Result<()> {
    let none = || "none".to_string();
    writeln!(
        out,
        "# goerw-env v1 seed={} dist={} m={}",
        env.seed().map_or_else(none, |s| s.to_string()),
        env.distribution().map_or_else(none, |d| d.to_string()),
        env.m().map_or_else(none, |m| m.to_string()),
    )?;
    for v in 0..env.len() {
        match env.alpha(v) {
            Some(a) => writeln!(out, "{v} {} {} {a}", env.lambda(v), env.mu(v))?,
            None => writeln!(out, "{v} {} {}", env.lambda(v), env.mu(v))?,
        }
    }
    Ok(())
}

/// Reads an environment for `tree`.
///
/// Files carrying a seed and a distribution are regenerated from them and the
/// listed values must agree with the regenerated ones.
pub fn read_environment<R: BufRead>(tree: &Tree, input: R) -> Result<Environment, EnvError> {
    let mut lambda = vec![f64::NAN; tree.len()];
    let mut mu = vec![f64::NAN; tree.len()];
    let mut alpha: Vec<Option<f64>> = vec![None; tree.len()];
    let mut seed = None;
    let mut dist = None;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| EnvError::Parse { line: line_no, msg };
        let line = line.map_err(|e| err(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            for word in header.split_whitespace() {
                if let Some(s) = word.strip_prefix("seed=").filter(|s| *s != "none") {
                    seed = Some(s.parse::<u64>().map_err(|e| err(format!("bad seed: {e}")))?);
                }
                if let Some(d) = word.strip_prefix("dist=").filter(|s| *s != "none") {
                    dist = Some(d.parse::<AlphaDistribution>()?);
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(err(format!("expected 3 or 4 fields, got {}", fields.len())));
        }
        let v: usize = fields[0].parse().map_err(|e| err(format!("bad vertex id: {e}")))?;
        if v >= tree.len() {
            return Err(err(format!("vertex {v} is not in the tree")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("bad number {s:?}: {e}")));
        lambda[v] = num(fields[1])?;
        mu[v] = num(fields[2])?;
        if let Some(a) = fields.get(3) {
            alpha[v] = Some(num(a)?);
        }
    }
    if let Some(v) = lambda.iter().position(|x| x.is_nan()) {
        return Err(EnvError::Parse { line: 0, msg: format!("vertex {v} is missing") });
    }
    if let (Some(seed), Some(dist)) = (seed, dist) {
        let env = sample_random_environment(tree, &dist, seed)?;
        let listed = Environment::from_vecs(tree, lambda, mu)?;
        let same = (0..tree.len()).all(|v| {
            env.lambda(v) == listed.lambda(v)
                && env.mu(v) == listed.mu(v)
                && alpha[v].is_none_or(|a| Some(a) == env.alpha(v))
        });
        if !same {
            return Err(EnvError::Parse {
                line: 0,
                msg: "values do not match the declared seed and distribution".into(),
            });
        }
        return Ok(env);
    }
    Environment::from_vecs(tree, lambda, mu)
}
