//! `family:key=value,...` strings for trees and environments.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use goerw::environment::{read_environment, sample_random_environment, AlphaDistribution, Environment};
use goerw::seed::mix;
use goerw::tree::{
    build_path, build_polynomial, build_random, build_regular, read_tree, StandardFamily, Tree, TreeFamily,
};

use crate::CliError;

/// Salt for the environment seed derived from the master seed.
const ENV_SALT: u64 = 0x656e_7669_726f_6e00;

fn usage(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Usage { key: key.to_string(), msg: msg.into() }
}

fn split_spec<'a>(key: &str, spec: &'a str) -> Result<(&'a str, BTreeMap<&'a str, &'a str>), CliError> {
    let (family, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut args = BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| usage(key, format!("expected key=value, got `{part}`")))?;
        if args.insert(k.trim(), v.trim()).is_some() {
            return Err(usage(key, format!("`{k}` given twice")));
        }
    }
    Ok((family, args))
}

fn take<T: std::str::FromStr>(key: &str, args: &mut BTreeMap<&str, &str>, name: &str) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    args.remove(name).map(|v| v.parse().map_err(|e| usage(key, format!("bad value for `{name}`: {e}")))).transpose()
}

fn no_leftovers(key: &str, args: BTreeMap<&str, &str>) -> Result<(), CliError> {
    match args.keys().next() {
        Some(k) => Err(usage(key, format!("unknown parameter `{k}`"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeSpec {
    Path { depth: Option<usize> },
    Regular { d: usize, depth: Option<usize> },
    Poly { b: f64, depth: Option<usize> },
    Random { k: usize, min: usize, depth: Option<usize>, seed: u64 },
    File(PathBuf),
}

impl TreeSpec {
    pub fn parse(spec: &str) -> Result<TreeSpec, CliError> {
        const KEY: &str = "tree";
        if let Some(path) = spec.strip_prefix("file:") {
            return Ok(TreeSpec::File(PathBuf::from(path)));
        }
        let (family, mut args) = split_spec(KEY, spec)?;
        let depth = take(KEY, &mut args, "L")?;
        let out = match family {
            "path" => TreeSpec::Path { depth },
            "regular" => {
                TreeSpec::Regular { d: take(KEY, &mut args, "d")?.ok_or_else(|| usage(KEY, "regular needs d"))?, depth }
            }
            "poly" => {
                TreeSpec::Poly { b: take(KEY, &mut args, "b")?.ok_or_else(|| usage(KEY, "poly needs b"))?, depth }
            }
            "random" => {
                let k = take(KEY, &mut args, "k")?.ok_or_else(|| usage(KEY, "random needs k"))?;
                TreeSpec::Random {
                    k,
                    min: take(KEY, &mut args, "min")?.unwrap_or(1),
                    depth,
                    seed: take(KEY, &mut args, "seed")?.unwrap_or(0),
                }
            }
            other => {
                return Err(usage(KEY, format!("unknown tree family `{other}` (path, regular, poly, random, file)")))
            }
        };
        no_leftovers(KEY, args)?;
        Ok(out)
    }

    fn depth(&self) -> Option<usize> {
        match self {
            TreeSpec::Path { depth } | TreeSpec::Regular { depth, .. } | TreeSpec::Poly { depth, .. } => *depth,
            TreeSpec::Random { depth, .. } => *depth,
            TreeSpec::File(_) => None,
        }
    }

    /// Builds the tree; `depth` (the `--depth` flag) overrides `L`.
    pub fn build(&self, depth: Option<usize>) -> Result<Tree, CliError> {
        if let TreeSpec::File(path) = self {
            let f = File::open(path).map_err(|e| usage("tree", format!("{}: {e}", path.display())))?;
            let tree = read_tree(BufReader::new(f)).map_err(|e| usage("tree", e.to_string()))?;
            return match depth {
                Some(d) => Ok(tree.truncate(d)?),
                None => Ok(tree),
            };
        }
        let l = depth.or(self.depth()).ok_or_else(|| usage("tree", "no depth: give L in the spec or --depth"))?;
        Ok(match *self {
            TreeSpec::Path { .. } => build_path(l)?,
            TreeSpec::Regular { d, .. } => build_regular(d, l)?,
            TreeSpec::Poly { b, .. } => build_polynomial(b, l)?,
            TreeSpec::Random { k, min, seed, .. } => build_random(k, min, l, seed)?,
            TreeSpec::File(_) => unreachable!(),
        })
    }

    /// Depth-indexed family view, for the estimators.
    pub fn family(&self) -> Result<Box<dyn TreeFamily>, CliError> {
        Ok(match *self {
            TreeSpec::Path { .. } => Box::new(StandardFamily::Path),
            TreeSpec::Regular { d, .. } => Box::new(StandardFamily::Regular(d)),
            TreeSpec::Poly { b, .. } => Box::new(StandardFamily::Polynomial(b)),
            TreeSpec::Random { k, min, seed, .. } => Box::new(move |l: usize| build_random(k, min, l, seed)),
            TreeSpec::File(_) => return Err(usage("tree", "a tree file is not a depth-indexed family")),
        })
    }

    pub fn standard_family(&self) -> Result<StandardFamily, CliError> {
        match *self {
            TreeSpec::Path { .. } => Ok(StandardFamily::Path),
            TreeSpec::Regular { d, .. } => Ok(StandardFamily::Regular(d)),
            TreeSpec::Poly { b, .. } => Ok(StandardFamily::Polynomial(b)),
            _ => Err(usage("tree", "phase-scan needs a path, regular or poly family")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    Simple,
    Const { lambda: f64, mu: f64 },
    Alpha(AlphaDistribution),
    File(PathBuf),
}

impl EnvSpec {
    pub fn parse(spec: &str) -> Result<EnvSpec, CliError> {
        const KEY: &str = "env";
        if let Some(path) = spec.strip_prefix("file:") {
            return Ok(EnvSpec::File(PathBuf::from(path)));
        }
        if spec.starts_with("alpha:") {
            return spec
                .parse()
                .map(EnvSpec::Alpha)
                .map_err(|e: goerw::environment::EnvError| usage(KEY, e.to_string()));
        }
        let (family, mut args) = split_spec(KEY, spec)?;
        let out = match family {
            "srw" => EnvSpec::Simple,
            "const" => EnvSpec::Const {
                lambda: take(KEY, &mut args, "lambda")?.unwrap_or(1.0),
                mu: take(KEY, &mut args, "mu")?.unwrap_or(1.0),
            },
            other => return Err(usage(KEY, format!("unknown environment `{other}` (srw, const, alpha, file)"))),
        };
        no_leftovers(KEY, args)?;
        Ok(out)
    }

    pub fn alpha(&self) -> Result<&AlphaDistribution, CliError> {
        match self {
            EnvSpec::Alpha(d) => Ok(d),
            _ => Err(usage("env", "this operation needs an alpha distribution (alpha:...)")),
        }
    }

    /// Environment seed for a master seed.
    pub fn env_seed(master: u64) -> u64 {
        mix(master, &[ENV_SALT])
    }

    pub fn build(&self, tree: &Tree, master_seed: u64) -> Result<Environment, CliError> {
        Ok(match self {
            EnvSpec::Simple => Environment::simple(tree),
            EnvSpec::Const { lambda, mu } => Environment::constant(tree, *lambda, *mu)?,
            EnvSpec::Alpha(d) => sample_random_environment(tree, d, Self::env_seed(master_seed))?,
            EnvSpec::File(path) => {
                let f = File::open(path).map_err(|e| usage("env", format!("{}: {e}", path.display())))?;
                read_environment(tree, BufReader::new(f)).map_err(|e| usage("env", e.to_string()))?
            }
        })
    }
}

/// Comma-separated list, or `start:stop:step` for an arithmetic grid.
pub fn parse_f64_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|e| usage(key, format!("bad number `{p}`: {e}"))))
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(usage(key, "grid needs start ≤ stop and step > 0"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // round to the step's decimal precision so 0.1-grids print cleanly
        return Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect());
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|e| usage(key, format!("bad number `{p}`: {e}"))))
        .collect()
}

/// Comma-separated integers; `2^k` is accepted.
pub fn parse_u64_list(key: &str, s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let p = p.trim();
            let parsed = match p.split_once('^') {
                Some(("2", k)) => k.parse::<u32>().ok().and_then(|k| 1u64.checked_shl(k)),
                Some(_) => None,
                None => p.parse().ok(),
            };
            parsed.ok_or_else(|| usage(key, format!("bad integer `{p}`")))
        })
        .collect()
}
