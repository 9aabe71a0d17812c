//! Exact laws of small random patricia tries: shape probabilities and the
//! distribution of common prefixes.

use std::collections::HashMap;

use rand::Rng;

use super::build::PatriciaTrie;
use super::tree::{NodeId, Tree};
use crate::error::{Error, Result};
use crate::source::SourceDistribution;

/// Largest key count accepted by [`enumerate_patricia_shapes`].
pub const MAX_ENUMERATION_KEYS: usize = 10;

const MAX_SHAPES: usize = 2_000_000;

/// All `m`-ary trees with `k` leaves and no unary node, each exactly once,
/// children canonically ordered by symbol.
pub fn enumerate_patricia_shapes(k: usize, arity: usize) -> Result<Vec<PatriciaTrie>> {
    if !(1..=MAX_ENUMERATION_KEYS).contains(&k) {
        return Err(Error::LimitExceeded(format!(
            "shape enumeration needs 1 <= k <= {MAX_ENUMERATION_KEYS}, got {k}"
        )));
    }
    if arity < 2 {
        return Err(Error::InvalidArgument(format!("alphabet size {arity} < 2")));
    }
    let mut memo: HashMap<usize, Vec<Tree>> = HashMap::new();
    let shapes = shapes_with(k, arity, &mut memo)?;
    Ok(shapes.into_iter().map(|t| PatriciaTrie::from_tree(t).unwrap()).collect())
}

fn shapes_with(k: usize, arity: usize, memo: &mut HashMap<usize, Vec<Tree>>) -> Result<Vec<Tree>> {
    if let Some(v) = memo.get(&k) {
        return Ok(v.clone());
    }
    let out = if k == 1 {
        vec![Tree::leaf(arity)]
    } else {
        let mut out = Vec::new();
        let mut sizes = vec![0usize; arity];
        let mut compositions = Vec::new();
        compositions_into(k, 0, &mut sizes, &mut compositions);
        for sizes in compositions {
            if sizes.iter().filter(|&&s| s > 0).count() < 2 {
                continue;
            }
            let parts: Vec<Vec<Tree>> = sizes
                .iter()
                .map(|&s| if s == 0 { Ok(vec![]) } else { shapes_with(s, arity, memo) })
                .collect::<Result<_>>()?;
            // cartesian product over non-empty slots
            let mut choice = vec![0usize; arity];
            loop {
                let slots: Vec<Option<&Tree>> = (0..arity)
                    .map(|a| (sizes[a] > 0).then(|| &parts[a][choice[a]]))
                    .collect();
                out.push(Tree::join(arity, &slots));
                if out.len() > MAX_SHAPES {
                    return Err(Error::LimitExceeded(format!(
                        "more than {MAX_SHAPES} shapes with {k} leaves"
                    )));
                }
                let mut a = 0;
                while a < arity {
                    if sizes[a] > 0 && choice[a] + 1 < parts[a].len() {
                        choice[a] += 1;
                        break;
                    }
                    choice[a] = 0;
                    a += 1;
                }
                if a == arity {
                    break;
                }
            }
        }
        out
    };
    memo.insert(k, out.clone());
    Ok(out)
}

fn compositions_into(rest: usize, slot: usize, sizes: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if slot + 1 == sizes.len() {
        sizes[slot] = rest;
        out.push(sizes.clone());
        return;
    }
    for s in 0..=rest {
        sizes[slot] = s;
        compositions_into(rest - s, slot + 1, sizes, out);
    }
}

/// Probability that the patricia trie of `k` i.i.d. keys has the shape of
/// `shape`: `k! Π_leaves p_v Π_internal 1/(1-ρ(|T^w|_e))`.
pub fn shape_probability(shape: &Tree, source: &SourceDistribution) -> Result<f64> {
    if shape.is_empty() {
        return Err(Error::EmptyTree);
    }
    if shape.has_unary_node() {
        return Err(Error::UnaryNode);
    }
    if shape.arity() != source.alphabet_size() {
        return Err(Error::InvalidArgument(format!(
            "shape is {}-ary but the source has {} symbols",
            shape.arity(),
            source.alphabet_size()
        )));
    }
    let leaves = shape.leaf_counts();
    let k = leaves[0] as usize;
    let mut prob: f64 = (1..=k).map(|i| i as f64).product();
    let mut stack: Vec<(NodeId, f64)> = vec![(0, 1.0)];
    while let Some((v, path_prob)) = stack.pop() {
        if shape.is_leaf(v) {
            prob *= path_prob;
        } else {
            prob /= 1.0 - source.rho_int(leaves[v]);
            for (a, c) in shape.children(v) {
                stack.push((c, path_prob * source.prob(a)));
            }
        }
    }
    Ok(prob)
}

/// Law `q_i` of the common prefix stored at a patricia node with `i` keys:
/// `q_i({α}) = p_α^i (1-ρ(i))`; its length is `Geom_0(1-ρ(i))`.
#[derive(Debug, Clone)]
pub struct PrefixLaw {
    keys: u32,
    rho: f64,
    log_probs: Vec<f64>,
    char_cumulative: Vec<f64>,
}

impl PrefixLaw {
    pub fn new(keys: u32, source: &SourceDistribution) -> Result<Self> {
        if keys < 2 {
            return Err(Error::InvalidArgument(format!(
                "prefix law needs at least 2 keys, got {keys}"
            )));
        }
        let rho = source.rho_int(keys);
        let mut acc = 0.0;
        let char_cumulative = source
            .probs()
            .iter()
            .map(|p| {
                acc += p.powi(keys as i32) / rho;
                acc
            })
            .collect();
        Ok(Self {
            keys,
            rho,
            log_probs: source.probs().iter().map(|p| p.ln()).collect(),
            char_cumulative,
        })
    }

    pub fn keys(&self) -> u32 {
        self.keys
    }

    /// `q_i({α})`.
    pub fn point_mass(&self, prefix: &[u8]) -> f64 {
        let log_p: f64 = prefix.iter().map(|&c| self.log_probs[c as usize]).sum();
        (self.keys as f64 * log_p).exp() * (1.0 - self.rho)
    }

    /// `P(|I| = n) = (1-ρ(i)) ρ(i)^n`.
    pub fn length_pmf(&self, n: u32) -> f64 {
        (1.0 - self.rho) * self.rho.powi(n as i32)
    }

    /// Success probability `1-ρ(i)` of the geometric length law.
    pub fn stop_probability(&self) -> f64 {
        1.0 - self.rho
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let mut out = Vec::new();
        while rng.gen::<f64>() < self.rho {
            let u: f64 = rng.gen();
            let c = self
                .char_cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(self.char_cumulative.len() - 1);
            out.push(c as u8);
        }
        out
    }
}
