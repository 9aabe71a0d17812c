//! Additive functionals `Φ(T) = Σ_v φ(T^v)` and their toll functions.
//!
//! Evaluation is a single bottom-up pass. Per-node aggregates (leaf counts,
//! essentiality bits) are computed once and shared by every toll, so a batch
//! of functionals costs one `O(|T|)` sweep.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::trees::{compress, parse_shape, NodeId, PatriciaTrie, Tree, Trie};

/// Aggregates every built-in toll reads.
#[derive(Debug, Clone)]
pub struct NodeStats {
    leaves: Vec<u32>,
    essential: Vec<bool>,
    compressed_essential: Vec<bool>,
}

impl NodeStats {
    pub fn compute(tree: &Tree) -> Self {
        let n = tree.node_count();
        let mut leaves = vec![0u32; n];
        let mut essential = vec![false; n];
        let mut compressed_essential = vec![false; n];
        for v in (0..n).rev() {
            let mut below = 0;
            let mut essential_children = 0;
            let mut compressed_children = 0;
            let mut degree = 0;
            let mut only_child = 0;
            for (_, c) in tree.children(v) {
                below += leaves[c];
                essential_children += essential[c] as u32;
                compressed_children += compressed_essential[c] as u32;
                degree += 1;
                only_child = c;
            }
            leaves[v] = below.max(1);
            essential[v] = essential_children == 0;
            compressed_essential[v] = if degree == 1 {
                compressed_essential[only_child]
            } else {
                compressed_children == 0
            };
        }
        Self {
            leaves,
            essential,
            compressed_essential,
        }
    }

    pub fn leaves(&self, node: NodeId) -> u32 {
        self.leaves[node]
    }
}

/// The fringe tree at one node, as seen by a toll function.
///
/// A `compressed` view stands for the patricia trie of the fringe: unary
/// chains below (and at) the node are skipped.
#[derive(Clone, Copy)]
pub struct Fringe<'a> {
    tree: &'a Tree,
    stats: &'a NodeStats,
    node: NodeId,
    compressed: bool,
}

impl<'a> Fringe<'a> {
    pub fn new(tree: &'a Tree, stats: &'a NodeStats, node: NodeId) -> Self {
        Self {
            tree,
            stats,
            node,
            compressed: false,
        }
    }

    pub fn as_compressed(self) -> Self {
        Self {
            compressed: true,
            ..self
        }
    }

    pub fn tree(&self) -> &'a Tree {
        self.tree
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn leaves(&self) -> u32 {
        self.stats.leaves[self.node]
    }

    /// Children of the fringe root (after skipping a unary chain when compressed).
    pub fn out_degree(&self) -> usize {
        self.tree.out_degree(self.effective_root())
    }

    pub fn is_leaf(&self) -> bool {
        self.out_degree() == 0
    }

    /// Whether the root is essential, i.e. lies in every maximum independent set.
    pub fn essential(&self) -> bool {
        if self.compressed {
            self.stats.compressed_essential[self.node]
        } else {
            self.stats.essential[self.node]
        }
    }

    /// Copies the fringe out as a standalone tree (compressed if the view is).
    pub fn materialize(&self) -> Tree {
        let sub = self.tree.subtree(self.node);
        if self.compressed {
            compress(&Trie::from_tree(sub)).into_tree()
        } else {
            sub
        }
    }

    fn effective_root(&self) -> NodeId {
        let mut v = self.node;
        if self.compressed {
            while self.tree.out_degree(v) == 1 {
                v = self.tree.children(v).next().unwrap().1;
            }
        }
        v
    }
}

type CustomRule = Arc<dyn Fn(&Tree) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Rule {
    Leaf,
    Internal,
    Size(u32),
    AtLeast(u32),
    Essential,
    Shape(Arc<Tree>, u32),
    Custom { rule: CustomRule, shape_only: bool },
    Pullback(Box<TollFunction>),
}

/// A toll function `φ` with `φ(∅) = 0`.
#[derive(Clone)]
pub struct TollFunction {
    name: String,
    rule: Rule,
}

impl fmt::Debug for TollFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TollFunction").field("name", &self.name).finish()
    }
}

impl fmt::Display for TollFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `1{|T|_e = k}`.
pub fn phi_k(k: u32) -> TollFunction {
    TollFunction {
        name: format!("k={k}"),
        rule: Rule::Size(k),
    }
}

/// `1{|T|_e >= k}`.
pub fn phi_geq(k: u32) -> TollFunction {
    TollFunction {
        name: format!("geq={k}"),
        rule: Rule::AtLeast(k),
    }
}

/// `1{T has more than one node}`; counts internal nodes.
pub fn phi_internal() -> TollFunction {
    TollFunction {
        name: "internal".into(),
        rule: Rule::Internal,
    }
}

/// `1{T = •}`; counts leaves.
pub fn phi_leaf() -> TollFunction {
    TollFunction {
        name: "leaf".into(),
        rule: Rule::Leaf,
    }
}

/// Essentiality indicator `φ_α(T) = max{0, 1 - Σ_b φ_α(T^b)}`; its additive
/// functional is the independence number.
pub fn phi_alpha() -> TollFunction {
    TollFunction {
        name: "alpha".into(),
        rule: Rule::Essential,
    }
}

/// `1{T has the shape of T0}`, prefixes ignored.
pub fn phi_shape(shape: &PatriciaTrie) -> TollFunction {
    let tree = shape.tree().clone();
    let k = tree.leaf_count() as u32;
    TollFunction {
        name: format!("shape={}", tree.shape_string()),
        rule: Rule::Shape(Arc::new(tree), k),
    }
}

impl TollFunction {
    /// A toll computed from the materialized fringe tree. Slow; meant for
    /// experiments with tolls that have no built-in fast path.
    pub fn custom<F>(name: impl Into<String>, shape_only: bool, rule: F) -> Self
    where
        F: Fn(&Tree) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rule: Rule::Custom {
                rule: Arc::new(rule),
                shape_only,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Output dimension; built-in tolls are scalar, batches stack them.
    pub fn arity(&self) -> usize {
        1
    }

    /// Whether the toll ignores common-prefix attributes.
    pub fn shape_only(&self) -> bool {
        match &self.rule {
            Rule::Custom { shape_only, .. } => *shape_only,
            _ => true,
        }
    }

    /// `Some(k)` for the fringe-size indicator `φ_k`.
    pub fn fringe_size(&self) -> Option<u32> {
        match self.rule {
            Rule::Size(k) => Some(k),
            _ => None,
        }
    }

    /// Whether this is the leaf indicator, whose functional is the key count.
    pub fn is_leaf_indicator(&self) -> bool {
        matches!(self.rule, Rule::Leaf)
    }

    /// `χ = φ(•)`.
    pub fn chi(&self) -> f64 {
        let leaf = Tree::leaf(2);
        let stats = NodeStats::compute(&leaf);
        self.value(&Fringe::new(&leaf, &stats, 0))
    }

    /// The toll's value on one fringe tree.
    pub fn value(&self, f: &Fringe<'_>) -> f64 {
        match &self.rule {
            Rule::Leaf => f.is_leaf() as u8 as f64,
            Rule::Internal => (!f.is_leaf()) as u8 as f64,
            Rule::Size(k) => (f.leaves() == *k) as u8 as f64,
            Rule::AtLeast(k) => (f.leaves() >= *k) as u8 as f64,
            Rule::Essential => f.essential() as u8 as f64,
            Rule::Shape(shape, k) => {
                (f.leaves() == *k && f.tree.subtree_matches_shape(f.node, f.compressed, shape)) as u8
                    as f64
            }
            Rule::Custom { rule, .. } => rule(&f.materialize()),
            Rule::Pullback(inner) => {
                if f.tree.out_degree(f.node) == 1 {
                    0.0
                } else {
                    inner.value(&f.as_compressed())
                }
            }
        }
    }
}

impl FromStr for TollFunction {
    type Err = Error;

    /// `k=2`, `geq=5`, `internal`, `leaf`, `alpha`, `shape=(x(xx))`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unknown functional {s:?}"));
        let positive = |v: &str| -> Result<u32> {
            match v.parse::<u32>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(bad()),
            }
        };
        match s.split_once('=') {
            None => match s {
                "internal" => Ok(phi_internal()),
                "leaf" => Ok(phi_leaf()),
                "alpha" => Ok(phi_alpha()),
                _ => Err(bad()),
            },
            Some(("k", v)) => positive(v).map(phi_k),
            Some(("geq", v)) => positive(v).map(phi_geq),
            Some(("shape", v)) => Ok(phi_shape(&PatriciaTrie::from_tree(parse_shape(v)?)?)),
            Some(_) => Err(bad()),
        }
    }
}

/// Parses a comma list such as `k=2,k=3,internal,alpha`.
pub fn parse_functionals(list: &str) -> Result<Vec<TollFunction>> {
    let mut out = Vec::new();
    // shape strings contain no commas, so a plain split is enough
    for tok in list.split(',').filter(|t| !t.trim().is_empty()) {
        out.push(tok.parse()?);
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("empty functional list".into()));
    }
    Ok(out)
}

/// Toll `φ̃` on tries inducing the same functional as `φ` on the compressed
/// patricia trie: zero at nodes with exactly one child, `φ(pat(T))` elsewhere.
pub fn pullback(toll: &TollFunction) -> Result<TollFunction> {
    if !toll.shape_only() {
        return Err(Error::ShapeDependence(toll.name.clone()));
    }
    Ok(TollFunction {
        name: format!("~{}", toll.name),
        rule: Rule::Pullback(Box::new(toll.clone())),
    })
}

/// Values of a batch of functionals on one tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValue(pub Vec<f64>);

impl Deref for FunctionalValue {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `Φ(T) = Σ_v φ(T^v)`, with `Φ(∅) = 0`.
pub fn evaluate_additive(toll: &TollFunction, tree: &Tree) -> f64 {
    evaluate_batch(std::slice::from_ref(toll), tree)[0]
}

/// All functionals of `tolls` on `tree` in one pass.
pub fn evaluate_batch(tolls: &[TollFunction], tree: &Tree) -> FunctionalValue {
    let stats = NodeStats::compute(tree);
    evaluate_with_stats(tolls, tree, &stats)
}

pub fn evaluate_with_stats(tolls: &[TollFunction], tree: &Tree, stats: &NodeStats) -> FunctionalValue {
    let mut out = vec![0.0; tolls.len()];
    for v in 0..tree.node_count() {
        let f = Fringe::new(tree, stats, v);
        for (acc, toll) in out.iter_mut().zip(tolls) {
            *acc += toll.value(&f);
        }
    }
    FunctionalValue(out)
}

/// The toll evaluated at the root only, `φ(T)`; zero for the empty tree.
pub fn evaluate_root(toll: &TollFunction, tree: &Tree) -> f64 {
    if tree.is_empty() {
        return 0.0;
    }
    let stats = NodeStats::compute(tree);
    toll.value(&Fringe::new(tree, &stats, 0))
}

/// Independence number via the essentiality recursion.
pub fn independence_number(tree: &Tree) -> usize {
    evaluate_additive(&phi_alpha(), tree) as usize
}

/// Maximum matching size, `|T| - α(T)` for trees.
pub fn matching_number(tree: &Tree) -> Result<usize> {
    if tree.is_empty() {
        return Err(Error::EmptyTree);
    }
    Ok(tree.node_count() - independence_number(tree))
}

/// Largest tree accepted by [`brute_force_independence`].
pub const BRUTE_FORCE_MAX_NODES: usize = 25;

/// Maximum independent set size by exhaustive branching on the tree seen as
/// an undirected graph. Shares nothing with the essentiality recursion.
pub fn brute_force_independence(tree: &Tree) -> Result<usize> {
    let n = tree.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::LimitExceeded(format!(
            "brute-force independence needs at most {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )));
    }
    let mut adjacency = vec![0u32; n];
    for v in 0..n {
        for (_, c) in tree.children(v) {
            adjacency[v] |= 1 << c;
            adjacency[c] |= 1 << v;
        }
    }
    fn best(remaining: u32, adjacency: &[u32]) -> usize {
        if remaining == 0 {
            return 0;
        }
        let v = remaining.trailing_zeros() as usize;
        let without = best(remaining & !(1 << v), adjacency);
        let with = 1 + best(remaining & !(1 << v) & !adjacency[v], adjacency);
        without.max(with)
    }
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    Ok(best(all, &adjacency))
}
