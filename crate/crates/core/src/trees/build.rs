//! Trie and patricia construction from finite key sets or lazy random keys.

use std::ops::Deref;

use rand::Rng;

use super::tree::{parse_symbols, NodeId, Tree};
use crate::error::{Error, Result};
use crate::source::SourceDistribution;

/// Default bound on the number of characters compared between two keys.
pub const DEFAULT_MAX_DEPTH: usize = 10_000;

/// Random-access character supply for the tree builders.
pub trait KeySource {
    fn alphabet_size(&self) -> usize;

    fn key_count(&self) -> usize;

    /// Character `depth` of key `key`, or `None` past the end of a finite key.
    fn char_at(&mut self, key: usize, depth: usize) -> Option<u8>;
}

/// Finite, pairwise distinct, prefix-free strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySet {
    arity: usize,
    keys: Vec<Vec<u8>>,
}

impl KeySet {
    pub fn new(arity: usize, keys: Vec<Vec<u8>>) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidKeys(format!("alphabet size {arity} < 2")));
        }
        if let Some(k) = keys.iter().find(|k| k.iter().any(|&c| c as usize >= arity)) {
            return Err(Error::InvalidKeys(format!("key {k:?} has symbols outside the alphabet")));
        }
        let mut sorted: Vec<&Vec<u8>> = keys.iter().collect();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[1].starts_with(w[0]) {
                return Err(Error::InvalidKeys(format!(
                    "key {:?} is a prefix of (or equal to) {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { arity, keys })
    }

    /// Keys written as digit strings, e.g. `["1000", "1001"]`.
    pub fn parse(arity: usize, keys: &[&str]) -> Result<Self> {
        let keys = keys
            .iter()
            .map(|k| parse_symbols(k, arity))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arity, keys)
    }

    pub fn keys(&self) -> &[Vec<u8>] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

impl KeySource for KeySet {
    fn alphabet_size(&self) -> usize {
        self.arity
    }

    fn key_count(&self) -> usize {
        self.keys.len()
    }

    fn char_at(&mut self, key: usize, depth: usize) -> Option<u8> {
        self.keys[key].get(depth).copied()
    }
}

/// Infinite random keys, materialized only as far as the builders read them.
///
/// All keys draw from one generator; the order of draws is fixed by the
/// (deterministic) builder, so a seed determines every tree built.
#[derive(Debug, Clone)]
pub struct LazyKeys<R> {
    source: SourceDistribution,
    rng: R,
    buffers: Vec<Vec<u8>>,
}

impl<R: Rng> LazyKeys<R> {
    pub fn new(source: SourceDistribution, count: usize, rng: R) -> Self {
        Self {
            source,
            rng,
            buffers: vec![Vec::new(); count],
        }
    }

    /// Appends fresh keys up to `count`; existing keys are kept.
    pub fn grow_to(&mut self, count: usize) {
        if count > self.buffers.len() {
            self.buffers.resize(count, Vec::new());
        }
    }

    /// Characters materialized so far for `key`.
    pub fn materialized(&self, key: usize) -> &[u8] {
        &self.buffers[key]
    }

    pub fn source(&self) -> &SourceDistribution {
        &self.source
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}

impl<R: Rng> KeySource for LazyKeys<R> {
    fn alphabet_size(&self) -> usize {
        self.source.alphabet_size()
    }

    fn key_count(&self) -> usize {
        self.buffers.len()
    }

    fn char_at(&mut self, key: usize, depth: usize) -> Option<u8> {
        let buf = &mut self.buffers[key];
        while buf.len() <= depth {
            buf.push(self.source.sample_char(&mut self.rng));
        }
        Some(buf[depth])
    }
}

/// A trie: split on successive characters, unary nodes allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Trie(Tree);

/// A patricia trie: unary chains compressed into prefix attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct PatriciaTrie(Tree);

impl Trie {
    /// Wraps any tree; tries may contain unary nodes.
    pub fn from_tree(tree: Tree) -> Self {
        Self(tree)
    }

    pub fn tree(&self) -> &Tree {
        &self.0
    }

    pub fn into_tree(self) -> Tree {
        self.0
    }

    pub fn fringe(&self, path: &[u8]) -> Result<Trie> {
        self.0.fringe(path).map(Trie)
    }
}

impl PatriciaTrie {
    /// Accepts any tree without unary nodes.
    pub fn from_tree(tree: Tree) -> Result<Self> {
        if tree.has_unary_node() {
            return Err(Error::UnaryNode);
        }
        Ok(Self(tree))
    }

    pub fn tree(&self) -> &Tree {
        &self.0
    }

    pub fn into_tree(self) -> Tree {
        self.0
    }

    pub fn fringe(&self, path: &[u8]) -> Result<PatriciaTrie> {
        self.0.fringe(path).map(PatriciaTrie)
    }
}

impl Deref for Trie {
    type Target = Tree;

    fn deref(&self) -> &Tree {
        &self.0
    }
}

impl Deref for PatriciaTrie {
    type Target = Tree;

    fn deref(&self) -> &Tree {
        &self.0
    }
}

impl AsRef<Tree> for Trie {
    fn as_ref(&self) -> &Tree {
        &self.0
    }
}

impl AsRef<Tree> for PatriciaTrie {
    fn as_ref(&self) -> &Tree {
        &self.0
    }
}

/// Builds the trie of all keys in `keys`.
pub fn build_trie<K: KeySource + ?Sized>(keys: &mut K, max_depth: usize) -> Result<Trie> {
    build(keys, max_depth, false).map(Trie)
}

/// Builds the patricia trie of all keys in `keys`, recording common prefixes.
pub fn build_patricia<K: KeySource + ?Sized>(keys: &mut K, max_depth: usize) -> Result<PatriciaTrie> {
    build(keys, max_depth, true).map(PatriciaTrie)
}

fn build<K: KeySource + ?Sized>(keys: &mut K, max_depth: usize, compress: bool) -> Result<Tree> {
    if max_depth == 0 {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    let arity = keys.alphabet_size();
    let n = keys.key_count();
    let mut tree = Tree::empty(arity);
    if n == 0 {
        return Ok(tree);
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut scratch = vec![0u32; n];
    let mut chars = vec![0u8; n];
    let mut counts = vec![0usize; arity];

    struct Task {
        node: NodeId,
        lo: usize,
        hi: usize,
        depth: usize,
    }
    let root = tree.push_node(Vec::new());
    let mut stack = vec![Task {
        node: root,
        lo: 0,
        hi: n,
        depth: 0,
    }];

    while let Some(Task { node, lo, hi, mut depth }) = stack.pop() {
        if hi - lo == 1 {
            tree.set_key(node, order[lo] as usize);
            continue;
        }
        loop {
            if depth >= max_depth {
                return Err(Error::DepthExceeded { max_depth });
            }
            counts.iter_mut().for_each(|c| *c = 0);
            for i in lo..hi {
                let key = order[i] as usize;
                let c = keys.char_at(key, depth).ok_or_else(|| {
                    Error::InvalidKeys(format!("key {key} ends inside a shared prefix"))
                })?;
                chars[i] = c;
                counts[c as usize] += 1;
            }
            let group = hi - lo;
            if let Some(only) = counts.iter().position(|&c| c == group) {
                if compress {
                    tree.prefix_mut(node).push(only as u8);
                    depth += 1;
                    continue;
                }
                let child = tree.push_node(Vec::new());
                tree.set_child(node, only as u8, child);
                stack.push(Task {
                    node: child,
                    lo,
                    hi,
                    depth: depth + 1,
                });
                break;
            }

            // counting sort of order[lo..hi] by chars
            let mut starts = vec![0usize; arity + 1];
            for a in 0..arity {
                starts[a + 1] = starts[a] + counts[a];
            }
            let mut fill = starts.clone();
            for i in lo..hi {
                let a = chars[i] as usize;
                scratch[lo + fill[a]] = order[i];
                fill[a] += 1;
            }
            order[lo..hi].copy_from_slice(&scratch[lo..hi]);

            let mut tasks = Vec::new();
            for a in 0..arity {
                if counts[a] > 0 {
                    let child = tree.push_node(Vec::new());
                    tree.set_child(node, a as u8, child);
                    tasks.push(Task {
                        node: child,
                        lo: lo + starts[a],
                        hi: lo + starts[a + 1],
                        depth: depth + 1,
                    });
                }
            }
            stack.extend(tasks.into_iter().rev());
            break;
        }
    }
    Ok(tree)
}

/// Merges every node with exactly one child into that child, prepending the
/// edge symbol to the merged node's prefix.
pub fn compress(trie: &Trie) -> PatriciaTrie {
    let t = trie.tree();
    let mut out = Tree::empty(t.arity());
    let Some(root) = t.root() else {
        return PatriciaTrie(out);
    };
    // (trie node, new parent, edge symbol)
    let mut stack: Vec<(NodeId, Option<(NodeId, u8)>)> = vec![(root, None)];
    while let Some((mut v, parent)) = stack.pop() {
        let mut prefix = t.prefix(v).to_vec();
        while t.out_degree(v) == 1 {
            let (a, c) = t.children(v).next().unwrap();
            prefix.push(a);
            prefix.extend_from_slice(t.prefix(c));
            v = c;
        }
        let id = out.push_node(prefix);
        if let Some(k) = t.key(v) {
            out.set_key(id, k);
        }
        if let Some((p, a)) = parent {
            out.set_child(p, a, id);
        }
        let kids: Vec<_> = t.children(v).collect();
        for (a, c) in kids.into_iter().rev() {
            stack.push((c, Some((id, a))));
        }
    }
    PatriciaTrie(out)
}
