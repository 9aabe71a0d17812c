use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type NodeId = usize;

const NONE: u32 = u32::MAX;

/// Rooted `m`-ary tree stored as an arena.
///
/// Node `0` is the root. Every child has a larger index than its parent, so a
/// reverse scan over node indices visits children before parents.
#[derive(Debug, Clone)]
pub struct Tree {
    arity: usize,
    children: Vec<u32>,
    prefixes: Vec<Vec<u8>>,
    keys: Vec<u32>,
}

impl Tree {
    pub fn empty(arity: usize) -> Self {
        Self {
            arity,
            children: Vec::new(),
            prefixes: Vec::new(),
            keys: Vec::new(),
        }
    }

    /// A tree with a single node.
    pub fn leaf(arity: usize) -> Self {
        let mut t = Self::empty(arity);
        t.push_node(Vec::new());
        t
    }

    /// A root whose child at symbol `a` is `parts[a]` (absent when `None`).
    pub fn join(arity: usize, parts: &[Option<&Tree>]) -> Self {
        assert_eq!(parts.len(), arity);
        let mut t = Self::leaf(arity);
        for (a, part) in parts.iter().enumerate() {
            if let Some(sub) = part {
                if !sub.is_empty() {
                    let id = t.graft(sub, 0);
                    t.set_child(0, a as u8, id);
                }
            }
        }
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn root(&self) -> Option<NodeId> {
        (!self.is_empty()).then_some(0)
    }

    pub fn child(&self, node: NodeId, symbol: u8) -> Option<NodeId> {
        let c = self.children[node * self.arity + symbol as usize];
        (c != NONE).then_some(c as NodeId)
    }

    /// Present children as `(symbol, node)` in alphabet order.
    pub fn children(&self, node: NodeId) -> impl Iterator<Item = (u8, NodeId)> + '_ {
        self.children[node * self.arity..(node + 1) * self.arity]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != NONE)
            .map(|(a, &c)| (a as u8, c as NodeId))
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.children[node * self.arity..(node + 1) * self.arity]
            .iter()
            .filter(|&&c| c != NONE)
            .count()
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.out_degree(node) == 0
    }

    /// Common-prefix attribute `I_v`; always empty in tries.
    pub fn prefix(&self, node: NodeId) -> &[u8] {
        &self.prefixes[node]
    }

    /// Index of the key stored in a leaf.
    pub fn key(&self, node: NodeId) -> Option<usize> {
        let k = self.keys[node];
        (k != NONE).then_some(k as usize)
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.node_count()).filter(|&v| self.is_leaf(v)).count()
    }

    pub fn internal_count(&self) -> usize {
        self.node_count() - self.leaf_count()
    }

    pub fn has_unary_node(&self) -> bool {
        (0..self.node_count()).any(|v| self.out_degree(v) == 1)
    }

    /// Number of leaves below each node (`|T^v|_e`).
    pub fn leaf_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.node_count()];
        for v in (0..self.node_count()).rev() {
            let below: u32 = self.children(v).map(|(_, c)| counts[c]).sum();
            counts[v] = if below == 0 { 1 } else { below };
        }
        counts
    }

    /// Follows a path of child symbols from the root.
    pub fn node_at(&self, path: &[u8]) -> Result<NodeId> {
        let mut v = self.root().ok_or_else(|| Error::InvalidPath(path.to_vec()))?;
        for &a in path {
            if a as usize >= self.arity {
                return Err(Error::InvalidPath(path.to_vec()));
            }
            v = self
                .child(v, a)
                .ok_or_else(|| Error::InvalidPath(path.to_vec()))?;
        }
        Ok(v)
    }

    /// The fringe tree `T^v` at `path`, re-rooted with an empty root prefix.
    pub fn fringe(&self, path: &[u8]) -> Result<Tree> {
        let v = self.node_at(path)?;
        Ok(self.subtree(v))
    }

    /// Copy of the subtree rooted at `node`; the new root's prefix is cleared.
    pub fn subtree(&self, node: NodeId) -> Tree {
        let mut t = Self::empty(self.arity);
        t.graft(self, node);
        t.prefixes[0].clear();
        t
    }

    /// Symbol paths (without prefixes) from the root to every node.
    pub fn paths(&self) -> Vec<Vec<u8>> {
        let mut paths = vec![Vec::new(); self.node_count()];
        for v in 0..self.node_count() {
            for (a, c) in self.children(v) {
                let mut p = paths[v].clone();
                p.push(a);
                paths[c] = p;
            }
        }
        paths
    }

    /// Canonical shape string: a leaf is `x`, an absent child `-`, an
    /// internal node lists its `m` child slots in parentheses. Prefixes and
    /// keys are ignored.
    pub fn shape_string(&self) -> String {
        let mut out = String::new();
        let Some(root) = self.root() else {
            return "-".to_owned();
        };
        enum Step {
            Node(NodeId),
            Absent,
            Close,
        }
        let mut stack = vec![Step::Node(root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Absent => out.push('-'),
                Step::Close => out.push(')'),
                Step::Node(v) if self.is_leaf(v) => out.push('x'),
                Step::Node(v) => {
                    out.push('(');
                    stack.push(Step::Close);
                    for a in (0..self.arity as u8).rev() {
                        stack.push(match self.child(v, a) {
                            Some(c) => Step::Node(c),
                            None => Step::Absent,
                        });
                    }
                }
            }
        }
        out
    }

    /// Multi-line rendering with node paths, prefixes and stored keys.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let paths = self.paths();
        for v in 0..self.node_count() {
            let _ = write!(
                out,
                "{:indent$}[{}] prefix={:?}",
                "",
                symbols_to_string(&paths[v]),
                symbols_to_string(self.prefix(v)),
                indent = 2 * paths[v].len()
            );
            if let Some(k) = self.key(v) {
                let _ = write!(out, " key={k}");
            }
            out.push('\n');
        }
        out
    }

    /// Structural equality. With `with_attributes`, prefixes and stored key
    /// indices must agree too.
    pub fn same_as(&self, other: &Tree, with_attributes: bool) -> bool {
        if self.arity != other.arity || self.node_count() != other.node_count() {
            return false;
        }
        let (Some(a), Some(b)) = (self.root(), other.root()) else {
            return self.is_empty() && other.is_empty();
        };
        let mut stack = vec![(a, b)];
        while let Some((u, v)) = stack.pop() {
            if with_attributes && (self.prefix(u) != other.prefix(v) || self.key(u) != other.key(v)) {
                return false;
            }
            for s in 0..self.arity as u8 {
                match (self.child(u, s), other.child(v, s)) {
                    (None, None) => {}
                    (Some(x), Some(y)) => stack.push((x, y)),
                    _ => return false,
                }
            }
        }
        true
    }

    /// Shape equality between the subtree of `self` at `node`, with unary
    /// chains skipped when `compressed`, and the whole of `shape`.
    pub fn subtree_matches_shape(&self, node: NodeId, compressed: bool, shape: &Tree) -> bool {
        let Some(root) = shape.root() else {
            return false;
        };
        if shape.arity() != self.arity {
            return false;
        }
        let skip = |mut v: NodeId| {
            if compressed {
                while self.out_degree(v) == 1 {
                    v = self.children(v).next().unwrap().1;
                }
            }
            v
        };
        let mut stack = vec![(skip(node), root)];
        while let Some((u, v)) = stack.pop() {
            for s in 0..self.arity as u8 {
                match (self.child(u, s), shape.child(v, s)) {
                    (None, None) => {}
                    (Some(x), Some(y)) => stack.push((skip(x), y)),
                    _ => return false,
                }
            }
        }
        true
    }

    pub(crate) fn push_node(&mut self, prefix: Vec<u8>) -> NodeId {
        let id = self.keys.len();
        assert!(id < NONE as usize, "tree too large");
        self.children.extend(std::iter::repeat(NONE).take(self.arity));
        self.prefixes.push(prefix);
        self.keys.push(NONE);
        id
    }

    pub(crate) fn set_child(&mut self, parent: NodeId, symbol: u8, child: NodeId) {
        debug_assert!(child > parent);
        self.children[parent * self.arity + symbol as usize] = child as u32;
    }

    pub(crate) fn set_key(&mut self, node: NodeId, key: usize) {
        self.keys[node] = key as u32;
    }

    pub(crate) fn prefix_mut(&mut self, node: NodeId) -> &mut Vec<u8> {
        &mut self.prefixes[node]
    }

    /// Appends a copy of `src`'s subtree at `node`, returning the new id of
    /// its root. Preorder copy keeps parents before children.
    fn graft(&mut self, src: &Tree, node: NodeId) -> NodeId {
        let top = self.push_node(src.prefix(node).to_vec());
        self.keys[top] = src.keys[node];
        let mut stack = vec![(node, top)];
        while let Some((s, d)) = stack.pop() {
            for (a, c) in src.children(s) {
                let id = self.push_node(src.prefix(c).to_vec());
                self.keys[id] = src.keys[c];
                self.set_child(d, a, id);
                stack.push((c, id));
            }
        }
        top
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other, true)
    }
}

/// Parses a shape string produced by [`Tree::shape_string`]. The alphabet
/// size is the slot count of the internal nodes; a lone `x` is binary.
pub fn parse_shape(s: &str) -> Result<Tree> {
    enum Ast {
        Leaf,
        Absent,
        Node(Vec<Ast>),
    }
    fn bad(msg: &str) -> Error {
        Error::InvalidArgument(format!("bad shape string: {msg}"))
    }
    fn parse(bytes: &[u8], pos: &mut usize) -> Result<Ast> {
        let c = bytes.get(*pos).copied();
        *pos += 1;
        match c {
            Some(b'x') => Ok(Ast::Leaf),
            Some(b'-') => Ok(Ast::Absent),
            Some(b'(') => {
                let mut parts = Vec::new();
                loop {
                    match bytes.get(*pos) {
                        Some(b')') => break,
                        Some(_) => parts.push(parse(bytes, pos)?),
                        None => return Err(bad("unbalanced parenthesis")),
                    }
                }
                *pos += 1;
                Ok(Ast::Node(parts))
            }
            _ => Err(bad("unexpected character")),
        }
    }
    fn arity_of(ast: &Ast, arity: &mut Option<usize>) -> Result<()> {
        if let Ast::Node(parts) = ast {
            match *arity {
                None => *arity = Some(parts.len()),
                Some(m) if m != parts.len() => return Err(bad("inconsistent slot count")),
                _ => {}
            }
            for p in parts {
                arity_of(p, arity)?;
            }
        }
        Ok(())
    }
    fn build(ast: &Ast, m: usize) -> Option<Tree> {
        match ast {
            Ast::Leaf => Some(Tree::leaf(m)),
            Ast::Absent => None,
            Ast::Node(parts) => {
                let subs: Vec<Option<Tree>> = parts.iter().map(|p| build(p, m)).collect();
                let refs: Vec<Option<&Tree>> = subs.iter().map(|p| p.as_ref()).collect();
                Some(Tree::join(m, &refs))
            }
        }
    }

    let bytes = s.trim().as_bytes();
    let mut pos = 0;
    let ast = parse(bytes, &mut pos)?;
    if pos != bytes.len() {
        return Err(bad("trailing input"));
    }
    let mut arity = None;
    arity_of(&ast, &mut arity)?;
    let m = arity.unwrap_or(2);
    if m < 2 {
        return Err(bad("internal nodes need at least two slots"));
    }
    build(&ast, m).ok_or_else(|| bad("empty shape"))
}

/// Renders symbols as digits/letters for alphabets up to 36, dot-separated
/// numbers otherwise.
pub fn symbols_to_string(s: &[u8]) -> String {
    if s.iter().all(|&c| c < 36) {
        s.iter()
            .map(|&c| std::char::from_digit(c as u32, 36).unwrap())
            .collect()
    } else {
        let parts: Vec<String> = s.iter().map(|c| c.to_string()).collect();
        parts.join(".")
    }
}

/// Inverse of [`symbols_to_string`] for alphabets up to 36.
pub fn parse_symbols(s: &str, arity: usize) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| match ch.to_digit(36) {
            Some(d) if (d as usize) < arity => Ok(d as u8),
            _ => Err(Error::InvalidKeys(format!(
                "character {ch:?} is not a symbol of a {arity}-ary alphabet"
            ))),
        })
        .collect()
}
