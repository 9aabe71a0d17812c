//! Tries, patricia tries, fringe trees and exact small-tree laws.

mod build;
mod shapes;
mod tree;

pub use build::{
    build_patricia, build_trie, compress, KeySet, KeySource, LazyKeys, PatriciaTrie, Trie,
    DEFAULT_MAX_DEPTH,
};
pub use shapes::{
    enumerate_patricia_shapes, shape_probability, PrefixLaw, MAX_ENUMERATION_KEYS,
};
pub use tree::{parse_shape, parse_symbols, symbols_to_string, NodeId, Tree};
