//! Bipartite-graph and image views of an instance.

mod bipartite;
mod image;

pub use bipartite::{extract_subgraph, to_bipartite, BipartiteGraph, ConstraintFeature, Edge, VariableFeature};
pub use image::{WHITE as WHITE_PIXEL, to_ccm_image, write_pgm, write_ppm, CcmImage, Palette, Tint};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("{axis} permutation is not a bijection on 0..{len}")]
    NotBijective { axis: &'static str, len: usize },
    #[error("image has a zero dimension ({height}x{width})")]
    ZeroDimension { height: usize, width: usize },
    #[error("{what} index {index} out of range (size {len})")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },
    #[error("{what} index {index} listed twice")]
    DuplicateIndex { what: &'static str, index: usize },
}

/// True when `perm` lists every index of `0..len` exactly once.
pub fn is_permutation(perm: &[usize], len: usize) -> bool {
    if perm.len() != len {
        return false;
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || std::mem::replace(&mut seen[p], true) {
            return false;
        }
    }
    true
}
