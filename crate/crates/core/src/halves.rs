//! Moving vertex sets, masks and paths between `Q_n` and one of its halves.

use crate::cube::{order, Halves, Side, Vertex};

pub(crate) fn project_all(h: &Halves, vs: &[Vertex]) -> Vec<Vertex> {
    vs.iter().map(|&v| h.project(v)).collect()
}

pub(crate) fn embed_paths(h: &Halves, side: Side, paths: Vec<Vec<Vertex>>) -> Vec<Vec<Vertex>> {
    paths
        .into_iter()
        .map(|p| p.into_iter().map(|v| h.embed(side, v)).collect())
        .collect()
}

/// Restriction of a dense `Q_n` mask to one half, indexed by projected label.
pub(crate) fn project_mask(h: &Halves, side: Side, mask: &[bool]) -> Vec<bool> {
    let n = h.context().n();
    (0..order(n - 1) as u32)
        .map(|v| mask[h.embed(side, Vertex(v)).0 as usize])
        .collect()
}

pub(crate) fn split_by_side(h: &Halves, vs: &[Vertex]) -> (Vec<Vertex>, Vec<Vertex>) {
    vs.iter().partition(|&&v| h.is_left(v))
}

/// Index of the path containing `v` and its position there.
pub(crate) fn locate(paths: &[Vec<Vertex>], v: Vertex) -> Option<(usize, usize)> {
    paths
        .iter()
        .enumerate()
        .find_map(|(i, p)| p.iter().position(|&w| w == v).map(|j| (i, j)))
}
