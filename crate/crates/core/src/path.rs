//! Paths, path systems, and the cut-and-join operations the constructions
//! are written in: `P(a, b)` sub-paths and `P + ab + Q` concatenation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cube::Vertex;
use crate::error::{Error, Result};

/// A simple path: distinct vertices, consecutive ones adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path {
    vertices: Vec<Vertex>,
}

impl Path {
    pub fn new(vertices: Vec<Vertex>) -> Result<Path> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("empty path".into()));
        }
        check_simple(&vertices)?;
        Ok(Path { vertices })
    }

    pub fn single(v: Vertex) -> Path {
        Path { vertices: vec![v] }
    }

    /// Callers guarantee the vertex sequence is a simple path.
    pub(crate) fn from_raw(vertices: Vec<Vertex>) -> Path {
        debug_assert!(!vertices.is_empty());
        debug_assert!(check_simple(&vertices).is_ok(), "{vertices:?}");
        Path { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    pub fn first(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().expect("paths are non-empty")
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of edges.
    pub fn length(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&w| w == v)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    pub fn reversed(&self) -> Path {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Path { vertices }
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Concatenate segments, checking that every seam is an edge and that
    /// no vertex repeats.
    pub fn concat<I, S>(segments: I) -> Result<Path>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[Vertex]>,
    {
        let mut out: Vec<Vertex> = Vec::new();
        for seg in segments {
            let seg = seg.as_ref();
            if seg.is_empty() {
                continue;
            }
            if let Some(&tail) = out.last() {
                if !tail.is_adjacent(seg[0]) {
                    return Err(Error::SeamNotAdjacent(tail.0, seg[0].0));
                }
            }
            out.extend_from_slice(seg);
        }
        Path::new(out)
    }
}

impl AsRef<[Vertex]> for Path {
    fn as_ref(&self) -> &[Vertex] {
        &self.vertices
    }
}

fn check_simple(vertices: &[Vertex]) -> Result<()> {
    for w in vertices.windows(2) {
        if !w[0].is_adjacent(w[1]) {
            return Err(Error::SeamNotAdjacent(w[0].0, w[1].0));
        }
    }
    let mut seen = HashSet::with_capacity(vertices.len());
    for &v in vertices {
        if !seen.insert(v) {
            return Err(Error::VertexCollision(v.0));
        }
    }
    Ok(())
}

/// The segment of `path` between `from` and `to`, oriented `from -> to`.
pub fn subpath(path: &Path, from: Vertex, to: Vertex) -> Result<Path> {
    let a = path.position(from).ok_or(Error::VertexNotOnPath(from.0))?;
    let b = path.position(to).ok_or(Error::VertexNotOnPath(to.0))?;
    let vertices = if a <= b {
        path.vertices[a..=b].to_vec()
    } else {
        path.vertices[b..=a].iter().rev().copied().collect()
    };
    Ok(Path { vertices })
}

/// Replace the edge `remove_edge` of `host` by a detour through `insert`, or
/// append `insert` when no edge is given. `insert` is reversed if that is
/// what makes both seams edges.
pub fn splice(host: &Path, remove_edge: Option<(Vertex, Vertex)>, insert: &Path) -> Result<Path> {
    match remove_edge {
        None => {
            let ins = if host.last().is_adjacent(insert.first()) {
                insert.clone()
            } else {
                insert.reversed()
            };
            Path::concat([host.vertices(), ins.vertices()])
        }
        Some((a, b)) => {
            let ia = host.position(a).ok_or(Error::VertexNotOnPath(a.0))?;
            let ib = host.position(b).ok_or(Error::VertexNotOnPath(b.0))?;
            if ia.abs_diff(ib) != 1 {
                return Err(Error::InvalidArgument(format!(
                    "{a} - {b} is not an edge of the path"
                )));
            }
            let (lo, hi) = (ia.min(ib), ia.max(ib));
            let (head, tail) = host.vertices.split_at(hi);
            let ins = if head[lo].is_adjacent(insert.first()) && tail[0].is_adjacent(insert.last())
            {
                insert.clone()
            } else {
                insert.reversed()
            };
            Path::concat([head, ins.vertices(), tail])
        }
    }
}

/// `k` paths meant to be pairwise disjoint, each joining a source to a sink.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathSystem {
    pub paths: Vec<Path>,
}

impl PathSystem {
    pub fn new(paths: Vec<Path>) -> Self {
        PathSystem { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// `(first, last)` of every path.
    pub fn pairing(&self) -> Vec<(Vertex, Vertex)> {
        self.paths.iter().map(|p| (p.first(), p.last())).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.paths.iter().map(Path::len).sum()
    }

    /// Orient every path to start at a member of `sources` and order the
    /// paths by the position of their source in `sources`. Paths with no
    /// source endpoint keep their orientation and go last.
    pub fn normalize(&mut self, sources: &[Vertex]) {
        for p in &mut self.paths {
            if !sources.contains(&p.first()) && sources.contains(&p.last()) {
                p.vertices.reverse();
            }
        }
        self.paths.sort_by_key(|p| {
            sources
                .iter()
                .position(|&s| s == p.first())
                .unwrap_or(usize::MAX)
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Path {
        Path::new(v.iter().map(|&x| Vertex(x)).collect()).unwrap()
    }

    #[test]
    fn subpath_examples() {
        let path = p(&[0, 1, 3, 7]);
        assert_eq!(subpath(&path, Vertex(1), Vertex(7)).unwrap(), p(&[1, 3, 7]));
        assert_eq!(subpath(&path, Vertex(3), Vertex(0)).unwrap(), p(&[3, 1, 0]));
        assert_eq!(subpath(&path, Vertex(3), Vertex(3)).unwrap(), p(&[3]));
        assert_eq!(
            subpath(&path, Vertex(2), Vertex(3)),
            Err(Error::VertexNotOnPath(2))
        );
    }

    #[test]
    fn splice_append() {
        assert_eq!(splice(&p(&[0, 1]), None, &p(&[3])).unwrap(), p(&[0, 1, 3]));
    }

    #[test]
    fn splice_edge_detour_in_q3() {
        // host in L = {bit 2 clear}; detour through R over the cross edges
        let host = p(&[0b000, 0b001, 0b011]);
        let pr = p(&[0b100, 0b110, 0b111, 0b101]);
        let out = splice(&host, Some((Vertex(0b000), Vertex(0b001))), &pr).unwrap();
        assert_eq!(out, p(&[0b000, 0b100, 0b110, 0b111, 0b101, 0b001, 0b011]));
        // reversed detour is re-oriented
        let out2 = splice(&host, Some((Vertex(0b001), Vertex(0b000))), &pr.reversed()).unwrap();
        assert_eq!(out, out2);
    }

    #[test]
    fn splice_errors() {
        let host = p(&[0, 1, 3]);
        assert_eq!(
            splice(&host, None, &p(&[1])),
            Err(Error::VertexCollision(1))
        );
        assert_eq!(
            splice(&host, None, &p(&[4])),
            Err(Error::SeamNotAdjacent(3, 4))
        );
        assert!(splice(&host, Some((Vertex(0), Vertex(3))), &p(&[2])).is_err());
    }

    #[test]
    fn path_rejects_non_edges_and_repeats() {
        assert!(Path::new(vec![Vertex(0), Vertex(3)]).is_err());
        assert!(Path::new(vec![Vertex(0), Vertex(1), Vertex(0)]).is_err());
        assert_eq!(p(&[0, 1, 3]).length(), 2);
    }
}
