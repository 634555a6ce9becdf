//! The hypercube `Q_n`: vertex labels, adjacency, bipartition and the
//! decomposition of `Q_n` into two `Q_{n-1}` halves along one dimension.
//!
//! A vertex is an `n`-bit label. Bit `i` (counted from the least significant
//! bit) holds coordinate `i + 1`, so the string `u_n ... u_1` reads
//! most-significant-first.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension the library accepts.
pub const MAX_DIMENSION: u32 = 30;

/// A hypercube vertex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(pub u32);

impl Vertex {
    #[inline]
    pub fn label(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn flip(self, bit: u32) -> Vertex {
        Vertex(self.0 ^ (1 << bit))
    }

    #[inline]
    pub fn bit(self, bit: u32) -> bool {
        self.0 >> bit & 1 == 1
    }

    #[inline]
    pub fn parity(self) -> Parity {
        parity(self)
    }

    #[inline]
    pub fn is_adjacent(self, other: Vertex) -> bool {
        (self.0 ^ other.0).count_ones() == 1
    }

    /// Binary string of length `n`, most significant bit first.
    pub fn to_binary(self, n: u32) -> String {
        (0..n)
            .rev()
            .map(|b| if self.bit(b) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bipartition class: `X` holds even-weight labels, `Y` odd-weight ones.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
pub enum Parity {
    X,
    Y,
}

impl Parity {
    pub fn other(self) -> Parity {
        match self {
            Parity::X => Parity::Y,
            Parity::Y => Parity::X,
        }
    }
}

pub fn check_dimension(n: u32) -> Result<()> {
    if (1..=MAX_DIMENSION).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(n))
    }
}

/// Number of vertices of `Q_n`.
#[inline]
pub fn order(n: u32) -> usize {
    1usize << n
}

/// The `n` neighbors of `v`, ordered by ascending flipped bit.
pub fn neighbors(v: Vertex, n: u32) -> Result<Vec<Vertex>> {
    check_dimension(n)?;
    if u64::from(v.0) >= 1u64 << n {
        return Err(Error::VertexOutOfRange { vertex: v.0, n });
    }
    Ok(neighbor_iter(v, n).collect())
}

/// Unchecked neighbor iteration, ascending bit order.
#[inline]
pub fn neighbor_iter(v: Vertex, n: u32) -> impl Iterator<Item = Vertex> {
    (0..n).map(move |b| v.flip(b))
}

#[inline]
pub fn parity(v: Vertex) -> Parity {
    if v.0.count_ones().is_multiple_of(2) {
        Parity::X
    } else {
        Parity::Y
    }
}

#[inline]
pub fn distance(u: Vertex, v: Vertex) -> u32 {
    (u.0 ^ v.0).count_ones()
}

/// `min { d(a, b) : a in A, b in B }`, `None` if either side is empty.
pub fn set_distance(a: &[Vertex], b: &[Vertex]) -> Option<u32> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| distance(x, y)))
        .min()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Side {
    L,
    R,
}

/// `Q_n = L ⊙ R` along dimension `j` (1-based): `L` holds labels with bit
/// `j - 1` cleared, `R` those with it set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitContext {
    n: u32,
    j: u32,
}

impl SplitContext {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// The split dimension, 1-based.
    pub fn dimension(&self) -> u32 {
        self.j
    }

    #[inline]
    pub fn bit(&self) -> u32 {
        self.j - 1
    }

    #[inline]
    pub fn side(&self, v: Vertex) -> Side {
        if v.bit(self.bit()) {
            Side::R
        } else {
            Side::L
        }
    }

    /// The unique neighbor across the split.
    #[inline]
    pub fn peer(&self, v: Vertex) -> Vertex {
        v.flip(self.bit())
    }

    /// Drop bit `j - 1`, giving a label of `Q_{n-1}`.
    #[inline]
    pub fn project(&self, v: Vertex) -> Vertex {
        let b = self.bit();
        let low = v.0 & ((1 << b) - 1);
        let high = (v.0 >> (b + 1)) << b;
        Vertex(high | low)
    }

    /// Inverse of [`project`](Self::project) on the given side.
    #[inline]
    pub fn embed(&self, side: Side, v: Vertex) -> Vertex {
        let b = self.bit();
        let low = v.0 & ((1 << b) - 1);
        let high = (v.0 >> b) << (b + 1);
        let mid = match side {
            Side::L => 0,
            Side::R => 1 << b,
        };
        Vertex(high | mid | low)
    }

    /// Vertices of one half, ascending.
    pub fn half(&self, side: Side) -> impl Iterator<Item = Vertex> + '_ {
        (0..order(self.n - 1) as u32).map(move |v| self.embed(side, Vertex(v)))
    }
}

/// A split together with a choice of which half plays `L`. `swapped`
/// relabels every vertex by flipping bit `j - 1`, which exchanges the two
/// halves; applying it twice is the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Halves {
    ctx: SplitContext,
    mask: u32,
}

impl Halves {
    pub fn new(ctx: SplitContext, swapped: bool) -> Self {
        let mask = if swapped { 1 << ctx.bit() } else { 0 };
        Halves { ctx, mask }
    }

    pub fn context(&self) -> &SplitContext {
        &self.ctx
    }

    pub fn swapped(&self) -> bool {
        self.mask != 0
    }

    /// The relabeling this orientation applies, as an XOR mask.
    pub fn relabel(&self, v: Vertex) -> Vertex {
        Vertex(v.0 ^ self.mask)
    }

    #[inline]
    pub fn side(&self, v: Vertex) -> Side {
        self.ctx.side(self.relabel(v))
    }

    #[inline]
    pub fn is_left(&self, v: Vertex) -> bool {
        self.side(v) == Side::L
    }

    #[inline]
    pub fn peer(&self, v: Vertex) -> Vertex {
        self.ctx.peer(v)
    }

    #[inline]
    pub fn project(&self, v: Vertex) -> Vertex {
        self.ctx.project(v)
    }

    #[inline]
    pub fn embed(&self, side: Side, v: Vertex) -> Vertex {
        self.relabel(self.ctx.embed(side, v))
    }

    pub fn half(&self, side: Side) -> impl Iterator<Item = Vertex> + '_ {
        (0..order(self.ctx.n - 1) as u32).map(move |v| self.embed(side, Vertex(v)))
    }
}

/// Decompose `Q_n` along dimension `j` (1-based).
pub fn split(n: u32, j: u32) -> Result<SplitContext> {
    check_dimension(n)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot split Q_{n}: need n >= 2"
        )));
    }
    if !(1..=n).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "split dimension {j} outside 1..={n}"
        )));
    }
    Ok(SplitContext { n, j })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::VecDeque;

    fn bfs_distance(n: u32, a: Vertex, b: Vertex) -> u32 {
        let mut dist = vec![u32::MAX; order(n)];
        let mut queue = VecDeque::from([a]);
        dist[a.0 as usize] = 0;
        while let Some(v) = queue.pop_front() {
            for b in 0..n {
                let w = Vertex(v.0 ^ (1 << b));
                if dist[w.0 as usize] == u32::MAX {
                    dist[w.0 as usize] = dist[v.0 as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist[b.0 as usize]
    }

    #[test]
    fn neighbors_of_corners() {
        assert_eq!(
            neighbors(Vertex(0b000), 3).unwrap(),
            vec![Vertex(0b001), Vertex(0b010), Vertex(0b100)]
        );
        assert_eq!(
            neighbors(Vertex(0b111), 3).unwrap(),
            vec![Vertex(0b110), Vertex(0b101), Vertex(0b011)]
        );
        let v = Vertex(0b01011);
        let ns = neighbors(v, 5).unwrap();
        assert_eq!(ns.len(), 5);
        assert!(ns.iter().all(|w| (v.0 ^ w.0).count_ones() == 1));
    }

    #[test]
    fn neighbors_rejects_bad_dimension() {
        assert!(matches!(
            neighbors(Vertex(0), 0),
            Err(Error::InvalidDimension(0))
        ));
        assert!(matches!(
            neighbors(Vertex(0), 31),
            Err(Error::InvalidDimension(31))
        ));
        assert!(neighbors(Vertex(8), 3).is_err());
    }

    #[test]
    fn parity_classes() {
        assert_eq!(parity(Vertex(0b0000)), Parity::X);
        assert_eq!(parity(Vertex(0b0111)), Parity::Y);
        assert_ne!(parity(Vertex(0b0110)), parity(Vertex(0b0111)));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Vertex(0b000), Vertex(0b111)), 3);
        assert_eq!(distance(Vertex(5), Vertex(5)), 0);
        for a in 0..32 {
            for b in 0..32 {
                assert_eq!(
                    distance(Vertex(a), Vertex(b)),
                    bfs_distance(5, Vertex(a), Vertex(b))
                );
            }
        }
    }

    #[test]
    fn split_examples() {
        let ctx = split(3, 3).unwrap();
        assert_eq!(ctx.side(Vertex(0b011)), Side::L);
        assert_eq!(ctx.side(Vertex(0b101)), Side::R);
        assert_eq!(ctx.peer(Vertex(0b010)), Vertex(0b110));
        assert_eq!(split(3, 1).unwrap().peer(Vertex(0b010)), Vertex(0b011));

        let ctx = split(4, 2).unwrap();
        assert_eq!(ctx.project(Vertex(0b1010)), Vertex(0b100));
        for v in 0..16 {
            let v = Vertex(v);
            assert_eq!(ctx.embed(ctx.side(v), ctx.project(v)), v);
        }
        assert!(split(3, 0).is_err());
        assert!(split(3, 4).is_err());
    }

    #[test]
    fn halves_have_equal_size() {
        for n in 2..=6 {
            for j in 1..=n {
                let ctx = split(n, j).unwrap();
                let l: Vec<_> = ctx.half(Side::L).collect();
                let r: Vec<_> = ctx.half(Side::R).collect();
                assert_eq!(l.len(), order(n - 1));
                assert_eq!(r.len(), order(n - 1));
                assert!(l.iter().all(|&v| ctx.side(v) == Side::L));
                assert!(r.iter().all(|&v| ctx.side(v) == Side::R));
            }
        }
    }

    proptest! {
        #[test]
        fn neighbors_are_distinct_and_adjacent(n in 1u32..=12, raw in any::<u32>()) {
            let v = Vertex(raw & ((1 << n) - 1));
            let ns = neighbors(v, n).unwrap();
            prop_assert_eq!(ns.len(), n as usize);
            let mut sorted = ns.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), n as usize);
            for w in ns {
                prop_assert_eq!(distance(v, w), 1);
                prop_assert_ne!(parity(v), parity(w));
            }
        }

        #[test]
        fn odd_distance_iff_opposite_classes(a in 0u32..1024, b in 0u32..1024) {
            let (a, b) = (Vertex(a), Vertex(b));
            prop_assert_eq!(distance(a, b) % 2 == 1, parity(a) != parity(b));
        }

        #[test]
        fn peer_is_a_side_crossing_involution(n in 2u32..=10, j_raw in 0u32..10, raw in any::<u32>()) {
            let j = j_raw % n + 1;
            let ctx = split(n, j).unwrap();
            let v = Vertex(raw & ((1 << n) - 1));
            let w = ctx.peer(v);
            prop_assert_ne!(ctx.side(v), ctx.side(w));
            prop_assert_eq!(ctx.peer(w), v);
            prop_assert_eq!(ctx.project(v), ctx.project(w));
            prop_assert_eq!(ctx.embed(ctx.side(v), ctx.project(v)), v);
        }

        #[test]
        fn projection_preserves_same_side_distance(n in 2u32..=10, j_raw in 0u32..10, a in any::<u32>(), b in any::<u32>()) {
            let j = j_raw % n + 1;
            let ctx = split(n, j).unwrap();
            let mask = (1 << n) - 1;
            let a = ctx.embed(Side::L, ctx.project(Vertex(a & mask)));
            let b = ctx.embed(Side::L, ctx.project(Vertex(b & mask)));
            prop_assert_eq!(distance(ctx.project(a), ctx.project(b)), distance(a, b));
            prop_assert_eq!(distance(ctx.peer(a), ctx.peer(b)), distance(a, b));
        }
    }
}
