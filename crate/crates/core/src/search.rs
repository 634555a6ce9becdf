//! Coverage-targeted backtracking for vertex-disjoint path systems.
//!
//! Paths are grown one at a time from the sources in the order given. At
//! every node the unused part of the cube is peeled (vertices with fewer
//! than two usable neighbors can never be interior) and split into
//! components; a component contributes at most
//! `min(|C|, 2 * min(|C ∩ X|, |C ∩ Y|) + #paths through C)` vertices, and a
//! branch is cut when the resulting upper bound on coverage falls short of
//! the target, or when the remaining starts and sinks can no longer be
//! matched through shared components.

use crate::cube::{order, Vertex};
use crate::error::{Error, Result};

const FREE: u8 = 0;
const USED: u8 = 1;
const BLOCKED: u8 = 2;
const SOURCE: u8 = 3;
const SINK: u8 = 4;

pub(crate) struct CoverSpec<'a> {
    pub n: u32,
    /// Vertices no path may touch (faults and excluded vertices).
    pub blocked: &'a [bool],
    pub sources: &'a [Vertex],
    pub sinks: &'a [Vertex],
    /// `sources[i]` must be joined to `sinks[i]`.
    pub fixed_pairing: bool,
    /// Minimum total number of vertices on all paths.
    pub target: usize,
}

/// Find a path system meeting `spec`, paths listed in source order.
///
/// The search restarts with a growing node allowance and a different,
/// seeded tie-break order each round; every round is complete, so a round
/// that ends without exhausting its allowance proves infeasibility.
pub(crate) fn find_cover(spec: &CoverSpec<'_>, node_limit: u64) -> Result<Vec<Vec<Vertex>>> {
    let mut spent = 0u64;
    let mut allowance = FIRST_ROUND;
    for round in 0u64.. {
        let budget = allowance.min(node_limit - spent);
        let mut search = Search::new(spec, budget, round)?;
        let found = search.run();
        spent += search.nodes.min(budget);
        if found {
            let mut paths: Vec<Vec<Vertex>> = vec![Vec::new(); search.k];
            for (slot, p) in search.order.iter().zip(search.paths) {
                paths[*slot] = p.into_iter().map(Vertex).collect();
            }
            return Ok(paths);
        }
        if !search.exhausted {
            return Err(Error::Infeasible(format!(
                "no {} disjoint paths covering {} vertices",
                spec.sources.len(),
                spec.target
            )));
        }
        if spent >= node_limit {
            break;
        }
        allowance = allowance.saturating_mul(2);
    }
    Err(Error::BudgetExceeded { limit: node_limit })
}

const FIRST_ROUND: u64 = 4096;

#[inline]
fn mix(x: u32, seed: u64) -> u64 {
    if seed == 0 {
        return u64::from(x);
    }
    let mut z = u64::from(x).wrapping_add(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Search {
    n: u32,
    k: usize,
    fixed: bool,
    target: usize,
    seed: u64,
    /// `order[i]` is the caller's index of the `i`-th processed pair.
    order: Vec<usize>,
    sources: Vec<u32>,
    sinks: Vec<u32>,
    state: Vec<u8>,
    paths: Vec<Vec<u32>>,
    covered: usize,
    nodes: u64,
    limit: u64,
    exhausted: bool,
    // scratch for the bound
    avail: Vec<u8>,
    comp: Vec<u32>,
    stamp: Vec<u32>,
    stack: Vec<u32>,
    comp_info: Vec<CompInfo>,
}

#[derive(Clone, Copy, Default)]
struct CompInfo {
    size: usize,
    even: usize,
    starts: usize,
    sinks: usize,
}

const NO_COMP: u32 = u32::MAX;

impl Search {
    fn new(spec: &CoverSpec<'_>, limit: u64, seed: u64) -> Result<Search> {
        let size = order(spec.n);
        if spec.blocked.len() != size {
            return Err(Error::InvalidArgument(
                "blocked mask has wrong length".into(),
            ));
        }
        let k = spec.sources.len();
        if k == 0 || spec.sinks.len() != k {
            return Err(Error::InvalidArgument(
                "need k >= 1 sources and as many sinks".into(),
            ));
        }
        let mut state: Vec<u8> = spec
            .blocked
            .iter()
            .map(|&b| if b { BLOCKED } else { FREE })
            .collect();
        for &s in spec.sources {
            if state[s.0 as usize] != FREE {
                return Err(Error::InvalidArgument(format!(
                    "source {s} is blocked or repeated"
                )));
            }
            state[s.0 as usize] = SOURCE;
        }
        for &t in spec.sinks {
            if state[t.0 as usize] != FREE {
                return Err(Error::InvalidArgument(format!(
                    "sink {t} is blocked or repeated"
                )));
            }
            state[t.0 as usize] = SINK;
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| (mix(spec.sources[i].0, seed), i));
        let sinks = if spec.fixed_pairing {
            order.iter().map(|&i| spec.sinks[i].0).collect()
        } else {
            spec.sinks.iter().map(|v| v.0).collect()
        };
        Ok(Search {
            n: spec.n,
            k,
            fixed: spec.fixed_pairing,
            target: spec.target,
            seed,
            sources: order.iter().map(|&i| spec.sources[i].0).collect(),
            order,
            sinks,
            state,
            paths: Vec::with_capacity(k),
            covered: 0,
            nodes: 0,
            limit,
            exhausted: false,
            avail: vec![0; size],
            comp: vec![NO_COMP; size],
            stamp: vec![u32::MAX; size],
            stack: Vec::with_capacity(size),
            comp_info: Vec::new(),
        })
    }

    fn run(&mut self) -> bool {
        if self.target > order(self.n) {
            return false;
        }
        self.start_path()
    }

    fn start_path(&mut self) -> bool {
        let s = self.sources[self.paths.len()];
        self.state[s as usize] = USED;
        self.paths.push(vec![s]);
        self.covered += 1;
        if self.extend() {
            return true;
        }
        self.paths.pop();
        self.covered -= 1;
        self.state[s as usize] = SOURCE;
        false
    }

    #[inline]
    fn acceptable_sink(&self, t: u32) -> bool {
        self.state[t as usize] == SINK && (!self.fixed || self.sinks[self.paths.len() - 1] == t)
    }

    fn extend(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            self.exhausted = true;
            return false;
        }
        let head = *self
            .paths
            .last()
            .and_then(|p| p.last())
            .expect("current path");
        if !self.bound_ok(head) {
            return false;
        }
        let last_path = self.paths.len() == self.k;

        let mut interior: Vec<(u32, u64, u32)> = Vec::with_capacity(self.n as usize);
        let mut ends: Vec<u32> = Vec::new();
        for b in 0..self.n {
            let w = head ^ (1 << b);
            match self.state[w as usize] {
                FREE => interior.push((self.onward_degree(w), mix(w, self.seed), w)),
                SINK if self.acceptable_sink(w) => ends.push(w),
                _ => {}
            }
        }
        interior.sort_unstable();

        if last_path && self.covered + 1 >= self.target {
            if let Some(&t) = ends.first() {
                self.paths.last_mut().unwrap().push(t);
                self.state[t as usize] = USED;
                self.covered += 1;
                return true;
            }
        }

        for &(_, _, w) in &interior {
            self.state[w as usize] = USED;
            self.paths.last_mut().unwrap().push(w);
            self.covered += 1;
            if self.extend() {
                return true;
            }
            self.covered -= 1;
            self.paths.last_mut().unwrap().pop();
            self.state[w as usize] = FREE;
            if self.exhausted {
                return false;
            }
        }

        if !last_path {
            for &t in &ends {
                self.state[t as usize] = USED;
                self.paths.last_mut().unwrap().push(t);
                self.covered += 1;
                if self.start_path() {
                    return true;
                }
                self.covered -= 1;
                self.paths.last_mut().unwrap().pop();
                self.state[t as usize] = SINK;
                if self.exhausted {
                    return false;
                }
            }
        }
        false
    }

    fn onward_degree(&self, w: u32) -> u32 {
        (0..self.n)
            .map(|b| w ^ (1 << b))
            .filter(|&x| matches!(self.state[x as usize], FREE | SINK))
            .count() as u32
    }

    /// Upper-bound and matching feasibility test for the current node.
    fn bound_ok(&mut self, head: u32) -> bool {
        let n = self.n;
        let size = order(n);
        let usable = |st: u8| matches!(st, FREE | SOURCE | SINK);

        // peel interior candidates with fewer than two usable neighbors
        self.stack.clear();
        for v in 0..size as u32 {
            if self.state[v as usize] != FREE {
                continue;
            }
            let mut d = 0u8;
            for b in 0..n {
                let x = v ^ (1 << b);
                if x == head || usable(self.state[x as usize]) {
                    d += 1;
                }
            }
            self.avail[v as usize] = d;
            self.comp[v as usize] = NO_COMP;
            if d < 2 {
                self.stack.push(v);
            }
        }
        // `avail == 0xff` marks peeled vertices
        while let Some(v) = self.stack.pop() {
            if self.avail[v as usize] == 0xff {
                continue;
            }
            self.avail[v as usize] = 0xff;
            for b in 0..n {
                let x = v ^ (1 << b);
                if self.state[x as usize] == FREE && self.avail[x as usize] != 0xff {
                    self.avail[x as usize] -= 1;
                    if self.avail[x as usize] < 2 {
                        self.stack.push(x);
                    }
                }
            }
        }

        // components of the surviving interior
        self.comp_info.clear();
        let mut bound = self.covered;
        for v in 0..size as u32 {
            match self.state[v as usize] {
                SOURCE | SINK => bound += 1,
                FREE if self.avail[v as usize] != 0xff && self.comp[v as usize] == NO_COMP => {
                    let id = self.comp_info.len() as u32;
                    let mut info = CompInfo::default();
                    self.comp[v as usize] = id;
                    self.stack.clear();
                    self.stack.push(v);
                    while let Some(u) = self.stack.pop() {
                        info.size += 1;
                        if u.count_ones() % 2 == 0 {
                            info.even += 1;
                        }
                        for b in 0..n {
                            let x = u ^ (1 << b);
                            let st = self.state[x as usize];
                            if st == FREE {
                                if self.avail[x as usize] != 0xff
                                    && self.comp[x as usize] == NO_COMP
                                {
                                    self.comp[x as usize] = id;
                                    self.stack.push(x);
                                }
                            } else if (st == SOURCE || x == head)
                                && self.stamp[x as usize] != id * 2
                            {
                                self.stamp[x as usize] = id * 2;
                                info.starts += 1;
                            } else if st == SINK && self.stamp[x as usize] != id * 2 + 1 {
                                self.stamp[x as usize] = id * 2 + 1;
                                info.sinks += 1;
                            }
                        }
                    }
                    if info.starts > 0 && info.sinks > 0 {
                        let odd = info.size - info.even;
                        let cap = 2 * info.even.min(odd) + info.starts.min(info.sinks);
                        bound += info.size.min(cap);
                    }
                    self.comp_info.push(info);
                }
                _ => {}
            }
        }
        // reset stamps lazily: ids restart at 0 every call
        for v in 0..size {
            self.stamp[v] = u32::MAX;
        }
        if bound < self.target {
            return false;
        }
        self.matching_ok(head)
    }

    /// Remaining starts (head first, then unstarted sources) must be
    /// matchable to remaining sinks through direct edges or shared
    /// components.
    fn matching_ok(&self, head: u32) -> bool {
        let first = self.paths.len();
        let mut starts: Vec<(u32, usize)> = vec![(head, first - 1)];
        starts.extend((first..self.k).map(|i| (self.sources[i], i)));
        let sinks: Vec<(u32, usize)> = self
            .sinks
            .iter()
            .enumerate()
            .filter(|&(_, &t)| self.state[t as usize] == SINK)
            .map(|(i, &t)| (t, i))
            .collect();
        if sinks.len() != starts.len() {
            return false;
        }
        let reach = |a: u32, b: u32| -> bool {
            if (a ^ b).count_ones() == 1 {
                return true;
            }
            for i in 0..self.n {
                let x = a ^ (1 << i);
                if self.state[x as usize] != FREE || self.comp[x as usize] == NO_COMP {
                    continue;
                }
                for j in 0..self.n {
                    let y = b ^ (1 << j);
                    if self.state[y as usize] == FREE
                        && self.comp[y as usize] == self.comp[x as usize]
                    {
                        return true;
                    }
                }
            }
            false
        };
        if self.fixed {
            return starts.iter().all(|&(a, i)| {
                sinks
                    .iter()
                    .find(|&&(_, j)| j == i)
                    .is_some_and(|&(b, _)| reach(a, b))
            });
        }
        let m = starts.len();
        let adj: Vec<Vec<usize>> = starts
            .iter()
            .map(|&(a, _)| (0..m).filter(|&j| reach(a, sinks[j].0)).collect())
            .collect();
        let mut owner = vec![usize::MAX; m];
        for a in 0..m {
            let mut seen = vec![false; m];
            if !augment(a, &adj, &mut owner, &mut seen) {
                return false;
            }
        }
        true
    }
}

fn augment(a: usize, adj: &[Vec<usize>], owner: &mut [usize], seen: &mut [bool]) -> bool {
    for &b in &adj[a] {
        if seen[b] {
            continue;
        }
        seen[b] = true;
        if owner[b] == usize::MAX || augment(owner[b], adj, owner, seen) {
            owner[b] = a;
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec<'a>(
        n: u32,
        blocked: &'a [bool],
        s: &'a [Vertex],
        t: &'a [Vertex],
        target: usize,
    ) -> CoverSpec<'a> {
        CoverSpec {
            n,
            blocked,
            sources: s,
            sinks: t,
            fixed_pairing: true,
            target,
        }
    }

    #[test]
    fn hamiltonian_path_in_q3() {
        let blocked = vec![false; 8];
        let s = [Vertex(0)];
        let t = [Vertex(7)];
        let paths = find_cover(&spec(3, &blocked, &s, &t, 8), 1_000_000).unwrap();
        assert_eq!(paths[0].len(), 8);
    }

    #[test]
    fn even_distance_cannot_be_hamiltonian() {
        let blocked = vec![false; 8];
        let s = [Vertex(0)];
        let t = [Vertex(3)];
        assert!(matches!(
            find_cover(&spec(3, &blocked, &s, &t, 8), 1_000_000),
            Err(Error::Infeasible(_))
        ));
        assert_eq!(
            find_cover(&spec(3, &blocked, &s, &t, 7), 1_000_000).unwrap()[0].len(),
            7
        );
    }

    #[test]
    fn budget_is_reported() {
        let blocked = vec![false; 64];
        let s = [Vertex(0)];
        let t = [Vertex(1)];
        assert_eq!(
            find_cover(&spec(6, &blocked, &s, &t, 64), 3),
            Err(Error::BudgetExceeded { limit: 3 })
        );
    }
}
