//! Independent checking of path systems, and exhaustive oracles for tiny
//! cubes.
//!
//! Nothing here goes through the construction code: adjacency is recomputed
//! from labels and coverage is a fresh set union.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cube::Vertex;
use crate::error::{Error, Result};
use crate::fault::Instance;
use crate::path::{Path, PathSystem};

/// Outcome of checking a claimed path system against an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub disjoint: bool,
    pub fault_free: bool,
    pub endpoints_bijection: bool,
    pub all_edges_valid: bool,
    pub coverage: usize,
    pub bound: usize,
    pub meets_bound: bool,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.disjoint
            && self.fault_free
            && self.endpoints_bijection
            && self.all_edges_valid
            && self.meets_bound
    }
}

/// Check `ps` against `inst` from scratch. Problems are reported, never
/// raised.
pub fn verify(inst: &Instance, ps: &PathSystem) -> VerifyReport {
    let paths: Vec<&[Vertex]> = ps.paths.iter().map(Path::vertices).collect();
    verify_raw(inst, &paths)
}

/// Same as [`verify`] for unvalidated vertex sequences.
pub fn verify_raw(inst: &Instance, paths: &[&[Vertex]]) -> VerifyReport {
    let mut failures = Vec::new();
    let limit = 1u64 << inst.n.min(63);

    let mut all_edges_valid = true;
    for (i, p) in paths.iter().enumerate() {
        if p.is_empty() {
            all_edges_valid = false;
            failures.push(format!("path {i} is empty"));
            continue;
        }
        for &v in p.iter() {
            if u64::from(v.0) >= limit {
                all_edges_valid = false;
                failures.push(format!("path {i}: vertex {} outside Q_{}", v.0, inst.n));
            }
        }
        for w in p.windows(2) {
            if (w[0].0 ^ w[1].0).count_ones() != 1 {
                all_edges_valid = false;
                failures.push(format!("path {i}: {} - {} is not an edge", w[0].0, w[1].0));
            }
        }
    }

    // every vertex occurrence, counted across and within paths
    let mut owners: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        for &v in p.iter() {
            owners.entry(v.0).or_default().push(i);
        }
    }
    let mut disjoint = true;
    let mut repeated: Vec<_> = owners.iter().filter(|(_, o)| o.len() > 1).collect();
    repeated.sort();
    for (v, o) in repeated {
        disjoint = false;
        failures.push(format!("vertex {v} used {} times (paths {o:?})", o.len()));
    }

    let mut fault_free = true;
    for (i, p) in paths.iter().enumerate() {
        for &v in p.iter() {
            if inst.faults.contains(v) {
                fault_free = false;
                failures.push(format!("path {i}: vertex {} is faulty", v.0));
            }
        }
    }

    let sources: BTreeSet<u32> = inst.sources.iter().map(|v| v.0).collect();
    let sinks: BTreeSet<u32> = inst.sinks.iter().map(|v| v.0).collect();
    let mut endpoints_bijection = true;
    if paths.len() != inst.sources.len() {
        endpoints_bijection = false;
        failures.push(format!(
            "{} paths for k = {}",
            paths.len(),
            inst.sources.len()
        ));
    }
    let mut hit_s = BTreeSet::new();
    let mut hit_t = BTreeSet::new();
    for (i, p) in paths.iter().enumerate() {
        let (Some(a), Some(b)) = (p.first(), p.last()) else {
            continue;
        };
        let (s, t) = if sources.contains(&a.0) && sinks.contains(&b.0) {
            (a.0, b.0)
        } else if sources.contains(&b.0) && sinks.contains(&a.0) {
            (b.0, a.0)
        } else {
            endpoints_bijection = false;
            failures.push(format!(
                "path {i}: endpoints {} and {} are not a source-sink pair",
                a.0, b.0
            ));
            continue;
        };
        if !hit_s.insert(s) || !hit_t.insert(t) {
            endpoints_bijection = false;
            failures.push(format!("path {i}: endpoint {s} or {t} already matched"));
        }
        if p.len() > 2 {
            for &v in &p[1..p.len() - 1] {
                if sources.contains(&v.0) || sinks.contains(&v.0) {
                    endpoints_bijection = false;
                    failures.push(format!("path {i}: terminal {} is an internal vertex", v.0));
                }
            }
        }
    }
    if hit_s.len() != sources.len() || hit_t.len() != sinks.len() {
        endpoints_bijection = false;
        for s in sources.difference(&hit_s) {
            failures.push(format!("source {s} is not an endpoint"));
        }
        for t in sinks.difference(&hit_t) {
            failures.push(format!("sink {t} is not an endpoint"));
        }
    }

    let coverage = owners.len();
    let bound = (1usize << inst.n).saturating_sub(2 * inst.faults.len());
    let meets_bound = coverage >= bound;
    if !meets_bound {
        failures.push(format!("coverage {coverage} below bound {bound}"));
    }
    VerifyReport {
        disjoint,
        fault_free,
        endpoints_bijection,
        all_edges_valid,
        coverage,
        bound,
        meets_bound,
        failures,
    }
}

/// Largest dimension the exhaustive oracles accept.
pub const ORACLE_MAX_DIMENSION: u32 = 4;

/// Exact maximum coverage over all systems of `k` disjoint fault-free
/// paths joining `S` to `T` (any bijection), with a witness. `None` when no
/// such system exists.
pub fn brute_force_best(inst: &Instance) -> Result<Option<(usize, PathSystem)>> {
    if inst.n > ORACLE_MAX_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "oracle limited to n <= {ORACLE_MAX_DIMENSION}, got {}",
            inst.n
        )));
    }
    let blocked = inst.faults.mask(inst.n);
    Ok(exhaustive_best(
        inst.n,
        &blocked,
        &inst.sources,
        &inst.sinks,
        false,
    ))
}

/// Exhaustive search for a single `u`-`v` path through every vertex not in
/// `excluded`.
pub fn brute_force_spanning_path(
    n: u32,
    excluded: &[Vertex],
    u: Vertex,
    v: Vertex,
) -> Result<Option<Path>> {
    if n > ORACLE_MAX_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "oracle limited to n <= {ORACLE_MAX_DIMENSION}"
        )));
    }
    let mut blocked = vec![false; 1 << n];
    for x in excluded {
        blocked[x.0 as usize] = true;
    }
    let free = blocked.iter().filter(|b| !**b).count();
    Ok(exhaustive_best(n, &blocked, &[u], &[v], true)
        .filter(|(c, _)| *c == free)
        .map(|(_, mut ps)| ps.paths.remove(0)))
}

/// Branch and bound over every path system; exact because a branch is only
/// cut when it provably cannot beat the incumbent.
pub(crate) fn exhaustive_best(
    n: u32,
    blocked: &[bool],
    sources: &[Vertex],
    sinks: &[Vertex],
    fixed: bool,
) -> Option<(usize, PathSystem)> {
    struct Ctx<'a> {
        n: u32,
        blocked: &'a [bool],
        sources: &'a [Vertex],
        sinks: &'a [Vertex],
        fixed: bool,
        used: Vec<bool>,
        paths: Vec<Vec<Vertex>>,
        covered: usize,
        free_left: usize,
        ceiling: usize,
        best: Option<(usize, Vec<Vec<Vertex>>)>,
    }

    impl Ctx<'_> {
        fn is_terminal(&self, v: Vertex) -> bool {
            self.sources.contains(&v) || self.sinks.contains(&v)
        }

        fn grow(&mut self) {
            if let Some((b, _)) = &self.best {
                if *b >= self.ceiling || self.covered + self.free_left <= *b {
                    return;
                }
            }
            let i = self.paths.len() - 1;
            let head = *self.paths[i].last().unwrap();
            for bit in 0..self.n {
                let w = Vertex(head.0 ^ (1 << bit));
                let wi = w.0 as usize;
                if self.blocked[wi] || self.used[wi] {
                    continue;
                }
                let accept = if self.fixed {
                    self.sinks[i] == w
                } else {
                    self.sinks.contains(&w)
                };
                if self.is_terminal(w) && !accept {
                    continue;
                }
                self.used[wi] = true;
                self.free_left -= 1;
                self.covered += 1;
                self.paths[i].push(w);
                if accept {
                    if self.paths.len() == self.sources.len() {
                        if self.best.as_ref().is_none_or(|(b, _)| self.covered > *b) {
                            self.best = Some((self.covered, self.paths.clone()));
                        }
                    } else {
                        let s = self.sources[self.paths.len()];
                        self.used[s.0 as usize] = true;
                        self.free_left -= 1;
                        self.covered += 1;
                        self.paths.push(vec![s]);
                        self.grow();
                        self.paths.pop();
                        self.covered -= 1;
                        self.free_left += 1;
                        self.used[s.0 as usize] = false;
                    }
                } else {
                    self.grow();
                }
                self.paths[i].pop();
                self.covered -= 1;
                self.free_left += 1;
                self.used[wi] = false;
            }
        }
    }

    let size = 1usize << n;
    let free: Vec<u32> = (0..size as u32).filter(|&v| !blocked[v as usize]).collect();
    let even = free.iter().filter(|v| v.count_ones() % 2 == 0).count();
    let odd = free.len() - even;
    // an alternating path between opposite classes uses both classes equally
    let ceiling = if sources
        .iter()
        .zip(sinks)
        .all(|(s, t)| (s.0 ^ t.0).count_ones() % 2 == 1)
    {
        2 * even.min(odd)
    } else {
        free.len()
    };
    let mut ctx = Ctx {
        n,
        blocked,
        sources,
        sinks,
        fixed,
        used: vec![false; size],
        paths: vec![vec![sources[0]]],
        covered: 1,
        free_left: free.len() - 1,
        ceiling,
        best: None,
    };
    ctx.used[sources[0].0 as usize] = true;
    ctx.grow();
    ctx.best.map(|(c, paths)| {
        (
            c,
            PathSystem::new(paths.into_iter().map(Path::from_raw).collect()),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault::FaultSet;

    fn inst(n: u32, f: &[u32], s: &[u32], t: &[u32]) -> Instance {
        Instance::new(
            n,
            f.iter().map(|&x| Vertex(x)).collect::<FaultSet>(),
            s.iter().map(|&x| Vertex(x)).collect(),
            t.iter().map(|&x| Vertex(x)).collect(),
        )
    }

    fn ps(paths: &[&[u32]]) -> PathSystem {
        PathSystem::new(
            paths
                .iter()
                .map(|p| Path::from_raw(p.iter().map(|&x| Vertex(x)).collect()))
                .collect(),
        )
    }

    #[test]
    fn valid_system_passes() {
        let i = inst(2, &[], &[0], &[1]);
        let r = verify(&i, &ps(&[&[0, 2, 3, 1]]));
        assert!(r.pass(), "{r:?}");
        assert_eq!(r.coverage, 4);
    }

    #[test]
    fn faulty_vertex_detected() {
        let i = inst(3, &[2], &[0], &[1]);
        let r = verify(&i, &ps(&[&[0, 2, 3, 1]]));
        assert!(!r.fault_free);
        assert!(r.disjoint && r.endpoints_bijection && r.all_edges_valid);
    }

    #[test]
    fn shared_vertex_detected() {
        let i = inst(3, &[], &[0, 3], &[1, 7]);
        let r = verify(&i, &ps(&[&[0, 4, 5, 1], &[3, 2, 6, 4, 5, 7]]));
        assert!(!r.disjoint);
    }

    #[test]
    fn brute_force_examples() {
        let (best, witness) = brute_force_best(&inst(2, &[], &[0], &[1]))
            .unwrap()
            .unwrap();
        assert_eq!(best, 4);
        assert!(verify(&inst(2, &[], &[0], &[1]), &witness).pass());

        let i = inst(3, &[0b110], &[0], &[0b111]);
        let (best, witness) = brute_force_best(&i).unwrap().unwrap();
        assert!(best >= 6);
        assert!(verify(&i, &witness).pass());

        assert!(brute_force_best(&inst(5, &[], &[0], &[1])).is_err());
    }

    #[test]
    fn spanning_path_exception_in_q3() {
        // x = 000, y = 001, u = 110, v = 111: no spanning path
        let none =
            brute_force_spanning_path(3, &[Vertex(0), Vertex(1)], Vertex(6), Vertex(7)).unwrap();
        assert!(none.is_none());
        let some =
            brute_force_spanning_path(3, &[Vertex(0), Vertex(1)], Vertex(3), Vertex(7)).unwrap();
        assert_eq!(some.unwrap().len(), 6);
    }
}
