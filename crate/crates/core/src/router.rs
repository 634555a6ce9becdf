//! Recursive routing of `k` disjoint fault-free paths in a faulty `Q_n`.
//!
//! Under `1 <= k <= n - 2`, `f <= 2n - 2k - 3` and the conditional fault
//! predicate, [`route`] links `S` to `T` by `k` disjoint fault-free paths
//! covering at least `2^n - 2f` vertices. Each level splits `Q_n` along the
//! smallest dimension whose halves stay conditional and dispatches on where
//! the terminals and faults fall:
//!
//! * every terminal on one side (`Case1_*`): solve that half, then push one
//!   path edge (or the detour around a fault) through a long path of the
//!   other half;
//! * terminals on both sides (`Case2`): pad the short side with crossing
//!   vertices and join two half solutions over the cross edges;
//! * sinks all on the heavily faulted side (`Case3a`, `Case3b`): route
//!   `k - 1` paths in that half and reconnect the last sink through the
//!   other half, reserving vertices with temporary faults.
//!
//! `k = 1` and `k = n - 2` go straight to the bounded solvers. A level whose
//! construction cannot be completed is re-solved by the search and tagged
//! `SolverFallback`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cube::{self, neighbor_iter, order, parity, Halves, Side, Vertex};
use crate::edge_avoiding;
use crate::error::{Error, Result};
use crate::fault::{conditional_on_mask, valid_split_dimensions_mask, FaultSet, Instance};
use crate::halves::{embed_paths, locate, project_all, project_mask, split_by_side};
use crate::path::{Path, PathSystem};
use crate::solvers::{cover_masked, long_path_masked, SolverBudget};
use crate::verify;

pub use crate::path::{splice, subpath};

/// Which branch produced a level of the construction.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    Case1_1,
    Case1_2a,
    Case1_2b_fallback,
    Case2,
    Case3a,
    Case3b,
    BaseK1,
    BaseKmax,
    BaseSmallN,
    SolverFallback,
}

impl CaseTag {
    pub const ALL: [CaseTag; 10] = [
        CaseTag::Case1_1,
        CaseTag::Case1_2a,
        CaseTag::Case1_2b_fallback,
        CaseTag::Case2,
        CaseTag::Case3a,
        CaseTag::Case3b,
        CaseTag::BaseK1,
        CaseTag::BaseKmax,
        CaseTag::BaseSmallN,
        CaseTag::SolverFallback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Case1_1 => "Case1_1",
            CaseTag::Case1_2a => "Case1_2a",
            CaseTag::Case1_2b_fallback => "Case1_2b_fallback",
            CaseTag::Case2 => "Case2",
            CaseTag::Case3a => "Case3a",
            CaseTag::Case3b => "Case3b",
            CaseTag::BaseK1 => "BaseK1",
            CaseTag::BaseKmax => "BaseKmax",
            CaseTag::BaseSmallN => "BaseSmallN",
            CaseTag::SolverFallback => "SolverFallback",
        }
    }

    pub fn is_fallback(self) -> bool {
        matches!(self, CaseTag::SolverFallback | CaseTag::Case1_2b_fallback)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One subproblem of the recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLevel {
    pub depth: usize,
    pub n: u32,
    pub k: usize,
    pub f: usize,
    /// Split dimension, 1-based, in the subproblem's own coordinates.
    pub dimension: Option<u32>,
    pub p: usize,
    pub q: usize,
    pub f_l: usize,
    pub f_r: usize,
    pub tag: CaseTag,
    /// Branch tried before falling back, if any.
    pub attempted: Option<CaseTag>,
    /// Why the attempted branch was abandoned.
    pub reason: Option<String>,
    /// Cross edges used at this level, in root labels.
    pub seams: Vec<(Vertex, Vertex)>,
}

/// Levels in pre-order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteTrace {
    pub levels: Vec<TraceLevel>,
}

impl RouteTrace {
    pub fn tags(&self) -> Vec<CaseTag> {
        self.levels.iter().map(|l| l.tag).collect()
    }

    pub fn used_fallback(&self) -> bool {
        self.levels.iter().any(|l| l.tag == CaseTag::SolverFallback)
    }

    pub fn max_depth(&self) -> usize {
        self.levels.iter().map(|l| l.depth).max().unwrap_or(0)
    }

    pub fn seams(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.levels.iter().flat_map(|l| l.seams.iter().copied())
    }
}

/// [`route_with_budget`] with the default solver budget.
pub fn route(inst: &Instance) -> Result<(PathSystem, RouteTrace)> {
    route_with_budget(inst, &SolverBudget::default())
}

/// Route an instance that satisfies the theorem hypotheses. The result is
/// normalized (each path starts at its source, sorted by source index) and
/// has passed [`verify::verify`].
pub fn route_with_budget(
    inst: &Instance,
    budget: &SolverBudget,
) -> Result<(PathSystem, RouteTrace)> {
    budget.validate()?;
    inst.validate_theorem()?;
    let mut router = Router {
        budget,
        levels: Vec::new(),
    };
    let mask = inst.faults.mask(inst.n);
    let paths = router.solve(&Frame::default(), inst.n, &mask, &inst.sources, &inst.sinks)?;
    let mut ps = PathSystem::new(paths.into_iter().map(Path::new).collect::<Result<_>>()?);
    ps.normalize(&inst.sources);
    let report = verify::verify(inst, &ps);
    if !report.pass() {
        return Err(Error::Construction(format!(
            "routed system failed verification: {:?}",
            report.failures
        )));
    }
    Ok((
        ps,
        RouteTrace {
            levels: router.levels,
        },
    ))
}

/// Embeddings from a subproblem back to the root cube, outermost first.
#[derive(Clone, Default)]
struct Frame {
    chain: Vec<(Halves, Side)>,
}

impl Frame {
    fn child(&self, h: &Halves, side: Side) -> Frame {
        let mut chain = self.chain.clone();
        chain.push((*h, side));
        Frame { chain }
    }

    fn to_root(&self, v: Vertex) -> Vertex {
        self.chain
            .iter()
            .rev()
            .fold(v, |v, (h, side)| h.embed(*side, v))
    }
}

struct Built {
    paths: Vec<Vec<Vertex>>,
    tag: CaseTag,
    halves: Option<Halves>,
}

impl Built {
    fn base(paths: Vec<Vec<Vertex>>, tag: CaseTag) -> Built {
        Built {
            paths,
            tag,
            halves: None,
        }
    }

    fn split(paths: Vec<Vec<Vertex>>, tag: CaseTag, h: &Halves) -> Built {
        Built {
            paths,
            tag,
            halves: Some(*h),
        }
    }
}

struct Router<'a> {
    budget: &'a SolverBudget,
    levels: Vec<TraceLevel>,
}

fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|b| **b).count()
}

fn hypotheses_hold(n: u32, k: usize, f: usize, faulty: &[bool]) -> bool {
    let n = n as usize;
    n >= 3
        && k >= 1
        && k + 2 <= n
        && f + 2 * k + 3 <= 2 * n
        && conditional_on_mask(n as u32, faulty)
}

fn meets(
    n: u32,
    faulty: &[bool],
    s: &[Vertex],
    t: &[Vertex],
    paths: &[Vec<Vertex>],
    target: usize,
) -> bool {
    let inst = Instance::new(n, FaultSet::from_mask(faulty), s.to_vec(), t.to_vec());
    let refs: Vec<&[Vertex]> = paths.iter().map(Vec::as_slice).collect();
    let r = verify::verify_raw(&inst, &refs);
    r.disjoint && r.fault_free && r.endpoints_bijection && r.all_edges_valid && r.coverage >= target
}

fn orient(paths: &mut [Vec<Vertex>], sources: &[Vertex]) {
    for p in paths {
        if !sources.contains(&p[0]) {
            p.reverse();
        }
    }
}

fn reverse_all(paths: &mut [Vec<Vertex>]) {
    for p in paths {
        p.reverse();
    }
}

fn cat(parts: &[&[Vertex]]) -> Vec<Vertex> {
    parts.concat()
}

/// Neighbors of `v` on its own side, ascending bit order.
fn same_side_neighbors(h: &Halves, n: u32, v: Vertex) -> Vec<Vertex> {
    let side = h.side(v);
    neighbor_iter(v, n).filter(|&w| h.side(w) == side).collect()
}

fn position_ending_at(paths: &[Vec<Vertex>], v: Vertex) -> Result<usize> {
    paths
        .iter()
        .position(|p| p.last() == Some(&v))
        .ok_or_else(|| Error::Construction(format!("no path ends at {v}")))
}

fn locate_or(paths: &[Vec<Vertex>], v: Vertex) -> Result<(usize, usize)> {
    locate(paths, v).ok_or_else(|| Error::Construction(format!("{v} is not on any path")))
}

impl Router<'_> {
    fn solve(
        &mut self,
        frame: &Frame,
        n: u32,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Vec<Vec<Vertex>>> {
        let k = s.len();
        let f = count(faulty);
        let target = order(n).saturating_sub(2 * f);
        let idx = self.levels.len();
        self.levels.push(TraceLevel {
            depth: frame.chain.len(),
            n,
            k,
            f,
            dimension: None,
            p: 0,
            q: 0,
            f_l: 0,
            f_r: 0,
            tag: CaseTag::SolverFallback,
            attempted: None,
            reason: None,
            seams: Vec::new(),
        });

        let err = match self.dispatch(idx, frame, n, faulty, s, t) {
            Ok(built) if meets(n, faulty, s, t, &built.paths, target) => {
                let mut paths = built.paths;
                orient(&mut paths, s);
                let level = &mut self.levels[idx];
                level.tag = built.tag;
                if let Some(h) = built.halves {
                    level.seams = paths
                        .iter()
                        .flat_map(|p| p.windows(2))
                        .filter(|w| h.side(w[0]) != h.side(w[1]))
                        .map(|w| (frame.to_root(w[0]), frame.to_root(w[1])))
                        .collect();
                }
                return Ok(paths);
            }
            Ok(built) => {
                self.levels[idx].attempted = Some(built.tag);
                Error::Construction(format!("{} fell short at n={n}, k={k}", built.tag))
            }
            Err(e) => e,
        };

        // re-solve this subproblem by search
        self.levels.truncate(idx + 1);
        let level = &mut self.levels[idx];
        level.tag = CaseTag::SolverFallback;
        level.reason = Some(err.to_string());
        level.seams.clear();
        if n > self.budget.max_dimension || k == 0 {
            return Err(err);
        }
        let ps = cover_masked(n, faulty, s, t, target, self.budget.node_limit)?;
        Ok(ps.paths.into_iter().map(Path::into_vertices).collect())
    }

    fn dispatch(
        &mut self,
        idx: usize,
        frame: &Frame,
        n: u32,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Built> {
        let k = s.len();
        let f = count(faulty);
        if !hypotheses_hold(n, k, f, faulty) {
            return Err(Error::Precondition(format!(
                "subproblem n={n}, k={k}, f={f} is outside the routing hypotheses"
            )));
        }
        if k == 1 {
            self.levels[idx].attempted = Some(CaseTag::BaseK1);
            self.admit(n)?;
            let p = long_path_masked(n, faulty, s[0], t[0], self.budget.node_limit)?;
            return Ok(Built::base(vec![p.into_vertices()], CaseTag::BaseK1));
        }
        let small = if k + 2 == n as usize {
            CaseTag::BaseKmax
        } else if n <= 4 {
            CaseTag::BaseSmallN
        } else {
            CaseTag::SolverFallback
        };
        if small != CaseTag::SolverFallback {
            self.levels[idx].attempted = Some(small);
            self.admit(n)?;
            let target = order(n) - 2 * f;
            let ps = cover_masked(n, faulty, s, t, target, self.budget.node_limit)?;
            return Ok(Built::base(
                ps.paths.into_iter().map(Path::into_vertices).collect(),
                small,
            ));
        }

        let j = *valid_split_dimensions_mask(n, faulty)
            .first()
            .ok_or(Error::NoValidDimension)?;
        let ctx = cube::split(n, j)?;
        let f_r = (0..order(n) as u32)
            .filter(|&v| faulty[v as usize] && ctx.side(Vertex(v)) == Side::R)
            .count();
        let f_l = f - f_r;
        let p0 = s.iter().filter(|&&v| ctx.side(v) == Side::L).count();
        let q0 = t.iter().filter(|&&v| ctx.side(v) == Side::L).count();
        self.levels[idx].dimension = Some(j);
        let edge_bound = 2 * n as i64 - 2 * k as i64 - 5;

        if (p0 == 0 && q0 == 0) || (p0 == k && q0 == k) {
            let h = Halves::new(ctx, p0 == 0);
            let (f_l, f_r) = if h.swapped() { (f_r, f_l) } else { (f_l, f_r) };
            self.record(idx, k, k, f_l, f_r);
            let built = if f_l as i64 <= edge_bound {
                self.levels[idx].attempted = Some(CaseTag::Case1_1);
                self.case1_1(frame, n, &h, faulty, s, t)
            } else if f_r == 1 {
                self.levels[idx].attempted = Some(CaseTag::Case1_2a);
                self.case1_2a(frame, n, &h, faulty, s, t)
            } else {
                self.levels[idx].attempted = Some(CaseTag::Case1_2b_fallback);
                self.case1_2b(frame, n, &h, faulty, s, t)
            }?;
            return Ok(built);
        }

        let h = Halves::new(ctx, f_l > f_r);
        let (f_l, f_r) = (f_l.min(f_r), f_l.max(f_r));
        let p = s.iter().filter(|&&v| h.is_left(v)).count();
        let q = t.iter().filter(|&&v| h.is_left(v)).count();
        let (s, t, p, q, flipped) = if p >= q {
            (s, t, p, q, false)
        } else {
            (t, s, q, p, true)
        };
        self.record(idx, p, q, f_l, f_r);
        let mut built = if q >= 1 || f_r as i64 <= edge_bound {
            self.levels[idx].attempted = Some(CaseTag::Case2);
            self.case2(frame, n, &h, faulty, s, t)?
        } else {
            self.levels[idx].attempted = Some(CaseTag::Case3a);
            self.case3(frame, n, &h, faulty, s, t)?
        };
        if flipped {
            reverse_all(&mut built.paths);
        }
        Ok(built)
    }

    fn record(&mut self, idx: usize, p: usize, q: usize, f_l: usize, f_r: usize) {
        let level = &mut self.levels[idx];
        level.p = p;
        level.q = q;
        level.f_l = f_l;
        level.f_r = f_r;
    }

    fn admit(&self, n: u32) -> Result<()> {
        if n > self.budget.max_dimension {
            return Err(Error::Precondition(format!(
                "n={n} exceeds the solver dimension cap {}",
                self.budget.max_dimension
            )));
        }
        Ok(())
    }

    /// Solve the subproblem induced on one half; `faulty` is the full mask.
    #[allow(clippy::too_many_arguments)]
    fn sub(
        &mut self,
        frame: &Frame,
        h: &Halves,
        side: Side,
        n: u32,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Vec<Vec<Vertex>>> {
        let child = frame.child(h, side);
        let mask = project_mask(h, side, faulty);
        let paths = self.solve(&child, n - 1, &mask, &project_all(h, s), &project_all(h, t))?;
        let mut paths = embed_paths(h, side, paths);
        orient(&mut paths, s);
        Ok(paths)
    }

    /// Long fault-free `a`-`b` path inside one half.
    fn half_long(
        &self,
        h: &Halves,
        n: u32,
        faulty: &[bool],
        a: Vertex,
        b: Vertex,
    ) -> Result<Vec<Vertex>> {
        self.admit(n - 1)?;
        let side = h.side(a);
        let mask = project_mask(h, side, faulty);
        let p = long_path_masked(
            n - 1,
            &mask,
            h.project(a),
            h.project(b),
            self.budget.node_limit,
        )?;
        Ok(p.into_vertices()
            .into_iter()
            .map(|v| h.embed(side, v))
            .collect())
    }

    /// Replace the first path edge whose peers are fault-free by a detour
    /// through a long path of `R`.
    fn detour_edge(
        &self,
        n: u32,
        h: &Halves,
        faulty: &[bool],
        paths: &mut [Vec<Vertex>],
    ) -> Result<()> {
        let ok = |v: Vertex| !faulty[h.peer(v).0 as usize];
        let (i, at) = paths
            .iter()
            .enumerate()
            .find_map(|(i, p)| {
                p.windows(2)
                    .position(|w| ok(w[0]) && ok(w[1]))
                    .map(|at| (i, at))
            })
            .ok_or_else(|| Error::Construction("no path edge has two fault-free peers".into()))?;
        let (a, b) = (paths[i][at], paths[i][at + 1]);
        let pr = self.half_long(h, n, faulty, h.peer(a), h.peer(b))?;
        paths[i] = cat(&[&paths[i][..=at], &pr, &paths[i][at + 1..]]);
        Ok(())
    }

    fn case1_1(
        &mut self,
        frame: &Frame,
        n: u32,
        h: &Halves,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Built> {
        let mut paths = self.sub(frame, h, Side::L, n, faulty, s, t)?;
        self.detour_edge(n, h, faulty, &mut paths)?;
        Ok(Built::split(paths, CaseTag::Case1_1, h))
    }

    fn case1_2a(
        &mut self,
        frame: &Frame,
        n: u32,
        h: &Halves,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Built> {
        // hand one left fault down as healthy, keeping the left half conditional
        let w = h
            .half(Side::L)
            .filter(|v| faulty[v.0 as usize])
            .find(|&w| {
                let mut m = faulty.to_vec();
                m[w.0 as usize] = false;
                conditional_on_mask(n - 1, &project_mask(h, Side::L, &m))
            })
            .ok_or_else(|| Error::Construction("no left fault can be relaxed".into()))?;
        let mut relaxed = faulty.to_vec();
        relaxed[w.0 as usize] = false;
        let mut paths = self.sub(frame, h, Side::L, n, &relaxed, s, t)?;

        let Some((i, _)) = locate(&paths, w) else {
            self.detour_edge(n, h, faulty, &mut paths)?;
            return Ok(Built::split(paths, CaseTag::Case1_2a, h));
        };
        let bad = |v: Vertex| faulty[v.0 as usize];
        let pos = paths[i].iter().position(|&v| v == w).unwrap();
        let len = paths[i].len();
        if pos == 0 || pos + 1 == len {
            return Err(Error::Construction(format!(
                "relaxed fault {w} is a path endpoint"
            )));
        }
        let (u, v) = (paths[i][pos - 1], paths[i][pos + 1]);
        if !bad(h.peer(u)) && !bad(h.peer(v)) {
            let pr = self.half_long(h, n, faulty, h.peer(u), h.peer(v))?;
            paths[i] = cat(&[&paths[i][..pos], &pr, &paths[i][pos + 1..]]);
            return Ok(Built::split(paths, CaseTag::Case1_2a, h));
        }

        // make the faulty peer sit on the side toward the path's start
        let rev = bad(h.peer(v));
        if rev {
            reverse_all(&mut paths);
        }
        let path = paths[i].clone();
        let pos = path.iter().position(|&x| x == w).unwrap();
        let (u, v) = (path[pos - 1], path[pos + 1]);
        let vr = h.peer(v);

        if pos >= 2 {
            let z = path[pos - 2];
            let pr = self.half_long(h, n, faulty, h.peer(z), vr)?;
            paths[i] = cat(&[&path[..pos - 1], &pr, &path[pos + 1..]]);
        } else {
            let nbrs: Vec<Vertex> = same_side_neighbors(h, n, u)
                .into_iter()
                .filter(|&z| !bad(z))
                .collect();
            if let Some(&z) = nbrs.iter().find(|&&z| locate(&paths, z).is_none()) {
                let pr = self.half_long(h, n, faulty, h.peer(z), vr)?;
                paths[i] = cat(&[&[u, z], &pr, &path[pos + 1..]]);
            } else if nbrs.iter().all(|&z| path.contains(&z)) {
                let last = *path.last().unwrap();
                let z = *nbrs
                    .iter()
                    .find(|&&z| z != last)
                    .ok_or_else(|| Error::Construction("start has no usable neighbor".into()))?;
                let zp = path.iter().position(|&x| x == z).unwrap();
                let z2 = path[zp + 1];
                let pr = self.half_long(h, n, faulty, vr, h.peer(z2))?;
                let mut back: Vec<Vertex> = path[pos + 1..=zp].to_vec();
                back.reverse();
                paths[i] = cat(&[&[u], &back, &pr, &path[zp + 1..]]);
            } else {
                // a neighbor of the start lies on another path
                let z = *nbrs.iter().find(|&&z| !path.contains(&z)).unwrap();
                let (j, zp) = locate_or(&paths, z)?;
                if zp == 0 {
                    return Err(Error::Construction(format!("{z} starts its path")));
                }
                let other = paths[j].clone();
                let z2 = other[zp - 1];
                let pr = self.half_long(h, n, faulty, h.peer(z2), vr)?;
                paths[i] = cat(&[&[u], &other[zp..]]);
                paths[j] = cat(&[&other[..zp], &pr, &path[pos + 1..]]);
            }
        }
        if rev {
            reverse_all(&mut paths);
        }
        Ok(Built::split(paths, CaseTag::Case1_2a, h))
    }

    /// `f_R = 0`: route all but the last pair in `L`, then bring the last
    /// pair home through a spanning path of `R`.
    fn case1_2b(
        &mut self,
        frame: &Frame,
        n: u32,
        h: &Halves,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Built> {
        let k = s.len();
        let (sk, tk) = (s[k - 1], t[k - 1]);
        let mut paths = self.sub(frame, h, Side::L, n, faulty, &s[..k - 1], &t[..k - 1])?;
        let peer = |v: Vertex| h.peer(v);
        match (locate(&paths, sk), locate(&paths, tk)) {
            (Some((i, a)), Some((j, b))) if i == j => {
                let path = paths[i].clone();
                let (lo, hi) = (a.min(b), a.max(b));
                let pr = self.half_long(h, n, faulty, peer(path[lo - 1]), peer(path[hi + 1]))?;
                let mut pk = path[lo..=hi].to_vec();
                if a > b {
                    pk.reverse();
                }
                paths[i] = cat(&[&path[..lo], &pr, &path[hi + 1..]]);
                paths.push(pk);
            }
            (Some((i, a)), Some((j, b))) => {
                let (pi, pj) = (paths[i].clone(), paths[j].clone());
                let pr = self.half_long(h, n, faulty, peer(pi[a - 1]), peer(pj[b + 1]))?;
                paths[i] = cat(&[&pi[..a], &pr, &pj[b + 1..]]);
                paths[j] = pj[..=b].to_vec();
                paths.push(pi[a..].to_vec());
            }
            (Some((i, a)), None) => {
                let pi = paths[i].clone();
                let pr = self.half_long(h, n, faulty, peer(pi[a - 1]), peer(tk))?;
                paths[i] = cat(&[&pi[..a], &pr, &[tk]]);
                paths.push(pi[a..].to_vec());
            }
            (None, Some((j, b))) => {
                let pj = paths[j].clone();
                let pr = self.half_long(h, n, faulty, peer(sk), peer(pj[b + 1]))?;
                paths[j] = pj[..=b].to_vec();
                paths.push(cat(&[&[sk], &pr, &pj[b + 1..]]));
            }
            (None, None) => {
                let pr = self.half_long(h, n, faulty, peer(sk), peer(tk))?;
                paths.push(cat(&[&[sk], &pr, &[tk]]));
            }
        }
        Ok(Built::split(paths, CaseTag::Case1_2b_fallback, h))
    }

    /// Crossing pads: smallest `L`-vertices of the sinks' class, fault-free
    /// on both ends, off `avoid`, whose peers avoid `S_R`.
    fn pads(
        &self,
        h: &Halves,
        faulty: &[bool],
        count: usize,
        sink_class: cube::Parity,
        avoid: &[Vertex],
        s_right: &[Vertex],
    ) -> Result<Vec<Vertex>> {
        let bad = |v: Vertex| faulty[v.0 as usize];
        let chosen: Vec<Vertex> = h
            .half(Side::L)
            .filter(|&u| {
                parity(u) == sink_class
                    && !bad(u)
                    && !bad(h.peer(u))
                    && !avoid.contains(&u)
                    && !s_right.contains(&h.peer(u))
            })
            .take(count)
            .collect();
        if chosen.len() < count {
            return Err(Error::Construction(format!(
                "only {} of {count} crossing pads available",
                chosen.len()
            )));
        }
        Ok(chosen)
    }

    fn case2(
        &mut self,
        frame: &Frame,
        n: u32,
        h: &Halves,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Built> {
        let (sl, sr) = split_by_side(h, s);
        let (tl, tr) = split_by_side(h, t);
        let pads = self.pads(h, faulty, sl.len() - tl.len(), parity(t[0]), &tl, &sr)?;
        let mut tl2 = tl.clone();
        tl2.extend(&pads);
        let lp = self.sub(frame, h, Side::L, n, faulty, &sl, &tl2)?;
        let mut sr2 = sr.clone();
        sr2.extend(pads.iter().map(|&u| h.peer(u)));
        let rp = self.sub(frame, h, Side::R, n, faulty, &sr2, &tr)?;
        let paths = edge_avoiding::join_over_pads(h, lp, rp, &pads)?;
        Ok(Built::split(paths, CaseTag::Case2, h))
    }

    /// Every sink in `R`, which holds nearly all faults.
    fn case3(
        &mut self,
        frame: &Frame,
        n: u32,
        h: &Halves,
        faulty: &[bool],
        s: &[Vertex],
        t: &[Vertex],
    ) -> Result<Built> {
        let (sl, sr) = split_by_side(h, s);
        let f = count(faulty);
        let target = order(n).saturating_sub(2 * f);
        let mut candidates: Vec<usize> = (0..t.len()).collect();
        if sl.len() == 1 {
            candidates.sort_by_key(|&i| t[i].is_adjacent(sl[0]));
        }
        let pads = self.pads(h, faulty, sl.len() - 1, parity(t[0]), &[], &sr)?;
        let mut r_src = sr.clone();
        r_src.extend(pads.iter().map(|&u| h.peer(u)));

        let mut last = Error::Construction("no sink could be reconnected".into());
        for ti in candidates {
            let t1 = t[ti];
            let rest: Vec<Vertex> = t.iter().copied().filter(|&v| v != t1).collect();
            let mark = self.levels.len();
            let rp = match self.sub(frame, h, Side::R, n, faulty, &r_src, &rest) {
                Ok(rp) => rp,
                Err(e) => {
                    self.levels.truncate(mark);
                    last = e;
                    continue;
                }
            };
            let ctx = Case3 {
                n,
                h,
                faulty,
                sl: &sl,
                pads: &pads,
                rp: &rp,
                t1,
                s,
                t,
                target,
            };
            match self.case3_attempts(frame, &ctx) {
                Ok(built) => return Ok(built),
                Err(e) => {
                    self.levels.truncate(mark);
                    last = e;
                }
            }
        }
        Err(last)
    }

    fn case3_attempts(&mut self, frame: &Frame, c: &Case3<'_>) -> Result<Built> {
        let (n, h, t1) = (c.n, c.h, c.t1);
        let bad = |v: Vertex| c.faulty[v.0 as usize];
        let p = c.sl.len();
        let on_r = locate(c.rp, t1);
        let mut last = Error::Construction("no reconnection of the spare sink".into());

        if on_r.is_none() {
            let tl = h.peer(t1);
            if !bad(tl) {
                if c.sl.contains(&tl) {
                    if p < 2 {
                        return Err(Error::Construction(
                            "spare sink is adjacent to the only left source".into(),
                        ));
                    }
                    let m = with_fault(c.faulty, tl);
                    let rest: Vec<Vertex> = c.sl.iter().copied().filter(|&v| v != tl).collect();
                    let lp = self.sub(frame, h, Side::L, n, &m, &rest, c.pads)?;
                    let mut out = edge_avoiding::join_over_pads(h, lp, c.rp.to_vec(), c.pads)?;
                    out.push(vec![tl, t1]);
                    return c.accept(out, CaseTag::Case3a);
                }
                for z in same_side_neighbors(h, n, tl) {
                    if bad(z) || c.pads.contains(&z) {
                        continue;
                    }
                    let m = with_fault(c.faulty, tl);
                    let attempt = self.attempt(|r| {
                        let mut tgt = c.pads.to_vec();
                        tgt.push(z);
                        let lp = r.sub(frame, h, Side::L, n, &m, c.sl, &tgt)?;
                        let mut out = edge_avoiding::join_over_pads(h, lp, c.rp.to_vec(), c.pads)?;
                        let i = position_ending_at(&out, z)?;
                        out[i].extend([tl, t1]);
                        c.accept(out, CaseTag::Case3a)
                    });
                    match attempt {
                        Ok(b) => return Ok(b),
                        Err(e) => last = e,
                    }
                }
                return Err(last);
            }

            // the spare sink's left peer is faulty: enter through a right neighbor
            for wr in same_side_neighbors(h, n, t1) {
                let wl = h.peer(wr);
                if bad(wr) || bad(wl) || c.pads.contains(&wl) {
                    continue;
                }
                let attempt = match locate(c.rp, wr) {
                    None => self.attempt(|r| {
                        let mut tgt = c.pads.to_vec();
                        tgt.push(wl);
                        let lp = r.sub(frame, h, Side::L, n, c.faulty, c.sl, &tgt)?;
                        let mut out = edge_avoiding::join_over_pads(h, lp, c.rp.to_vec(), c.pads)?;
                        let i = position_ending_at(&out, wl)?;
                        out[i].extend([wr, t1]);
                        c.accept(out, CaseTag::Case3a)
                    }),
                    Some((j, pos)) => {
                        if pos + 1 >= c.rp[j].len() {
                            continue;
                        }
                        let ur = c.rp[j][pos + 1];
                        let ul = h.peer(ur);
                        if c.sl.contains(&ul) {
                            if p < 2 {
                                continue;
                            }
                            self.attempt(|r| {
                                let m = with_fault(c.faulty, ul);
                                let rest: Vec<Vertex> =
                                    c.sl.iter().copied().filter(|&v| v != ul).collect();
                                let lp = r.sub(frame, h, Side::L, n, &m, &rest, c.pads)?;
                                let mut out =
                                    edge_avoiding::join_over_pads(h, lp, c.rp.to_vec(), c.pads)?;
                                let (jj, pp) = locate_or(&out, wr)?;
                                let host = out.remove(jj);
                                out.push(cat(&[&host[..=pp], &[t1]]));
                                out.push(cat(&[&[ul], &host[pp + 1..]]));
                                c.accept(out, CaseTag::Case3a)
                            })
                        } else if bad(ul) {
                            continue;
                        } else {
                            let mut res =
                                Err(Error::Construction(format!("{ul} has no spare neighbor")));
                            for z in same_side_neighbors(h, n, ul) {
                                if bad(z) || c.pads.contains(&z) {
                                    continue;
                                }
                                res = self.attempt(|r| {
                                    let m = with_fault(c.faulty, ul);
                                    let mut tgt = c.pads.to_vec();
                                    tgt.push(z);
                                    let lp = r.sub(frame, h, Side::L, n, &m, c.sl, &tgt)?;
                                    let mut out = edge_avoiding::join_over_pads(
                                        h,
                                        lp,
                                        c.rp.to_vec(),
                                        c.pads,
                                    )?;
                                    let (jj, pp) = locate_or(&out, wr)?;
                                    let host = out.remove(jj);
                                    let i = position_ending_at(&out, z)?;
                                    out[i].push(ul);
                                    out[i].extend_from_slice(&host[pp + 1..]);
                                    out.push(cat(&[&host[..=pp], &[t1]]));
                                    c.accept(out, CaseTag::Case3a)
                                });
                                if res.is_ok() {
                                    break;
                                }
                            }
                            res
                        }
                    }
                };
                match attempt {
                    Ok(b) => return Ok(b),
                    Err(e) => last = e,
                }
            }
            return Err(last);
        }

        // the spare sink already lies on a right path
        let (j, pos) = on_r.unwrap();
        if pos + 1 >= c.rp[j].len() {
            return Err(Error::Construction(format!("{t1} ends a right path")));
        }
        let ur = c.rp[j][pos + 1];
        let ul = h.peer(ur);
        if !bad(ul) {
            if c.pads.contains(&ul) {
                return Err(Error::Construction(format!("{ul} is already a pad")));
            }
            return self.attempt(|r| {
                let mut tgt = c.pads.to_vec();
                tgt.push(ul);
                let lp = r.sub(frame, h, Side::L, n, c.faulty, c.sl, &tgt)?;
                let mut out = edge_avoiding::join_over_pads(h, lp, c.rp.to_vec(), c.pads)?;
                let (jj, pp) = locate_or(&out, t1)?;
                let host = out.remove(jj);
                let i = position_ending_at(&out, ul)?;
                out[i].extend_from_slice(&host[pp + 1..]);
                out.push(host[..=pp].to_vec());
                c.accept(out, CaseTag::Case3b)
            });
        }

        // left peer of the successor is the left fault
        let t2 = *c.rp[j].last().unwrap();
        if !ur.is_adjacent(t2) {
            return Err(Error::Construction(
                "successor of the spare sink is far from its sink".into(),
            ));
        }
        let t2l = h.peer(t2);
        let (x, y) = (h.project(t2l), h.project(ul));
        let budget = *self.budget;
        let spanning = |src: &[Vertex], dst: &[Vertex]| -> Result<Vec<Vec<Vertex>>> {
            let paths = edge_avoiding::build(
                n - 1,
                x,
                y,
                &project_all(h, src),
                &project_all(h, dst),
                &budget,
            )?;
            let mut paths = embed_paths(h, Side::L, paths);
            orient(&mut paths, src);
            Ok(paths)
        };
        let finish =
            |lp: Vec<Vec<Vertex>>, tail: &[Vertex], end: Option<Vertex>| -> Result<Built> {
                let mut out = edge_avoiding::join_over_pads(h, lp, c.rp.to_vec(), c.pads)?;
                let (jj, pp) = locate_or(&out, t1)?;
                out[jj].truncate(pp + 1);
                match end {
                    Some(z) => {
                        let i = position_ending_at(&out, z)?;
                        out[i].extend_from_slice(tail);
                    }
                    None => out.push(tail.to_vec()),
                }
                c.accept(out, CaseTag::Case3b)
            };
        if c.sl.contains(&t2l) {
            if p < 2 {
                return Err(Error::Construction(
                    "spare configuration needs two left sources".into(),
                ));
            }
            let rest: Vec<Vertex> = c.sl.iter().copied().filter(|&v| v != t2l).collect();
            let lp = spanning(&rest, c.pads)?;
            return finish(lp, &[t2l, t2], None);
        }
        for z in same_side_neighbors(h, n, t2l) {
            if z == ul || bad(z) || c.pads.contains(&z) {
                continue;
            }
            let mut tgt = c.pads.to_vec();
            tgt.push(z);
            let res = spanning(c.sl, &tgt).and_then(|lp| finish(lp, &[t2l, t2], Some(z)));
            match res {
                Ok(b) => return Ok(b),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Run `f`, discarding any trace levels it leaves behind on failure.
    fn attempt(&mut self, f: impl FnOnce(&mut Self) -> Result<Built>) -> Result<Built> {
        let mark = self.levels.len();
        let res = f(self);
        if res.is_err() {
            self.levels.truncate(mark);
        }
        res
    }
}

struct Case3<'a> {
    n: u32,
    h: &'a Halves,
    faulty: &'a [bool],
    sl: &'a [Vertex],
    pads: &'a [Vertex],
    rp: &'a [Vec<Vertex>],
    t1: Vertex,
    s: &'a [Vertex],
    t: &'a [Vertex],
    target: usize,
}

impl Case3<'_> {
    fn accept(&self, mut out: Vec<Vec<Vertex>>, tag: CaseTag) -> Result<Built> {
        orient(&mut out, self.s);
        if meets(self.n, self.faulty, self.s, self.t, &out, self.target) {
            Ok(Built::split(out, tag, self.h))
        } else {
            Err(Error::Construction(format!("{tag} reassembly fell short")))
        }
    }
}

fn with_fault(faulty: &[bool], v: Vertex) -> Vec<bool> {
    let mut m = faulty.to_vec();
    m[v.0 as usize] = true;
    m
}
