//! Spanning disjoint paths in `Q_n` minus an edge.
//!
//! For an edge `xy` of `Q_n` (`n >= 4`) and balanced terminal sets `S`, `T`
//! of size `k <= n - 2` in opposite classes, builds `k` disjoint `S`-`T`
//! paths whose vertex sets partition `V(Q_n) - {x, y}`. The construction
//! recurses on `k` through a split `Q_n = L ⊙ R` with `xy` inside `L`:
//!
//! * all terminals in `R`: cover `R` exactly, then reroute one edge of an
//!   `R`-path through a spanning path of `L - {x, y}`;
//! * terminals on both sides: pad the `L`-side sinks with crossing vertices,
//!   solve both halves, and join the padded paths over the cross edges;
//! * all sources in `L`: drop one source, recurse, and cut the path that
//!   swallowed it next to that source to cross into `R`.
//!
//! `k = 1` is a single spanning path; `n = 4` tries the distance-2 re-split
//! and otherwise searches `Q_4` directly.

use crate::cube::{self, parity, set_distance, Halves, Side, Vertex};
use crate::error::{Error, Result};
use crate::fault::{FaultSet, Instance};
use crate::halves::{embed_paths, locate, project_all, split_by_side};
use crate::path::{Path, PathSystem};
use crate::solvers::{is_spanning_exception, spanning_masked, SolverBudget};
use crate::verify;

/// `k` disjoint `S`-`T` paths covering exactly `V(Q_n) - {x, y}`.
pub fn spanning_disjoint_paths_avoiding_edge(
    n: u32,
    x: Vertex,
    y: Vertex,
    sources: &[Vertex],
    sinks: &[Vertex],
    budget: &SolverBudget,
) -> Result<PathSystem> {
    cube::check_dimension(n)?;
    budget.validate()?;
    check_input(n, x, y, sources, sinks)?;
    let paths = build(n, x, y, sources, sinks, budget)?;
    let mut ps = PathSystem::new(paths.into_iter().map(Path::new).collect::<Result<_>>()?);
    ps.normalize(sources);

    let inst = Instance::new(
        n,
        [x, y].into_iter().collect::<FaultSet>(),
        sources.to_vec(),
        sinks.to_vec(),
    );
    let report = verify::verify(&inst, &ps);
    let expected = cube::order(n) - 2;
    if !(report.disjoint
        && report.fault_free
        && report.endpoints_bijection
        && report.all_edges_valid)
        || report.coverage != expected
    {
        return Err(Error::Construction(format!(
            "edge-avoiding cover has {} of {expected} vertices: {:?}",
            report.coverage, report.failures
        )));
    }
    Ok(ps)
}

fn check_input(n: u32, x: Vertex, y: Vertex, sources: &[Vertex], sinks: &[Vertex]) -> Result<()> {
    let pre = |ok: bool, msg: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(msg.to_string()))
        }
    };
    pre(n >= 4, "n must be at least 4")?;
    let k = sources.len();
    pre(
        k >= 1 && k + 2 <= n as usize,
        "k must satisfy 1 <= k <= n-2",
    )?;
    pre(sinks.len() == k, "|S| must equal |T|")?;
    pre(x.is_adjacent(y), "x and y must be adjacent")?;
    let limit = 1u64 << n;
    let mut all: Vec<Vertex> = sources.iter().chain(sinks).copied().collect();
    all.extend([x, y]);
    for &v in &all {
        if u64::from(v.0) >= limit {
            return Err(Error::VertexOutOfRange { vertex: v.0, n });
        }
    }
    all.sort();
    all.dedup();
    pre(
        all.len() == 2 * k + 2,
        "S, T and {x, y} must be pairwise disjoint",
    )?;
    let cls = parity(sources[0]);
    pre(
        sources.iter().all(|&s| parity(s) == cls) && sinks.iter().all(|&t| parity(t) != cls),
        "S and T must lie in different partite sets",
    )
}

fn leaf(
    n: u32,
    excluded: &[Vertex],
    sources: &[Vertex],
    sinks: &[Vertex],
    fixed: bool,
    b: &SolverBudget,
) -> Result<Vec<Vec<Vertex>>> {
    if n > b.max_dimension {
        return Err(Error::Precondition(format!(
            "n={n} exceeds the solver dimension cap {}",
            b.max_dimension
        )));
    }
    let mut blocked = vec![false; cube::order(n)];
    for v in excluded {
        blocked[v.0 as usize] = true;
    }
    let ps = spanning_masked(n, &blocked, sources, sinks, fixed, b.node_limit)?;
    Ok(ps.paths.into_iter().map(Path::into_vertices).collect())
}

/// Recursive construction; paths come back oriented source to sink.
pub(crate) fn build(
    n: u32,
    x: Vertex,
    y: Vertex,
    s: &[Vertex],
    t: &[Vertex],
    b: &SolverBudget,
) -> Result<Vec<Vec<Vertex>>> {
    let k = s.len();
    if k == 1 {
        if is_spanning_exception(n, x, y, s[0], t[0]) {
            return Err(Error::ExceptionCase);
        }
        return leaf(n, &[x, y], s, t, true, b);
    }
    if n == 4 {
        return base_q4(x, y, s, t, b);
    }
    if n < 4 {
        return Err(Error::Precondition(format!("n={n} is below 4")));
    }

    let edge_bit = (x.0 ^ y.0).trailing_zeros();
    for bit in (0..n).filter(|&bit| bit != edge_bit) {
        let ctx = cube::split(n, bit + 1)?;
        let h = Halves::new(ctx, x.bit(bit));
        let p = s.iter().filter(|&&v| h.is_left(v)).count();
        let q = t.iter().filter(|&&v| h.is_left(v)).count();
        if p >= q && q < k {
            let (x, y) = if parity(x) == parity(s[0]) {
                (x, y)
            } else {
                (y, x)
            };
            return dispatch(n, &h, x, y, s, t, b);
        }
        if q > p {
            // exchange the roles of S and T; y now sits in the sources' class
            let (x2, y2) = if parity(x) == parity(t[0]) {
                (x, y)
            } else {
                (y, x)
            };
            let paths = dispatch(n, &h, x2, y2, t, s, b)?;
            return Ok(paths
                .into_iter()
                .map(|mut p| {
                    p.reverse();
                    p
                })
                .collect());
        }
    }
    Err(Error::Construction(
        "no split separates the terminals from the edge side".into(),
    ))
}

/// Crossing pads: `count` vertices of `L` in the sinks' class, off `T_L` and
/// `y`, whose `R`-peers avoid `S_R`. Smallest labels first.
fn pads(
    h: &Halves,
    count: usize,
    sink_class: cube::Parity,
    t_left: &[Vertex],
    y: Vertex,
    s_right: &[Vertex],
) -> Result<Vec<Vertex>> {
    let chosen: Vec<Vertex> = h
        .half(Side::L)
        .filter(|&u| {
            parity(u) == sink_class
                && u != y
                && !t_left.contains(&u)
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

/// Continue every `L`-path that ends on a pad with the `R`-path leaving its
/// peer; `R`-paths not starting at a pad peer are kept as they are.
pub(crate) fn join_over_pads(
    h: &Halves,
    left: Vec<Vec<Vertex>>,
    right: Vec<Vec<Vertex>>,
    pads: &[Vertex],
) -> Result<Vec<Vec<Vertex>>> {
    let mut right: Vec<Option<Vec<Vertex>>> = right.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(left.len() + right.len());
    for mut lp in left {
        let end = *lp.last().expect("non-empty");
        if pads.contains(&end) {
            let peer = h.peer(end);
            let slot = right
                .iter_mut()
                .find(|r| r.as_ref().is_some_and(|r| r[0] == peer))
                .ok_or_else(|| Error::Construction(format!("no R-path leaves pad peer {peer}")))?;
            lp.extend(slot.take().unwrap());
        }
        out.push(lp);
    }
    out.extend(right.into_iter().flatten());
    Ok(out)
}

fn dispatch(
    n: u32,
    h: &Halves,
    x: Vertex,
    y: Vertex,
    s: &[Vertex],
    t: &[Vertex],
    b: &SolverBudget,
) -> Result<Vec<Vec<Vertex>>> {
    let k = s.len();
    let (sl, sr) = split_by_side(h, s);
    let (tl, tr) = split_by_side(h, t);
    let (p, q) = (sl.len(), tl.len());
    let sink_class = parity(t[0]);
    let (xl, yl) = (h.project(x), h.project(y));

    if p == 0 {
        // everything in R: cover R exactly, then detour one edge through L - {x, y}
        let rp = embed_paths(
            h,
            Side::R,
            leaf(n - 1, &[], &project_all(h, s), &project_all(h, t), false, b)?,
        );
        let (i, at) = rp
            .iter()
            .enumerate()
            .find_map(|(i, p)| {
                p.windows(2)
                    .position(|w| {
                        ![x, y].contains(&h.peer(w[0])) && ![x, y].contains(&h.peer(w[1]))
                    })
                    .map(|at| (i, at))
            })
            .ok_or_else(|| Error::Construction("no R-edge with both peers off {x, y}".into()))?;
        let (ur, vr) = (rp[i][at], rp[i][at + 1]);
        let p0 = leaf(
            n - 1,
            &[xl, yl],
            &[h.project(ur)],
            &[h.project(vr)],
            true,
            b,
        )?;
        let p0 = embed_paths(h, Side::L, p0).remove(0);
        let mut out = rp;
        let mut spliced = out[i][..=at].to_vec();
        spliced.extend(p0);
        spliced.extend_from_slice(&out[i][at + 1..]);
        out[i] = spliced;
        return Ok(out);
    }

    if p < k {
        let pad = pads(h, p - q, sink_class, &tl, y, &sr)?;
        let mut tl2 = tl.clone();
        tl2.extend(&pad);
        let lp = embed_paths(
            h,
            Side::L,
            build(
                n - 1,
                xl,
                yl,
                &project_all(h, &sl),
                &project_all(h, &tl2),
                b,
            )?,
        );
        let mut sr2 = sr.clone();
        sr2.extend(pad.iter().map(|&u| h.peer(u)));
        let rp = embed_paths(
            h,
            Side::R,
            leaf(
                n - 1,
                &[],
                &project_all(h, &sr2),
                &project_all(h, &tr),
                false,
                b,
            )?,
        );
        return join_over_pads(h, lp, rp, &pad);
    }

    // p = k: every source in L, at least one sink in R
    let sk = s[k - 1];
    let s_rest = &s[..k - 1];
    let pad = pads(h, k - q - 1, sink_class, &tl, y, &sr)?;
    let mut tl2 = tl.clone();
    tl2.extend(&pad);
    let mut lp = embed_paths(
        h,
        Side::L,
        build(
            n - 1,
            xl,
            yl,
            &project_all(h, s_rest),
            &project_all(h, &tl2),
            b,
        )?,
    );
    let (i, j) =
        locate(&lp, sk).ok_or_else(|| Error::Construction(format!("{sk} left uncovered in L")))?;
    if j == 0 {
        return Err(Error::Construction(format!("{sk} is an endpoint in L")));
    }
    let ul = lp[i][j - 1];
    let ur = h.peer(ul);
    let mut r_sources: Vec<Vertex> = pad.iter().map(|&u| h.peer(u)).collect();
    r_sources.push(ur);
    let rp = embed_paths(
        h,
        Side::R,
        leaf(
            n - 1,
            &[],
            &project_all(h, &r_sources),
            &project_all(h, &tr),
            false,
            b,
        )?,
    );

    // split the path through s_k: s_i .. u_L | s_k .. t'
    let host = lp.remove(i);
    let head = host[..j].to_vec();
    let tail = host[j..].to_vec();
    let mut pad_ext = pad.clone();
    pad_ext.push(ul);
    lp.push(head);
    lp.push(tail);
    join_over_pads(h, lp, rp, &pad_ext)
}

fn base_q4(
    x: Vertex,
    y: Vertex,
    s: &[Vertex],
    t: &[Vertex],
    b: &SolverBudget,
) -> Result<Vec<Vec<Vertex>>> {
    let edge_bit = (x.0 ^ y.0).trailing_zeros();
    for i in 0..s.len() {
        if set_distance(&[s[i], t[i]], &[x, y]) != Some(2) {
            continue;
        }
        for bit in (0..4).filter(|&bit| bit != edge_bit) {
            if s[i].bit(bit) != t[i].bit(bit) || s[i].bit(bit) == x.bit(bit) {
                continue;
            }
            let h = Halves::new(cube::split(4, bit + 1)?, x.bit(bit));
            let others: Vec<usize> = (0..s.len()).filter(|&o| o != i).collect();
            if !others.iter().all(|&o| h.is_left(s[o]) && h.is_left(t[o])) {
                continue;
            }
            let (xl, yl) = (h.project(x), h.project(y));
            let so = project_all(&h, &others.iter().map(|&o| s[o]).collect::<Vec<_>>());
            let to = project_all(&h, &others.iter().map(|&o| t[o]).collect::<Vec<_>>());
            if so.len() == 1 && is_spanning_exception(3, xl, yl, so[0], to[0]) {
                continue;
            }
            let Ok(lp) = leaf(3, &[xl, yl], &so, &to, true, b) else {
                continue;
            };
            let Ok(rp) = leaf(3, &[], &[h.project(s[i])], &[h.project(t[i])], true, b) else {
                continue;
            };
            let mut out = embed_paths(&h, Side::L, lp);
            out.extend(embed_paths(&h, Side::R, rp));
            return Ok(out);
        }
    }
    leaf(4, &[x, y], s, t, false, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[u32]) -> Vec<Vertex> {
        xs.iter().map(|&x| Vertex(x)).collect()
    }

    fn run(n: u32, x: u32, y: u32, s: &[u32], t: &[u32]) -> PathSystem {
        spanning_disjoint_paths_avoiding_edge(
            n,
            Vertex(x),
            Vertex(y),
            &v(s),
            &v(t),
            &SolverBudget::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_path_in_q4() {
        let ps = run(4, 0b0000, 0b0001, &[0b0011], &[0b0111]);
        assert_eq!(ps.vertex_count(), 14);
    }

    #[test]
    fn two_paths_in_q4() {
        let ps = run(4, 0b0000, 0b0001, &[0b0011, 0b0101], &[0b0010, 0b1000]);
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.vertex_count(), 14);
    }

    #[test]
    fn each_case_in_q5() {
        // x = 0, y = 1; the first split is bit 1, L = {bit1 = 0}
        // all terminals in R
        let ps = run(5, 0, 1, &[0b00011, 0b00110], &[0b00010, 0b00111]);
        assert_eq!(ps.vertex_count(), 30);
        // mixed sides
        let ps = run(
            5,
            0,
            1,
            &[0b00101, 0b00110, 0b11000],
            &[0b00100, 0b00010, 0b10000],
        );
        assert_eq!(ps.vertex_count(), 30);
        // all sources in L, a sink in R
        let ps = run(
            5,
            0,
            1,
            &[0b00101, 0b01001, 0b10001],
            &[0b00010, 0b00100, 0b01000],
        );
        assert_eq!(ps.vertex_count(), 30);
    }

    #[test]
    fn s_and_t_may_sit_in_either_class() {
        let ps = run(5, 0, 1, &[0b00010, 0b00100], &[0b00011, 0b00101]);
        assert_eq!(ps.vertex_count(), 30);
        let firsts: Vec<_> = ps.paths.iter().map(|p| p.first()).collect();
        assert_eq!(firsts, v(&[0b00010, 0b00100]));
    }

    #[test]
    fn rejects_bad_input() {
        let b = SolverBudget::default();
        assert!(spanning_disjoint_paths_avoiding_edge(
            3,
            Vertex(0),
            Vertex(1),
            &v(&[3]),
            &v(&[7]),
            &b
        )
        .is_err());
        assert!(spanning_disjoint_paths_avoiding_edge(
            4,
            Vertex(0),
            Vertex(3),
            &v(&[5]),
            &v(&[6]),
            &b
        )
        .is_err());
        assert!(spanning_disjoint_paths_avoiding_edge(
            4,
            Vertex(0),
            Vertex(1),
            &v(&[3, 5, 6]),
            &v(&[2, 4, 8]),
            &b
        )
        .is_err());
    }
}
