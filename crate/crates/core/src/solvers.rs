//! Bounded exact solvers for the three cited building blocks: long
//! fault-free paths, many-to-many disjoint paths with few faults, and
//! spanning paths of `Q_n` minus an edge. All three run the backtracking
//! engine and re-verify what it returns.

use serde::{Deserialize, Serialize};

use crate::cube::{self, distance, order, parity, Vertex};
use crate::error::{Error, Result};
use crate::fault::{conditional_on_mask, FaultSet, Instance};
use crate::path::{Path, PathSystem};
use crate::search::{find_cover, CoverSpec};
use crate::verify;

/// Limits for the backtracking solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverBudget {
    /// Largest cube a solver will search.
    pub max_dimension: u32,
    /// Backtracking nodes per solver call.
    pub node_limit: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            max_dimension: 7,
            node_limit: 50_000_000,
        }
    }
}

impl SolverBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_dimension < 3 || self.max_dimension > cube::MAX_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "max_dimension must lie in 3..=30, got {}",
                self.max_dimension
            )));
        }
        Ok(())
    }

    fn admit(&self, n: u32) -> Result<()> {
        self.validate()?;
        if n > self.max_dimension {
            return Err(Error::Precondition(format!(
                "n={n} exceeds the solver dimension cap {}",
                self.max_dimension
            )));
        }
        Ok(())
    }
}

fn precondition(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}

fn check_vertex(n: u32, v: Vertex) -> Result<()> {
    if u64::from(v.0) >= 1u64 << n {
        Err(Error::VertexOutOfRange { vertex: v.0, n })
    } else {
        Ok(())
    }
}

/// A fault-free `x`-`y` path with at least `2^n - 2f` vertices when
/// `d(x, y)` is odd and `2^n - 2f - 1` when it is even.
///
/// Requires `n >= 3`, `f <= 2n - 5` and every fault-free vertex to keep two
/// fault-free neighbors.
pub fn long_path(
    n: u32,
    faults: &FaultSet,
    x: Vertex,
    y: Vertex,
    budget: &SolverBudget,
) -> Result<Path> {
    cube::check_dimension(n)?;
    budget.admit(n)?;
    check_vertex(n, x)?;
    check_vertex(n, y)?;
    precondition(n >= 3, || format!("n={n} is below 3"))?;
    let f = faults.len();
    precondition(f + 5 <= 2 * n as usize, || {
        format!("f={f} exceeds 2n-5={}", 2 * n as i64 - 5)
    })?;
    precondition(x != y, || "x and y coincide".into())?;
    precondition(!faults.contains(x) && !faults.contains(y), || {
        "endpoint is faulty".into()
    })?;
    let mask = faults.mask(n);
    precondition(conditional_on_mask(n, &mask), || {
        "some fault-free vertex has fewer than two fault-free neighbors".into()
    })?;
    long_path_masked(n, &mask, x, y, budget.node_limit)
}

pub(crate) fn long_path_target(n: u32, f: usize, x: Vertex, y: Vertex) -> usize {
    let base = order(n).saturating_sub(2 * f);
    if distance(x, y) % 2 == 1 {
        base
    } else {
        base.saturating_sub(1)
    }
}

/// Unchecked core of [`long_path`]; `faulty` is a dense mask.
pub(crate) fn long_path_masked(
    n: u32,
    faulty: &[bool],
    x: Vertex,
    y: Vertex,
    node_limit: u64,
) -> Result<Path> {
    let f = faulty.iter().filter(|b| **b).count();
    let target = long_path_target(n, f, x, y);
    let spec = CoverSpec {
        n,
        blocked: faulty,
        sources: &[x],
        sinks: &[y],
        fixed_pairing: true,
        target,
    };
    let mut paths = find_cover(&spec, node_limit)?;
    let path = Path::new(paths.remove(0))?;
    let inst = Instance::new(n, FaultSet::from_mask(faulty), vec![x], vec![y]);
    let report = verify::verify(&inst, &PathSystem::new(vec![path.clone()]));
    if !(report.disjoint
        && report.fault_free
        && report.endpoints_bijection
        && report.all_edges_valid)
        || report.coverage < target
    {
        return Err(Error::Construction(format!(
            "long path failed re-verification: {:?}",
            report.failures
        )));
    }
    Ok(path)
}

/// `k` disjoint fault-free `S`-`T` paths with at least `2^n - 2f` vertices,
/// for `1 <= k <= n - 1` and `f <= n - k - 1`.
pub fn disjoint_paths_small(
    n: u32,
    faults: &FaultSet,
    sources: &[Vertex],
    sinks: &[Vertex],
    budget: &SolverBudget,
) -> Result<PathSystem> {
    cube::check_dimension(n)?;
    budget.admit(n)?;
    let inst = Instance::new(n, faults.clone(), sources.to_vec(), sinks.to_vec());
    inst.validate()?;
    precondition(n >= 2, || format!("n={n} is below 2"))?;
    let k = sources.len();
    precondition(k < n as usize, || format!("k={k} exceeds n-1={}", n - 1))?;
    precondition(faults.len() + k < n as usize, || {
        format!(
            "f={} exceeds n-k-1={}",
            faults.len(),
            n as i64 - k as i64 - 1
        )
    })?;
    cover_masked(
        n,
        &faults.mask(n),
        sources,
        sinks,
        inst.coverage_bound(),
        budget.node_limit,
    )
}

/// Generic entry: `k` disjoint paths avoiding `blocked`, any pairing, with
/// at least `target` vertices. Used directly as the fallback solver.
pub(crate) fn cover_masked(
    n: u32,
    blocked: &[bool],
    sources: &[Vertex],
    sinks: &[Vertex],
    target: usize,
    node_limit: u64,
) -> Result<PathSystem> {
    let spec = CoverSpec {
        n,
        blocked,
        sources,
        sinks,
        fixed_pairing: false,
        target,
    };
    let paths = find_cover(&spec, node_limit)?;
    let ps = PathSystem::new(paths.into_iter().map(Path::new).collect::<Result<_>>()?);
    let inst = Instance::new(
        n,
        FaultSet::from_mask(blocked),
        sources.to_vec(),
        sinks.to_vec(),
    );
    let report = verify::verify(&inst, &ps);
    if !(report.disjoint
        && report.fault_free
        && report.endpoints_bijection
        && report.all_edges_valid)
        || report.coverage < target
    {
        return Err(Error::Construction(format!(
            "path cover failed re-verification: {:?}",
            report.failures
        )));
    }
    Ok(ps)
}

/// True when `(n, x, y, u, v)` is the configuration with no spanning path:
/// `n = 3`, `d(u, v) = 1` and `d({x, y}, {u, v}) = 2`.
pub fn is_spanning_exception(n: u32, x: Vertex, y: Vertex, u: Vertex, v: Vertex) -> bool {
    n == 3 && distance(u, v) == 1 && cube::set_distance(&[x, y], &[u, v]) == Some(2)
}

/// A `u`-`v` path through every vertex of `Q_n - {x, y}`, where `xy` is an
/// edge, `{x, y}` and `{u, v}` are disjoint and `d(u, v)` is odd.
pub fn spanning_path_avoiding_edge(
    n: u32,
    x: Vertex,
    y: Vertex,
    u: Vertex,
    v: Vertex,
    budget: &SolverBudget,
) -> Result<Path> {
    cube::check_dimension(n)?;
    budget.admit(n)?;
    for w in [x, y, u, v] {
        check_vertex(n, w)?;
    }
    precondition(n >= 3, || format!("n={n} is below 3"))?;
    precondition(x.is_adjacent(y), || format!("{x} and {y} are not adjacent"))?;
    precondition(
        u != v && ![x, y].contains(&u) && ![x, y].contains(&v),
        || "{x, y} and {u, v} must be disjoint pairs".into(),
    )?;
    precondition(parity(u) != parity(v), || "d(u, v) must be odd".into())?;
    if is_spanning_exception(n, x, y, u, v) {
        return Err(Error::ExceptionCase);
    }
    let mut blocked = vec![false; order(n)];
    blocked[x.0 as usize] = true;
    blocked[y.0 as usize] = true;
    spanning_masked(n, &blocked, &[u], &[v], true, budget.node_limit)
        .map(|mut ps| ps.paths.remove(0))
}

/// Disjoint paths covering every vertex not in `blocked` exactly.
pub(crate) fn spanning_masked(
    n: u32,
    blocked: &[bool],
    sources: &[Vertex],
    sinks: &[Vertex],
    fixed: bool,
    node_limit: u64,
) -> Result<PathSystem> {
    let free = blocked.iter().filter(|b| !**b).count();
    let spec = CoverSpec {
        n,
        blocked,
        sources,
        sinks,
        fixed_pairing: fixed,
        target: free,
    };
    let paths = find_cover(&spec, node_limit)?;
    let ps = PathSystem::new(paths.into_iter().map(Path::new).collect::<Result<_>>()?);
    let inst = Instance::new(
        n,
        FaultSet::from_mask(blocked),
        sources.to_vec(),
        sinks.to_vec(),
    );
    let report = verify::verify(&inst, &ps);
    if !(report.disjoint
        && report.fault_free
        && report.endpoints_bijection
        && report.all_edges_valid)
        || report.coverage != free
    {
        return Err(Error::Construction(format!(
            "spanning cover failed re-verification: {:?}",
            report.failures
        )));
    }
    Ok(ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(v: &[u32]) -> FaultSet {
        v.iter().map(|&x| Vertex(x)).collect()
    }

    fn b() -> SolverBudget {
        SolverBudget::default()
    }

    #[test]
    fn long_path_examples() {
        let p = long_path(3, &FaultSet::new(), Vertex(0), Vertex(0b111), &b()).unwrap();
        assert_eq!(p.len(), 8);
        let p = long_path(3, &FaultSet::new(), Vertex(0), Vertex(0b011), &b()).unwrap();
        assert!(p.len() >= 7);
        let p = long_path(4, &fs(&[0b1111]), Vertex(0), Vertex(0b0111), &b()).unwrap();
        assert!(p.len() >= 14);
        assert!(!p.contains(Vertex(0b1111)));
    }

    #[test]
    fn long_path_preconditions() {
        assert!(matches!(
            long_path(3, &fs(&[1, 2]), Vertex(0), Vertex(7), &b()),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            long_path(3, &FaultSet::new(), Vertex(5), Vertex(5), &b()),
            Err(Error::Precondition(_))
        ));
        let capped = SolverBudget {
            max_dimension: 4,
            ..b()
        };
        assert!(long_path(5, &FaultSet::new(), Vertex(0), Vertex(1), &capped).is_err());
    }

    #[test]
    fn disjoint_paths_examples() {
        let ps =
            disjoint_paths_small(2, &FaultSet::new(), &[Vertex(0)], &[Vertex(1)], &b()).unwrap();
        assert_eq!(ps.vertex_count(), 4);

        let s = [Vertex(0b0000), Vertex(0b0011), Vertex(0b0101)];
        let t = [Vertex(0b0001), Vertex(0b0010), Vertex(0b1000)];
        let ps = disjoint_paths_small(4, &FaultSet::new(), &s, &t, &b()).unwrap();
        assert_eq!(ps.vertex_count(), 16);

        let s = [Vertex(0b0000), Vertex(0b0011)];
        let t = [Vertex(0b0001), Vertex(0b0010)];
        let f = fs(&[0b1111]);
        let ps = disjoint_paths_small(4, &f, &s, &t, &b()).unwrap();
        let inst = Instance::new(4, f, s.to_vec(), t.to_vec());
        let r = verify::verify(&inst, &ps);
        assert!(r.pass() && r.coverage >= 14, "{r:?}");
    }

    #[test]
    fn disjoint_paths_rejects_too_many_faults() {
        let s = [Vertex(0b0000), Vertex(0b0011)];
        let t = [Vertex(0b0001), Vertex(0b0010)];
        assert!(matches!(
            disjoint_paths_small(4, &fs(&[0b1111, 0b1100]), &s, &t, &b()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn spanning_path_examples() {
        let p = spanning_path_avoiding_edge(
            3,
            Vertex(0),
            Vertex(1),
            Vertex(0b011),
            Vertex(0b111),
            &b(),
        )
        .unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(
            spanning_path_avoiding_edge(
                3,
                Vertex(0),
                Vertex(1),
                Vertex(0b110),
                Vertex(0b111),
                &b()
            ),
            Err(Error::ExceptionCase)
        );
        let p = spanning_path_avoiding_edge(
            4,
            Vertex(0),
            Vertex(8),
            Vertex(0b0110),
            Vertex(0b0111),
            &b(),
        )
        .unwrap();
        assert_eq!(p.len(), 14);
    }

    #[test]
    fn solvers_are_deterministic() {
        let f = fs(&[5, 40, 17]);
        let a = long_path(6, &f, Vertex(0), Vertex(63), &b()).unwrap();
        let c = long_path(6, &f, Vertex(0), Vertex(63), &b()).unwrap();
        assert_eq!(a, c);
    }
}
