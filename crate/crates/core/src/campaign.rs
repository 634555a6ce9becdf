//! Instance campaigns: route and verify every valid instance of a given
//! shape, or a seeded random sample of them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{order, parity, Parity, Vertex};
use crate::error::{Error, Result};
use crate::fault::{conditional_on_mask, FaultSet, Instance};
use crate::router::{route_with_budget, CaseTag};
use crate::solvers::SolverBudget;
use crate::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Randomized,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "randomized" => Ok(Mode::Randomized),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Randomized => "randomized",
        })
    }
}

/// Largest `n` accepted in exhaustive mode.
pub const EXHAUSTIVE_MAX_DIMENSION: u32 = 4;
/// Largest `n` accepted in randomized mode.
pub const RANDOMIZED_MAX_DIMENSION: u32 = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CampaignConfig {
    pub n: u32,
    pub k: usize,
    pub mode: Mode,
    /// Randomized mode: number of instances.
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    /// Randomized mode: fault count, default `2n - 2k - 3`.
    pub faults: Option<usize>,
    /// Also compare against the exhaustive optimum (`n <= 4`).
    pub oracle: bool,
    pub budget: SolverBudget,
}

impl CampaignConfig {
    pub fn new(n: u32, k: usize, mode: Mode) -> Self {
        CampaignConfig {
            n,
            k,
            mode,
            samples: 1000,
            seed: 0,
            workers: 0,
            faults: None,
            oracle: false,
            budget: SolverBudget::default(),
        }
    }

    pub fn max_faults(&self) -> usize {
        (2 * self.n as usize).saturating_sub(2 * self.k + 3)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 3 {
            return bad(format!("n={} is below 3", self.n));
        }
        if self.k < 1 || self.k + 2 > self.n as usize {
            return bad(format!("k={} must satisfy 1 <= k <= n-2", self.k));
        }
        let cap = match self.mode {
            Mode::Exhaustive => EXHAUSTIVE_MAX_DIMENSION,
            Mode::Randomized => RANDOMIZED_MAX_DIMENSION,
        };
        if self.n > cap {
            return bad(format!("{} mode supports n <= {cap}", self.mode));
        }
        if self.oracle && self.n > verify::ORACLE_MAX_DIMENSION {
            return bad(format!(
                "oracle check supports n <= {}",
                verify::ORACLE_MAX_DIMENSION
            ));
        }
        if let Some(f) = self.faults {
            if f > self.max_faults() {
                return bad(format!("f={f} exceeds 2n-2k-3={}", self.max_faults()));
            }
        }
        self.budget.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub error: String,
    #[serde(skip)]
    pub instance: Option<Instance>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub n: u32,
    pub k: usize,
    pub mode: Mode,
    pub seed: u64,
    pub instances: usize,
    pub pass: usize,
    pub fail: usize,
    /// Instances where some level was re-solved by search.
    pub fallback: usize,
    /// Levels per branch, over all passing instances.
    pub tag_counts: BTreeMap<CaseTag, usize>,
    pub first_failure: Option<Failure>,
}

impl CampaignSummary {
    pub fn fallback_rate(&self) -> f64 {
        if self.pass == 0 {
            0.0
        } else {
            self.fallback as f64 / self.pass as f64
        }
    }
}

/// All structurally valid instances with `|F| <= 2n - 2k - 3` passing the
/// conditional predicate; sources in either partite set, listed ascending.
pub fn enumerate_instances(n: u32, k: usize) -> Vec<Instance> {
    let fmax = (2 * n as usize).saturating_sub(2 * k + 3);
    let size = order(n) as u32;
    let mut out = Vec::new();
    let mut faults = Vec::new();
    for f in 0..=fmax {
        for_each_subset(&(0..size).collect::<Vec<_>>(), f, &mut |set| {
            faults.push(set.to_vec())
        });
    }
    for fset in faults {
        let mut mask = vec![false; size as usize];
        for &v in &fset {
            mask[v as usize] = true;
        }
        if !conditional_on_mask(n, &mask) {
            continue;
        }
        let class = |p: Parity| -> Vec<u32> {
            (0..size)
                .filter(|&v| !mask[v as usize] && parity(Vertex(v)) == p)
                .collect()
        };
        let (xs, ys) = (class(Parity::X), class(Parity::Y));
        let fs: FaultSet = fset.iter().map(|&v| Vertex(v)).collect();
        for (a, b) in [(&xs, &ys), (&ys, &xs)] {
            let mut s_sets = Vec::new();
            for_each_subset(a, k, &mut |s| s_sets.push(s.to_vec()));
            let mut t_sets = Vec::new();
            for_each_subset(b, k, &mut |t| t_sets.push(t.to_vec()));
            for s in &s_sets {
                for t in &t_sets {
                    out.push(Instance::new(
                        n,
                        fs.clone(),
                        s.iter().map(|&v| Vertex(v)).collect(),
                        t.iter().map(|&v| Vertex(v)).collect(),
                    ));
                }
            }
        }
    }
    out
}

fn for_each_subset(items: &[u32], size: usize, visit: &mut dyn FnMut(&[u32])) {
    fn rec(
        items: &[u32],
        start: usize,
        size: usize,
        cur: &mut Vec<u32>,
        visit: &mut dyn FnMut(&[u32]),
    ) {
        if cur.len() == size {
            visit(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, i + 1, size, cur, visit);
            cur.pop();
        }
    }
    rec(items, 0, size, &mut Vec::with_capacity(size), visit);
}

/// The `index`-th sample of a seeded campaign: `f` faults drawn uniformly
/// and redrawn until conditional, then `S` and `T` from the fault-free
/// vertices of the two partite sets (which set holds `S` is a coin flip).
pub fn sample_instance(n: u32, k: usize, f: usize, seed: u64, index: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let size = order(n);
    let all: Vec<u32> = (0..size as u32).collect();
    loop {
        let picked: Vec<u32> = all.choose_multiple(&mut rng, f).copied().collect();
        let mut mask = vec![false; size];
        for &v in &picked {
            mask[v as usize] = true;
        }
        if !conditional_on_mask(n, &mask) {
            continue;
        }
        let free = |p: Parity| -> Vec<u32> {
            all.iter()
                .copied()
                .filter(|&v| !mask[v as usize] && parity(Vertex(v)) == p)
                .collect()
        };
        let (mut a, mut b) = (free(Parity::X), free(Parity::Y));
        if rng.gen::<bool>() {
            std::mem::swap(&mut a, &mut b);
        }
        if a.len() < k || b.len() < k {
            continue;
        }
        let s: Vec<Vertex> = a.choose_multiple(&mut rng, k).map(|&v| Vertex(v)).collect();
        let t: Vec<Vertex> = b.choose_multiple(&mut rng, k).map(|&v| Vertex(v)).collect();
        return Instance::new(n, picked.iter().map(|&v| Vertex(v)).collect(), s, t);
    }
}

struct Outcome {
    tags: Vec<CaseTag>,
    fallback: bool,
}

/// Route and verify one instance; with `oracle`, also check the bound and
/// the routed coverage against the exhaustive optimum.
pub fn check_instance(
    inst: &Instance,
    budget: &SolverBudget,
    oracle: bool,
) -> std::result::Result<(Vec<CaseTag>, bool), String> {
    let (ps, trace) = route_with_budget(inst, budget).map_err(|e| e.to_string())?;
    let report = verify::verify(inst, &ps);
    if !report.pass() {
        return Err(format!("verification failed: {:?}", report.failures));
    }
    if oracle {
        let best = verify::brute_force_best(inst).map_err(|e| e.to_string())?;
        let Some((max, _)) = best else {
            return Err("oracle finds no path system".into());
        };
        if max < inst.coverage_bound() {
            return Err(format!(
                "oracle optimum {max} below bound {}",
                inst.coverage_bound()
            ));
        }
        if report.coverage > max {
            return Err(format!(
                "coverage {} exceeds oracle optimum {max}",
                report.coverage
            ));
        }
    }
    Ok((trace.tags(), trace.used_fallback()))
}

/// Run a campaign. Counts do not depend on the worker count; on failure the
/// remaining instances are skipped and the lowest failing index found is
/// reported.
pub fn enumerate_check(cfg: &CampaignConfig) -> Result<CampaignSummary> {
    enumerate_check_with_progress(cfg, &|_, _| {})
}

/// [`enumerate_check`], calling `progress(done, total)` about a hundred
/// times over the run.
pub fn enumerate_check_with_progress(
    cfg: &CampaignConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<CampaignSummary> {
    cfg.validate()?;
    let f = cfg.faults.unwrap_or(cfg.max_faults());
    let instances: Option<Vec<Instance>> = match cfg.mode {
        Mode::Exhaustive => Some(enumerate_instances(cfg.n, cfg.k)),
        Mode::Randomized => None,
    };
    let total = instances.as_ref().map_or(cfg.samples, Vec::len);
    let stop = AtomicBool::new(false);
    let done = AtomicUsize::new(0);
    let step = (total / 100).max(1);

    let run = || {
        (0..total)
            .into_par_iter()
            .map(|i| {
                if stop.load(Ordering::Relaxed) {
                    return (i, None);
                }
                let inst = match &instances {
                    Some(all) => all[i].clone(),
                    None => sample_instance(cfg.n, cfg.k, f, cfg.seed, i as u64),
                };
                let res = check_instance(&inst, &cfg.budget, cfg.oracle);
                if res.is_err() {
                    stop.store(true, Ordering::Relaxed);
                }
                let d = done.fetch_add(1, Ordering::Relaxed) + 1;
                if d.is_multiple_of(step) || d == total {
                    progress(d, total);
                }
                (
                    i,
                    Some(
                        res.map(|(tags, fallback)| Outcome { tags, fallback })
                            .map_err(|e| (e, inst)),
                    ),
                )
            })
            .collect::<Vec<_>>()
    };
    let results = if cfg.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?
            .install(run)
    };

    let mut summary = CampaignSummary {
        n: cfg.n,
        k: cfg.k,
        mode: cfg.mode,
        seed: cfg.seed,
        instances: total,
        pass: 0,
        fail: 0,
        fallback: 0,
        tag_counts: BTreeMap::new(),
        first_failure: None,
    };
    for (i, res) in results {
        match res {
            None => {}
            Some(Ok(o)) => {
                summary.pass += 1;
                summary.fallback += usize::from(o.fallback);
                for t in o.tags {
                    *summary.tag_counts.entry(t).or_default() += 1;
                }
            }
            Some(Err((error, inst))) => {
                summary.fail += 1;
                if summary.first_failure.is_none() {
                    summary.first_failure = Some(Failure {
                        index: i,
                        error,
                        instance: Some(inst),
                    });
                }
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts() {
        // n = 3, k = 1: F = {} gives 4 * 4 pairs per orientation; each single
        // fault leaves 3 * 4
        let all = enumerate_instances(3, 1);
        assert_eq!(all.len(), 2 * (16 + 8 * 12));
        assert!(all.iter().all(|i| i.validate_theorem().is_ok()));
    }

    #[test]
    fn sampling_is_seeded_and_valid() {
        for i in 0..50 {
            let a = sample_instance(6, 2, 5, 7, i);
            assert_eq!(a, sample_instance(6, 2, 5, 7, i));
            assert_eq!(a.f(), 5);
            assert!(a.validate_theorem().is_ok());
        }
        assert_ne!(
            sample_instance(6, 2, 5, 7, 0),
            sample_instance(6, 2, 5, 8, 0)
        );
    }

    #[test]
    fn small_campaigns_pass() {
        let s = enumerate_check(&CampaignConfig::new(3, 1, Mode::Exhaustive)).unwrap();
        assert_eq!((s.fail, s.pass), (0, s.instances));
        let mut cfg = CampaignConfig::new(5, 2, Mode::Randomized);
        cfg.samples = 50;
        cfg.workers = 2;
        let a = enumerate_check(&cfg).unwrap();
        assert_eq!(a.fail, 0);
        cfg.workers = 1;
        assert_eq!(enumerate_check(&cfg).unwrap(), a);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(enumerate_check(&CampaignConfig::new(5, 1, Mode::Exhaustive)).is_err());
        assert!(enumerate_check(&CampaignConfig::new(5, 4, Mode::Randomized)).is_err());
    }
}
