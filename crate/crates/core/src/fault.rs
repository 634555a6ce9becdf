//! Faulty vertex sets, routing instances and the conditional fault predicate.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cube::{self, neighbor_iter, order, parity, Side, SplitContext, Vertex};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultSet {
    faults: BTreeSet<Vertex>,
}

impl FaultSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.faults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.faults.contains(&v)
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        self.faults.insert(v)
    }

    pub fn remove(&mut self, v: Vertex) -> bool {
        self.faults.remove(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.faults.iter().copied()
    }

    /// Dense membership table over `Q_n`.
    pub fn mask(&self, n: u32) -> Vec<bool> {
        let mut m = vec![false; order(n)];
        for v in &self.faults {
            m[v.0 as usize] = true;
        }
        m
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        mask.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Vertex(i as u32))
            .collect()
    }
}

impl FromIterator<Vertex> for FaultSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        FaultSet {
            faults: iter.into_iter().collect(),
        }
    }
}

/// A many-to-many routing problem on `Q_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    pub n: u32,
    pub k: usize,
    pub faults: FaultSet,
    pub sources: Vec<Vertex>,
    pub sinks: Vec<Vertex>,
}

impl Instance {
    pub fn new(n: u32, faults: FaultSet, sources: Vec<Vertex>, sinks: Vec<Vertex>) -> Self {
        Instance {
            n,
            k: sources.len(),
            faults,
            sources,
            sinks,
        }
    }

    pub fn f(&self) -> usize {
        self.faults.len()
    }

    /// `2^n - 2f`, saturating at zero.
    pub fn coverage_bound(&self) -> usize {
        order(self.n).saturating_sub(2 * self.f())
    }

    /// Structural invariants every instance must satisfy: labels fit, the
    /// sets are pairwise disjoint and sized `k`, and the sources sit in one
    /// partite set with the sinks in the other.
    pub fn validate(&self) -> Result<()> {
        cube::check_dimension(self.n)?;
        let limit = 1u64 << self.n;
        let all = self
            .faults
            .iter()
            .chain(self.sources.iter().copied())
            .chain(self.sinks.iter().copied());
        for v in all {
            if u64::from(v.0) >= limit {
                return Err(Error::VertexOutOfRange {
                    vertex: v.0,
                    n: self.n,
                });
            }
        }
        if self.sources.len() != self.k || self.sinks.len() != self.k {
            return Err(Error::Precondition(format!(
                "|S| = {}, |T| = {} but k = {}",
                self.sources.len(),
                self.sinks.len(),
                self.k
            )));
        }
        if self.k == 0 {
            return Err(Error::Precondition("k must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        for &v in self.sources.iter().chain(&self.sinks) {
            if !seen.insert(v) {
                return Err(Error::Precondition(format!(
                    "vertex {v} listed more than once among S and T"
                )));
            }
            if self.faults.contains(v) {
                return Err(Error::Precondition(format!("terminal {v} is faulty")));
            }
        }
        let class = parity(self.sources[0]);
        if self.sources.iter().any(|&s| parity(s) != class)
            || self.sinks.iter().any(|&t| parity(t) == class)
        {
            return Err(Error::Precondition(
                "S and T must lie in different partite sets".into(),
            ));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the hypotheses of the routing
    /// theorem: `n >= 3`, `1 <= k <= n - 2`, `f <= 2n - 2k - 3` and the
    /// conditional fault predicate.
    pub fn validate_theorem(&self) -> Result<()> {
        self.validate()?;
        let n = self.n as i64;
        let k = self.k as i64;
        if n < 3 {
            return Err(Error::Precondition(format!("n={n} is below 3")));
        }
        if k > n - 2 {
            return Err(Error::Precondition(format!("k={k} exceeds n-2={}", n - 2)));
        }
        let bound = 2 * n - 2 * k - 3;
        if self.f() as i64 > bound {
            return Err(Error::Precondition(format!(
                "f={} exceeds 2n-2k-3={bound}",
                self.f()
            )));
        }
        if !is_conditionally_fault_free(self.n, &self.faults) {
            return Err(Error::Precondition(
                "some fault-free vertex has fewer than two fault-free neighbors".into(),
            ));
        }
        Ok(())
    }
}

/// Every fault-free vertex keeps at least two fault-free neighbors.
pub fn is_conditionally_fault_free(n: u32, faults: &FaultSet) -> bool {
    conditional_on_mask(n, &faults.mask(n))
}

pub(crate) fn conditional_on_mask(n: u32, faulty: &[bool]) -> bool {
    (0..order(n) as u32).all(|v| {
        faulty[v as usize]
            || neighbor_iter(Vertex(v), n)
                .filter(|w| !faulty[w.0 as usize])
                .nth(1)
                .is_some()
    })
}

/// Predicate restricted to one half of a split, viewed as `Q_{n-1}`.
pub(crate) fn half_is_conditional(ctx: &SplitContext, faulty: &[bool], side: Side) -> bool {
    let n = ctx.n();
    let bit = ctx.bit();
    ctx.half(side).all(|v| {
        faulty[v.0 as usize]
            || (0..n)
                .filter(|&b| b != bit)
                .map(|b| v.flip(b))
                .filter(|w| !faulty[w.0 as usize])
                .nth(1)
                .is_some()
    })
}

/// `(f_L, f_R)`.
pub fn split_fault_counts(faults: &FaultSet, ctx: &SplitContext) -> (usize, usize) {
    let r = faults.iter().filter(|&v| ctx.side(v) == Side::R).count();
    (faults.len() - r, r)
}

/// All dimensions `j` for which both halves stay conditionally fault-free,
/// ascending.
pub fn valid_split_dimensions(n: u32, faults: &FaultSet) -> Vec<u32> {
    let mask = faults.mask(n);
    valid_split_dimensions_mask(n, &mask)
}

pub(crate) fn valid_split_dimensions_mask(n: u32, faulty: &[bool]) -> Vec<u32> {
    (1..=n)
        .filter(|&j| {
            let ctx = cube::split(n, j).expect("j in range");
            half_is_conditional(&ctx, faulty, Side::L) && half_is_conditional(&ctx, faulty, Side::R)
        })
        .collect()
}

/// Smallest split dimension keeping both halves conditionally fault-free.
pub fn choose_split_dimension(inst: &Instance) -> Result<SplitContext> {
    cube::check_dimension(inst.n)?;
    if inst.n < 2 {
        return Err(Error::NoValidDimension);
    }
    match valid_split_dimensions(inst.n, &inst.faults).first() {
        Some(&j) => cube::split(inst.n, j),
        None => Err(Error::NoValidDimension),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::split;
    use proptest::prelude::*;

    fn fs(v: &[u32]) -> FaultSet {
        v.iter().map(|&x| Vertex(x)).collect()
    }

    /// Independent restatement of the predicate by explicit neighbor counts.
    fn conditional_oracle(n: u32, f: &FaultSet) -> bool {
        for v in 0..(1u32 << n) {
            if f.contains(Vertex(v)) {
                continue;
            }
            let mut healthy = 0;
            for b in 0..n {
                if !f.contains(Vertex(v ^ (1 << b))) {
                    healthy += 1;
                }
            }
            if healthy < 2 {
                return false;
            }
        }
        true
    }

    #[test]
    fn conditional_examples() {
        assert!(is_conditionally_fault_free(4, &FaultSet::new()));
        assert!(!is_conditionally_fault_free(3, &fs(&[0b001, 0b010, 0b100])));
        assert!(is_conditionally_fault_free(4, &fs(&[0b0001, 0b0010])));
        assert!(conditional_oracle(4, &fs(&[0b0001, 0b0010])));
    }

    #[test]
    fn split_counts_examples() {
        let ctx = split(3, 3).unwrap();
        assert_eq!(split_fault_counts(&FaultSet::new(), &ctx), (0, 0));
        assert_eq!(split_fault_counts(&fs(&[0b001, 0b101]), &ctx), (1, 1));
    }

    #[test]
    fn split_dimension_examples() {
        let inst = Instance::new(4, FaultSet::new(), vec![Vertex(0)], vec![Vertex(1)]);
        assert_eq!(choose_split_dimension(&inst).unwrap().dimension(), 1);

        let inst = Instance::new(4, fs(&[0b0001]), vec![Vertex(0b0011)], vec![Vertex(0b0111)]);
        let ctx = choose_split_dimension(&inst).unwrap();
        let mask = inst.faults.mask(4);
        assert!(half_is_conditional(&ctx, &mask, Side::L));
        assert!(half_is_conditional(&ctx, &mask, Side::R));
    }

    #[test]
    fn split_dimension_exists_for_small_fault_sets_in_q5() {
        // every conditional F with |F| <= 3 in Q_5
        let n = 5;
        let total = 1u32 << n;
        let mut checked = 0;
        for a in 0..total {
            for b in a..total {
                for c in b..total {
                    let f: FaultSet = [a, b, c].iter().map(|&x| Vertex(x)).collect();
                    if !conditional_oracle(n, &f) {
                        continue;
                    }
                    checked += 1;
                    assert!(!valid_split_dimensions(n, &f).is_empty(), "{f:?}");
                }
            }
        }
        assert!(checked > 5000);
    }

    #[test]
    fn validate_reports_theorem_hypotheses() {
        let inst = Instance::new(
            5,
            fs(&[3, 5, 6, 9]),
            vec![Vertex(0), Vertex(0b11000)],
            vec![Vertex(1), Vertex(0b10000)],
        );
        let err = inst.validate_theorem().unwrap_err();
        assert_eq!(err, Error::Precondition("f=4 exceeds 2n-2k-3=3".into()));

        let same_side = Instance::new(4, FaultSet::new(), vec![Vertex(0)], vec![Vertex(3)]);
        assert!(same_side.validate().is_err());
    }

    proptest! {
        #[test]
        fn predicate_matches_oracle(n in 2u32..=6, raw in proptest::collection::vec(any::<u32>(), 0..8)) {
            let f: FaultSet = raw.iter().map(|&x| Vertex(x & ((1 << n) - 1))).collect();
            prop_assert_eq!(is_conditionally_fault_free(n, &f), conditional_oracle(n, &f));
        }

        #[test]
        fn predicate_is_translation_invariant(n in 3u32..=6, raw in proptest::collection::vec(any::<u32>(), 0..8), shift in any::<u32>()) {
            let m = (1u32 << n) - 1;
            let f: FaultSet = raw.iter().map(|&x| Vertex(x & m)).collect();
            let g: FaultSet = f.iter().map(|v| Vertex(v.0 ^ (shift & m))).collect();
            prop_assert_eq!(is_conditionally_fault_free(n, &f), is_conditionally_fault_free(n, &g));
        }

        #[test]
        fn split_counts_sum_to_f(n in 2u32..=8, raw in proptest::collection::vec(any::<u32>(), 0..12)) {
            let f: FaultSet = raw.iter().map(|&x| Vertex(x & ((1 << n) - 1))).collect();
            for j in 1..=n {
                let (l, r) = split_fault_counts(&f, &split(n, j).unwrap());
                prop_assert_eq!(l + r, f.len());
            }
        }
    }
}
