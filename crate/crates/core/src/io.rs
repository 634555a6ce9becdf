//! JSON instance and result files.
//!
//! Vertex labels are decimal integers or binary strings of exactly `n`
//! digits, most significant bit first (`"0011"` is vertex 3 in `Q_4`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cube::Vertex;
use crate::error::{Error, Result};
use crate::fault::{FaultSet, Instance};
use crate::path::PathSystem;
use crate::router::{CaseTag, RouteTrace};
use crate::verify::{self, VerifyReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(u64),
    Bits(String),
}

impl Label {
    pub fn resolve(&self, n: u32) -> std::result::Result<Vertex, String> {
        match self {
            Label::Int(x) => {
                if *x >= 1u64 << n {
                    Err(format!("label {x} does not fit in {n} bits"))
                } else {
                    Ok(Vertex(*x as u32))
                }
            }
            Label::Bits(s) => {
                if s.len() != n as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(format!(
                        "label \"{s}\" is not a binary string of length {n}"
                    ));
                }
                Ok(Vertex(u32::from_str_radix(s, 2).expect("checked digits")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: u32,
    pub k: usize,
    pub faults: Vec<Label>,
    pub sources: Vec<Label>,
    pub sinks: Vec<Label>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let labels =
            |vs: &mut dyn Iterator<Item = Vertex>| vs.map(|v| Label::Int(u64::from(v.0))).collect();
        InstanceFile {
            n: inst.n,
            k: inst.k,
            faults: labels(&mut inst.faults.iter()),
            sources: labels(&mut inst.sources.iter().copied()),
            sinks: labels(&mut inst.sinks.iter().copied()),
        }
    }

    /// Resolve labels and check the structural instance invariants.
    pub fn to_instance(&self) -> Result<Instance> {
        let n = self.n;
        if !(1..=crate::cube::MAX_DIMENSION).contains(&n) {
            return Err(Error::Parse(format!(
                "field n: {n} is outside 1..={}",
                crate::cube::MAX_DIMENSION
            )));
        }
        let field = |name: &str, ls: &[Label]| -> Result<Vec<Vertex>> {
            ls.iter()
                .enumerate()
                .map(|(i, l)| {
                    l.resolve(n)
                        .map_err(|e| Error::Parse(format!("field {name}[{i}]: {e}")))
                })
                .collect()
        };
        let faults = field("faults", &self.faults)?;
        let sources = field("sources", &self.sources)?;
        let sinks = field("sinks", &self.sinks)?;
        let fs: FaultSet = faults.iter().copied().collect();
        if fs.len() != faults.len() {
            return Err(Error::Parse("field faults: duplicate vertex".into()));
        }
        if sources.len() != self.k || sinks.len() != self.k {
            return Err(Error::Parse(format!(
                "field k: {} but {} sources and {} sinks",
                self.k,
                sources.len(),
                sinks.len()
            )));
        }
        let inst = Instance::new(n, fs, sources, sinks);
        inst.validate()
            .map_err(|e| Error::Parse(format!("invalid instance: {e}")))?;
        Ok(inst)
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(json_error)?;
    file.to_instance()
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("serializable") + "\n"
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub paths: Vec<Vec<u32>>,
    /// Source label to the sink its path reaches.
    pub pairing: BTreeMap<u32, u32>,
    pub coverage: usize,
    pub bound: usize,
    pub case_trace: Vec<CaseTag>,
    pub verified: bool,
}

impl ResultFile {
    /// `verified` and `coverage` come from a fresh verifier run.
    pub fn new(inst: &Instance, ps: &PathSystem, trace: &RouteTrace) -> Self {
        let report = verify::verify(inst, ps);
        ResultFile {
            paths: ps
                .paths
                .iter()
                .map(|p| p.vertices().iter().map(|v| v.0).collect())
                .collect(),
            pairing: ps.pairing().into_iter().map(|(s, t)| (s.0, t.0)).collect(),
            coverage: report.coverage,
            bound: report.bound,
            case_trace: trace.tags(),
            verified: report.pass(),
        }
    }

    /// Re-check the stored paths against `inst`, ignoring stored claims.
    pub fn verify(&self, inst: &Instance) -> VerifyReport {
        let paths: Vec<Vec<Vertex>> = self
            .paths
            .iter()
            .map(|p| p.iter().map(|&v| Vertex(v)).collect())
            .collect();
        let refs: Vec<&[Vertex]> = paths.iter().map(Vec::as_slice).collect();
        verify::verify_raw(inst, &refs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

pub fn parse_result(text: &str) -> Result<ResultFile> {
    serde_json::from_str(text).map_err(json_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn labels_in_both_forms() {
        let text = r#"{"n": 4, "k": 1, "faults": ["1111"], "sources": [0], "sinks": ["0001"]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.faults.iter().collect::<Vec<_>>(), vec![Vertex(15)]);
        assert_eq!(inst.sinks, vec![Vertex(1)]);
    }

    #[test]
    fn malformed_labels_are_parse_errors() {
        let bad = r#"{"n": 2, "k": 1, "faults": [], "sources": ["012"], "sinks": [1]}"#;
        assert!(matches!(parse_instance(bad), Err(Error::Parse(_))));
        let bad = r#"{"n": 2, "k": 1, "faults": [], "sources": [4], "sinks": [1]}"#;
        assert!(matches!(parse_instance(bad), Err(Error::Parse(_))));
        let bad = r#"{"n": 2, "k": 1, "faults": [], "sources": [0]"#;
        let err = parse_instance(bad).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    proptest! {
        #[test]
        fn instance_round_trip(n in 3u32..=8, seed in any::<u64>()) {
            let mask = (1u32 << n) - 1;
            let mut x = seed;
            let mut next = || { x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((x >> 33) as u32) & mask };
            let evens: Vec<Vertex> = (0..=mask).map(Vertex).filter(|v| v.0.count_ones() % 2 == 0).collect();
            let odds: Vec<Vertex> = (0..=mask).map(Vertex).filter(|v| v.0.count_ones() % 2 == 1).collect();
            let s = evens[next() as usize % evens.len()];
            let t = odds[next() as usize % odds.len()];
            let faults: FaultSet = (0..3).map(|_| Vertex(next())).filter(|&v| v != s && v != t).collect();
            let inst = Instance::new(n, faults, vec![s], vec![t]);
            prop_assert_eq!(parse_instance(&instance_to_json(&inst)).unwrap(), inst);
        }
    }
}
