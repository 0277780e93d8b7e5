//! Oracle-versus-theorem agreement over a seeded instance stream.

use std::fmt::Write as _;

use crate::analysis::{self, InjectivityVerdict};
use crate::error::{Error, Result};
use crate::measure::{self, AtomMap, AtomSet, AtomicMeasureSpace};
use crate::oracle::{self, InstanceGenerator};

use super::scenario::Scenario;

/// The theorem-side procedures the fuzzer checks. Tests swap single methods
/// out to confirm that a disagreement is caught and reported.
pub trait TheoremProcedures {
    fn kernel_basis(&self, map: &AtomMap, space: &AtomicMeasureSpace) -> Result<AtomSet> {
        Ok(analysis::kernel(map, space)?.basis(space))
    }

    fn ascent(&self, map: &AtomMap, space: &AtomicMeasureSpace, max_k: Option<usize>) -> Result<usize> {
        Ok(analysis::ascent_bounded(map, space, max_k)?.ascent)
    }

    fn injectivity(&self, map: &AtomMap, space: &AtomicMeasureSpace) -> Result<InjectivityVerdict> {
        analysis::is_injective(map, space)
    }

    fn expansive(&self, map: &AtomMap, space: &AtomicMeasureSpace) -> Result<bool> {
        measure::is_expansive(map, space)
    }
}

/// The library's own procedures.
pub struct Theorems;

impl TheoremProcedures for Theorems {}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub seed: u64,
    pub instances: usize,
    pub max_atoms: usize,
    pub max_k: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub index: usize,
    pub reason: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone)]
pub struct FuzzSummary {
    pub tested: usize,
    pub agreements: usize,
    /// Instances whose ascent passed `max_k` on both sides.
    pub undecided: usize,
    pub first_counterexample: Option<Counterexample>,
}

impl FuzzSummary {
    pub fn disagreements(&self) -> usize {
        self.tested - self.agreements - self.undecided
    }

    pub fn render(&self, config: &FuzzConfig) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed: {}", config.seed);
        let _ = writeln!(out, "max atoms: {}", config.max_atoms);
        if let Some(k) = config.max_k {
            let _ = writeln!(out, "max k: {k}");
        }
        if self.undecided > 0 {
            let _ = writeln!(out, "undecided (ascent beyond max k): {}", self.undecided);
        }
        let _ = writeln!(out, "{}/{} agree", self.agreements, self.tested - self.undecided);
        out
    }
}

enum Outcome {
    Agree,
    Undecided,
    Disagree(String),
}

fn compare(
    procs: &dyn TheoremProcedures,
    map: &AtomMap,
    space: &AtomicMeasureSpace,
    max_k: Option<usize>,
) -> Outcome {
    let describe = |what: &str, e: Error| Outcome::Disagree(format!("{what} failed: {e}"));

    let oracle_kernel = match oracle::oracle_kernel(map, space) {
        Ok(k) => k,
        Err(e) => return describe("oracle kernel", e),
    };
    match procs.kernel_basis(map, space) {
        Ok(k) if k == oracle_kernel => {}
        Ok(k) => return Outcome::Disagree(format!("kernel {k:?} but oracle kernel {oracle_kernel:?}")),
        Err(e) => return describe("kernel", e),
    }

    match procs.injectivity(map, space) {
        Ok(v) if v.kernel_trivial != v.essentially_surjective => {
            return Outcome::Disagree(format!(
                "kernel trivial = {} but essentially surjective = {}",
                v.kernel_trivial, v.essentially_surjective
            ))
        }
        Ok(v) if v.kernel_trivial != oracle_kernel.is_empty() => {
            return Outcome::Disagree("injectivity verdict contradicts the oracle kernel".into())
        }
        Ok(_) => {}
        Err(e) => return describe("injectivity", e),
    }

    match (procs.expansive(map, space), oracle::oracle_expansive(map, space)) {
        (Ok(a), Ok(b)) if a == b.holds => {}
        (Ok(a), Ok(b)) => {
            return Outcome::Disagree(format!("expansive = {a} but oracle says {}", b.holds))
        }
        (Err(e), _) => return describe("expansive", e),
        (_, Err(e)) => return describe("oracle expansive", e),
    }

    let oracle_ascent = match max_k {
        Some(k) => oracle::oracle_ascent_bounded(map, space, k),
        None => oracle::oracle_ascent(map, space),
    };
    match (procs.ascent(map, space, max_k), oracle_ascent) {
        (Ok(a), Ok(b)) if a == b => Outcome::Agree,
        (Ok(a), Ok(b)) => Outcome::Disagree(format!("ascent {a} but oracle ascent {b}")),
        (Err(Error::AscentLimitExceeded { .. }), Err(Error::AscentLimitExceeded { .. })) => Outcome::Undecided,
        (Err(e), _) => describe("ascent", e),
        (_, Err(e)) => describe("oracle ascent", e),
    }
}

pub fn run(config: &FuzzConfig, procs: &dyn TheoremProcedures) -> Result<FuzzSummary> {
    let gen = InstanceGenerator::new(config.seed, config.max_atoms);
    let mut summary = FuzzSummary {
        tested: 0,
        agreements: 0,
        undecided: 0,
        first_counterexample: None,
    };
    if config.instances == 0 {
        return Ok(summary);
    }
    for (index, instance) in oracle::generate(&gen)?.take(config.instances).enumerate() {
        let instance = instance?;
        summary.tested += 1;
        match compare(procs, &instance.map, &instance.space, config.max_k) {
            Outcome::Agree => summary.agreements += 1,
            Outcome::Undecided => summary.undecided += 1,
            Outcome::Disagree(reason) => {
                if summary.first_counterexample.is_none() {
                    summary.first_counterexample = Some(Counterexample {
                        index,
                        reason,
                        scenario: Scenario::from_atomic(
                            Some(format!("fuzz seed {} instance {index}", config.seed)),
                            &instance.space,
                            &instance.map,
                        ),
                    });
                }
            }
        }
    }
    Ok(summary)
}
