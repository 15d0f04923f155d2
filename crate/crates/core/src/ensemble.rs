//! Detector strategies and their majority-vote combinations.
//!
//! Every detection algorithm implements [`Detector`] and is registered by
//! its CLI name in a [`DetectorRegistry`]. [`detect`] dispatches through
//! the default registry.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::confident::cl_pbnr;
use crate::error::{Error, Result};
use crate::tensor::{FlagSet, LabelVector, McdStack, ProbMatrix};
use crate::uncertainty::{cl_mcd, cl_mcd_entropy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmId {
    #[serde(rename = "cl-pbnr")]
    ClPbnr,
    #[serde(rename = "cl-mcd")]
    ClMcd,
    #[serde(rename = "cl-mcd-e")]
    ClMcdE,
    #[serde(rename = "cl-mcd-ens")]
    ClMcdEnsemble,
    #[serde(rename = "alg-ens-2")]
    AlgEnsemble2,
    #[serde(rename = "alg-ens-3")]
    AlgEnsemble3,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::ClPbnr,
        AlgorithmId::ClMcd,
        AlgorithmId::ClMcdE,
        AlgorithmId::ClMcdEnsemble,
        AlgorithmId::AlgEnsemble2,
        AlgorithmId::AlgEnsemble3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::ClPbnr => "cl-pbnr",
            AlgorithmId::ClMcd => "cl-mcd",
            AlgorithmId::ClMcdE => "cl-mcd-e",
            AlgorithmId::ClMcdEnsemble => "cl-mcd-ens",
            AlgorithmId::AlgEnsemble2 => "alg-ens-2",
            AlgorithmId::AlgEnsemble3 => "alg-ens-3",
        }
    }

    /// Row label used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            AlgorithmId::ClPbnr => "CL-PBNR",
            AlgorithmId::ClMcd => "CL-MCD",
            AlgorithmId::ClMcdE => "CL-MCD-E",
            AlgorithmId::ClMcdEnsemble => "CL-MCD-Ens",
            AlgorithmId::AlgEnsemble2 => "Alg. Ens (Agree.=2)",
            AlgorithmId::AlgEnsemble3 => "Alg. Ens (Agree.=3)",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Minimum agreement `m` among `member_count` voters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    m: usize,
    member_count: usize,
}

impl EnsembleConfig {
    pub fn new(m: usize, member_count: usize) -> Result<Self> {
        if m == 0 || m > member_count {
            return Err(Error::InvalidM {
                m,
                members: member_count,
            });
        }
        Ok(Self { m, member_count })
    }

    /// More than half of the members: `ceil((members + 1) / 2)`.
    pub fn strict_majority(member_count: usize) -> Self {
        Self {
            m: (member_count + 2) / 2,
            member_count: member_count.max(1),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn member_count(&self) -> usize {
        self.member_count
    }
}

/// Indices present in at least `m` of the sets.
pub fn majority_vote(flag_sets: &[FlagSet], m: usize) -> Result<FlagSet> {
    if m == 0 || m > flag_sets.len() {
        return Err(Error::InvalidM {
            m,
            members: flag_sets.len(),
        });
    }
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for set in flag_sets {
        for z in set.iter() {
            *votes.entry(z).or_default() += 1;
        }
    }
    Ok(votes
        .into_iter()
        .filter_map(|(z, count)| (count >= m).then_some(z))
        .collect())
}

/// Runs confident learning separately on every forward pass and keeps the
/// samples flagged by at least `m` passes.
pub fn detect_mcd_ensemble(stack: &McdStack, labels: &LabelVector, m: usize) -> Result<FlagSet> {
    if m == 0 || m > stack.num_passes() {
        return Err(Error::InvalidM {
            m,
            members: stack.num_passes(),
        });
    }
    let members = stack
        .passes()
        .iter()
        .map(|pass| cl_pbnr(pass, labels))
        .collect::<Result<Vec<_>>>()?;
    majority_vote(&members, m)
}

/// Everything a detector may consume.
#[derive(Debug, Clone, Copy)]
pub struct DetectionInput<'a> {
    pub softmax: Option<&'a ProbMatrix>,
    pub stack: Option<&'a McdStack>,
    pub labels: &'a LabelVector,
}

impl<'a> DetectionInput<'a> {
    pub fn new(
        softmax: Option<&'a ProbMatrix>,
        stack: Option<&'a McdStack>,
        labels: &'a LabelVector,
    ) -> Self {
        Self {
            softmax,
            stack,
            labels,
        }
    }

    fn softmax(&self, algorithm: AlgorithmId) -> Result<&'a ProbMatrix> {
        self.softmax.ok_or(Error::MissingInput {
            algorithm: algorithm.name(),
            what: "softmax probability matrix",
        })
    }

    fn stack(&self, algorithm: AlgorithmId) -> Result<&'a McdStack> {
        self.stack.ok_or(Error::MissingInput {
            algorithm: algorithm.name(),
            what: "MCD stack",
        })
    }
}

pub trait Detector: Send + Sync {
    /// Registry key.
    fn name(&self) -> &str;

    /// `cfg` is the agreement setting of the homogeneous forward-pass
    /// ensemble; detectors that do not vote over passes ignore it.
    fn detect(&self, input: &DetectionInput<'_>, cfg: &EnsembleConfig) -> Result<FlagSet>;
}

struct ClPbnr;

impl ClPbnr {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::ClPbnr
    }
}

impl Detector for ClPbnr {
    fn name(&self) -> &str {
        self.id().name()
    }

    fn detect(&self, input: &DetectionInput<'_>, _: &EnsembleConfig) -> Result<FlagSet> {
        cl_pbnr(input.softmax(self.id())?, input.labels)
    }
}

struct ClMcd;

impl ClMcd {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::ClMcd
    }
}

impl Detector for ClMcd {
    fn name(&self) -> &str {
        self.id().name()
    }

    fn detect(&self, input: &DetectionInput<'_>, _: &EnsembleConfig) -> Result<FlagSet> {
        cl_mcd(input.stack(self.id())?, input.labels)
    }
}

struct ClMcdE;

impl ClMcdE {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::ClMcdE
    }
}

impl Detector for ClMcdE {
    fn name(&self) -> &str {
        self.id().name()
    }

    fn detect(&self, input: &DetectionInput<'_>, _: &EnsembleConfig) -> Result<FlagSet> {
        cl_mcd_entropy(input.stack(self.id())?, input.labels)
    }
}

struct ClMcdEnsemble;

impl ClMcdEnsemble {
    fn id(&self) -> AlgorithmId {
        AlgorithmId::ClMcdEnsemble
    }
}

impl Detector for ClMcdEnsemble {
    fn name(&self) -> &str {
        self.id().name()
    }

    fn detect(&self, input: &DetectionInput<'_>, cfg: &EnsembleConfig) -> Result<FlagSet> {
        let stack = input.stack(self.id())?;
        if cfg.member_count() != stack.num_passes() {
            return Err(Error::InvalidM {
                m: cfg.m(),
                members: stack.num_passes(),
            });
        }
        detect_mcd_ensemble(stack, input.labels, cfg.m())
    }
}

/// Heterogeneous vote over CL-PBNR, CL-MCD, CL-MCD-E and CL-MCD-Ensemble.
struct AlgorithmEnsemble {
    id: AlgorithmId,
    agreement: usize,
}

impl AlgorithmEnsemble {
    const MEMBERS: [&'static dyn Detector; 4] = [&ClPbnr, &ClMcd, &ClMcdE, &ClMcdEnsemble];

    /// Member outputs in the fixed order above.
    fn members(&self, input: &DetectionInput<'_>, cfg: &EnsembleConfig) -> Result<Vec<FlagSet>> {
        input.softmax(self.id)?;
        input.stack(self.id)?;
        Self::MEMBERS
            .iter()
            .map(|member| member.detect(input, cfg))
            .collect()
    }
}

impl Detector for AlgorithmEnsemble {
    fn name(&self) -> &str {
        self.id.name()
    }

    fn detect(&self, input: &DetectionInput<'_>, cfg: &EnsembleConfig) -> Result<FlagSet> {
        majority_vote(&self.members(input, cfg)?, self.agreement)
    }
}

/// Detectors keyed by their CLI name.
pub struct DetectorRegistry {
    detectors: BTreeMap<String, Box<dyn Detector>>,
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        Self {
            detectors: BTreeMap::new(),
        }
    }

    /// All six built-in algorithms.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(ClPbnr);
        registry.register(ClMcd);
        registry.register(ClMcdE);
        registry.register(ClMcdEnsemble);
        registry.register(AlgorithmEnsemble {
            id: AlgorithmId::AlgEnsemble2,
            agreement: 2,
        });
        registry.register(AlgorithmEnsemble {
            id: AlgorithmId::AlgEnsemble3,
            agreement: 3,
        });
        registry
    }

    /// Replaces any detector already registered under the same name.
    pub fn register(&mut self, detector: impl Detector + 'static) {
        self.detectors
            .insert(detector.name().to_string(), Box::new(detector));
    }

    pub fn get(&self, name: &str) -> Option<&dyn Detector> {
        self.detectors.get(name).map(Box::as_ref)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.detectors.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.detectors.contains_key(name)
    }

    pub fn run(
        &self,
        name: &str,
        input: &DetectionInput<'_>,
        cfg: &EnsembleConfig,
    ) -> Result<FlagSet> {
        self.get(name)
            .ok_or_else(|| Error::UnknownAlgorithm(name.to_string()))?
            .detect(input, cfg)
    }
}

impl Default for DetectorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

pub fn default_registry() -> &'static DetectorRegistry {
    static REGISTRY: OnceLock<DetectorRegistry> = OnceLock::new();
    REGISTRY.get_or_init(DetectorRegistry::with_builtins)
}

/// Runs one of the six algorithms. `cfg` sets the forward-pass ensemble
/// agreement; the algorithm ensembles fix their own agreement (2 or 3 of 4).
pub fn detect(
    algorithm: AlgorithmId,
    softmax: Option<&ProbMatrix>,
    stack: Option<&McdStack>,
    labels: &LabelVector,
    cfg: &EnsembleConfig,
) -> Result<FlagSet> {
    default_registry().run(
        algorithm.name(),
        &DetectionInput::new(softmax, stack, labels),
        cfg,
    )
}

/// Outputs of the four algorithm-ensemble members, in the order CL-PBNR,
/// CL-MCD, CL-MCD-E, CL-MCD-Ensemble.
pub fn algorithm_ensemble_members(
    input: &DetectionInput<'_>,
    cfg: &EnsembleConfig,
) -> Result<Vec<FlagSet>> {
    AlgorithmEnsemble {
        id: AlgorithmId::AlgEnsemble3,
        agreement: 3,
    }
    .members(input, cfg)
}
