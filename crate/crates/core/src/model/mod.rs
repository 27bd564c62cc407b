//! Election and ballot types shared by every tally.
//!
//! Candidates are addressed internally by their index in registration order;
//! every iteration over candidates follows that order so that tallies are
//! deterministic.

mod ballot;
pub mod io;
mod profile;

pub use ballot::{normalize_ballot, validate_ballots, Ballot, BallotContent, NormalizedBallot, Shares, MAX_PARTS};
pub use profile::{resolve_profiles, Profile, ProfileContent, ProfileUsage, Profiles};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;
use std::fmt;

/// Candidate (or keyword proposal) identifier. Cheap to clone: round
/// records repeat ids many times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidateId(pub Arc<str>);

impl CandidateId {
    pub fn new(s: impl Into<String>) -> Self {
        CandidateId(s.into().into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CandidateId {
    fn from(s: &str) -> Self {
        CandidateId(s.into())
    }
}

impl Serialize for CandidateId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for CandidateId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d).map(CandidateId::new)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Approval,
    Cumulative,
    Quadratic,
    Irv,
    Stv,
    Ctv,
    Qtv,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Approval,
        Method::Cumulative,
        Method::Quadratic,
        Method::Irv,
        Method::Stv,
        Method::Ctv,
        Method::Qtv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Approval => "approval",
            Method::Cumulative => "cumulative",
            Method::Quadratic => "quadratic",
            Method::Irv => "irv",
            Method::Stv => "stv",
            Method::Ctv => "ctv",
            Method::Qtv => "qtv",
        }
    }

    /// Methods that read ranked ballots.
    pub fn is_ranked(self) -> bool {
        matches!(self, Method::Irv | Method::Stv)
    }

    /// Multi-round methods that produce round records and transfers.
    pub fn is_transferable(self) -> bool {
        matches!(self, Method::Irv | Method::Stv | Method::Ctv | Method::Qtv)
    }

    pub fn default_quota_rule(self) -> QuotaRule {
        match self {
            Method::Ctv | Method::Qtv => QuotaRule::DynamicCandidates,
            _ => QuotaRule::DroopIntegral,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// How the election threshold is computed each round.
///
/// Both Droop forms are taken over the liquid still active (not exhausted),
/// which equals the ballot count until ballots start to exhaust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuotaRule {
    /// `floor(v / (n + 1)) + 1`.
    DroopIntegral,
    /// `v / (n + 1)` exactly.
    DroopFractional,
    /// `(support on hopefuls) / (k + 1)` with `k` hopeful candidates.
    DynamicCandidates,
}

impl QuotaRule {
    pub const ALL: [QuotaRule; 3] = [
        QuotaRule::DroopIntegral,
        QuotaRule::DroopFractional,
        QuotaRule::DynamicCandidates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuotaRule::DroopIntegral => "droop-integral",
            QuotaRule::DroopFractional => "droop-fractional",
            QuotaRule::DynamicCandidates => "dynamic-candidates",
        }
    }
}

impl std::str::FromStr for QuotaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QuotaRule::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown quota rule {s:?}")))
    }
}

/// Default number of parts a quadratic ballot may spend.
pub const DEFAULT_PARTS_BUDGET: u64 = 5;

/// On-disk form of an election, validated into [`Election`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectionSpec {
    pub id: String,
    pub method: Method,
    pub seats: usize,
    pub candidates: Vec<CandidateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quota_rule: Option<QuotaRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_order: Option<Vec<CandidateId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

/// A validated contest definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ElectionSpec", into = "ElectionSpec")]
pub struct Election {
    id: String,
    candidates: Vec<CandidateId>,
    index: HashMap<CandidateId, usize>,
    seats: usize,
    method: Method,
    quota_rule: Option<QuotaRule>,
    tie_order: Vec<CandidateId>,
    tie_rank: Vec<usize>,
    parts_budget: u64,
    exponent: Option<f64>,
}

impl Election {
    pub fn new(
        id: impl Into<String>,
        candidates: impl IntoIterator<Item = impl Into<CandidateId>>,
        seats: usize,
        method: Method,
    ) -> Result<Self> {
        Election::try_from(ElectionSpec {
            id: id.into(),
            method,
            seats,
            candidates: candidates.into_iter().map(Into::into).collect(),
            quota_rule: None,
            tie_order: None,
            parts_budget: None,
            exponent: None,
        })
    }

    pub fn with_quota_rule(mut self, rule: QuotaRule) -> Self {
        self.quota_rule = Some(rule);
        self
    }

    pub fn with_method(self, method: Method) -> Result<Self> {
        let mut spec = ElectionSpec::from(self);
        spec.method = method;
        Election::try_from(spec)
    }

    pub fn with_tie_order(self, order: impl IntoIterator<Item = impl Into<CandidateId>>) -> Result<Self> {
        let mut spec = ElectionSpec::from(self);
        spec.tie_order = Some(order.into_iter().map(Into::into).collect());
        Election::try_from(spec)
    }

    pub fn with_parts_budget(self, budget: u64) -> Result<Self> {
        let mut spec = ElectionSpec::from(self);
        spec.parts_budget = Some(budget);
        Election::try_from(spec)
    }

    pub fn with_exponent(self, exponent: f64) -> Result<Self> {
        let mut spec = ElectionSpec::from(self);
        spec.exponent = Some(exponent);
        Election::try_from(spec)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn candidates(&self) -> &[CandidateId] {
        &self.candidates
    }

    pub fn candidate(&self, index: usize) -> &CandidateId {
        &self.candidates[index]
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(&CandidateId::new(id)).copied()
    }

    pub fn seats(&self) -> usize {
        self.seats
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Explicit quota rule, or the method's default.
    pub fn quota_rule(&self) -> QuotaRule {
        self.quota_rule.unwrap_or_else(|| self.method.default_quota_rule())
    }

    pub fn tie_order(&self) -> &[CandidateId] {
        &self.tie_order
    }

    /// Position of a candidate in the tie-break order; lower ranks win ties.
    pub fn tie_rank(&self, index: usize) -> usize {
        self.tie_rank[index]
    }

    pub fn parts_budget(&self) -> u64 {
        self.parts_budget
    }

    pub fn exponent(&self) -> Option<f64> {
        self.exponent
    }
}

impl TryFrom<ElectionSpec> for Election {
    type Error = Error;

    fn try_from(spec: ElectionSpec) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidElection(format!("{}: {msg}", spec.id)));
        if spec.candidates.is_empty() {
            return invalid("no candidates".into());
        }
        let mut index = HashMap::with_capacity(spec.candidates.len());
        for (i, c) in spec.candidates.iter().enumerate() {
            if c.0.is_empty() {
                return invalid("empty candidate id".into());
            }
            if index.insert(c.clone(), i).is_some() {
                return invalid(format!("duplicate candidate {:?}", c.0));
            }
        }
        if spec.seats == 0 {
            return invalid("seats must be at least 1".into());
        }
        if spec.seats > spec.candidates.len() {
            return invalid(format!(
                "{} seats for {} candidates",
                spec.seats,
                spec.candidates.len()
            ));
        }
        if spec.method == Method::Irv && spec.seats != 1 {
            return invalid("irv fills exactly one seat".into());
        }
        let tie_order = match &spec.tie_order {
            None => spec.candidates.clone(),
            Some(order) => {
                let mut seen = vec![false; spec.candidates.len()];
                for c in order {
                    match index.get(c) {
                        Some(&i) if !seen[i] => seen[i] = true,
                        Some(_) => return invalid(format!("tie_order repeats {:?}", c.0)),
                        None => return invalid(format!("tie_order names unknown candidate {:?}", c.0)),
                    }
                }
                if order.len() != spec.candidates.len() {
                    return invalid("tie_order must list every candidate".into());
                }
                order.clone()
            }
        };
        let mut tie_rank = vec![0; spec.candidates.len()];
        for (rank, c) in tie_order.iter().enumerate() {
            tie_rank[index[c]] = rank;
        }
        let parts_budget = spec.parts_budget.unwrap_or(DEFAULT_PARTS_BUDGET);
        if parts_budget == 0 || parts_budget > MAX_PARTS {
            return invalid(format!("parts_budget must be in 1..={MAX_PARTS}"));
        }
        if let Some(e) = spec.exponent {
            if !(e.is_finite() && e >= 1.0) {
                return invalid(format!("exponent must be a finite number >= 1, got {e}"));
            }
        }
        Ok(Election {
            id: spec.id,
            candidates: spec.candidates,
            index,
            seats: spec.seats,
            method: spec.method,
            quota_rule: spec.quota_rule,
            tie_order,
            tie_rank,
            parts_budget,
            exponent: spec.exponent,
        })
    }
}

impl From<Election> for ElectionSpec {
    fn from(e: Election) -> Self {
        let tie_order = (e.tie_order != e.candidates).then_some(e.tie_order);
        let parts_budget = (e.parts_budget != DEFAULT_PARTS_BUDGET).then_some(e.parts_budget);
        ElectionSpec {
            id: e.id,
            method: e.method,
            seats: e.seats,
            candidates: e.candidates,
            quota_rule: e.quota_rule,
            tie_order,
            parts_budget,
            exponent: e.exponent,
        }
    }
}
