use super::{CandidateId, Election};
use crate::amount::Amount;
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// Upper bound on the total parts of one ballot.
pub const MAX_PARTS: u64 = 10_000;

/// What a voter marked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BallotContent {
    /// Preference order, most preferred first.
    Ranked(Vec<CandidateId>),
    /// Integer parts of the voter's liquid per candidate.
    Parts(BTreeMap<CandidateId, u64>),
    /// Adopt a published advice profile, overriding individual contests.
    ProfileRef {
        profile: String,
        overrides: BTreeMap<String, BallotContent>,
    },
}

impl BallotContent {
    pub fn ranked(order: impl IntoIterator<Item = impl Into<CandidateId>>) -> Self {
        BallotContent::Ranked(order.into_iter().map(Into::into).collect())
    }

    pub fn parts(parts: impl IntoIterator<Item = (impl Into<CandidateId>, u64)>) -> Self {
        BallotContent::Parts(parts.into_iter().map(|(c, p)| (c.into(), p)).collect())
    }

    pub fn plump(c: impl Into<CandidateId>) -> Self {
        BallotContent::Parts(BTreeMap::from([(c.into(), 1)]))
    }

    pub fn profile(id: impl Into<String>) -> Self {
        BallotContent::ProfileRef {
            profile: id.into(),
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub id: Option<String>,
    /// 1-based line in the ballots file, when loaded from one.
    pub line: Option<usize>,
    pub content: BallotContent,
}

impl Ballot {
    pub fn new(content: BallotContent) -> Self {
        Ballot {
            id: None,
            line: None,
            content,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    /// Human-readable handle for error messages; falls back to the input
    /// line, then to the position in the list.
    pub fn label(&self, position: usize) -> String {
        match (&self.id, self.line) {
            (Some(id), Some(line)) => format!("{id:?} (line {line})"),
            (Some(id), None) => format!("{id:?}"),
            (None, Some(line)) => format!("line {line}"),
            (None, None) => format!("#{}", position + 1),
        }
    }
}

/// Per-candidate shares of one parts ballot, indexed in candidate order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shares {
    parts: Vec<u64>,
    total: u64,
    shares: Vec<Amount>,
}

impl Shares {
    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total_parts(&self) -> u64 {
        self.total
    }

    pub fn shares(&self) -> &[Amount] {
        &self.shares
    }

    pub fn share(&self, candidate: usize) -> &Amount {
        &self.shares[candidate]
    }

    /// Candidates that received at least one part, in candidate order.
    pub fn supported(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.iter().enumerate().filter(|(_, &p)| p > 0).map(|(i, _)| i)
    }
}

/// A ballot checked against its election and reduced to indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizedBallot {
    /// Candidate indices in preference order.
    Ranked(Vec<usize>),
    Shares(Shares),
}

impl NormalizedBallot {
    pub fn as_ranked(&self) -> Option<&[usize]> {
        match self {
            NormalizedBallot::Ranked(r) => Some(r),
            NormalizedBallot::Shares(_) => None,
        }
    }

    pub fn as_shares(&self) -> Option<&Shares> {
        match self {
            NormalizedBallot::Shares(s) => Some(s),
            NormalizedBallot::Ranked(_) => None,
        }
    }
}

/// Checks a ballot against `election` and converts it to shares or a ranking.
///
/// A parts ballot with total `P` gives each candidate with `p` parts the
/// exact share `p / P`; the shares sum to one. Profile references must be
/// resolved first with [`super::resolve_profiles`].
pub fn normalize_ballot(ballot: &Ballot, election: &Election) -> Result<NormalizedBallot> {
    normalize_at(ballot, election, 0)
}

pub(crate) fn normalize_at(ballot: &Ballot, election: &Election, position: usize) -> Result<NormalizedBallot> {
    normalize_content(&ballot.content, election, || ballot.label(position))
}

pub(crate) fn normalize_content(
    content: &BallotContent,
    election: &Election,
    label: impl Fn() -> String,
) -> Result<NormalizedBallot> {
    let lookup = |c: &CandidateId| {
        election.index_of(c.as_str()).ok_or_else(|| Error::UnknownCandidate {
            ballot: label(),
            candidate: c.0.to_string(),
        })
    };
    match content {
        BallotContent::Ranked(order) => {
            let mut seen = vec![false; election.num_candidates()];
            let mut out = Vec::with_capacity(order.len());
            for c in order {
                let i = lookup(c)?;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::DuplicateRanking {
                        ballot: label(),
                        candidate: c.0.to_string(),
                    });
                }
                out.push(i);
            }
            Ok(NormalizedBallot::Ranked(out))
        }
        BallotContent::Parts(map) => {
            let mut parts = vec![0u64; election.num_candidates()];
            let mut total = 0u64;
            for (c, &p) in map {
                let i = lookup(c)?;
                parts[i] = p;
                total = total.saturating_add(p);
            }
            if total == 0 {
                return Err(Error::ZeroParts { ballot: label() });
            }
            if total > MAX_PARTS {
                return Err(Error::TooManyParts {
                    ballot: label(),
                    parts: total,
                    limit: MAX_PARTS,
                });
            }
            let shares = parts.iter().map(|&p| Amount::ratio(p, total)).collect();
            Ok(NormalizedBallot::Shares(Shares { parts, total, shares }))
        }
        BallotContent::ProfileRef { .. } => Err(Error::UnresolvedProfile { ballot: label() }),
    }
}

/// Normalizes every ballot, stopping at the first invalid one.
pub fn validate_ballots(ballots: &[Ballot], election: &Election) -> Result<Vec<NormalizedBallot>> {
    ballots
        .iter()
        .enumerate()
        .map(|(i, b)| normalize_at(b, election, i))
        .collect()
}

// JSON forms: {"parts": {...}} | {"ranking": [...]} | {"profile": id, "overrides": {...}},
// each with an optional "id".

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawBallot {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<BTreeMap<CandidateId, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<CandidateId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<BTreeMap<String, RawBallot>>,
}

impl RawBallot {
    pub(crate) fn into_content(self, allow_profile: bool) -> std::result::Result<BallotContent, String> {
        match (self.parts, self.ranking, self.profile) {
            (Some(p), None, None) if self.overrides.is_none() => Ok(BallotContent::Parts(p)),
            (None, Some(r), None) if self.overrides.is_none() => Ok(BallotContent::Ranked(r)),
            (None, None, Some(profile)) if allow_profile => {
                let overrides = self
                    .overrides
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(slot, raw)| {
                        if raw.id.is_some() {
                            return Err("override entries take no id".to_string());
                        }
                        raw.into_content(false).map(|c| (slot, c))
                    })
                    .collect::<std::result::Result<_, _>>()?;
                Ok(BallotContent::ProfileRef { profile, overrides })
            }
            (None, None, Some(_)) => Err("nested profile references are not allowed".into()),
            (None, None, None) => Err("expected one of \"parts\", \"ranking\" or \"profile\"".into()),
            _ => Err("\"parts\", \"ranking\" and \"profile\" are mutually exclusive; \"overrides\" needs \"profile\"".into()),
        }
    }

    pub(crate) fn from_content(content: &BallotContent) -> RawBallot {
        match content {
            BallotContent::Parts(p) => RawBallot {
                parts: Some(p.clone()),
                ..Default::default()
            },
            BallotContent::Ranked(r) => RawBallot {
                ranking: Some(r.clone()),
                ..Default::default()
            },
            BallotContent::ProfileRef { profile, overrides } => RawBallot {
                profile: Some(profile.clone()),
                overrides: (!overrides.is_empty()).then(|| {
                    overrides
                        .iter()
                        .map(|(k, v)| (k.clone(), RawBallot::from_content(v)))
                        .collect()
                }),
                ..Default::default()
            },
        }
    }
}

impl Serialize for BallotContent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawBallot::from_content(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BallotContent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawBallot::deserialize(d)?;
        if raw.id.is_some() {
            return Err(serde::de::Error::custom("ballot content takes no id"));
        }
        raw.into_content(true).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Ballot {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut raw = RawBallot::from_content(&self.content);
        raw.id = self.id.clone();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ballot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut raw = RawBallot::deserialize(d)?;
        let id = raw.id.take();
        let content = raw.into_content(true).map_err(serde::de::Error::custom)?;
        Ok(Ballot {
            id,
            line: None,
            content,
        })
    }
}
