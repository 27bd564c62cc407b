//! Advice profiles: published recommended ballots that voters adopt
//! wholesale or override per contest, with follower counts kept for
//! publication.

use super::ballot::{normalize_content, RawBallot};
use super::{Ballot, BallotContent, CandidateId, Election, NormalizedBallot};
use crate::amount::Amount;
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// Recommended content of a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileContent {
    /// One recommendation used for whichever contest is being tallied.
    Single(BallotContent),
    /// A recommendation per contest id.
    ByContest(BTreeMap<String, BallotContent>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub name: Option<String>,
    pub content: ProfileContent,
}

impl Profile {
    pub fn single(content: BallotContent) -> Self {
        Profile {
            name: None,
            content: ProfileContent::Single(content),
        }
    }

    fn for_contest(&self, contest: &str) -> Option<&BallotContent> {
        match &self.content {
            ProfileContent::Single(c) => Some(c),
            ProfileContent::ByContest(map) => map.get(contest),
        }
    }
}

pub type Profiles = BTreeMap<String, Profile>;

/// Transparency statistics for one profile.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ProfileUsage {
    /// Ballots that referenced the profile.
    pub followers: u64,
    /// Followers that replaced the profile's recommendation for this contest.
    pub overrides: u64,
    /// First-round liquid that followers sent where the profile recommended,
    /// in candidate order.
    #[serde(serialize_with = "crate::util::serialize_pairs")]
    pub flowed: Vec<(CandidateId, Amount)>,
}

/// Replaces every profile reference with concrete content for `election`.
///
/// An override keyed by the election id wins over the profile's
/// recommendation. Ballot order and count are preserved; concrete ballots
/// pass through untouched.
pub fn resolve_profiles(
    ballots: &[Ballot],
    profiles: &Profiles,
    election: &Election,
) -> Result<(Vec<Ballot>, BTreeMap<String, ProfileUsage>)> {
    let mut usage: BTreeMap<String, ProfileUsage> = BTreeMap::new();
    let mut flowed: BTreeMap<String, Vec<Amount>> = BTreeMap::new();
    let mut out = Vec::with_capacity(ballots.len());
    for (pos, ballot) in ballots.iter().enumerate() {
        let BallotContent::ProfileRef { profile, overrides } = &ballot.content else {
            out.push(ballot.clone());
            continue;
        };
        let label = || ballot.label(pos);
        let p = profiles.get(profile).ok_or_else(|| Error::UnknownProfile {
            ballot: label(),
            profile: profile.clone(),
        })?;
        let entry = usage.entry(profile.clone()).or_default();
        entry.followers += 1;
        let content = match overrides.get(election.id()) {
            Some(local) => {
                normalize_content(local, election, label)?;
                entry.overrides += 1;
                local.clone()
            }
            None => {
                let recommended = p.for_contest(election.id()).ok_or_else(|| Error::ProfileMissingContest {
                    ballot: label(),
                    profile: profile.clone(),
                    contest: election.id().to_string(),
                })?;
                let normalized = normalize_content(recommended, election, || format!("profile {profile:?}"))?;
                let acc = flowed
                    .entry(profile.clone())
                    .or_insert_with(|| vec![Amount::zero(); election.num_candidates()]);
                match normalized {
                    NormalizedBallot::Shares(s) => {
                        for (slot, share) in acc.iter_mut().zip(s.shares()) {
                            *slot += share;
                        }
                    }
                    NormalizedBallot::Ranked(order) => {
                        if let Some(&first) = order.first() {
                            acc[first] += Amount::one();
                        }
                    }
                }
                recommended.clone()
            }
        };
        out.push(Ballot {
            id: ballot.id.clone(),
            line: ballot.line,
            content,
        });
    }
    for (id, u) in usage.iter_mut() {
        if let Some(acc) = flowed.remove(id) {
            u.flowed = election
                .candidates()
                .iter()
                .cloned()
                .zip(acc)
                .filter(|(_, a)| !a.is_zero())
                .collect();
        }
    }
    Ok((out, usage))
}

#[derive(Deserialize, Serialize)]
struct RawProfile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contests: Option<BTreeMap<String, RawBallot>>,
    #[serde(flatten)]
    ballot: RawBallot,
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawProfile::deserialize(d)?;
        let content = match raw.contests {
            Some(map) => {
                if raw.ballot.parts.is_some() || raw.ballot.ranking.is_some() || raw.ballot.profile.is_some() {
                    return Err(D::Error::custom("profile takes either \"contests\" or one ballot"));
                }
                let map = map
                    .into_iter()
                    .map(|(k, v)| v.into_content(false).map(|c| (k, c)))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(D::Error::custom)?;
                ProfileContent::ByContest(map)
            }
            None => {
                if raw.ballot.id.is_some() {
                    return Err(D::Error::custom("profiles take \"name\", not \"id\""));
                }
                ProfileContent::Single(raw.ballot.into_content(false).map_err(D::Error::custom)?)
            }
        };
        Ok(Profile { name: raw.name, content })
    }
}

impl Serialize for Profile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match &self.content {
            ProfileContent::Single(c) => RawProfile {
                name: self.name.clone(),
                contests: None,
                ballot: RawBallot::from_content(c),
            },
            ProfileContent::ByContest(map) => RawProfile {
                name: self.name.clone(),
                contests: Some(map.iter().map(|(k, v)| (k.clone(), RawBallot::from_content(v))).collect()),
                ballot: RawBallot::default(),
            },
        };
        raw.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Method;

    fn election() -> Election {
        Election::new("race", ["A", "B", "C"], 1, Method::Cumulative).unwrap()
    }

    fn profiles() -> Profiles {
        Profiles::from([("P1".to_string(), Profile::single(BallotContent::plump("A")))])
    }

    #[test]
    fn empty_override_adopts_profile() {
        let ballots = [Ballot::new(BallotContent::profile("P1"))];
        let (out, usage) = resolve_profiles(&ballots, &profiles(), &election()).unwrap();
        assert_eq!(out[0].content, BallotContent::plump("A"));
        assert_eq!(usage["P1"].followers, 1);
        assert_eq!(usage["P1"].overrides, 0);
        assert_eq!(usage["P1"].flowed, vec![(CandidateId::from("A"), Amount::one())]);
    }

    #[test]
    fn contest_override_replaces_recommendation() {
        let ballots = [Ballot::new(BallotContent::ProfileRef {
            profile: "P1".into(),
            overrides: BTreeMap::from([("race".to_string(), BallotContent::plump("B"))]),
        })];
        let (out, usage) = resolve_profiles(&ballots, &profiles(), &election()).unwrap();
        assert_eq!(out[0].content, BallotContent::plump("B"));
        assert_eq!(usage["P1"].followers, 1);
        assert_eq!(usage["P1"].overrides, 1);
        assert!(usage["P1"].flowed.is_empty());
    }

    #[test]
    fn overrides_for_other_contests_are_ignored() {
        let ballots = [Ballot::new(BallotContent::ProfileRef {
            profile: "P1".into(),
            overrides: BTreeMap::from([("mayor".to_string(), BallotContent::plump("Z"))]),
        })];
        let (out, usage) = resolve_profiles(&ballots, &profiles(), &election()).unwrap();
        assert_eq!(out[0].content, BallotContent::plump("A"));
        assert_eq!(usage["P1"].overrides, 0);
    }

    #[test]
    fn counts_followers() {
        let mut ballots = vec![Ballot::new(BallotContent::profile("P1")); 3];
        ballots.insert(1, Ballot::new(BallotContent::plump("C")));
        let (out, usage) = resolve_profiles(&ballots, &profiles(), &election()).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(out[1].content, BallotContent::plump("C"));
        assert_eq!(usage["P1"].followers, 3);
        assert_eq!(usage["P1"].flowed, vec![(CandidateId::from("A"), Amount::from_integer(3))]);
    }

    #[test]
    fn errors() {
        let e = election();
        let ballots = [Ballot::new(BallotContent::profile("P9")).with_id("b1")];
        assert!(matches!(
            resolve_profiles(&ballots, &profiles(), &e),
            Err(Error::UnknownProfile { ballot, .. }) if ballot.contains("b1")
        ));
        let ballots = [Ballot::new(BallotContent::ProfileRef {
            profile: "P1".into(),
            overrides: BTreeMap::from([("race".to_string(), BallotContent::plump("Z"))]),
        })];
        assert!(matches!(
            resolve_profiles(&ballots, &profiles(), &e),
            Err(Error::UnknownCandidate { .. })
        ));
        let by_contest = Profiles::from([(
            "P2".to_string(),
            Profile {
                name: None,
                content: ProfileContent::ByContest(BTreeMap::from([("mayor".to_string(), BallotContent::plump("A"))])),
            },
        )]);
        let ballots = [Ballot::new(BallotContent::profile("P2"))];
        assert!(matches!(
            resolve_profiles(&ballots, &by_contest, &e),
            Err(Error::ProfileMissingContest { .. })
        ));
    }

    #[test]
    fn profile_json() {
        let p: Profiles = serde_json::from_str(
            r#"{"P1":{"name":"Green Micro","parts":{"A":2,"B":1}},
                "P2":{"contests":{"race":{"ranking":["C","A"]}}}}"#,
        )
        .unwrap();
        assert_eq!(p["P1"].name.as_deref(), Some("Green Micro"));
        assert_eq!(p["P1"].content, ProfileContent::Single(BallotContent::parts([("A", 2), ("B", 1)])));
        assert!(matches!(&p["P2"].content, ProfileContent::ByContest(m) if m.contains_key("race")));
        assert!(serde_json::from_str::<Profiles>(r#"{"P":{"profile":"Q"}}"#).is_err());
    }
}
