//! One entry point for every method: resolves advice profiles, validates
//! ballots and runs the election's method.
//!
//! Single-round methods (approval, cumulative, quadratic) are reported as a
//! one-round result whose only action fills every seat, so every method
//! shares the round-report format.

use crate::amount::{Amount, Quantity, Value};
use crate::error::Result;
use crate::model::{resolve_profiles, validate_ballots, Ballot, Election, Method, NormalizedBallot, Profiles};
use crate::spread::{approval_set, tally_approval, tally_cumulative, tally_quadratic};
use crate::transfer::{self, Action, Balance, Flag, RoundRecord, TallyResult};
use std::collections::BTreeMap;

/// Tallies `ballots` for `election`, substituting profile references first.
pub fn tally(ballots: &[Ballot], profiles: &Profiles, election: &Election) -> Result<TallyResult> {
    let (concrete, usage) = resolve_profiles(ballots, profiles, election)?;
    let normalized = validate_ballots(&concrete, election)?;
    let mut result = tally_normalized(&normalized, election)?;
    result.profile_usage = usage;
    Ok(result)
}

pub fn tally_normalized(ballots: &[NormalizedBallot], election: &Election) -> Result<TallyResult> {
    match election.method() {
        Method::Approval => {
            let sets: Vec<Vec<usize>> = ballots.iter().map(approval_set).collect();
            let t = tally_approval(&sets, election)?;
            let scores: Vec<Amount> = t.counts.iter().map(|&n| Amount::from_integer(n)).collect();
            Ok(single_round(election, ballots.len(), &scores, &t.ranking))
        }
        Method::Cumulative => {
            let t = tally_cumulative(ballots, election)?;
            Ok(single_round(election, ballots.len(), &t.totals, &t.ranking))
        }
        Method::Quadratic => {
            let t = tally_quadratic(ballots, election.parts_budget(), election)?;
            Ok(single_round(election, ballots.len(), &t.heights, &t.ranking))
        }
        _ => transfer::run_transfer_normalized(ballots, election, election.exponent()),
    }
}

fn single_round<L: Quantity>(election: &Election, ballots: usize, scores: &[L], ranking: &[usize]) -> TallyResult {
    let seats = election.seats();
    let chosen = &ranking[..seats];
    let tie = seats < ranking.len() && scores[ranking[seats - 1]].cmp_total(&scores[ranking[seats]]).is_eq();
    let sum = |idx: &[usize]| idx.iter().fold(L::zero(), |acc, &c| acc + scores[c].clone()).to_value();
    let total = L::from_integer(ballots as u64).to_value();
    let round = RoundRecord {
        round: 1,
        quota: None,
        supports: election.candidates().iter().cloned().zip(scores.iter().map(L::to_value)).collect(),
        action: Action::FinalFill(chosen.iter().map(|&c| election.candidate(c).clone()).collect()),
        transfers: Vec::new(),
        transferred: L::zero().to_value(),
        balance: Balance {
            locked: sum(chosen),
            hopeful: sum(&ranking[seats..]),
            exhausted: L::zero().to_value(),
        },
        flags: if tie { vec![Flag::TieBreak] } else { Vec::new() },
    };
    TallyResult {
        method: election.method(),
        winners: chosen.iter().map(|&c| election.candidate(c).clone()).collect(),
        rounds: vec![round],
        exhausted: Value::Exact(Amount::zero()),
        total,
        profile_usage: BTreeMap::new(),
    }
}
