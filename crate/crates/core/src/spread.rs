//! Single-round vote-spreading tallies.
//!
//! Approval counts every approved candidate once per ballot. Cumulative
//! ("liquid") voting gives each ballot one unit of liquid split by parts and
//! sums the exact shares. Quadratic voting pours the same liquid into
//! balloons whose height, the square root of the liquid, is what counts.
//!
//! Quadratic voting assumes voters cannot trade votes outside the system.
//! [`collusion_scenario`] shows what happens when they can: a buyer who pays
//! conspirators one coin each gets linear rather than quadratic cost. The
//! same mechanism rewards spreading attention thinly, which is why quadratic
//! reweighting is only offered among a few sibling topics (see
//! [`crate::hierarchy::reweight_local`]).

use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::model::{Election, NormalizedBallot};
use std::cmp::Ordering;

/// Orders candidates by descending score, breaking ties by the election's
/// tie order.
pub fn rank_by<T>(scores: &[T], election: &Election, cmp: impl Fn(&T, &T) -> Ordering) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| cmp(&scores[b], &scores[a]).then(election.tie_rank(a).cmp(&election.tie_rank(b))));
    order
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApprovalTally {
    /// Approvals per candidate, in candidate order.
    pub counts: Vec<u64>,
    /// Candidate indices, most approved first.
    pub ranking: Vec<usize>,
}

/// Candidates a ballot approves: every ranked entry, or every candidate
/// given at least one part.
pub fn approval_set(ballot: &NormalizedBallot) -> Vec<usize> {
    match ballot {
        NormalizedBallot::Ranked(order) => order.clone(),
        NormalizedBallot::Shares(s) => s.supported().collect(),
    }
}

/// Counts approvals; each ballot lists the candidate indices it approves.
pub fn tally_approval(sets: &[Vec<usize>], election: &Election) -> Result<ApprovalTally> {
    let n = election.num_candidates();
    let mut counts = vec![0u64; n];
    for (pos, set) in sets.iter().enumerate() {
        let mut seen = vec![false; n];
        for &c in set {
            if c >= n {
                return Err(Error::UnknownCandidate {
                    ballot: format!("#{}", pos + 1),
                    candidate: format!("index {c}"),
                });
            }
            if !std::mem::replace(&mut seen[c], true) {
                counts[c] += 1;
            }
        }
    }
    let ranking = rank_by(&counts, election, |a, b| a.cmp(b));
    Ok(ApprovalTally { counts, ranking })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CumulativeTally {
    /// Exact liquid per candidate, in candidate order.
    pub totals: Vec<Amount>,
    pub ranking: Vec<usize>,
}

/// Sums each ballot's exact shares per candidate. The grand total equals the
/// number of ballots.
pub fn tally_cumulative(ballots: &[NormalizedBallot], election: &Election) -> Result<CumulativeTally> {
    let mut totals = vec![Amount::zero(); election.num_candidates()];
    for (pos, b) in ballots.iter().enumerate() {
        let s = b.as_shares().ok_or_else(|| Error::WrongBallotKind {
            ballot: format!("#{}", pos + 1),
            expected: "parts",
        })?;
        for (t, share) in totals.iter_mut().zip(s.shares()) {
            *t += share;
        }
    }
    let ranking = rank_by(&totals, election, Ord::cmp);
    Ok(CumulativeTally { totals, ranking })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rounding {
    /// Whole votes per candidate, summing to the vote count.
    pub allocation: Vec<u64>,
    /// Largest `|allocation / votes - share|` over candidates.
    pub deviation: Amount,
}

/// Rounds exact shares to `votes` whole votes by largest remainder (ties to
/// the earlier candidate) and reports the worst per-candidate deviation.
pub fn rounding_error(shares: &[Amount], votes: u64) -> Result<Rounding> {
    if votes == 0 {
        return Err(Error::InvalidArgument("votes per voter must be at least 1".into()));
    }
    let total: Amount = shares.iter().sum();
    if total != Amount::one() {
        return Err(Error::InvalidArgument(format!("shares sum to {total}, not 1")));
    }
    let v = Amount::from_integer(votes);
    let scaled: Vec<Amount> = shares.iter().map(|s| s * &v).collect();
    let mut allocation: Vec<u64> = scaled
        .iter()
        .map(|x| {
            let f = x.floor();
            f.numer().try_into().expect("floor of a share times votes fits in u64")
        })
        .collect();
    let assigned: u64 = allocation.iter().sum();
    let mut by_remainder: Vec<(usize, Amount)> = scaled
        .iter()
        .enumerate()
        .map(|(i, x)| (i, x - &x.floor()))
        .collect();
    by_remainder.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    for (i, _) in by_remainder.iter().take((votes - assigned) as usize) {
        allocation[*i] += 1;
    }
    let deviation = allocation
        .iter()
        .zip(shares)
        .map(|(&a, s)| Amount::ratio(a, votes).abs_diff(s))
        .max()
        .unwrap_or_else(Amount::zero);
    Ok(Rounding { allocation, deviation })
}

/// Coins needed to cast `votes` votes on one option: `votes²`.
pub fn qv_cost(votes: f64) -> Result<f64> {
    if !(votes >= 0.0) || !votes.is_finite() {
        return Err(Error::InvalidArgument(format!("vote count must be a nonnegative number, got {votes}")));
    }
    Ok(votes * votes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collusion {
    /// Votes bought honestly at quadratic cost.
    pub honest_votes: f64,
    /// Votes cast by conspirators paid one coin each.
    pub colluded_votes: f64,
}

/// Compares spending `coins` honestly with paying conspirators one coin each
/// to cast one vote apiece. Only as many conspirators as there are coins can
/// be paid.
pub fn collusion_scenario(coins: u64, conspirators: u64) -> Collusion {
    Collusion {
        honest_votes: (coins as f64).sqrt(),
        colluded_votes: conspirators.min(coins) as f64,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTally {
    /// Balloon stack height per candidate, in candidate order.
    pub heights: Vec<f64>,
    pub ranking: Vec<usize>,
}

/// Height of the balloon holding `share` of a ballot's liquid, measured in
/// baseline units where one part out of `budget` has height 1.
pub fn balloon_height(share: &Amount, budget: u64) -> f64 {
    (share * &Amount::from_integer(budget)).to_f64().sqrt()
}

/// Stacks balloon heights. Every ballot spends its whole liquid, worth
/// `parts_budget` parts, so a ballot's balloon for a candidate holds
/// `share × parts_budget` parts and stands `sqrt` of that tall. Heights are
/// summed in ballot order.
pub fn tally_quadratic(ballots: &[NormalizedBallot], parts_budget: u64, election: &Election) -> Result<QuadraticTally> {
    if parts_budget == 0 {
        return Err(Error::InvalidArgument("parts budget must be positive".into()));
    }
    let mut heights = vec![0.0f64; election.num_candidates()];
    for (pos, b) in ballots.iter().enumerate() {
        let label = || format!("#{}", pos + 1);
        let s = b.as_shares().ok_or_else(|| Error::WrongBallotKind {
            ballot: label(),
            expected: "parts",
        })?;
        if s.total_parts() > parts_budget {
            return Err(Error::TooManyParts {
                ballot: label(),
                parts: s.total_parts(),
                limit: parts_budget,
            });
        }
        for c in s.supported() {
            heights[c] += balloon_height(s.share(c), parts_budget);
        }
    }
    let ranking = rank_by(&heights, election, f64::total_cmp);
    Ok(QuadraticTally { heights, ranking })
}
