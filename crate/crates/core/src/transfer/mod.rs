//! Multi-round transferable tallies.
//!
//! Every round performs exactly one state change: elect the strongest
//! hopeful at or above the quota, otherwise eliminate the weakest. Liquid
//! released by that action flows on to the ballots' remaining choices, and
//! each flow is recorded so a round trace can be replayed or rendered.
//!
//! Liquid is conserved after every round:
//! `locked (elected) + on hopefuls + exhausted = number of ballots`.
//! Linear methods (IRV, STV, CTV) keep this exactly; QTV works in binary64.

mod ranked;
mod spreading;

pub use ranked::{run_irv, run_stv};
pub use spreading::{run_ctv, run_power, run_qtv};

use crate::amount::{Quantity, Value};
use crate::error::{Error, Result};
use crate::model::{validate_ballots, Ballot, CandidateId, Election, Method, NormalizedBallot, ProfileUsage, QuotaRule};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Hopeful,
    Elected,
    Eliminated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Elect(CandidateId),
    Eliminate(CandidateId),
    /// Remaining seats filled without reaching a quota.
    FinalFill(Vec<CandidateId>),
}

/// Notable conditions in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// The action's candidate was chosen by the tie-break order.
    TieBreak,
    /// No active liquid was left; seats were filled by tie-break order.
    Exhausted,
}

/// Liquid moved from one candidate to another, or to the exhausted pool
/// when `to` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer {
    pub from: CandidateId,
    pub to: Option<CandidateId>,
    pub amount: Value,
}

/// Where all liquid sits after a round's action.
#[derive(Debug, Clone, PartialEq)]
pub struct Balance {
    pub locked: Value,
    pub hopeful: Value,
    pub exhausted: Value,
}

impl Balance {
    pub fn total(&self) -> Value {
        Value::sum([&self.locked, &self.hopeful, &self.exhausted])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// Threshold in force; for IRV the majority line of active liquid.
    pub quota: Option<Value>,
    /// Support at the start of the round for every candidate still standing:
    /// current liquid (or stack height) for hopefuls, locked amount for the
    /// elected.
    pub supports: Vec<(CandidateId, Value)>,
    pub action: Action,
    pub transfers: Vec<Transfer>,
    /// Liquid released by the action; equals the sum of `transfers`.
    pub transferred: Value,
    pub balance: Balance,
    pub flags: Vec<Flag>,
}

impl RoundRecord {
    pub fn support(&self, candidate: &str) -> Option<&Value> {
        self.supports.iter().find(|(c, _)| c.as_str() == candidate).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TallyResult {
    pub method: Method,
    pub winners: Vec<CandidateId>,
    pub rounds: Vec<RoundRecord>,
    /// Liquid with nowhere left to go at the end of the count.
    pub exhausted: Value,
    /// Liquid cast: one unit per ballot.
    pub total: Value,
    pub profile_usage: BTreeMap<String, ProfileUsage>,
}

impl TallyResult {
    /// Eliminated candidates in elimination order.
    pub fn eliminations(&self) -> Vec<&CandidateId> {
        self.rounds
            .iter()
            .filter_map(|r| match &r.action {
                Action::Eliminate(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    pub fn flagged(&self, flag: Flag) -> bool {
        self.rounds.iter().any(|r| r.flags.contains(&flag))
    }

    /// Re-checks the bookkeeping of every round: liquid conserved (for
    /// methods that move liquid rather than count approvals or heights), transfers
    /// nonnegative and summing to `transferred`, exhaustion never shrinking.
    /// Binary64 results are compared with a relative tolerance of 1e-9.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |round: usize, what: String| Err(Error::Invariant(format!("round {round}: {what}")));
        let mut exhausted = Value::Exact(crate::amount::Amount::zero());
        for r in &self.rounds {
            let held = r.balance.total();
            let conserved = self.method.is_transferable() || self.method == Method::Cumulative;
            if conserved && !close(&held, &self.total) {
                return fail(r.round, format!("{held} liquid accounted for, expected {}", self.total));
            }
            if r.transfers.iter().any(|t| t.amount.to_f64() < 0.0) {
                return fail(r.round, "negative transfer".into());
            }
            let moved = Value::sum(r.transfers.iter().map(|t| &t.amount));
            if !close(&moved, &r.transferred) {
                return fail(r.round, format!("transfers sum to {moved}, round moved {}", r.transferred));
            }
            if less(&r.balance.exhausted, &exhausted) {
                return fail(r.round, "exhausted liquid decreased".into());
            }
            exhausted = r.balance.exhausted.clone();
        }
        Ok(())
    }
}

fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x == y,
        _ => {
            let (x, y) = (a.to_f64(), b.to_f64());
            (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
        }
    }
}

fn less(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x < y,
        _ => a.to_f64() < b.to_f64() - 1e-9 * b.to_f64().abs().max(1.0),
    }
}

/// Normalizes ballots and runs the transferable method named by the
/// election. For CTV and QTV an exponent (from `exponent` or the election)
/// selects the generalized engine: 1 is CTV exactly, other values give
/// heights `liquid^(1/exponent)`.
pub fn run_transfer(ballots: &[Ballot], election: &Election, exponent: Option<f64>) -> Result<TallyResult> {
    let normalized = validate_ballots(ballots, election)?;
    run_transfer_normalized(&normalized, election, exponent.or(election.exponent()))
}

pub fn run_transfer_normalized(
    ballots: &[NormalizedBallot],
    election: &Election,
    exponent: Option<f64>,
) -> Result<TallyResult> {
    match (election.method(), exponent) {
        (Method::Irv, _) => run_irv(ballots, election),
        (Method::Stv, _) => run_stv(ballots, election),
        (Method::Ctv | Method::Qtv, Some(a)) if a == 1.0 => run_ctv(ballots, election),
        (Method::Ctv | Method::Qtv, Some(a)) => run_power(ballots, election, a),
        (Method::Ctv, None) => run_ctv(ballots, election),
        (Method::Qtv, None) => run_qtv(ballots, election),
        (m, _) => Err(Error::InvalidArgument(format!("{m} is not a transferable method"))),
    }
}

/// Quota for this round. `active` is non-exhausted liquid, `hopeful_support`
/// the summed support of the `hopefuls` still in play.
pub(crate) fn quota<L: Quantity>(rule: QuotaRule, active: &L, hopeful_support: &L, hopefuls: usize, seats: usize) -> L {
    let seats_plus_one = L::from_integer(seats as u64 + 1);
    match rule {
        QuotaRule::DroopIntegral => (active.clone() / seats_plus_one).floor() + L::from_integer(1),
        QuotaRule::DroopFractional => active.clone() / seats_plus_one,
        QuotaRule::DynamicCandidates => hopeful_support.clone() / L::from_integer(hopefuls as u64 + 1),
    }
}

/// Picks the best candidate among `pool` under `better` (Greater means the
/// first argument wins); ties go to the lowest tie rank. Returns the choice
/// and whether a tie had to be broken.
pub(crate) fn pick<L: Quantity>(
    pool: &[usize],
    support: &[L],
    election: &Election,
    better: impl Fn(&L, &L) -> Ordering,
) -> Option<(usize, bool)> {
    let mut best: Option<usize> = None;
    let mut tied = false;
    for &c in pool {
        match best {
            None => best = Some(c),
            Some(b) => match better(&support[c], &support[b]) {
                Ordering::Greater => {
                    best = Some(c);
                    tied = false;
                }
                Ordering::Equal => {
                    tied = true;
                    if election.tie_rank(c) < election.tie_rank(b) {
                        best = Some(c);
                    }
                }
                Ordering::Less => {}
            },
        }
    }
    best.map(|b| (b, tied))
}

/// Strongest hopeful; ties favor the earliest in tie order.
pub(crate) fn strongest<L: Quantity>(pool: &[usize], support: &[L], election: &Election) -> Option<(usize, bool)> {
    pick(pool, support, election, |a, b| a.cmp_total(b))
}

/// Weakest hopeful; ties eliminate the latest in tie order.
pub(crate) fn weakest<L: Quantity>(pool: &[usize], support: &[L], election: &Election) -> Option<(usize, bool)> {
    let mut best: Option<usize> = None;
    let mut tied = false;
    for &c in pool {
        match best {
            None => best = Some(c),
            Some(b) => match support[c].cmp_total(&support[b]) {
                Ordering::Less => {
                    best = Some(c);
                    tied = false;
                }
                Ordering::Equal => {
                    tied = true;
                    if election.tie_rank(c) > election.tie_rank(b) {
                        best = Some(c);
                    }
                }
                Ordering::Greater => {}
            },
        }
    }
    best.map(|b| (b, tied))
}

/// Orders `pool` for a final fill: strongest first, tie order second. Returns
/// the first `seats` entries and whether the cut fell inside a tie.
pub(crate) fn final_fill<L: Quantity>(pool: &[usize], support: &[L], election: &Election, seats: usize) -> (Vec<usize>, bool) {
    let mut order = pool.to_vec();
    order.sort_by(|&a, &b| {
        support[b]
            .cmp_total(&support[a])
            .then(election.tie_rank(a).cmp(&election.tie_rank(b)))
    });
    let tie = seats > 0
        && seats < order.len()
        && support[order[seats - 1]].cmp_total(&support[order[seats]]) == Ordering::Equal;
    order.truncate(seats);
    (order, tie)
}

/// Accumulates per-target flows for one round, in candidate order with the
/// exhausted pool last.
pub(crate) struct FlowLedger<L> {
    from: usize,
    to: Vec<Option<L>>,
}

impl<L: Quantity> FlowLedger<L> {
    pub(crate) fn new(from: usize, candidates: usize) -> Self {
        FlowLedger {
            from,
            to: vec![None; candidates + 1],
        }
    }

    pub(crate) fn add(&mut self, to: Option<usize>, amount: L) {
        let slot = to.unwrap_or(self.to.len() - 1);
        self.to[slot] = Some(match self.to[slot].take() {
            Some(acc) => acc + amount,
            None => amount,
        });
    }

    pub(crate) fn into_transfers(self, election: &Election) -> (Vec<Transfer>, L) {
        let last = self.to.len() - 1;
        let mut total = L::zero();
        let mut out = Vec::new();
        for (slot, amount) in self.to.into_iter().enumerate() {
            if let Some(a) = amount {
                total = total + a.clone();
                out.push(Transfer {
                    from: election.candidate(self.from).clone(),
                    to: (slot != last).then(|| election.candidate(slot).clone()),
                    amount: a.to_value(),
                });
            }
        }
        (out, total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amount::Amount;

    #[test]
    fn droop_integral_and_fractional() {
        let v = Amount::from_integer(8);
        let q = quota(QuotaRule::DroopIntegral, &v, &Amount::zero(), 3, 2);
        assert_eq!(q, Amount::from_integer(3));
        let q = quota(QuotaRule::DroopFractional, &v, &Amount::zero(), 3, 2);
        assert_eq!(q, Amount::ratio(8, 3));
        let q = quota(QuotaRule::DroopIntegral, &Amount::from_integer(9), &Amount::zero(), 3, 1);
        assert_eq!(q, Amount::from_integer(5));
    }

    #[test]
    fn dynamic_quota_uses_hopefuls() {
        let q = quota(QuotaRule::DynamicCandidates, &Amount::from_integer(8), &Amount::from_integer(6), 2, 2);
        assert_eq!(q, Amount::from_integer(2));
        let q: f64 = quota(QuotaRule::DynamicCandidates, &8.0, &6.0, 5, 2);
        assert_eq!(q, 1.0);
    }

    #[test]
    fn ties_follow_tie_order() {
        let e = Election::new("t", ["A", "B", "C"], 1, Method::Irv).unwrap();
        let s = [2.0, 2.0, 1.0];
        assert_eq!(strongest(&[0, 1, 2], &s, &e), Some((0, true)));
        assert_eq!(weakest(&[0, 1], &s, &e), Some((1, true)));
        assert_eq!(weakest(&[0, 1, 2], &s, &e), Some((2, false)));
        let e = e.with_tie_order(["B", "A", "C"]).unwrap();
        assert_eq!(strongest(&[0, 1, 2], &s, &e), Some((1, true)));
        assert_eq!(weakest(&[0, 1], &s, &e), Some((0, true)));
    }

    #[test]
    fn final_fill_reports_cut_ties() {
        let e = Election::new("t", ["A", "B", "C"], 2, Method::Stv).unwrap();
        assert_eq!(final_fill(&[0, 1, 2], &[1.0, 2.0, 1.0], &e, 2), (vec![1, 0], true));
        assert_eq!(final_fill(&[0, 1, 2], &[3.0, 2.0, 1.0], &e, 2), (vec![0, 1], false));
        assert_eq!(final_fill(&[0, 1], &[0.0, 0.0], &e, 2), (vec![0, 1], false));
    }
}
