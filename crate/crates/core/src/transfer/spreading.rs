//! Transferable counts over parts ballots: CTV, QTV and the general power
//! law between them.
//!
//! Each ballot holds liquid on several candidates at once. A candidate's
//! support is the sum over ballots of `height(liquid)`. When a candidate is
//! elected with support `H` at quota `Q`, every contributing ballot keeps
//! `liquid * (Q/H)^alpha` there (so the heights sum to exactly `Q`) and gets
//! the rest back. Returned liquid, and all liquid of an eliminated
//! candidate, is spread over the ballot's remaining hopefuls in the ballot's
//! original parts ratios, or exhausted if none remain.

use super::{final_fill, quota, strongest, weakest, Action, Balance, Flag, FlowLedger, RoundRecord, Status, TallyResult};
use crate::amount::{Amount, Quantity, Value};
use crate::error::{Error, Result};
use crate::model::{CandidateId, Election, NormalizedBallot, Shares};
use std::collections::BTreeMap;

/// Maps liquid to influence and back.
pub(crate) trait HeightLaw<L> {
    fn height(&self, liquid: &L) -> L;
    /// Fraction of liquid kept when every height is scaled by `ratio`.
    fn retention(&self, ratio: &L) -> L;
}

/// CTV: height is liquid.
struct Linear;

impl HeightLaw<Amount> for Linear {
    fn height(&self, liquid: &Amount) -> Amount {
        liquid.clone()
    }
    fn retention(&self, ratio: &Amount) -> Amount {
        ratio.clone()
    }
}

/// QTV: height is the square root of liquid.
struct SquareRoot;

impl HeightLaw<f64> for SquareRoot {
    fn height(&self, liquid: &f64) -> f64 {
        liquid.sqrt()
    }
    fn retention(&self, ratio: &f64) -> f64 {
        ratio * ratio
    }
}

/// Height `liquid^(1/alpha)`.
struct Power(f64);

impl HeightLaw<f64> for Power {
    fn height(&self, liquid: &f64) -> f64 {
        liquid.powf(1.0 / self.0)
    }
    fn retention(&self, ratio: &f64) -> f64 {
        ratio.powf(self.0)
    }
}

/// Cumulative transferable vote in exact rationals.
pub fn run_ctv(ballots: &[NormalizedBallot], election: &Election) -> Result<TallyResult> {
    run(ballots, election, &Linear)
}

/// Quadratic transferable vote in binary64.
pub fn run_qtv(ballots: &[NormalizedBallot], election: &Election) -> Result<TallyResult> {
    run(ballots, election, &SquareRoot)
}

/// Transferable count with heights `liquid^(1/alpha)` in binary64.
pub fn run_power(ballots: &[NormalizedBallot], election: &Election, alpha: f64) -> Result<TallyResult> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent must be at least 1, got {alpha}")));
    }
    run(ballots, election, &Power(alpha))
}

fn sum<L: Quantity>(values: impl Iterator<Item = L>) -> L {
    values.fold(L::zero(), |a, b| a + b)
}

struct State<'e, L> {
    election: &'e Election,
    /// Original shares per ballot, in candidate order.
    shares: Vec<Vec<L>>,
    /// Liquid each ballot currently places on each candidate.
    liquid: Vec<Vec<L>>,
    status: Vec<Status>,
    locked: Vec<L>,
    exhausted: L,
    total: L,
}

impl<'e, L: Quantity> State<'e, L> {
    fn new(ballots: &[&Shares], election: &'e Election) -> Self {
        let shares: Vec<Vec<L>> = ballots
            .iter()
            .map(|s| s.shares().iter().map(L::from_amount).collect())
            .collect();
        let n = election.num_candidates();
        State {
            election,
            liquid: shares.clone(),
            shares,
            status: vec![Status::Hopeful; n],
            locked: vec![L::zero(); n],
            exhausted: L::zero(),
            total: L::from_integer(ballots.len() as u64),
        }
    }

    fn hopefuls(&self) -> Vec<usize> {
        (0..self.status.len()).filter(|&c| self.status[c] == Status::Hopeful).collect()
    }

    /// Stack heights, summed in ballot order; zero for non-hopefuls.
    fn support(&self, law: &impl HeightLaw<L>) -> Vec<L> {
        let mut s = vec![L::zero(); self.status.len()];
        for row in &self.liquid {
            for (c, l) in row.iter().enumerate() {
                if self.status[c] == Status::Hopeful && !l.is_zero() {
                    s[c] = s[c].clone() + law.height(l);
                }
            }
        }
        s
    }

    fn balance(&self) -> Balance {
        let hopeful = sum(
            self.liquid
                .iter()
                .flat_map(|row| row.iter().enumerate())
                .filter(|(c, _)| self.status[*c] == Status::Hopeful)
                .map(|(_, l)| l.clone()),
        );
        Balance {
            locked: sum(self.locked.iter().cloned()).to_value(),
            hopeful: hopeful.to_value(),
            exhausted: self.exhausted.to_value(),
        }
    }

    fn supports_record(&self, support: &[L]) -> Vec<(CandidateId, Value)> {
        (0..self.status.len())
            .filter_map(|c| {
                let id = self.election.candidate(c).clone();
                match self.status[c] {
                    Status::Hopeful => Some((id, support[c].to_value())),
                    Status::Elected => Some((id, self.locked[c].to_value())),
                    Status::Eliminated => None,
                }
            })
            .collect()
    }

    /// Spreads `amount` returned to ballot `b` over its remaining hopefuls.
    fn redistribute(&mut self, b: usize, amount: L, flows: &mut FlowLedger<L>) {
        if amount.is_zero() {
            return;
        }
        let (status, shares) = (&self.status, &self.shares[b]);
        let open = |c: &usize| status[*c] == Status::Hopeful && !shares[*c].is_zero();
        let n = status.len();
        if !(0..n).any(|c| open(&c)) {
            self.exhausted = self.exhausted.clone() + amount.clone();
            flows.add(None, amount);
            return;
        }
        let weight = sum((0..n).filter(open).map(|c| shares[c].clone()));
        for c in (0..n).filter(open) {
            let portion = amount.clone() * shares[c].clone() / weight.clone();
            self.liquid[b][c] = self.liquid[b][c].clone() + portion.clone();
            flows.add(Some(c), portion);
        }
    }

    /// Takes liquid off `from`, keeping `keep` of each ballot's stake locked
    /// there (all of it returns when `keep` is `None`).
    fn release(&mut self, from: usize, keep: Option<&L>) -> (Vec<super::Transfer>, L) {
        let mut flows = FlowLedger::new(from, self.status.len());
        for b in 0..self.liquid.len() {
            let stake = std::mem::replace(&mut self.liquid[b][from], L::zero());
            if stake.is_zero() {
                continue;
            }
            let returned = match keep {
                Some(k) => {
                    let retained = stake.clone() * k.clone();
                    self.locked[from] = self.locked[from].clone() + retained.clone();
                    stake - retained
                }
                None => stake,
            };
            self.redistribute(b, returned, &mut flows);
        }
        flows.into_transfers(self.election)
    }
}

fn run<L: Quantity>(ballots: &[NormalizedBallot], election: &Election, law: &impl HeightLaw<L>) -> Result<TallyResult> {
    let shares = ballots
        .iter()
        .enumerate()
        .map(|(i, b)| {
            b.as_shares().ok_or_else(|| Error::WrongBallotKind {
                ballot: format!("#{}", i + 1),
                expected: "parts",
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut st = State::new(&shares, election);
    let seats = election.seats();
    let mut winners: Vec<usize> = Vec::new();
    let mut rounds = Vec::new();
    while winners.len() < seats {
        let hopefuls = st.hopefuls();
        let support = st.support(law);
        let supports = st.supports_record(&support);
        let hopeful_total = sum(hopefuls.iter().map(|&c| support[c].clone()));
        let filling = hopefuls.len() + winners.len() <= seats;
        if filling || hopeful_total.is_zero() {
            let (chosen, tie) = final_fill(&hopefuls, &support, election, seats - winners.len());
            for &c in &chosen {
                // Nothing to return: the candidate keeps whatever reached it.
                st.status[c] = Status::Elected;
                st.locked[c] = sum(st.liquid.iter_mut().map(|row| std::mem::replace(&mut row[c], L::zero())));
            }
            let mut flags = Vec::new();
            if tie {
                flags.push(Flag::TieBreak);
            }
            if !filling {
                flags.push(Flag::Exhausted);
            }
            winners.extend(&chosen);
            rounds.push(RoundRecord {
                round: rounds.len() + 1,
                quota: None,
                supports,
                action: Action::FinalFill(chosen.iter().map(|&c| election.candidate(c).clone()).collect()),
                transfers: Vec::new(),
                transferred: L::zero().to_value(),
                balance: st.balance(),
                flags,
            });
            break;
        }
        let active = st.total.clone() - st.exhausted.clone();
        let q = quota(election.quota_rule(), &active, &hopeful_total, hopefuls.len(), seats);
        let reached: Vec<usize> = hopefuls
            .iter()
            .copied()
            .filter(|&c| support[c] >= q && !support[c].is_zero())
            .collect();
        let (action, (transfers, moved), tie) = match strongest(&reached, &support, election) {
            Some((w, tie)) => {
                st.status[w] = Status::Elected;
                winners.push(w);
                let keep = law.retention(&(q.clone() / support[w].clone()));
                (Action::Elect(election.candidate(w).clone()), st.release(w, Some(&keep)), tie)
            }
            None => {
                let (out, tie) = weakest(&hopefuls, &support, election).expect("hopefuls remain");
                st.status[out] = Status::Eliminated;
                (Action::Eliminate(election.candidate(out).clone()), st.release(out, None), tie)
            }
        };
        rounds.push(RoundRecord {
            round: rounds.len() + 1,
            quota: Some(q.to_value()),
            supports,
            action,
            transfers,
            transferred: moved.to_value(),
            balance: st.balance(),
            flags: if tie { vec![Flag::TieBreak] } else { Vec::new() },
        });
    }
    Ok(TallyResult {
        method: election.method(),
        winners: winners.iter().map(|&c| election.candidate(c).clone()).collect(),
        rounds,
        exhausted: st.exhausted.to_value(),
        total: st.total.to_value(),
        profile_usage: BTreeMap::new(),
    })
}
