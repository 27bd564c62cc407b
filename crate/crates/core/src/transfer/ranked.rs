//! Ranked-ballot counts: instant runoff and single transferable vote with
//! fractional surplus transfer.

use super::{final_fill, quota, strongest, weakest, Action, Balance, Flag, FlowLedger, RoundRecord, Status, TallyResult};
use crate::amount::{Amount, Quantity};
use crate::error::{Error, Result};
use crate::model::{Election, NormalizedBallot};
use std::collections::BTreeMap;

/// A ranked ballot in play: its preference list, how far down the list it
/// has moved, and the liquid it still carries.
struct Pile<'a> {
    order: &'a [usize],
    /// Index into `order` of the candidate currently holding the ballot;
    /// `order.len()` once exhausted.
    at: usize,
    weight: Amount,
}

impl Pile<'_> {
    fn holder(&self) -> Option<usize> {
        self.order.get(self.at).copied()
    }

    /// Moves to the next hopeful preference; returns it, or `None` if the
    /// ballot exhausts.
    fn advance(&mut self, status: &[Status]) -> Option<usize> {
        self.at += 1;
        while let Some(&c) = self.order.get(self.at) {
            if status[c] == Status::Hopeful {
                return Some(c);
            }
            self.at += 1;
        }
        None
    }
}

fn ranked_piles<'a>(ballots: &'a [NormalizedBallot]) -> Result<Vec<Pile<'a>>> {
    ballots
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let order = b.as_ranked().ok_or_else(|| Error::WrongBallotKind {
                ballot: format!("#{}", i + 1),
                expected: "ranked",
            })?;
            Ok(Pile {
                order,
                at: 0,
                weight: Amount::one(),
            })
        })
        .collect()
}

struct Count<'e> {
    election: &'e Election,
    status: Vec<Status>,
    locked: Vec<Amount>,
    exhausted: Amount,
    total: Amount,
    rounds: Vec<RoundRecord>,
    winners: Vec<usize>,
}

impl<'e> Count<'e> {
    fn new(election: &'e Election, ballots: usize) -> Self {
        let n = election.num_candidates();
        Count {
            election,
            status: vec![Status::Hopeful; n],
            locked: vec![Amount::zero(); n],
            exhausted: Amount::zero(),
            total: Amount::from_integer(ballots as u64),
            rounds: Vec::new(),
            winners: Vec::new(),
        }
    }

    fn hopefuls(&self) -> Vec<usize> {
        (0..self.status.len()).filter(|&c| self.status[c] == Status::Hopeful).collect()
    }

    fn support(&self, piles: &[Pile]) -> Vec<Amount> {
        let mut s = vec![Amount::zero(); self.status.len()];
        for p in piles {
            if let Some(c) = p.holder() {
                s[c] += &p.weight;
            }
        }
        s
    }

    fn active(&self) -> Amount {
        &self.total - &self.exhausted
    }

    fn balance(&self, support: &[Amount]) -> Balance {
        let hopeful: Amount = self
            .hopefuls()
            .into_iter()
            .map(|c| support[c].clone())
            .sum();
        Balance {
            locked: self.locked.iter().sum::<Amount>().to_value(),
            hopeful: hopeful.to_value(),
            exhausted: self.exhausted.to_value(),
        }
    }

    fn supports_record(&self, support: &[Amount]) -> Vec<(crate::model::CandidateId, crate::amount::Value)> {
        (0..self.status.len())
            .filter_map(|c| match self.status[c] {
                Status::Hopeful => Some((self.election.candidate(c).clone(), support[c].to_value())),
                Status::Elected => Some((self.election.candidate(c).clone(), self.locked[c].to_value())),
                Status::Eliminated => None,
            })
            .collect()
    }

    /// Places every ballot with its first hopeful preference.
    fn seat_initial(&mut self, piles: &mut [Pile]) {
        for p in piles.iter_mut() {
            if p.holder().is_none() {
                self.exhausted += &p.weight;
            }
        }
    }

    /// Moves liquid off `from`: each ballot held by `from` keeps `keep` of its
    /// weight there (locked) and carries the rest onward.
    fn release(&mut self, piles: &mut [Pile], from: usize, keep: Option<&Amount>) -> (Vec<super::Transfer>, Amount) {
        let mut flows = FlowLedger::new(from, self.status.len());
        for p in piles.iter_mut().filter(|p| p.holder() == Some(from)) {
            let moving = match keep {
                Some(k) => {
                    let retained = &p.weight * k;
                    self.locked[from] += &retained;
                    &p.weight - &retained
                }
                None => p.weight.clone(),
            };
            p.weight = moving.clone();
            let next = p.advance(&self.status);
            if next.is_none() {
                self.exhausted += &moving;
            }
            flows.add(next, moving);
        }
        flows.into_transfers(self.election)
    }

    fn fill(&mut self, pool: &[usize], support: &[Amount], quota: Option<Amount>, exhausted: bool) {
        let seats = self.election.seats() - self.winners.len();
        let (chosen, tie) = final_fill(pool, support, self.election, seats);
        for &c in &chosen {
            self.status[c] = Status::Elected;
            self.locked[c] = support[c].clone();
        }
        let mut flags = Vec::new();
        if tie {
            flags.push(Flag::TieBreak);
        }
        if exhausted {
            flags.push(Flag::Exhausted);
        }
        let supports = self.supports_record_before(pool, support, &chosen);
        self.winners.extend(&chosen);
        let record = RoundRecord {
            round: self.rounds.len() + 1,
            quota: quota.map(|q| q.to_value()),
            supports,
            action: Action::FinalFill(chosen.iter().map(|&c| self.election.candidate(c).clone()).collect()),
            transfers: Vec::new(),
            transferred: Amount::zero().to_value(),
            balance: self.balance(support),
            flags,
        };
        self.rounds.push(record);
    }

    // Supports as they stood before `chosen` were marked elected.
    fn supports_record_before(
        &self,
        _pool: &[usize],
        support: &[Amount],
        chosen: &[usize],
    ) -> Vec<(crate::model::CandidateId, crate::amount::Value)> {
        (0..self.status.len())
            .filter_map(|c| {
                let id = self.election.candidate(c).clone();
                match self.status[c] {
                    Status::Hopeful => Some((id, support[c].to_value())),
                    Status::Elected if chosen.contains(&c) => Some((id, support[c].to_value())),
                    Status::Elected => Some((id, self.locked[c].to_value())),
                    Status::Eliminated => None,
                }
            })
            .collect()
    }

    fn finish(self, method: crate::model::Method) -> TallyResult {
        TallyResult {
            method,
            winners: self.winners.iter().map(|&c| self.election.candidate(c).clone()).collect(),
            rounds: self.rounds,
            exhausted: self.exhausted.to_value(),
            total: self.total.to_value(),
            profile_usage: BTreeMap::new(),
        }
    }
}

/// Instant runoff: eliminate the weakest candidate each round until one
/// holds more than half of the active liquid.
pub fn run_irv(ballots: &[NormalizedBallot], election: &Election) -> Result<TallyResult> {
    if election.seats() != 1 {
        return Err(Error::InvalidArgument("irv fills exactly one seat".into()));
    }
    let mut piles = ranked_piles(ballots)?;
    let mut count = Count::new(election, ballots.len());
    count.seat_initial(&mut piles);
    loop {
        let hopefuls = count.hopefuls();
        let support = count.support(&piles);
        let active = count.active();
        if active.is_zero() || hopefuls.len() == 1 && support[hopefuls[0]].is_zero() {
            count.fill(&hopefuls, &support, None, true);
            break;
        }
        let majority = &active / &Amount::from_integer(2);
        let (top, _) = strongest(&hopefuls, &support, election).expect("hopefuls remain while liquid is active");
        let supports = count.supports_record(&support);
        if support[top] > majority {
            count.status[top] = Status::Elected;
            count.locked[top] = support[top].clone();
            count.winners.push(top);
            let record = RoundRecord {
                round: count.rounds.len() + 1,
                quota: Some(majority.to_value()),
                supports,
                action: Action::Elect(election.candidate(top).clone()),
                transfers: Vec::new(),
                transferred: Amount::zero().to_value(),
                balance: count.balance(&support),
                flags: Vec::new(),
            };
            count.rounds.push(record);
            break;
        }
        let (out, tie) = weakest(&hopefuls, &support, election).expect("at least two hopefuls");
        count.status[out] = Status::Eliminated;
        let (transfers, moved) = count.release(&mut piles, out, None);
        let after = count.support(&piles);
        let record = RoundRecord {
            round: count.rounds.len() + 1,
            quota: Some(majority.to_value()),
            supports,
            action: Action::Eliminate(election.candidate(out).clone()),
            transfers,
            transferred: moved.to_value(),
            balance: count.balance(&after),
            flags: if tie { vec![Flag::TieBreak] } else { Vec::new() },
        };
        count.rounds.push(record);
    }
    Ok(count.finish(crate::model::Method::Irv))
}

/// Single transferable vote. An elected candidate keeps `quota / support` of
/// every ballot it holds and passes the remainder of each ballot on to that
/// ballot's next hopeful preference.
pub fn run_stv(ballots: &[NormalizedBallot], election: &Election) -> Result<TallyResult> {
    let mut piles = ranked_piles(ballots)?;
    let mut count = Count::new(election, ballots.len());
    let seats = election.seats();
    count.seat_initial(&mut piles);
    while count.winners.len() < seats {
        let hopefuls = count.hopefuls();
        let support = count.support(&piles);
        if hopefuls.len() + count.winners.len() <= seats {
            count.fill(&hopefuls, &support, None, false);
            break;
        }
        let hopeful_total: Amount = hopefuls.iter().map(|&c| support[c].clone()).sum();
        if hopeful_total.is_zero() {
            count.fill(&hopefuls, &support, None, true);
            break;
        }
        let q = quota(election.quota_rule(), &count.active(), &hopeful_total, hopefuls.len(), seats);
        let supports = count.supports_record(&support);
        let reached: Vec<usize> = hopefuls
            .iter()
            .copied()
            .filter(|&c| support[c] >= q && !support[c].is_zero())
            .collect();
        let (action, transfers, moved, tie) = if let Some((winner, tie)) = strongest(&reached, &support, election) {
            count.status[winner] = Status::Elected;
            count.winners.push(winner);
            let keep = &q / &support[winner];
            let keep = if keep > Amount::one() { Amount::one() } else { keep };
            let (t, m) = count.release(&mut piles, winner, Some(&keep));
            (Action::Elect(election.candidate(winner).clone()), t, m, tie)
        } else {
            let (out, tie) = weakest(&hopefuls, &support, election).expect("hopefuls remain");
            count.status[out] = Status::Eliminated;
            let (t, m) = count.release(&mut piles, out, None);
            (Action::Eliminate(election.candidate(out).clone()), t, m, tie)
        };
        let after = count.support(&piles);
        let record = RoundRecord {
            round: count.rounds.len() + 1,
            quota: Some(q.to_value()),
            supports,
            action,
            transfers,
            transferred: moved.to_value(),
            balance: count.balance(&after),
            flags: if tie { vec![Flag::TieBreak] } else { Vec::new() },
        };
        count.rounds.push(record);
    }
    Ok(count.finish(crate::model::Method::Stv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amount::Value;
    use crate::model::{CandidateId, Method};

    fn ballots(e: &Election, spec: &[(usize, &[&str])]) -> Vec<NormalizedBallot> {
        spec.iter()
            .flat_map(|&(n, order)| {
                let idx: Vec<usize> = order.iter().map(|c| e.index_of(c).unwrap()).collect();
                std::iter::repeat_n(NormalizedBallot::Ranked(idx), n)
            })
            .collect()
    }

    fn exact(n: u64, d: u64) -> Value {
        Value::Exact(Amount::ratio(n, d))
    }

    #[test]
    fn irv_runoff() {
        let e = Election::new("irv", ["A", "B", "C"], 1, Method::Irv).unwrap();
        let b = ballots(&e, &[(3, &["A", "B"]), (3, &["B", "C"]), (2, &["C", "B"])]);
        let r = run_irv(&b, &e).unwrap();
        assert_eq!(r.winners, vec![CandidateId::from("B")]);
        assert_eq!(r.rounds.len(), 2);
        let r1 = &r.rounds[0];
        assert_eq!(r1.support("A"), Some(&exact(3, 1)));
        assert_eq!(r1.support("B"), Some(&exact(3, 1)));
        assert_eq!(r1.support("C"), Some(&exact(2, 1)));
        assert_eq!(r1.action, Action::Eliminate("C".into()));
        assert_eq!(r1.transfers.len(), 1);
        assert_eq!(r1.transfers[0].to, Some("B".into()));
        assert_eq!(r.rounds[1].support("B"), Some(&exact(5, 1)));
        assert_eq!(r.rounds[1].action, Action::Elect("B".into()));
    }

    #[test]
    fn irv_single_ballot() {
        let e = Election::new("irv", ["A", "B"], 1, Method::Irv).unwrap();
        let r = run_irv(&ballots(&e, &[(1, &["A"])]), &e).unwrap();
        assert_eq!(r.winners, vec![CandidateId::from("A")]);
        assert_eq!(r.rounds.len(), 1);
    }

    #[test]
    fn irv_tie_follows_tie_order() {
        for (order, winner) in [(["A", "B"], "A"), (["B", "A"], "B")] {
            let e = Election::new("irv", ["A", "B"], 1, Method::Irv)
                .unwrap()
                .with_tie_order(order)
                .unwrap();
            let r = run_irv(&ballots(&e, &[(2, &["A"]), (2, &["B"])]), &e).unwrap();
            assert_eq!(r.winners, vec![CandidateId::from(winner)]);
            assert!(r.rounds[0].flags.contains(&Flag::TieBreak));
        }
    }

    #[test]
    fn irv_all_exhausted_fills_by_tie_order() {
        let e = Election::new("irv", ["A", "B"], 1, Method::Irv).unwrap();
        let b = vec![NormalizedBallot::Ranked(vec![]); 3];
        let r = run_irv(&b, &e).unwrap();
        assert_eq!(r.winners, vec![CandidateId::from("A")]);
        assert!(r.flagged(Flag::Exhausted));
        assert_eq!(r.exhausted, exact(3, 1));
    }

    #[test]
    fn stv_surplus_transfer() {
        let e = Election::new("stv", ["A", "B", "C"], 2, Method::Stv).unwrap();
        let b = ballots(&e, &[(4, &["A", "B"]), (2, &["B", "C"]), (2, &["C", "B"])]);
        let r = run_stv(&b, &e).unwrap();
        assert_eq!(r.winners, vec![CandidateId::from("A"), CandidateId::from("B")]);
        let r1 = &r.rounds[0];
        assert_eq!(r1.quota, Some(exact(3, 1)));
        assert_eq!(r1.action, Action::Elect("A".into()));
        assert_eq!(r1.transferred, exact(1, 1));
        assert_eq!(r1.transfers[0].to, Some("B".into()));
        let r2 = &r.rounds[1];
        assert_eq!(r2.support("A"), Some(&exact(3, 1)));
        assert_eq!(r2.support("B"), Some(&exact(3, 1)));
        assert_eq!(r2.action, Action::Elect("B".into()));
    }

    #[test]
    fn stv_all_seats_filled_at_once() {
        let e = Election::new("stv", ["A", "B", "C"], 3, Method::Stv).unwrap();
        let r = run_stv(&ballots(&e, &[(1, &["B"])]), &e).unwrap();
        assert_eq!(r.rounds.len(), 1);
        assert!(matches!(&r.rounds[0].action, Action::FinalFill(c) if c.len() == 3));
        assert_eq!(r.winners[0], CandidateId::from("B"));
    }

    #[test]
    fn ranked_counts_reject_parts_ballots() {
        let e = Election::new("stv", ["A", "B"], 1, Method::Stv).unwrap();
        let b = crate::model::normalize_ballot(
            &crate::model::Ballot::new(crate::model::BallotContent::plump("A")),
            &e,
        )
        .unwrap();
        assert!(matches!(run_stv(&[b], &e), Err(Error::WrongBallotKind { .. })));
    }
}
