#![allow(dead_code)]

pub mod oracle;

use liquid_core::model::{normalize_ballot, Ballot, BallotContent, Election, Method, NormalizedBallot, QuotaRule};
use liquid_core::transfer::{Action, TallyResult};
use liquid_core::{Amount, Value};
use oracle::{Act, Frac, Rule, Trace};
use rand::Rng;

pub const NAMES: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

pub fn election(candidates: usize, seats: usize, method: Method, rule: Option<QuotaRule>) -> Election {
    let e = Election::new("t", NAMES[..candidates].iter().copied(), seats, method).unwrap();
    match rule {
        Some(r) => e.with_quota_rule(r),
        None => e,
    }
}

pub fn oracle_rule(rule: QuotaRule) -> Rule {
    match rule {
        QuotaRule::DroopIntegral => Rule::DroopIntegral,
        QuotaRule::DroopFractional => Rule::DroopFractional,
        QuotaRule::DynamicCandidates => Rule::Dynamic,
    }
}

pub fn parts_ballot(parts: &[u64]) -> Ballot {
    Ballot::new(BallotContent::parts(
        parts.iter().enumerate().filter(|(_, &p)| p > 0).map(|(c, &p)| (NAMES[c], p)),
    ))
}

pub fn ranked_ballot(order: &[usize]) -> Ballot {
    Ballot::new(BallotContent::ranked(order.iter().map(|&c| NAMES[c])))
}

pub fn normalize(ballots: &[Ballot], e: &Election) -> Vec<NormalizedBallot> {
    ballots.iter().map(|b| normalize_ballot(b, e).unwrap()).collect()
}

/// Nonzero parts vectors over `n` candidates with total at most `max_total`,
/// one per distinct share vector (the one with the smallest total).
pub fn share_vectors(n: usize, max_total: u64) -> Vec<Vec<u64>> {
    fn walk(n: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == n {
            if cur.iter().any(|&p| p > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for p in 0..=left {
            cur.push(p);
            walk(n, left - p, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    walk(n, max_total, &mut Vec::new(), &mut all);
    all.retain(|v| v.iter().fold(0, |g, &p| gcd(g, p)) == 1);
    all
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Calls `f` with every multiset (as a nondecreasing index list) of size
/// `1..=max_len` drawn from `0..kinds`.
pub fn for_each_multiset(kinds: usize, max_len: usize, mut f: impl FnMut(&[usize])) {
    fn walk(kinds: usize, max_len: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == max_len {
            return;
        }
        for k in from..kinds {
            cur.push(k);
            walk(kinds, max_len, k, cur, f);
            cur.pop();
        }
    }
    walk(kinds, max_len, 0, &mut Vec::new(), &mut f);
}

pub fn random_parts(rng: &mut impl Rng, candidates: usize, max_part: u64) -> Vec<u64> {
    loop {
        let v: Vec<u64> = (0..candidates).map(|_| rng.random_range(0..=max_part)).collect();
        if v.iter().any(|&p| p > 0) {
            return v;
        }
    }
}

/// A random nonempty ranking without repeats.
pub fn random_ranking(rng: &mut impl Rng, candidates: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates).collect();
    for i in (1..candidates).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    order.truncate(rng.random_range(1..=candidates));
    order
}

fn index(name: &str) -> usize {
    NAMES.iter().position(|n| *n == name).unwrap()
}

fn act_of(action: &Action) -> Act {
    match action {
        Action::Elect(c) => Act::Elect(index(c.as_str())),
        Action::Eliminate(c) => Act::Eliminate(index(c.as_str())),
        Action::FinalFill(cs) => Act::Fill(cs.iter().map(|c| index(c.as_str())).collect()),
    }
}

/// Compares an engine result with an oracle trace. `same` decides whether an
/// engine value matches an oracle value.
fn compare<N: std::fmt::Debug + Copy>(
    r: &TallyResult,
    t: &Trace<N>,
    same: impl Fn(&Value, N) -> bool,
) -> Result<(), String> {
    if r.rounds.len() != t.rounds.len() {
        return Err(format!("round count {} vs oracle {}", r.rounds.len(), t.rounds.len()));
    }
    for (i, (a, b)) in r.rounds.iter().zip(&t.rounds).enumerate() {
        let at = |what: &str| format!("round {}: {what}", i + 1);
        if act_of(&a.action) != b.act {
            return Err(at(&format!("action {:?} vs oracle {:?}", a.action, b.act)));
        }
        match (&a.quota, b.quota) {
            (None, None) => {}
            (Some(x), Some(y)) if same(x, y) => {}
            (x, y) => return Err(at(&format!("quota {x:?} vs oracle {y:?}"))),
        }
        if a.supports.len() != b.supports.len() {
            return Err(at("standing candidates differ"));
        }
        for ((c, v), (oc, ov)) in a.supports.iter().zip(&b.supports) {
            if index(c.as_str()) != *oc || !same(v, *ov) {
                return Err(at(&format!("support {c} = {v:?} vs oracle {} = {ov:?}", NAMES[*oc])));
            }
        }
        if !same(&a.transferred, b.transferred) {
            return Err(at(&format!("transferred {:?} vs oracle {:?}", a.transferred, b.transferred)));
        }
        if !same(&a.balance.exhausted, b.exhausted) {
            return Err(at(&format!("exhausted {:?} vs oracle {:?}", a.balance.exhausted, b.exhausted)));
        }
    }
    let winners: Vec<usize> = r.winners.iter().map(|c| index(c.as_str())).collect();
    if winners != t.winners {
        return Err(format!("winners {winners:?} vs oracle {:?}", t.winners));
    }
    if !same(&r.exhausted, t.exhausted) {
        return Err("final exhausted differs".into());
    }
    Ok(())
}

pub fn compare_exact<T: oracle::Int>(r: &TallyResult, t: &Trace<Frac<T>>) -> Result<(), String> {
    compare(r, t, |v, f| match v {
        Value::Exact(a) => match (f.num.to_u64(), f.den.to_u64()) {
            (Some(n), Some(d)) => *a == Amount::ratio(n, d),
            _ => a.to_string() == f.to_string(),
        },
        Value::Approx(_) => false,
    })
}

pub fn compare_approx(r: &TallyResult, t: &Trace<f64>, rel: f64) -> Result<(), String> {
    compare(r, t, |v, f| match v {
        Value::Approx(x) => (x - f).abs() <= rel * x.abs().max(f.abs()),
        Value::Exact(_) => false,
    })
}

#[derive(Debug, Default)]
pub struct Sweep {
    pub instances: u64,
    pub failures: Vec<String>,
}

/// Runs CTV and QTV over every multiset of at most `max_ballots` ballots
/// drawn from the distinct share vectors with at most `max_total` parts,
/// for `1..=max_candidates` candidates and `1..=max_seats` seats, comparing
/// each round trace with the oracle.
pub fn oracle_sweep(max_candidates: usize, max_ballots: usize, max_total: u64, max_seats: usize, rules: &[QuotaRule]) -> Sweep {
    let mut sweep = Sweep::default();
    for n in 1..=max_candidates {
        let vectors = share_vectors(n, max_total);
        for seats in 1..=max_seats.min(n) {
            for &rule in rules {
                let ctv_e = election(n, seats, Method::Ctv, Some(rule));
                let qtv_e = election(n, seats, Method::Qtv, Some(rule));
                let normal: Vec<NormalizedBallot> = vectors
                    .iter()
                    .map(|v| normalize_ballot(&parts_ballot(v), &ctv_e).unwrap())
                    .collect();
                // Consecutive multisets share a prefix, so only the tail is rebuilt.
                let mut kinds: Vec<usize> = Vec::with_capacity(max_ballots);
                let mut ballots = Vec::with_capacity(max_ballots);
                let mut raw: Vec<&[u64]> = Vec::with_capacity(max_ballots);
                for_each_multiset(vectors.len(), max_ballots, |pick| {
                    let keep = kinds.iter().zip(pick).take_while(|(a, b)| a == b).count();
                    kinds.truncate(keep);
                    ballots.truncate(keep);
                    raw.truncate(keep);
                    for &k in &pick[keep..] {
                        kinds.push(k);
                        ballots.push(normal[k].clone());
                        raw.push(&vectors[k]);
                    }
                    sweep.instances += 1;
                    let r = liquid_core::transfer::run_ctv(&ballots, &ctv_e).unwrap();
                    let t = oracle::ctv::<i64>(&raw, n, seats, oracle_rule(rule));
                    if let Err(e) = compare_exact(&r, &t) {
                        sweep.failures.push(format!("ctv {rule:?} seats={seats} {raw:?}: {e}"));
                    }
                    let r = liquid_core::transfer::run_qtv(&ballots, &qtv_e).unwrap();
                    let t = oracle::qtv(&raw, n, seats, oracle_rule(rule));
                    if let Err(e) = compare_approx(&r, &t, 1e-9) {
                        sweep.failures.push(format!("qtv {rule:?} seats={seats} {raw:?}: {e}"));
                    }
                });
            }
        }
    }
    sweep
}

/// A random transferable election with matching ballots: 2..=6 candidates,
/// 1..=3 seats (1 for IRV), 1..=30 ballots, any quota rule.
pub fn fuzz_instance(rng: &mut impl Rng) -> (Election, Vec<Ballot>) {
    let method = [Method::Irv, Method::Stv, Method::Ctv, Method::Qtv][rng.random_range(0..4)];
    let n = rng.random_range(2..=6);
    let seats = if method == Method::Irv { 1 } else { rng.random_range(1..=3.min(n)) };
    let rule = QuotaRule::ALL[rng.random_range(0..3)];
    let e = election(n, seats, method, (method != Method::Irv).then_some(rule));
    let count = rng.random_range(1..=30);
    let ballots = (0..count)
        .map(|_| {
            if method.is_ranked() {
                ranked_ballot(&random_ranking(rng, n))
            } else {
                parts_ballot(&random_parts(rng, n, 4))
            }
        })
        .collect();
    (e, ballots)
}

/// Locked + hopeful + exhausted against the ballot count after every round:
/// exact for rationals, `rel` relative for binary64.
pub fn conserved(r: &TallyResult, rel: f64) -> Result<(), String> {
    for round in &r.rounds {
        let sum = round.balance.total();
        let ok = match (&sum, &r.total) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (a, b) => (a.to_f64() - b.to_f64()).abs() <= rel * b.to_f64(),
        };
        if !ok {
            return Err(format!("round {}: {sum} != {}", round.round, r.total));
        }
    }
    Ok(())
}
