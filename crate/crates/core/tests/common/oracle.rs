//! Straight-line reference count for CTV and QTV.
//!
//! Written against the counting rules only: ballots are plain parts vectors,
//! candidates are indices, tie order is index order. CTV runs on a small
//! checked machine-integer fraction type so it shares no arithmetic with the engine;
//! QTV runs on `f64` with the same operation order as the engine so that
//! exact ties resolve identically.

use num_traits::{PrimInt, Signed};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    DroopIntegral,
    DroopFractional,
    Dynamic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Act {
    Elect(usize),
    Eliminate(usize),
    Fill(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct Round<N> {
    pub quota: Option<N>,
    /// Hopefuls with their support, elected candidates with locked liquid.
    pub supports: Vec<(usize, N)>,
    pub act: Act,
    pub transferred: N,
    pub exhausted: N,
}

#[derive(Clone, Debug)]
pub struct Trace<N> {
    pub rounds: Vec<Round<N>>,
    pub winners: Vec<usize>,
    pub exhausted: N,
}

/// Machine integers the oracle fractions can be built on.
pub trait Int: PrimInt + Signed + fmt::Display + fmt::Debug {}
impl Int for i32 {}
impl Int for i64 {}
impl Int for i128 {}

/// Reduced fraction with checked arithmetic; overflow panics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frac<T = i64> {
    pub num: T,
    pub den: T,
}

fn gcd<T: Int>(a: T, b: T) -> T {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        (a, b) = (b, a % b);
    }
    a
}

fn ck<T>(x: Option<T>) -> T {
    x.expect("oracle fraction overflow")
}

impl<T: Int> Frac<T> {
    pub fn new(num: T, den: T) -> Self {
        assert!(!den.is_zero());
        let g = gcd(num, den).max(T::one());
        let s = if den < T::zero() { -T::one() } else { T::one() };
        Frac {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn int(n: T) -> Self {
        Frac { num: n, den: T::one() }
    }

    fn floor(self) -> Self {
        let q = self.num / self.den;
        let q = if self.num < T::zero() && q * self.den != self.num { q - T::one() } else { q };
        Frac::int(q)
    }
}

impl<T: Int> fmt::Display for Frac<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl<T: Int> PartialOrd for Frac<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let l = ck(self.num.checked_mul(&other.den));
        let r = ck(other.num.checked_mul(&self.den));
        Some(l.cmp(&r))
    }
}

impl<T: Int> Add for Frac<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let g = gcd(self.den, o.den);
        let l = ck(self.num.checked_mul(&(o.den / g)));
        let r = ck(o.num.checked_mul(&(self.den / g)));
        Frac::new(ck(l.checked_add(&r)), ck((self.den / g).checked_mul(&o.den)))
    }
}

impl<T: Int> Sub for Frac<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + Frac { num: -o.num, den: o.den }
    }
}

impl<T: Int> Mul for Frac<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = gcd(self.num, o.den).max(T::one());
        let b = gcd(o.num, self.den).max(T::one());
        Frac::new(
            ck((self.num / a).checked_mul(&(o.num / b))),
            ck((self.den / b).checked_mul(&(o.den / a))),
        )
    }
}

impl<T: Int> Div for Frac<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        assert!(!o.num.is_zero(), "division by zero");
        self * Frac::new(o.den, o.num)
    }
}

pub trait Num: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    fn int(n: u64) -> Self;
    fn ratio(p: u64, q: u64) -> Self;
    fn floor(self) -> Self;
    fn zero(self) -> bool;
}

impl<T: Int> Num for Frac<T> {
    fn int(n: u64) -> Self {
        Frac::int(T::from(n).expect("fits"))
    }
    fn ratio(p: u64, q: u64) -> Self {
        Frac::new(T::from(p).expect("fits"), T::from(q).expect("fits"))
    }
    fn floor(self) -> Self {
        Frac::floor(self)
    }
    fn zero(self) -> bool {
        self.num.is_zero()
    }
}

impl Num for f64 {
    fn int(n: u64) -> Self {
        n as f64
    }
    fn ratio(p: u64, q: u64) -> Self {
        p as f64 / q as f64
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn zero(self) -> bool {
        self == 0.0
    }
}

pub fn ctv<T: Int>(ballots: &[impl AsRef<[u64]>], candidates: usize, seats: usize, rule: Rule) -> Trace<Frac<T>> {
    count(ballots, candidates, seats, rule, |l| l, |r| r)
}

pub fn qtv(ballots: &[impl AsRef<[u64]>], candidates: usize, seats: usize, rule: Rule) -> Trace<f64> {
    count(ballots, candidates, seats, rule, f64::sqrt, |r| r * r)
}

#[derive(Clone, Copy, PartialEq)]
enum St {
    In,
    Won,
    Out,
}

fn count<N: Num>(
    ballots: &[impl AsRef<[u64]>],
    n: usize,
    seats: usize,
    rule: Rule,
    height: impl Fn(N) -> N,
    retention: impl Fn(N) -> N,
) -> Trace<N> {
    let share: Vec<Vec<N>> = ballots
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let t: u64 = p.iter().sum();
            p.iter().map(|&x| N::ratio(x, t)).collect()
        })
        .collect();
    let mut liquid = share.clone();
    let mut st = vec![St::In; n];
    let mut locked = vec![N::int(0); n];
    let mut exhausted = N::int(0);
    let mut winners = Vec::new();
    let mut rounds = Vec::new();

    // Hands `amount` of ballot `b` to its in-play candidates by original share.
    let give = |b: usize, amount: N, st: &[St], liquid: &mut Vec<Vec<N>>, exhausted: &mut N| {
        if amount.zero() {
            return;
        }
        let mut w = N::int(0);
        let mut any = false;
        for c in 0..n {
            if st[c] == St::In && !share[b][c].zero() {
                w = w + share[b][c];
                any = true;
            }
        }
        if !any {
            *exhausted = *exhausted + amount;
            return;
        }
        for c in 0..n {
            if st[c] == St::In && !share[b][c].zero() {
                liquid[b][c] = liquid[b][c] + amount * share[b][c] / w;
            }
        }
    };

    while winners.len() < seats {
        let mut support = vec![N::int(0); n];
        for row in &liquid {
            for c in 0..n {
                if st[c] == St::In && !row[c].zero() {
                    support[c] = support[c] + height(row[c]);
                }
            }
        }
        let hopeful: Vec<usize> = (0..n).filter(|&c| st[c] == St::In).collect();
        let supports: Vec<(usize, N)> = (0..n)
            .filter_map(|c| match st[c] {
                St::In => Some((c, support[c])),
                St::Won => Some((c, locked[c])),
                St::Out => None,
            })
            .collect();
        let mut pool = N::int(0);
        for &c in &hopeful {
            pool = pool + support[c];
        }

        if hopeful.len() + winners.len() <= seats || pool.zero() {
            let mut order = hopeful.clone();
            // Stable sort keeps index order among equals.
            order.sort_by(|&a, &b| support[b].partial_cmp(&support[a]).unwrap());
            order.truncate(seats - winners.len());
            for &c in &order {
                st[c] = St::Won;
                let mut sum = N::int(0);
                for row in liquid.iter_mut() {
                    sum = sum + row[c];
                    row[c] = N::int(0);
                }
                locked[c] = sum;
            }
            winners.extend(order.iter().copied());
            rounds.push(Round {
                quota: None,
                supports,
                act: Act::Fill(order),
                transferred: N::int(0),
                exhausted,
            });
            break;
        }

        let active = N::int(ballots.len() as u64) - exhausted;
        let q = match rule {
            Rule::DroopIntegral => (active / N::int(seats as u64 + 1)).floor() + N::int(1),
            Rule::DroopFractional => active / N::int(seats as u64 + 1),
            Rule::Dynamic => pool / N::int(hopeful.len() as u64 + 1),
        };

        let mut elect: Option<usize> = None;
        for &c in &hopeful {
            if support[c] >= q && !support[c].zero() && elect.is_none_or(|e| support[c] > support[e]) {
                elect = Some(c);
            }
        }

        let before = exhausted;
        let mut moved = N::int(0);
        let act = match elect {
            Some(w) => {
                st[w] = St::Won;
                winners.push(w);
                let keep = retention(q / support[w]);
                for b in 0..liquid.len() {
                    let stake = liquid[b][w];
                    if stake.zero() {
                        continue;
                    }
                    liquid[b][w] = N::int(0);
                    let kept = stake * keep;
                    locked[w] = locked[w] + kept;
                    let back = stake - kept;
                    if !back.zero() {
                        moved = moved + back;
                    }
                    give(b, back, &st, &mut liquid, &mut exhausted);
                }
                Act::Elect(w)
            }
            None => {
                let mut out = hopeful[0];
                for &c in &hopeful {
                    if support[c] <= support[out] {
                        out = c;
                    }
                }
                st[out] = St::Out;
                for b in 0..liquid.len() {
                    let stake = liquid[b][out];
                    if stake.zero() {
                        continue;
                    }
                    liquid[b][out] = N::int(0);
                    moved = moved + stake;
                    give(b, stake, &st, &mut liquid, &mut exhausted);
                }
                Act::Eliminate(out)
            }
        };
        debug_assert!(exhausted >= before);
        rounds.push(Round {
            quota: Some(q),
            supports,
            act,
            transferred: moved,
            exhausted,
        });
    }

    Trace {
        rounds,
        winners,
        exhausted,
    }
}
