//! Delegation graphs: who wields whose voting power.
//!
//! Every voter starts with one unit and splits it by parts between keeping
//! it (`SELF`) and delegating to other voters. Power passes through voters
//! who delegate everything and settles with voters who retain a share.
//! Strongly connected groups that no retaining voter can be reached from
//! absorb whatever flows into them; that power is reported as unresolved.
//!
//! In quadratic mode a voter's own unit reaches each of its targets as
//! `sqrt(share)`, so spreading over more delegates raises the aggregate.
//! Power passed on by an intermediate delegate splits linearly.

use crate::amount::{Amount, Value};
use crate::error::{Error, Result};
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::path::Path;
use std::str::FromStr;

/// Edge target naming a voter's retained share.
pub const SELF: &str = "SELF";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    Retain,
    Voter(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelegationGraph {
    scope: Option<String>,
    voters: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Outgoing parts per voter, sorted by target.
    out: Vec<Vec<(Target, u64)>>,
}

impl DelegationGraph {
    /// A graph over `voters` with no edges: everyone keeps their vote.
    pub fn new(scope: Option<String>, voters: impl IntoIterator<Item = impl Into<String>>) -> Result<Self> {
        let set: BTreeSet<String> = voters.into_iter().map(Into::into).collect();
        if let Some(bad) = set.iter().find(|v| v.is_empty() || v.as_str() == SELF) {
            return Err(Error::InvalidGraph(format!("{bad:?} is not a valid voter id")));
        }
        let voters: Vec<String> = set.into_iter().collect();
        let index = voters.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Ok(DelegationGraph {
            scope,
            out: vec![Vec::new(); voters.len()],
            voters,
            index,
        })
    }

    /// Builds a graph from edges `(from, to, parts)`; `to` may be [`SELF`].
    /// Voters are `voters` plus every edge endpoint.
    pub fn from_edges<'a>(
        scope: Option<String>,
        voters: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str, u64)>,
    ) -> Result<Self> {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut all: BTreeSet<&str> = voters.into_iter().collect();
        for &(from, to, _) in &edges {
            all.insert(from);
            if to != SELF {
                all.insert(to);
            }
        }
        let mut g = DelegationGraph::new(scope, all)?;
        for (from, to, parts) in edges {
            g.add_edge(from, to, parts)?;
        }
        Ok(g)
    }

    fn add_edge(&mut self, from: &str, to: &str, parts: u64) -> Result<()> {
        let f = self.index_of(from).ok_or_else(|| Error::InvalidGraph(format!("unknown voter {from:?}")))?;
        let target = if to == SELF {
            Target::Retain
        } else {
            Target::Voter(self.index_of(to).ok_or_else(|| Error::InvalidGraph(format!("unknown voter {to:?}")))?)
        };
        if target == Target::Voter(f) {
            return Err(Error::InvalidGraph(format!("{from:?} delegates to itself; use \"{SELF}\"")));
        }
        if parts == 0 {
            return Err(Error::InvalidGraph(format!("edge {from:?} -> {to:?} has zero parts")));
        }
        let row = &mut self.out[f];
        match row.binary_search_by_key(&target, |&(t, _)| t) {
            Ok(_) => Err(Error::InvalidGraph(format!("duplicate edge {from:?} -> {to:?}"))),
            Err(pos) => {
                row.insert(pos, (target, parts));
                Ok(())
            }
        }
    }

    pub fn scope(&self) -> Option<&str> {
        self.scope.as_deref()
    }

    pub fn voters(&self) -> &[String] {
        &self.voters
    }

    pub fn len(&self) -> usize {
        self.voters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voters.is_empty()
    }

    pub fn index_of(&self, voter: &str) -> Option<usize> {
        self.index.get(voter).copied()
    }

    pub fn edges(&self, voter: usize) -> &[(Target, u64)] {
        &self.out[voter]
    }

    /// Fractions of `voter`'s power going to each target. A voter without
    /// edges keeps everything.
    pub fn split(&self, voter: usize) -> Vec<(Target, Amount)> {
        let row = &self.out[voter];
        if row.is_empty() {
            return vec![(Target::Retain, Amount::one())];
        }
        let total: u64 = row.iter().map(|&(_, p)| p).sum();
        row.iter().map(|&(t, p)| (t, Amount::ratio(p, total))).collect()
    }

    /// Number of distinct voters delegating directly to each voter that
    /// receives at least one delegation.
    pub fn supporter_counts(&self) -> BTreeMap<String, u64> {
        let mut counts = BTreeMap::new();
        for row in &self.out {
            for &(t, _) in row {
                if let Target::Voter(u) = t {
                    *counts.entry(self.voters[u].clone()).or_insert(0) += 1;
                }
            }
        }
        counts
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawGraph = serde_json::from_str(text).map_err(|e| Error::InvalidGraph(e.to_string()))?;
        DelegationGraph::from_edges(
            raw.scope,
            raw.voters.iter().map(String::as_str),
            raw.edges.iter().map(|e| (e.from.as_str(), e.to.as_str(), e.parts)),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let graph: RawGraph = crate::model::io::load_json(path)?;
        DelegationGraph::from_edges(
            graph.scope,
            graph.voters.iter().map(String::as_str),
            graph.edges.iter().map(|e| (e.from.as_str(), e.to.as_str(), e.parts)),
        )
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    #[serde(default)]
    scope: Option<String>,
    #[serde(default)]
    voters: Vec<String>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: String,
    to: String,
    parts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Quadratic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Linear => "linear",
            Mode::Quadratic => "quadratic",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Mode::Linear),
            "quadratic" => Ok(Mode::Quadratic),
            _ => Err(Error::InvalidArgument(format!("unknown delegation mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub mode: Mode,
    /// Power settled with each voter, in voter order. Exact in linear mode.
    pub resolved: Vec<(String, Value)>,
    /// Power absorbed by delegation cycles with no way out.
    pub unresolved: Value,
}

impl PowerMap {
    pub fn get(&self, voter: &str) -> Option<&Value> {
        self.resolved.iter().find(|(v, _)| v == voter).map(|(_, p)| p)
    }
}

/// Field arithmetic for the flow equations.
trait Scalar: Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    /// Pivot preference in elimination: larger is better, zero is unusable.
    fn pivot_weight(&self) -> f64;
}

impl Scalar for BigRational {
    fn pivot_weight(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}

impl Scalar for f64 {
    fn pivot_weight(&self) -> f64 {
        self.abs()
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Vec<S> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].pivot_weight().total_cmp(&a[j][col].pivot_weight()).then(j.cmp(&i)))
            .expect("nonempty");
        assert!(a[pivot][col].pivot_weight() > 0.0, "flow system is singular");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / a[col][col].clone();
            for k in col..n {
                let v = a[row][k].clone() - factor.clone() * a[col][k].clone();
                a[row][k] = v;
            }
            let v = b[row].clone() - factor * b[col].clone();
            b[row] = v;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    x
}

/// Voters from which no retaining voter is reachable.
pub fn trapped(graph: &DelegationGraph) -> Vec<bool> {
    let n = graph.len();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut reach = vec![false; n];
    let mut stack = Vec::new();
    for v in 0..n {
        let row = graph.edges(v);
        if row.is_empty() || row.iter().any(|&(t, _)| t == Target::Retain) {
            reach[v] = true;
            stack.push(v);
        }
        for &(t, _) in row {
            if let Target::Voter(u) = t {
                incoming[u].push(v);
            }
        }
    }
    while let Some(u) = stack.pop() {
        for &v in &incoming[u] {
            if !reach[v] {
                reach[v] = true;
                stack.push(v);
            }
        }
    }
    reach.into_iter().map(|r| !r).collect()
}

/// Strongly connected components in topological order (sources first).
fn components(graph: &DelegationGraph) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(graph.len(), 0);
    let nodes: Vec<_> = (0..graph.len()).map(|_| g.add_node(())).collect();
    for v in 0..graph.len() {
        for &(t, _) in graph.edges(v) {
            if let Target::Voter(u) = t {
                g.add_edge(nodes[v], nodes[u], ());
            }
        }
    }
    let mut sccs: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    sccs.reverse();
    sccs
}

/// Propagates power through the graph. `origin` gives the power each voter's
/// own unit contributes to a target holding `share` of it; transit power
/// splits linearly. Returns resolved power per voter and unresolved power.
fn propagate<S: Scalar>(graph: &DelegationGraph, split: &[Vec<(Target, S)>], origin: impl Fn(&S) -> S) -> (Vec<S>, S) {
    let n = graph.len();
    let mut resolved = vec![S::zero(); n];
    let mut inflow = vec![S::zero(); n];
    for v in 0..n {
        for (t, share) in &split[v] {
            match *t {
                Target::Retain => resolved[v] = resolved[v].clone() + origin(share),
                Target::Voter(u) => inflow[u] = inflow[u].clone() + origin(share),
            }
        }
    }
    let trapped = trapped(graph);
    let mut unresolved = S::zero();
    for comp in components(graph) {
        if trapped[comp[0]] {
            for &v in &comp {
                unresolved = unresolved + inflow[v].clone();
            }
            continue;
        }
        // Total power passing through each member: y = inflow + Fᵀ y.
        let through = if comp.len() == 1 {
            vec![inflow[comp[0]].clone()]
        } else {
            let m = comp.len();
            let mut a = vec![vec![S::zero(); m]; m];
            for (i, row) in a.iter_mut().enumerate() {
                row[i] = S::one();
            }
            for (j, &v) in comp.iter().enumerate() {
                for (t, share) in &split[v] {
                    if let Target::Voter(u) = *t {
                        if let Ok(i) = comp.binary_search(&u) {
                            a[i][j] = a[i][j].clone() - share.clone();
                        }
                    }
                }
            }
            solve(a, comp.iter().map(|&v| inflow[v].clone()).collect())
        };
        for (&v, y) in comp.iter().zip(through) {
            for (t, share) in &split[v] {
                match *t {
                    Target::Retain => resolved[v] = resolved[v].clone() + share.clone() * y.clone(),
                    Target::Voter(u) if comp.binary_search(&u).is_err() => {
                        inflow[u] = inflow[u].clone() + share.clone() * y.clone();
                    }
                    Target::Voter(_) => {}
                }
            }
        }
    }
    (resolved, unresolved)
}

fn to_amount(r: BigRational) -> Amount {
    Amount::from_rational(r).expect("flow quantities are nonnegative")
}

/// Resolves power exactly. Resolved plus unresolved power equals the number
/// of voters.
pub fn resolve_linear(graph: &DelegationGraph) -> PowerMap {
    let split: Vec<Vec<(Target, BigRational)>> = (0..graph.len())
        .map(|v| graph.split(v).into_iter().map(|(t, a)| (t, a.to_rational())).collect())
        .collect();
    let (resolved, unresolved) = propagate(graph, &split, |s| s.clone());
    PowerMap {
        mode: Mode::Linear,
        resolved: graph
            .voters()
            .iter()
            .cloned()
            .zip(resolved.into_iter().map(|r| Value::Exact(to_amount(r))))
            .collect(),
        unresolved: Value::Exact(to_amount(unresolved)),
    }
}

/// Resolves power with square-root attenuation at each voter's own hop.
pub fn resolve_quadratic(graph: &DelegationGraph) -> PowerMap {
    let split: Vec<Vec<(Target, f64)>> = (0..graph.len())
        .map(|v| graph.split(v).into_iter().map(|(t, a)| (t, a.to_f64())).collect())
        .collect();
    let (resolved, unresolved) = propagate(graph, &split, |s: &f64| s.sqrt());
    PowerMap {
        mode: Mode::Quadratic,
        resolved: graph
            .voters()
            .iter()
            .cloned()
            .zip(resolved.into_iter().map(Value::Approx))
            .collect(),
        unresolved: Value::Approx(unresolved),
    }
}

pub fn resolve(graph: &DelegationGraph, mode: Mode) -> PowerMap {
    match mode {
        Mode::Linear => resolve_linear(graph),
        Mode::Quadratic => resolve_quadratic(graph),
    }
}

/// What one voter's own unit adds to each direct target in quadratic mode.
pub fn origin_contributions(graph: &DelegationGraph, voter: usize) -> Vec<(Target, f64)> {
    graph
        .split(voter)
        .into_iter()
        .map(|(t, share)| (t, share.to_f64().sqrt()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Holder {
    pub voter: String,
    pub power: Value,
    /// Fraction of all resolved power.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Concentration {
    pub top: Vec<Holder>,
    pub gini: f64,
    pub total: Value,
}

/// The `top` largest holders of resolved power and the Gini coefficient of
/// resolved power over all voters.
pub fn concentration_report(power: &PowerMap, top: usize) -> Concentration {
    let total = Value::sum(power.resolved.iter().map(|(_, p)| p));
    let total_f = total.to_f64();
    let mut order: Vec<usize> = (0..power.resolved.len()).collect();
    let key = |i: usize| &power.resolved[i].1;
    order.sort_by(|&a, &b| cmp_value(key(b), key(a)).then(a.cmp(&b)));
    let holders = order
        .iter()
        .take(top)
        .map(|&i| {
            let (voter, p) = &power.resolved[i];
            let share = match (p, &total) {
                (Value::Exact(x), Value::Exact(t)) if !t.is_zero() => (x / t).to_f64(),
                _ if total_f > 0.0 => p.to_f64() / total_f,
                _ => 0.0,
            };
            Holder {
                voter: voter.clone(),
                power: p.clone(),
                share,
            }
        })
        .collect();
    let values: Vec<f64> = power.resolved.iter().map(|(_, p)| p.to_f64()).collect();
    Concentration {
        top: holders,
        gini: gini(&values),
        total,
    }
}

fn cmp_value(a: &Value, b: &Value) -> std::cmp::Ordering {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x.cmp(y),
        _ => a.to_f64().total_cmp(&b.to_f64()),
    }
}

/// Gini coefficient of nonnegative values; 0 for an empty or all-zero list.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let sum: f64 = values.iter().sum();
    if n == 0 || sum <= 0.0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let weighted: f64 = sorted.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    let n = n as f64;
    (2.0 * weighted / (n * sum) - (n + 1.0) / n).max(0.0)
}

/// How support counts are released.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PublicationPolicy {
    /// Counts below the threshold are withheld.
    Threshold(u64),
    /// Each count gets two-sided exponential noise of scale `1/epsilon`,
    /// drawn from a generator seeded with `seed`.
    Dp { epsilon: f64, seed: u64 },
}

impl PublicationPolicy {
    pub fn threshold(t: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidArgument("publication threshold must be at least 1".into()));
        }
        Ok(PublicationPolicy::Threshold(t))
    }

    pub fn dp(epsilon: f64, seed: u64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(PublicationPolicy::Dp { epsilon, seed })
    }
}

impl fmt::Display for PublicationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PublicationPolicy::Threshold(t) => write!(f, "threshold:{t}"),
            PublicationPolicy::Dp { epsilon, seed } => write!(f, "dp:{epsilon}:{seed}"),
        }
    }
}

/// Parses `threshold:T` or `dp:EPSILON:SEED`.
impl FromStr for PublicationPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("publication policy {s:?}: expected threshold:T or dp:EPS:SEED"));
        let fields: Vec<&str> = s.split(':').collect();
        match fields.as_slice() {
            ["threshold", t] => PublicationPolicy::threshold(t.parse().map_err(|_| bad())?),
            ["dp", eps, seed] => PublicationPolicy::dp(eps.parse().map_err(|_| bad())?, seed.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Published {
    Count(u64),
    Suppressed,
}

/// Applies `policy` to support counts. Noise is drawn in key order, so the
/// output depends only on the counts and the seed.
pub fn publish_support(counts: &BTreeMap<String, u64>, policy: &PublicationPolicy) -> BTreeMap<String, Published> {
    match *policy {
        PublicationPolicy::Threshold(t) => counts
            .iter()
            .map(|(k, &c)| (k.clone(), if c < t { Published::Suppressed } else { Published::Count(c) }))
            .collect(),
        PublicationPolicy::Dp { epsilon, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let exp = Exp::new(epsilon).expect("epsilon validated positive");
            counts
                .iter()
                .map(|(k, &c)| {
                    let magnitude: f64 = exp.sample(&mut rng);
                    let noise = if rng.random::<bool>() { magnitude } else { -magnitude };
                    let noisy = (c as f64 + noise).round().max(0.0);
                    (k.clone(), Published::Count(noisy as u64))
                })
                .collect()
        }
    }
}
