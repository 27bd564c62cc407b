//! Topic hierarchies: a tree of topics with a fixed branching factor per
//! level, a seeded population of voters each following one leaf topic, and
//! the delegation work needed to be represented everywhere else.
//!
//! Leaves are numbered in mixed radix, so a topic's subtree is a contiguous
//! range of leaves and, once voters are sorted by home leaf, a contiguous
//! range of voters. Nothing per topic is stored; delegation graphs are built
//! on demand from per-voter seeds, so any topic can be examined in any order
//! (or in parallel) with identical results.

use crate::amount::Amount;
use crate::delegation::{resolve_linear, DelegationGraph, SELF};
use crate::error::{Error, Result};
use crate::model::{Ballot, Election, Method};
use crate::util::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

/// Upper bound on the number of leaf topics.
pub const MAX_LEAVES: u64 = 10_000_000;

/// Child indices from the root; the empty path is the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TopicPath(pub Vec<u32>);

impl TopicPath {
    pub fn root() -> Self {
        TopicPath(Vec::new())
    }

    /// Depth below the root; the root is level 0.
    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn parent(&self) -> Option<TopicPath> {
        (!self.0.is_empty()).then(|| TopicPath(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn prefix(&self, level: usize) -> TopicPath {
        TopicPath(self.0[..level].to_vec())
    }

    pub fn child(&self, i: u32) -> TopicPath {
        let mut p = self.0.clone();
        p.push(i);
        TopicPath(p)
    }
}

impl fmt::Display for TopicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for TopicPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s == "root" {
            return Ok(TopicPath::root());
        }
        s.split('.')
            .map(|p| p.parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(TopicPath)
            .map_err(|_| Error::InvalidHierarchy(format!("bad topic path {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicTree {
    branching: Vec<u32>,
    names: BTreeMap<TopicPath, String>,
    /// `stride[l]`: leaves under one topic at level `l`.
    stride: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTree {
    branching: Vec<u32>,
    #[serde(default)]
    names: BTreeMap<String, String>,
}

impl TopicTree {
    pub fn new(branching: Vec<u32>) -> Result<Self> {
        if branching.is_empty() {
            return Err(Error::InvalidHierarchy("branching must list at least one level".into()));
        }
        if branching.contains(&0) {
            return Err(Error::InvalidHierarchy("branching factors must be positive".into()));
        }
        let mut stride = vec![1u64; branching.len() + 1];
        for l in (0..branching.len()).rev() {
            stride[l] = stride[l + 1]
                .checked_mul(branching[l] as u64)
                .filter(|&n| n <= MAX_LEAVES)
                .ok_or_else(|| Error::InvalidHierarchy(format!("more than {MAX_LEAVES} leaf topics")))?;
        }
        Ok(TopicTree {
            branching,
            names: BTreeMap::new(),
            stride,
        })
    }

    pub fn with_names(mut self, names: BTreeMap<TopicPath, String>) -> Result<Self> {
        if let Some(bad) = names.keys().find(|p| !self.contains(p)) {
            return Err(Error::InvalidHierarchy(format!("named topic {bad} is not in the tree")));
        }
        self.names = names;
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw: RawTree = crate::model::io::load_json(path)?;
        let names = raw
            .names
            .into_iter()
            .map(|(k, v)| k.parse().map(|p| (p, v)))
            .collect::<Result<_>>()?;
        TopicTree::new(raw.branching)?.with_names(names)
    }

    pub fn branching(&self) -> &[u32] {
        &self.branching
    }

    pub fn depth(&self) -> usize {
        self.branching.len()
    }

    pub fn leaves(&self) -> u64 {
        self.stride[0]
    }

    /// Number of topics at `level` (1 for the root).
    pub fn topics_at(&self, level: usize) -> u64 {
        self.leaves() / self.stride[level]
    }

    pub fn name(&self, topic: &TopicPath) -> Option<&str> {
        self.names.get(topic).map(String::as_str)
    }

    pub fn contains(&self, topic: &TopicPath) -> bool {
        topic.level() <= self.depth() && topic.0.iter().zip(&self.branching).all(|(i, b)| i < b)
    }

    pub fn leaf_path(&self, leaf: u64) -> TopicPath {
        TopicPath(
            (0..self.depth())
                .map(|l| ((leaf / self.stride[l + 1]) % self.branching[l] as u64) as u32)
                .collect(),
        )
    }

    /// Leaves under `topic`.
    pub fn leaf_range(&self, topic: &TopicPath) -> Range<u64> {
        let start: u64 = topic.0.iter().enumerate().map(|(l, &i)| i as u64 * self.stride[l + 1]).sum();
        start..start + self.stride[topic.level()]
    }

    fn check(&self, topic: &TopicPath) -> Result<()> {
        if self.contains(topic) {
            Ok(())
        } else {
            Err(Error::InvalidHierarchy(format!("topic {topic} is not in the tree")))
        }
    }

    /// A number identifying `topic` among all topics of the tree.
    fn key(&self, topic: &TopicPath) -> u64 {
        topic.0.iter().zip(&self.branching).fold(1u64, |k, (&i, &b)| k * (b as u64 + 1) + i as u64 + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomeDistribution {
    Uniform,
    /// Leaf `k` (0-based) drawn with weight `1/(k+1)^s`.
    Zipf(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelegationStyle {
    /// A separate delegate for every sibling topic at every level.
    PerLevelExplicit,
    /// One generic delegate per level, reused for all sibling topics there.
    GenericDelegate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub voters: u64,
    pub seed: u64,
    #[serde(default = "default_distribution")]
    pub distribution: HomeDistribution,
    #[serde(default = "default_style")]
    pub style: DelegationStyle,
}

fn default_distribution() -> HomeDistribution {
    HomeDistribution::Uniform
}

fn default_style() -> DelegationStyle {
    DelegationStyle::PerLevelExplicit
}

impl SimConfig {
    pub fn new(voters: u64, seed: u64) -> Self {
        SimConfig {
            voters,
            seed,
            distribution: HomeDistribution::Uniform,
            style: DelegationStyle::PerLevelExplicit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.voters == 0 || self.voters > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!("voter count {} out of range", self.voters)));
        }
        if let HomeDistribution::Zipf(s) = self.distribution {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidArgument(format!("zipf exponent must be positive, got {s}")));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let c: SimConfig = crate::model::io::load_json(path)?;
        c.validate()?;
        Ok(c)
    }
}

/// Voters assigned to home leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    tree: TopicTree,
    seed: u64,
    style: DelegationStyle,
    home: Vec<u64>,
    /// Voter indices sorted by home leaf, then index.
    by_home: Vec<u32>,
    /// `by_home[offsets[l]..offsets[l + 1]]` live in leaf `l`.
    offsets: Vec<usize>,
}

/// Assigns every voter one home leaf, deterministically from the seed.
pub fn simulate_population(tree: &TopicTree, config: &SimConfig) -> Result<Population> {
    config.validate()?;
    let leaves = tree.leaves();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let home: Vec<u64> = match config.distribution {
        HomeDistribution::Uniform => (0..config.voters).map(|_| rng.random_range(0..leaves)).collect(),
        HomeDistribution::Zipf(s) => {
            let zipf = Zipf::new(leaves as f64, s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            (0..config.voters).map(|_| (zipf.sample(&mut rng) as u64 - 1).min(leaves - 1)).collect()
        }
    };
    let mut counts = vec![0usize; leaves as usize + 1];
    for &h in &home {
        counts[h as usize + 1] += 1;
    }
    for l in 0..leaves as usize {
        counts[l + 1] += counts[l];
    }
    let offsets = counts;
    let mut next = offsets.clone();
    let mut by_home = vec![0u32; home.len()];
    for (v, &h) in home.iter().enumerate() {
        by_home[next[h as usize]] = v as u32;
        next[h as usize] += 1;
    }
    Ok(Population {
        tree: tree.clone(),
        seed: config.seed,
        style: config.style,
        home,
        by_home,
        offsets,
    })
}

impl Population {
    pub fn tree(&self) -> &TopicTree {
        &self.tree
    }

    pub fn voters(&self) -> usize {
        self.home.len()
    }

    pub fn style(&self) -> DelegationStyle {
        self.style
    }

    pub fn home(&self, voter: usize) -> u64 {
        self.home[voter]
    }

    pub fn home_path(&self, voter: usize) -> TopicPath {
        self.tree.leaf_path(self.home[voter])
    }

    /// Participants per leaf, in leaf order.
    pub fn leaf_counts(&self) -> Vec<u64> {
        self.offsets.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
    }

    fn voter_range(&self, topic: &TopicPath) -> Range<usize> {
        let leaves = self.tree.leaf_range(topic);
        self.offsets[leaves.start as usize]..self.offsets[leaves.end as usize]
    }

    /// Voters whose home leaf lies under `topic`.
    pub fn participants(&self, topic: &TopicPath) -> &[u32] {
        &self.by_home[self.voter_range(topic)]
    }

    pub fn is_participant(&self, voter: usize, topic: &TopicPath) -> bool {
        self.tree.leaf_range(topic).contains(&self.home[voter])
    }

    /// First level at which `voter`'s home path leaves `topic`'s path, or
    /// `None` if the voter participates in `topic`.
    fn divergence(&self, voter: usize, topic: &TopicPath) -> Option<usize> {
        let home = self.home_path(voter);
        topic.0.iter().zip(&home.0).position(|(a, b)| a != b).map(|i| i + 1)
    }

    /// The voter `voter` delegates to for `topic`, or `None` for
    /// participants and voters with no one to choose.
    pub fn delegate(&self, voter: usize, topic: &TopicPath) -> Option<usize> {
        let level = self.divergence(voter, topic)?;
        match self.style {
            DelegationStyle::PerLevelExplicit => {
                // One choice per sibling topic at the level where paths split.
                let sibling = topic.prefix(level);
                let pool = self.participants(&sibling);
                if pool.is_empty() {
                    return None;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[voter as u64, self.tree.key(&sibling)]));
                Some(pool[rng.random_range(0..pool.len())] as usize)
            }
            DelegationStyle::GenericDelegate => {
                // One choice for the whole level: anyone under the shared
                // parent topic but outside the voter's own subtree.
                let parent = self.voter_range(&topic.prefix(level - 1));
                let own = self.voter_range(&self.home_path(voter).prefix(level));
                let size = parent.len() - own.len();
                if size == 0 {
                    return None;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[voter as u64, u64::MAX - level as u64]));
                let mut i = parent.start + rng.random_range(0..size);
                if i >= own.start {
                    i += own.len();
                }
                Some(self.by_home[i] as usize)
            }
        }
    }

    fn voter_id(&self, voter: usize) -> String {
        let width = self.voters().saturating_sub(1).to_string().len();
        format!("v{voter:0width$}")
    }

    /// The delegation graph for `topic`: participants keep their votes,
    /// everyone else delegates as [`Population::delegate`] decides.
    pub fn delegation_graph(&self, topic: &TopicPath) -> Result<DelegationGraph> {
        self.tree.check(topic)?;
        let ids: Vec<String> = (0..self.voters()).map(|v| self.voter_id(v)).collect();
        let mut edges = Vec::new();
        for v in 0..self.voters() {
            match self.delegate(v, topic) {
                Some(d) => edges.push((ids[v].as_str(), ids[d].as_str(), 1)),
                None => edges.push((ids[v].as_str(), SELF, 1)),
            }
        }
        DelegationGraph::from_edges(Some(topic.to_string()), ids.iter().map(String::as_str), edges)
    }
}

/// Delegation effort across the population.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub style: DelegationStyle,
    /// Delegation choices each voter faces to be represented in every topic
    /// outside its home: one per sibling topic per level (per-level style)
    /// or one per level that has siblings (generic style).
    pub max_decisions: u64,
    pub mean_decisions: Amount,
    /// The same count restricted to sibling topics with at least one
    /// participant to delegate to.
    pub max_effective: u64,
    pub mean_effective: Amount,
    /// `Σ (branching − 1)` for per-level style, depth for generic style.
    pub bound: u64,
    pub mean_leaf_participation: Amount,
    /// Mean participants per topic at levels 1..=depth.
    pub mean_participation_by_level: Vec<Amount>,
    pub min_leaf_participation: u64,
    pub max_leaf_participation: u64,
    pub empty_leaves: u64,
}

pub fn workload_metrics(pop: &Population) -> Workload {
    let tree = pop.tree();
    let depth = tree.depth();
    let bound = match pop.style() {
        DelegationStyle::PerLevelExplicit => tree.branching().iter().map(|&b| b as u64 - 1).sum(),
        DelegationStyle::GenericDelegate => depth as u64,
    };
    let mut max_decisions = 0;
    let mut total_decisions = 0u64;
    let mut max_effective = 0;
    let mut total_effective = 0u64;
    for v in 0..pop.voters() {
        let home = pop.home_path(v);
        let mut decisions = 0u64;
        let mut effective = 0u64;
        for level in 1..=depth {
            let b = tree.branching()[level - 1];
            let parent = home.prefix(level - 1);
            match pop.style() {
                DelegationStyle::PerLevelExplicit => {
                    decisions += b as u64 - 1;
                    effective += (0..b)
                        .filter(|&i| i != home.0[level - 1])
                        .filter(|&i| !pop.participants(&parent.child(i)).is_empty())
                        .count() as u64;
                }
                DelegationStyle::GenericDelegate => {
                    if b > 1 {
                        decisions += 1;
                        let others = pop.participants(&parent).len() - pop.participants(&home.prefix(level)).len();
                        effective += (others > 0) as u64;
                    }
                }
            }
        }
        max_decisions = max_decisions.max(decisions);
        total_decisions += decisions;
        max_effective = max_effective.max(effective);
        total_effective += effective;
    }
    let n = pop.voters() as u64;
    let counts = pop.leaf_counts();
    Workload {
        style: pop.style(),
        max_decisions,
        mean_decisions: Amount::ratio(total_decisions, n),
        max_effective,
        mean_effective: Amount::ratio(total_effective, n),
        bound,
        mean_leaf_participation: Amount::ratio(n, tree.leaves()),
        mean_participation_by_level: (1..=depth).map(|l| Amount::ratio(n, tree.topics_at(l))).collect(),
        min_leaf_participation: counts.iter().copied().min().unwrap_or(0),
        max_leaf_participation: counts.iter().copied().max().unwrap_or(0),
        empty_leaves: counts.iter().filter(|&&c| c == 0).count() as u64,
    }
}

/// Elects `slots` child topics from keyword `proposals` by CTV or QTV.
pub fn elect_topics(proposals: &[String], ballots: &[Ballot], slots: usize, method: Method) -> Result<Vec<String>> {
    if !matches!(method, Method::Ctv | Method::Qtv) {
        return Err(Error::InvalidArgument(format!("topics are elected by ctv or qtv, not {method}")));
    }
    let election = Election::new("topics", proposals.iter().map(String::as_str), slots, method)?;
    let result = crate::tally::tally(ballots, &Default::default(), &election)?;
    Ok(result.winners.into_iter().map(|c| c.0.to_string()).collect())
}

/// What bubble-up support is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportBasis {
    /// Fraction of the topic's own participants who support the issue.
    Participants,
    /// Fraction of all voting power in the topic's delegation graph that
    /// settles with supporters.
    DelegatedPower,
}

/// Support for an issue in `topic` among `supporters` (indexed by voter).
pub fn support_fraction(pop: &Population, topic: &TopicPath, supporters: &[bool], basis: SupportBasis) -> Result<Amount> {
    pop.tree().check(topic)?;
    if supporters.len() != pop.voters() {
        return Err(Error::InvalidArgument("one supporter flag per voter expected".into()));
    }
    match basis {
        SupportBasis::Participants => {
            let p = pop.participants(topic);
            let yes = p.iter().filter(|&&v| supporters[v as usize]).count() as u64;
            Ok(if p.is_empty() {
                Amount::zero()
            } else {
                Amount::ratio(yes, p.len() as u64)
            })
        }
        SupportBasis::DelegatedPower => {
            let power = resolve_linear(&pop.delegation_graph(topic)?);
            let yes: Amount = power
                .resolved
                .iter()
                .enumerate()
                .filter(|(v, _)| supporters[*v])
                .map(|(_, (_, p))| p.as_exact().cloned().expect("linear power is exact"))
                .sum();
            Ok(yes / Amount::from_integer(pop.voters() as u64))
        }
    }
}

/// Support an issue raised in `leaf` would find at each level on its way
/// up, index 0 being the root.
pub fn support_profile(pop: &Population, leaf: &TopicPath, supporters: &[bool], basis: SupportBasis) -> Result<Vec<f64>> {
    (0..leaf.level())
        .map(|l| support_fraction(pop, &leaf.prefix(l), supporters, basis).map(|a| a.to_f64()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BubbleTrail {
    /// Highest level reached; 0 is the root.
    pub reached: usize,
    /// Levels visited, starting level first.
    pub trail: Vec<usize>,
}

/// Moves an issue up from `start` while the support at the next level up
/// meets that level's threshold. `support[l]` and `thresholds[l]` describe
/// level `l` (0 = root) for every level above `start`.
pub fn bubble_up(start: usize, support: &[f64], thresholds: &[f64]) -> Result<BubbleTrail> {
    if support.len() != start || thresholds.len() != start {
        return Err(Error::InvalidArgument(format!(
            "need support and a threshold for each of the {start} levels above the start"
        )));
    }
    if let Some(t) = thresholds.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::InvalidArgument(format!("threshold {t} is outside (0, 1]")));
    }
    if let Some(s) = support.iter().find(|&&s| !(0.0..=1.0).contains(&s)) {
        return Err(Error::InvalidArgument(format!("support {s} is outside [0, 1]")));
    }
    let mut level = start;
    let mut trail = vec![start];
    while level > 0 && support[level - 1] >= thresholds[level - 1] {
        level -= 1;
        trail.push(level);
    }
    Ok(BubbleTrail { reached: level, trail })
}

/// Relative vote weight among sibling topics: the square root of each
/// topic's share of the voter's parts.
pub fn reweight_local(tree: &TopicTree, parts: &BTreeMap<TopicPath, u64>) -> Result<Vec<(TopicPath, f64)>> {
    let mut topics = parts.keys();
    let first = topics
        .next()
        .ok_or_else(|| Error::InvalidArgument("no topics to weight".into()))?;
    for t in parts.keys() {
        tree.check(t)?;
    }
    let parent = first
        .parent()
        .ok_or_else(|| Error::InvalidArgument("the root has no siblings".into()))?;
    if let Some(other) = topics.find(|t| t.parent().as_ref() != Some(&parent)) {
        return Err(Error::InvalidArgument(format!(
            "{first} and {other} are not siblings; weights can only be shifted among topics under one parent"
        )));
    }
    let total: u64 = parts.values().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("at least one topic needs a positive number of parts".into()));
    }
    Ok(parts
        .iter()
        .map(|(t, &p)| (t.clone(), (p as f64 / total as f64).sqrt()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(s: &str) -> TopicPath {
        s.parse().unwrap()
    }

    #[test]
    fn tree_shape() {
        let t = TopicTree::new(vec![10, 10, 10]).unwrap();
        assert_eq!(t.leaves(), 1000);
        assert_eq!(t.topics_at(2), 100);
        assert_eq!(t.leaf_path(345), path("3.4.5"));
        assert_eq!(t.leaf_range(&path("3.4")), 340..350);
        assert_eq!(t.leaf_range(&TopicPath::root()), 0..1000);
        assert!(!t.contains(&path("3.10")));
        assert!(TopicTree::new(vec![]).is_err());
        assert!(TopicTree::new(vec![10, 0]).is_err());
        assert!(TopicTree::new(vec![10; 8]).is_err());
    }

    #[test]
    fn single_voter() {
        let t = TopicTree::new(vec![3, 2]).unwrap();
        let pop = simulate_population(&t, &SimConfig::new(1, 9)).unwrap();
        assert_eq!(pop.leaf_counts().iter().sum::<u64>(), 1);
        assert_eq!(pop.leaf_counts().iter().filter(|&&c| c == 1).count(), 1);
    }

    #[test]
    fn per_level_delegates_are_participants_of_the_sibling() {
        let t = TopicTree::new(vec![3, 3]).unwrap();
        let pop = simulate_population(&t, &SimConfig::new(200, 1)).unwrap();
        let topic = path("1.2");
        for v in 0..pop.voters() {
            match pop.delegate(v, &topic) {
                None => assert!(pop.is_participant(v, &topic)),
                Some(d) => {
                    let level = pop.divergence(v, &topic).unwrap();
                    assert!(pop.is_participant(d, &topic.prefix(level)));
                }
            }
        }
        let g = pop.delegation_graph(&topic).unwrap();
        let power = resolve_linear(&g);
        assert!(power.unresolved.is_zero());
        // Everything ends with participants of the topic.
        let held: Amount = pop
            .participants(&topic)
            .iter()
            .map(|&v| power.resolved[v as usize].1.as_exact().unwrap().clone())
            .sum();
        assert_eq!(held, Amount::from_integer(200));
    }

    #[test]
    fn generic_delegate_is_shared_across_siblings() {
        let t = TopicTree::new(vec![4, 4]).unwrap();
        let mut c = SimConfig::new(300, 5);
        c.style = DelegationStyle::GenericDelegate;
        let pop = simulate_population(&t, &c).unwrap();
        let home = pop.home_path(0);
        let siblings: Vec<TopicPath> = (0..4).filter(|&i| i != home.0[0]).map(|i| TopicPath(vec![i])).collect();
        let chosen: Vec<_> = siblings.iter().map(|s| pop.delegate(0, s)).collect();
        assert!(chosen.windows(2).all(|w| w[0] == w[1]));
        let w = workload_metrics(&pop);
        assert_eq!(w.max_decisions, 2);
        assert_eq!(w.bound, 2);
    }

    #[test]
    fn workload_counts() {
        let t = TopicTree::new(vec![10, 10, 10]).unwrap();
        let pop = simulate_population(&t, &SimConfig::new(5000, 3)).unwrap();
        let w = workload_metrics(&pop);
        assert_eq!(w.max_decisions, 27);
        assert_eq!(w.mean_leaf_participation, Amount::from_integer(5));
        assert!(w.max_effective <= 27);
        assert_eq!(w.mean_participation_by_level[0], Amount::from_integer(500));
    }

    #[test]
    fn bubble_examples() {
        assert_eq!(bubble_up(3, &[0.9; 3], &[0.5; 3]).unwrap().reached, 0);
        let b = bubble_up(3, &[0.9, 0.9, 0.4], &[0.5; 3]).unwrap();
        assert_eq!(b.reached, 3);
        assert_eq!(b.trail, vec![3]);
        let b = bubble_up(3, &[0.3, 0.7, 0.6], &[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(b.trail, vec![3, 2, 1]);
        assert!(bubble_up(2, &[0.5, 0.5], &[0.0, 0.5]).is_err());
        assert!(bubble_up(2, &[0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn reweight() {
        let t = TopicTree::new(vec![10, 10]).unwrap();
        let w = reweight_local(&t, &BTreeMap::from([(path("1"), 4), (path("2"), 1)])).unwrap();
        assert!((w[0].1 / w[1].1 - 2.0).abs() < 1e-12);
        assert!(reweight_local(&t, &BTreeMap::from([(path("1"), 4), (path("2.3"), 1)])).is_err());
        assert!(reweight_local(&t, &BTreeMap::from([(path("1.1"), 4), (path("2.3"), 1)])).is_err());
        assert!(reweight_local(&t, &BTreeMap::from([(path("1"), 0)])).is_err());
        assert!(reweight_local(&t, &BTreeMap::new()).is_err());
    }

    #[test]
    fn topic_election() {
        let proposals = vec!["parks".to_string()];
        let ballots = vec![Ballot::new(crate::model::BallotContent::plump("parks"))];
        assert_eq!(elect_topics(&proposals, &ballots, 1, Method::Ctv).unwrap(), proposals);
        assert!(elect_topics(&proposals, &ballots, 1, Method::Irv).is_err());
    }
}
