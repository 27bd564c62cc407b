//! Report rendering shared by the command line and the JSON API.
//!
//! Exact quantities are written as `"num/den"` strings with a sibling
//! `<name>_decimal` number rounded to 12 significant digits. Binary64
//! quantities are written as numbers, again with a rounded sibling.
//! Objects keep insertion order, so candidate maps follow registration order.

use crate::amount::{round_significant, Amount, Value};
use crate::delegation::{Concentration, PowerMap, PublicationPolicy, Published};
use crate::error::{Error, Result};
use crate::hierarchy::{SimConfig, TopicTree, Workload};
use crate::model::{normalize_ballot, Ballot, Election, NormalizedBallot};
use crate::transfer::{Action, Flag, TallyResult};
use serde_json::{json, Map, Value as Json};
use std::collections::BTreeMap;
use std::fmt::Write;

fn value_json(v: &Value) -> Json {
    match v {
        Value::Exact(a) => Json::String(a.to_string()),
        Value::Approx(x) => json!(x),
    }
}

fn decimal(v: &Value) -> Json {
    json!(round_significant(v.to_f64()))
}

/// Inserts `key` and `key_decimal`.
fn put(map: &mut Map<String, Json>, key: &str, v: &Value) {
    map.insert(key.to_string(), value_json(v));
    map.insert(format!("{key}_decimal"), decimal(v));
}

fn put_opt(map: &mut Map<String, Json>, key: &str, v: Option<&Value>) {
    match v {
        Some(v) => put(map, key, v),
        None => {
            map.insert(key.to_string(), Json::Null);
            map.insert(format!("{key}_decimal"), Json::Null);
        }
    }
}

/// Inserts a keyed map of values and its decimal twin.
fn put_map<'a, K: AsRef<str> + 'a>(map: &mut Map<String, Json>, key: &str, entries: impl IntoIterator<Item = (K, &'a Value)>) {
    let mut exact = Map::new();
    let mut dec = Map::new();
    for (k, v) in entries {
        exact.insert(k.as_ref().to_string(), value_json(v));
        dec.insert(k.as_ref().to_string(), decimal(v));
    }
    map.insert(key.to_string(), Json::Object(exact));
    map.insert(format!("{key}_decimal"), Json::Object(dec));
}

fn action_json(a: &Action) -> Json {
    match a {
        Action::Elect(c) => json!({"type": "elect", "candidate": c}),
        Action::Eliminate(c) => json!({"type": "eliminate", "candidate": c}),
        Action::FinalFill(cs) => json!({"type": "final-fill", "candidates": cs}),
    }
}

fn flag_name(f: Flag) -> &'static str {
    match f {
        Flag::TieBreak => "tie-break",
        Flag::Exhausted => "exhausted",
    }
}

/// The round report for a tally.
pub fn tally_json(election: &Election, result: &TallyResult) -> Json {
    let mut top = Map::new();
    top.insert("election".into(), json!(election.id()));
    top.insert("method".into(), json!(result.method.name()));
    top.insert("quota_rule".into(), json!(election.quota_rule().name()));
    top.insert("seats".into(), json!(election.seats()));
    top.insert("winners".into(), json!(result.winners));
    put(&mut top, "total", &result.total);
    put(&mut top, "exhausted", &result.exhausted);
    let rounds: Vec<Json> = result
        .rounds
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("round".into(), json!(r.round));
            put_opt(&mut m, "quota", r.quota.as_ref());
            put_map(&mut m, "supports", r.supports.iter().map(|(c, v)| (c.as_str(), v)));
            m.insert("action".into(), action_json(&r.action));
            let transfers: Vec<Json> = r
                .transfers
                .iter()
                .map(|t| {
                    let mut tm = Map::new();
                    tm.insert("from".into(), json!(t.from));
                    tm.insert("to".into(), json!(t.to));
                    put(&mut tm, "amount", &t.amount);
                    Json::Object(tm)
                })
                .collect();
            m.insert("transfers".into(), Json::Array(transfers));
            put(&mut m, "transferred", &r.transferred);
            let mut b = Map::new();
            put(&mut b, "locked", &r.balance.locked);
            put(&mut b, "hopeful", &r.balance.hopeful);
            put(&mut b, "exhausted", &r.balance.exhausted);
            m.insert("balance".into(), Json::Object(b));
            m.insert("flags".into(), json!(r.flags.iter().map(|&f| flag_name(f)).collect::<Vec<_>>()));
            Json::Object(m)
        })
        .collect();
    top.insert("rounds".into(), Json::Array(rounds));
    let usage: Map<String, Json> = result
        .profile_usage
        .iter()
        .map(|(id, u)| {
            let mut m = Map::new();
            m.insert("followers".into(), json!(u.followers));
            m.insert("overrides".into(), json!(u.overrides));
            let flowed: Vec<(String, Value)> =
                u.flowed.iter().map(|(c, a)| (c.0.to_string(), Value::Exact(a.clone()))).collect();
            put_map(&mut m, "flowed", flowed.iter().map(|(c, v)| (c.as_str(), v)));
            (id.clone(), Json::Object(m))
        })
        .collect();
    top.insert("profile_usage".into(), Json::Object(usage));
    Json::Object(top)
}

/// Pretty JSON text with a trailing newline; the exact bytes written by the
/// command line and served by the API.
pub fn render(json: &Json) -> String {
    let mut s = serde_json::to_string_pretty(json).expect("report values serialize");
    s.push('\n');
    s
}

/// Checks a tally's bookkeeping and renders its round report.
pub fn tally_report(election: &Election, result: &TallyResult) -> Result<String> {
    result.check_invariants()?;
    Ok(render(&tally_json(election, result)))
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// A DOT digraph with one edge per transfer, labeled with its round and
/// amount. Per-round edge sums are re-checked against the round totals.
pub fn flows_dot(election: &Election, result: &TallyResult) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "digraph flows {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  label={};", dot_id(&format!("{} ({})", election.id(), result.method))).unwrap();
    for c in election.candidates() {
        let shape = if result.winners.contains(c) { "doubleoctagon" } else { "box" };
        writeln!(out, "  {} [shape={shape}];", dot_id(c.as_str())).unwrap();
    }
    writeln!(out, "  {} [shape=plaintext];", dot_id("exhausted")).unwrap();
    for r in &result.rounds {
        let mut exact_sum = Some(Amount::zero());
        let mut float_sum = 0.0;
        for t in &r.transfers {
            let to = t.to.as_ref().map_or("exhausted", |c| c.as_str());
            writeln!(
                out,
                "  {} -> {} [label={}, round={}, amount={}];",
                dot_id(t.from.as_str()),
                dot_id(to),
                dot_id(&format!("r{}: {}", r.round, t.amount)),
                r.round,
                dot_id(&t.amount.to_string()),
            )
            .unwrap();
            float_sum += t.amount.to_f64();
            exact_sum = match (exact_sum, &t.amount) {
                (Some(acc), Value::Exact(a)) => Some(acc + a.clone()),
                _ => None,
            };
        }
        let ok = match (&exact_sum, &r.transferred) {
            (Some(sum), Value::Exact(t)) => sum == t,
            _ => {
                let t = r.transferred.to_f64();
                (float_sum - t).abs() <= 1e-9 * t.abs().max(1.0)
            }
        };
        if !ok {
            return Err(Error::Invariant(format!(
                "round {}: flow edges do not sum to the {} transferred",
                r.round, r.transferred
            )));
        }
    }
    writeln!(out, "}}").unwrap();
    Ok(out)
}

/// Shares and balloon heights of one ballot. Heights are `sqrt(share)`, so a
/// plumped ballot's balloon has height 1.
pub fn normalize_json(ballot: &Ballot, election: &Election) -> Result<Json> {
    let normalized = normalize_ballot(ballot, election)?;
    let mut top = Map::new();
    match normalized {
        NormalizedBallot::Shares(s) => {
            top.insert("kind".into(), json!("parts"));
            let mut parts = Map::new();
            let mut shares = Vec::new();
            let mut heights = Map::new();
            for c in s.supported() {
                let id = election.candidate(c).as_str();
                parts.insert(id.into(), json!(s.parts()[c]));
                shares.push((id, Value::Exact(s.share(c).clone())));
                heights.insert(id.into(), json!(s.share(c).to_f64().sqrt()));
            }
            top.insert("parts".into(), Json::Object(parts));
            top.insert("total_parts".into(), json!(s.total_parts()));
            put_map(&mut top, "shares", shares.iter().map(|(c, v)| (*c, v)));
            top.insert("heights".into(), Json::Object(heights));
        }
        NormalizedBallot::Ranked(order) => {
            top.insert("kind".into(), json!("ranked"));
            let ranking: Vec<&str> = order.iter().map(|&c| election.candidate(c).as_str()).collect();
            top.insert("ranking".into(), json!(ranking));
        }
    }
    Ok(Json::Object(top))
}

fn published_json(p: &Published) -> Json {
    match p {
        Published::Count(n) => json!({"count": n}),
        Published::Suppressed => json!({"suppressed": true}),
    }
}

/// Report for a resolved delegation graph.
pub fn delegation_json(
    scope: Option<&str>,
    power: &PowerMap,
    concentration: &Concentration,
    publication: Option<(&PublicationPolicy, &BTreeMap<String, Published>)>,
) -> Json {
    let mut top = Map::new();
    top.insert("scope".into(), json!(scope));
    top.insert("mode".into(), json!(power.mode.name()));
    top.insert("voters".into(), json!(power.resolved.len()));
    put_map(&mut top, "resolved", power.resolved.iter().map(|(v, p)| (v.as_str(), p)));
    put(&mut top, "unresolved", &power.unresolved);
    let mut c = Map::new();
    put(&mut c, "total", &concentration.total);
    c.insert("gini".into(), json!(round_significant(concentration.gini)));
    let holders: Vec<Json> = concentration
        .top
        .iter()
        .map(|h| {
            let mut m = Map::new();
            m.insert("voter".into(), json!(h.voter));
            put(&mut m, "power", &h.power);
            m.insert("share".into(), json!(round_significant(h.share)));
            Json::Object(m)
        })
        .collect();
    c.insert("top".into(), Json::Array(holders));
    top.insert("concentration".into(), Json::Object(c));
    if let Some((policy, published)) = publication {
        let entries: Map<String, Json> = published.iter().map(|(k, p)| (k.clone(), published_json(p))).collect();
        top.insert(
            "publication".into(),
            json!({"policy": policy.to_string(), "supporters": Json::Object(entries)}),
        );
    }
    Json::Object(top)
}

/// Report for a hierarchy simulation.
pub fn simulation_json(tree: &TopicTree, config: &SimConfig, workload: &Workload) -> Json {
    let mut top = Map::new();
    top.insert("branching".into(), json!(tree.branching()));
    top.insert("leaves".into(), json!(tree.leaves()));
    top.insert("voters".into(), json!(config.voters));
    top.insert("seed".into(), json!(config.seed));
    top.insert("distribution".into(), serde_json::to_value(config.distribution).expect("serializable"));
    top.insert("style".into(), serde_json::to_value(config.style).expect("serializable"));
    top.insert("max_decisions".into(), json!(workload.max_decisions));
    put(&mut top, "mean_decisions", &Value::Exact(workload.mean_decisions.clone()));
    top.insert("decision_bound".into(), json!(workload.bound));
    top.insert("max_effective_decisions".into(), json!(workload.max_effective));
    put(&mut top, "mean_effective_decisions", &Value::Exact(workload.mean_effective.clone()));
    put(&mut top, "mean_leaf_participation", &Value::Exact(workload.mean_leaf_participation.clone()));
    let by_level: Vec<Value> = workload.mean_participation_by_level.iter().cloned().map(Value::Exact).collect();
    top.insert("mean_participation_by_level".into(), json!(by_level.iter().map(value_json).collect::<Vec<_>>()));
    top.insert(
        "mean_participation_by_level_decimal".into(),
        json!(by_level.iter().map(decimal).collect::<Vec<_>>()),
    );
    top.insert(
        "leaf_participation".into(),
        json!({
            "min": workload.min_leaf_participation,
            "max": workload.max_leaf_participation,
            "empty": workload.empty_leaves,
        }),
    );
    Json::Object(top)
}
