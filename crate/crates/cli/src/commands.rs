//! The `tally`, `delegate` and `simulate` subcommands.
//!
//! Every command computes all of its artifacts before writing any, so a
//! failing run leaves no partial report behind.

use crate::{adjust_election, run_tally, CliError};
use clap::Args;
use liquid_core::delegation::{concentration_report, publish_support, resolve, DelegationGraph, Mode, PublicationPolicy};
use liquid_core::hierarchy::{simulate_population, workload_metrics, SimConfig, TopicTree};
use liquid_core::model::io::{load_ballots, load_election, load_profiles};
use liquid_core::model::{Method, Profiles, QuotaRule};
use liquid_core::report::{delegation_json, flows_dot, render, simulation_json};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Args, Debug)]
pub struct TallyArgs {
    #[arg(long)]
    pub election: PathBuf,
    #[arg(long)]
    pub ballots: PathBuf,
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Overrides the election file's method.
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub quota: Option<QuotaRule>,
    /// Where to write the round report; `-` for stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Where to write the DOT flow graph.
    #[arg(long)]
    pub flows: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DelegateArgs {
    /// Delegation graph (`delegations.json`).
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "linear")]
    pub mode: Mode,
    /// `threshold:T` or `dp:EPSILON:SEED`, applied to direct supporter counts.
    #[arg(long)]
    pub publish: Option<PublicationPolicy>,
    /// Holders listed in the concentration summary.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub hierarchy: PathBuf,
    #[arg(long)]
    pub simconfig: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Text for stdout and files to write, in order.
pub struct Artifacts {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Artifacts {
    /// Writes files first, then stdout. A report sent to `-` goes to stdout.
    pub fn emit(self, out: &mut impl Write) -> Result<(), CliError> {
        let mut stdout = String::new();
        for (path, text) in self.files {
            if path == Path::new("-") {
                stdout.push_str(&text);
                continue;
            }
            std::fs::write(&path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        }
        stdout.push_str(&self.stdout);
        out.write_all(stdout.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}")))
    }
}

pub fn tally(args: &TallyArgs) -> Result<Artifacts, CliError> {
    let election = adjust_election(load_election(&args.election)?, args.method, args.quota)?;
    let ballots = load_ballots(&args.ballots)?;
    let profiles = match &args.profiles {
        Some(p) => load_profiles(p)?,
        None => Profiles::new(),
    };
    let out = run_tally(election, &ballots, &profiles)?;
    let mut files = Vec::new();
    if let Some(path) = &args.report {
        files.push((path.clone(), out.report.clone()));
    }
    if let Some(path) = &args.flows {
        files.push((path.clone(), flows_dot(&out.election, &out.result)?));
    }
    let winners: Vec<&str> = out.result.winners.iter().map(|c| c.as_str()).collect();
    let stdout = if args.report.as_deref() == Some(Path::new("-")) {
        String::new()
    } else {
        format!("winners: {}\n", winners.join(", "))
    };
    Ok(Artifacts { stdout, files })
}

pub fn delegate(args: &DelegateArgs) -> Result<Artifacts, CliError> {
    let graph = DelegationGraph::load(&args.graph)?;
    let power = resolve(&graph, args.mode);
    let concentration = concentration_report(&power, args.top);
    let published = args.publish.map(|p| (p, publish_support(&graph.supporter_counts(), &p)));
    let json = delegation_json(
        graph.scope(),
        &power,
        &concentration,
        published.as_ref().map(|(p, out)| (p, out)),
    );
    Ok(report_artifacts(render(&json), args.report.as_ref()))
}

pub fn simulate(args: &SimulateArgs) -> Result<Artifacts, CliError> {
    let tree = TopicTree::load(&args.hierarchy)?;
    let config = SimConfig::load(&args.simconfig)?;
    let population = simulate_population(&tree, &config)?;
    let workload = workload_metrics(&population);
    Ok(report_artifacts(render(&simulation_json(&tree, &config, &workload)), args.report.as_ref()))
}

/// The report goes to `path` when given, otherwise to stdout.
fn report_artifacts(report: String, path: Option<&PathBuf>) -> Artifacts {
    match path {
        Some(p) => Artifacts {
            stdout: String::new(),
            files: vec![(p.clone(), report)],
        },
        None => Artifacts {
            stdout: report,
            files: Vec::new(),
        },
    }
}
