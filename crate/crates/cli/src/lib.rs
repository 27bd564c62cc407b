//! Command-line and HTTP front ends for `liquid-core`.
//!
//! Both front ends go through [`run_tally`], so a report produced by
//! `liquid tally` and one returned by `POST /tally` are byte-identical for
//! the same election and ballots.

pub mod commands;
pub mod server;

use liquid_core::model::{Ballot, Election, Method, Profiles, QuotaRule};
use liquid_core::report::tally_report;
use liquid_core::tally;

/// A failed command, split by the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<liquid_core::Error> for CliError {
    fn from(e: liquid_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Invariant(e.to_string())
        }
    }
}

/// Applies command-line style overrides to an election.
pub fn adjust_election(election: Election, method: Option<Method>, quota: Option<QuotaRule>) -> Result<Election, CliError> {
    let e = match method {
        Some(m) => election.with_method(m)?,
        None => election,
    };
    Ok(match quota {
        Some(q) => e.with_quota_rule(q),
        None => e,
    })
}

/// A finished tally: the report text plus what the CLI prints and exports.
pub struct TallyOutput {
    pub election: Election,
    pub result: liquid_core::transfer::TallyResult,
    pub report: String,
}

/// Resolves profiles, tallies, re-checks invariants and renders the report.
pub fn run_tally(election: Election, ballots: &[Ballot], profiles: &Profiles) -> Result<TallyOutput, CliError> {
    let result = tally(ballots, profiles, &election)?;
    let report = tally_report(&election, &result)?;
    Ok(TallyOutput {
        election,
        result,
        report,
    })
}
