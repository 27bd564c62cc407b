use std::path::PathBuf;

/// Errors raised while loading, validating or tallying election data.
///
/// Validation errors name the offending ballot (by id or input line) so the
/// command-line front end can report them precisely.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid election: {0}")]
    InvalidElection(String),

    #[error("ballot {ballot}: unknown candidate {candidate:?}")]
    UnknownCandidate { ballot: String, candidate: String },

    #[error("ballot {ballot}: candidate {candidate:?} ranked more than once")]
    DuplicateRanking { ballot: String, candidate: String },

    #[error("ballot {ballot}: no parts allocated")]
    ZeroParts { ballot: String },

    #[error("ballot {ballot}: {parts} parts exceeds the limit of {limit}")]
    TooManyParts {
        ballot: String,
        parts: u64,
        limit: u64,
    },

    #[error("ballot {ballot}: expected a {expected} ballot for this method")]
    WrongBallotKind {
        ballot: String,
        expected: &'static str,
    },

    #[error("ballot {ballot}: unknown profile {profile:?}")]
    UnknownProfile { ballot: String, profile: String },

    #[error("ballot {ballot}: profile {profile:?} has no entry for contest {contest:?}")]
    ProfileMissingContest {
        ballot: String,
        profile: String,
        contest: String,
    },

    #[error("ballot {ballot}: unresolved profile reference")]
    UnresolvedProfile { ballot: String },

    #[error("invalid delegation graph: {0}")]
    InvalidGraph(String),

    #[error("invalid topic hierarchy: {0}")]
    InvalidHierarchy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for failures caused by bad input rather than by a bug.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
