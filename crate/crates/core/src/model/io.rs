//! File ingestion: `election.json`, `ballots.jsonl`, `profiles.json`.

use super::{Ballot, Election, Profiles};
use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use std::path::Path;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a whole-file JSON document, reporting the failing line on error.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        line: e.line(),
        message: strip_position(&e.to_string()),
    })
}

pub fn load_election(path: &Path) -> Result<Election> {
    load_json(path)
}

pub fn load_profiles(path: &Path) -> Result<Profiles> {
    load_json(path)
}

/// Parses one ballot per non-blank line; each ballot remembers its line.
pub fn parse_ballots(text: &str, path: &Path) -> Result<Vec<Ballot>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut ballot: Ballot = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            message: strip_position(&e.to_string()),
        })?;
        ballot.line = Some(line_no);
        out.push(ballot);
    }
    Ok(out)
}

pub fn load_ballots(path: &Path) -> Result<Vec<Ballot>> {
    parse_ballots(&read(path)?, path)
}

// serde_json appends " at line L column C"; the line is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalize_ballot, BallotContent};
    use std::path::PathBuf;

    fn p() -> PathBuf {
        PathBuf::from("ballots.jsonl")
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse_ballots("", &p()).unwrap().is_empty());
        assert!(parse_ballots("\n  \n", &p()).unwrap().is_empty());
    }

    #[test]
    fn records_lines() {
        let b = parse_ballots("{\"parts\":{\"A\":1}}\n\n{\"id\":\"x\",\"ranking\":[\"B\"]}\n", &p()).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].line, Some(1));
        assert_eq!(b[1].line, Some(3));
        assert_eq!(b[1].content, BallotContent::ranked(["B"]));
    }

    #[test]
    fn malformed_line_is_reported() {
        let err = parse_ballots("{\"parts\":{\"A\":1}}\n{\"parts\": oops}\n", &p()).unwrap_err();
        match err {
            Error::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_candidate_names_line_and_id() {
        let e = Election::new("e", ["A", "B", "C"], 1, crate::model::Method::Cumulative).unwrap();
        let b = parse_ballots("{\"parts\":{\"A\":1}}\n{\"id\":\"v2\",\"parts\":{\"Q\":1}}\n", &p()).unwrap();
        let msg = normalize_ballot(&b[1], &e).unwrap_err().to_string();
        assert!(msg.contains("line 2") && msg.contains("v2") && msg.contains("\"Q\""), "{msg}");
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_ballots(Path::new("/nonexistent/b.jsonl")), Err(Error::Io { .. })));
    }
}
