//! Deterministic liquid-democracy tallies.
//!
//! * [`model`]: elections, ballots, advice profiles and file formats.
//! * [`spread`]: single-round approval, cumulative and quadratic tallies.
//! * [`transfer`]: IRV, STV, CTV and QTV with full round records.
//! * [`delegation`]: delegation-graph power resolution and publication.
//! * [`hierarchy`]: topic-tree population and workload simulation.
//! * [`report`]: JSON round reports and DOT flow exports.
//!
//! Linear quantities are exact rationals ([`Amount`]); quadratic heights are
//! binary64 and summed in a fixed order.

pub mod amount;
pub mod delegation;
pub mod error;
pub mod hierarchy;
pub mod model;
pub mod report;
pub mod spread;
pub mod tally;
pub mod transfer;

mod util;

pub use amount::{Amount, Value};
pub use error::{Error, Result};
pub use tally::tally;
