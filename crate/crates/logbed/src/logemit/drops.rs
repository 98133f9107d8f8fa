//! Packet-loss model applied to network-observable events.

use crate::simkernel::RngStream;

use super::event::LogEvent;

/// A network-observable event with its drop-eligibility flag.
#[derive(Debug, Clone)]
pub struct DropCandidate {
    pub event: LogEvent,
    pub eligible: bool,
}

impl DropCandidate {
    pub fn eligible(event: LogEvent) -> Self {
        Self {
            event,
            eligible: true,
        }
    }

    pub fn exempt(event: LogEvent) -> Self {
        Self {
            event,
            eligible: false,
        }
    }
}

/// Removes each drop-eligible event independently with probability
/// `drop_rate`, drawing from the given stream; events not flagged eligible
/// pass through untouched. Order is preserved.
pub fn apply_drop(
    candidates: Vec<DropCandidate>,
    drop_rate: f64,
    stream: &mut RngStream,
) -> Vec<LogEvent> {
    assert!(
        (0.0..=1.0).contains(&drop_rate),
        "drop_rate must be a probability"
    );
    candidates
        .into_iter()
        .filter_map(|c| {
            if c.eligible && stream.chance(drop_rate) {
                None
            } else {
                Some(c.event)
            }
        })
        .collect()
}
