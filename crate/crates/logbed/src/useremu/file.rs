//! File-manipulation module: one drawn filename and action per iteration in a
//! simulated per-client folder.
//!
//! Actions addressing files that do not exist are emitted anyway, flagged as
//! no-ops, so transcripts stay total and deterministic.

use std::collections::BTreeSet;

use crate::scenario::FileParams;
use crate::simkernel::{RngStream, SimEvent};

use super::{timer, UserAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileAction {
    Create,
    Delete,
    Append,
    Read,
    Move,
    Copy,
}

impl FileAction {
    pub const ALL: [FileAction; 6] = [
        FileAction::Create,
        FileAction::Delete,
        FileAction::Append,
        FileAction::Read,
        FileAction::Move,
        FileAction::Copy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FileAction::Create => "create",
            FileAction::Delete => "delete",
            FileAction::Append => "append",
            FileAction::Read => "read",
            FileAction::Move => "move",
            FileAction::Copy => "copy",
        }
    }
}

#[derive(Debug)]
pub struct FileFsm {
    client: String,
    stream: RngStream,
    params: FileParams,
    existing: BTreeSet<String>,
}

impl FileFsm {
    /// `stream` must be the client's file sub-stream
    /// (`root.child(["client", id, "file"])`).
    pub fn new(client: impl Into<String>, stream: RngStream, params: FileParams) -> Self {
        Self {
            client: client.into(),
            stream,
            params,
            existing: BTreeSet::new(),
        }
    }

    pub fn next_tick(&self, now: u64) -> u64 {
        now + self.params.interval_seconds.max(1)
    }

    fn draw_name(&mut self) -> String {
        let pool = self.params.filename_pool.max(1);
        format!("doc{}.txt", self.stream.range(0..pool))
    }

    /// Performs one iteration: emits exactly one file action plus the
    /// next-iteration timer.
    pub fn tick(&mut self, now: u64) -> Vec<SimEvent<UserAction>> {
        let filename = self.draw_name();
        let action = FileAction::ALL[self.stream.index(FileAction::ALL.len())];
        let noop = match action {
            FileAction::Create => {
                self.existing.insert(filename.clone());
                false
            }
            FileAction::Delete => !self.existing.remove(&filename),
            FileAction::Append | FileAction::Read => !self.existing.contains(&filename),
            FileAction::Move => {
                if self.existing.remove(&filename) {
                    let dest = self.draw_name();
                    self.existing.insert(dest);
                    false
                } else {
                    true
                }
            }
            FileAction::Copy => {
                if self.existing.contains(&filename) {
                    let dest = self.draw_name();
                    self.existing.insert(dest);
                    false
                } else {
                    true
                }
            }
        };
        vec![
            timer(
                now,
                &self.client,
                UserAction::FileAct {
                    filename,
                    action,
                    noop,
                },
            ),
            timer(self.next_tick(now), &self.client, UserAction::FileTick),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;

    fn fsm(seed: u64) -> FileFsm {
        let stream = RngStream::derive(seed, &["client", "1", "file"]).unwrap();
        FileFsm::new("client1", stream, default_scenario().emulation.file)
    }

    #[test]
    fn actions_on_missing_files_are_flagged_noop() {
        // a delete before any create must be a no-op yet still emitted
        let mut file = fsm(0);
        let mut saw_noop = false;
        let mut now = 0;
        for _ in 0..50 {
            let events = file.tick(now);
            assert_eq!(events.len(), 2);
            if let UserAction::FileAct { action, noop, .. } = &events[0].action {
                if *noop {
                    assert_ne!(*action, FileAction::Create);
                    saw_noop = true;
                }
            }
            now = events[1].at;
        }
        assert!(saw_noop);
    }

    #[test]
    fn sequences_are_deterministic() {
        let run = |seed| {
            let mut file = fsm(seed);
            let mut all = Vec::new();
            let mut now = 0;
            for _ in 0..100 {
                let events = file.tick(now);
                now = events[1].at;
                all.extend(events);
            }
            all
        };
        assert_eq!(run(8), run(8));
        assert_ne!(run(8), run(9));
    }

    #[test]
    fn action_frequencies_are_uniform_within_3_sigma() {
        // binomial bound computed analytically: each action over n=6000
        // draws has mean 1000 and sigma = sqrt(6000 * (1/6) * (5/6)) ~= 28.87
        let mut file = fsm(123);
        let mut counts = std::collections::BTreeMap::new();
        let mut now = 0;
        for _ in 0..6000 {
            let events = file.tick(now);
            if let UserAction::FileAct { action, .. } = &events[0].action {
                *counts.entry(action.as_str()).or_insert(0u64) += 1;
            }
            now = events[1].at;
        }
        let sigma = (6000.0f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for action in FileAction::ALL {
            let count = *counts.get(action.as_str()).unwrap_or(&0) as f64;
            assert!(
                (count - 1000.0).abs() <= 3.0 * sigma,
                "{}: {count} outside 1000 +- {}",
                action.as_str(),
                3.0 * sigma
            );
        }
    }
}
